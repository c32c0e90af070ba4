#pragma once

// Nearest-neighbor digraph of a planar labeled point set, and the shared (Q)
// and reflexive (R) NN statistics derived from it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace nnct {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Class labels are 1 or 2 everywhere in the public API.
using ClassLabel = int;

class LabeledPointSet {
public:
    LabeledPointSet(std::vector<Point> points, std::vector<ClassLabel> labels)
        : points_(std::move(points)), labels_(std::move(labels))
    {
        if (points_.size() != labels_.size()) {
            throw InvalidInput("point and label counts differ");
        }
        if (points_.size() < 2) {
            throw InvalidInput("at least 2 points are required");
        }
        for (const Point& p : points_) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                throw InvalidInput("point coordinates must be finite");
            }
        }
        for (ClassLabel label : labels_) {
            if (label != 1 && label != 2) {
                throw InvalidInput("class labels must be 1 or 2");
            }
            ++class_sizes_[label - 1];
        }
    }

    std::span<const Point> points() const noexcept { return points_; }
    std::span<const ClassLabel> labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return points_.size(); }

    /// Number of points carrying `label` (1 or 2).
    std::size_t class_size(ClassLabel label) const { return class_sizes_.at(label - 1); }

    /// Same coordinates, new labels.
    LabeledPointSet relabeled(std::vector<ClassLabel> labels) const
    {
        return LabeledPointSet(points_, std::move(labels));
    }

private:
    std::vector<Point> points_;
    std::vector<ClassLabel> labels_;
    std::array<std::size_t, 2> class_sizes_{};
};

struct NNStructure {
    std::vector<std::size_t> nn_index;
    std::vector<std::size_t> indegree;
    /// q_counts[k] = number of points serving as NN to exactly k others.
    std::vector<std::size_t> q_counts;
    std::uint64_t q = 0;
    std::uint64_t r = 0;
    /// Points whose nearest neighbor lies at distance zero.
    std::size_t duplicate_points = 0;

    std::size_t size() const noexcept { return nn_index.size(); }
};

enum class NNSearch { automatic, brute_force, grid };

namespace detail {

inline double squared_distance(const Point& a, const Point& b) noexcept
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Candidate order is (distance, index); this is the lowest-index tie rule.
inline bool closer(double d, std::size_t j, double best_d, std::size_t best_j) noexcept
{
    return d < best_d || (d == best_d && j < best_j);
}

inline void check_points(std::span<const Point> points)
{
    if (points.size() < 2) {
        throw InvalidInput("at least 2 points are required");
    }
    for (const Point& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw InvalidInput("point coordinates must be finite");
        }
    }
}

inline std::vector<std::size_t> nn_brute_force(std::span<const Point> points)
{
    const std::size_t n = points.size();
    std::vector<std::size_t> nn(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t best_j = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const double d = squared_distance(points[i], points[j]);
            if (closer(d, j, best_d, best_j)) {
                best_d = d;
                best_j = j;
            }
        }
        nn[i] = best_j;
    }
    return nn;
}

// Uniform bucket grid with about two points per cell. Queries scan square
// rings of cells outward and stop once every unscanned cell is provably
// farther than the current best, so ties resolve exactly as in brute force.
class BucketGrid {
public:
    explicit BucketGrid(std::span<const Point> points) : points_(points)
    {
        double min_x = points[0].x, max_x = points[0].x;
        double min_y = points[0].y, max_y = points[0].y;
        for (const Point& p : points) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
        origin_ = {min_x, min_y};
        const double width = max_x - min_x;
        const double height = max_y - min_y;
        const double n = static_cast<double>(points.size());
        double extent = std::max(width, height);
        if (extent <= 0.0) {
            extent = 1.0;
        }
        // Area-based cell side, bounded so that thin strips do not explode the cell count.
        const double area = std::max(width * height, extent * extent / n);
        cell_ = std::sqrt(2.0 * area / n);
        if (!(cell_ > 0.0) || !std::isfinite(cell_)) {
            cell_ = extent;
        }
        cols_ = dimension(width);
        rows_ = dimension(height);

        std::vector<std::size_t> cell_of(points.size());
        start_.assign(cols_ * rows_ + 1, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            cell_of[i] = cell_index(points[i]);
            ++start_[cell_of[i] + 1];
        }
        for (std::size_t c = 0; c < cols_ * rows_; ++c) {
            start_[c + 1] += start_[c];
        }
        members_.resize(points.size());
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < points.size(); ++i) {
            members_[fill[cell_of[i]]++] = i;
        }
    }

    std::size_t nearest(std::size_t query) const
    {
        const Point& p = points_[query];
        const auto [cx, cy] = cell_coords(p);
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t best_j = points_.size();
        const std::size_t max_ring = std::max(cols_, rows_);
        for (std::size_t ring = 0; ring <= max_ring; ++ring) {
            scan_ring(query, cx, cy, ring, best_d, best_j);
            // Points outside rings 0..ring are at least ring * cell_ away.
            const double reach = static_cast<double>(ring) * cell_ * (1.0 - 1e-9);
            if (best_j != points_.size() && best_d < reach * reach) {
                break;
            }
        }
        return best_j;
    }

private:
    std::size_t dimension(double span) const
    {
        const double cells = std::floor(span / cell_) + 1.0;
        return static_cast<std::size_t>(std::clamp(cells, 1.0, 4096.0));
    }

    std::pair<std::size_t, std::size_t> cell_coords(const Point& p) const
    {
        auto coord = [&](double v, double o, std::size_t limit) {
            const double c = std::floor((v - o) / cell_);
            return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(limit - 1)));
        };
        return {coord(p.x, origin_.x, cols_), coord(p.y, origin_.y, rows_)};
    }

    std::size_t cell_index(const Point& p) const
    {
        const auto [cx, cy] = cell_coords(p);
        return cy * cols_ + cx;
    }

    void scan_cell(std::size_t query, std::size_t cx, std::size_t cy, double& best_d,
                   std::size_t& best_j) const
    {
        const std::size_t c = cy * cols_ + cx;
        for (std::size_t k = start_[c]; k < start_[c + 1]; ++k) {
            const std::size_t j = members_[k];
            if (j == query) {
                continue;
            }
            const double d = squared_distance(points_[query], points_[j]);
            if (closer(d, j, best_d, best_j)) {
                best_d = d;
                best_j = j;
            }
        }
    }

    void scan_ring(std::size_t query, std::size_t cx, std::size_t cy, std::size_t ring,
                   double& best_d, std::size_t& best_j) const
    {
        const auto x0 = static_cast<std::ptrdiff_t>(cx) - static_cast<std::ptrdiff_t>(ring);
        const auto x1 = static_cast<std::ptrdiff_t>(cx) + static_cast<std::ptrdiff_t>(ring);
        const auto y0 = static_cast<std::ptrdiff_t>(cy) - static_cast<std::ptrdiff_t>(ring);
        const auto y1 = static_cast<std::ptrdiff_t>(cy) + static_cast<std::ptrdiff_t>(ring);
        const auto cols = static_cast<std::ptrdiff_t>(cols_);
        const auto rows = static_cast<std::ptrdiff_t>(rows_);
        auto visit = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
            if (x >= 0 && x < cols && y >= 0 && y < rows) {
                scan_cell(query, static_cast<std::size_t>(x), static_cast<std::size_t>(y), best_d,
                          best_j);
            }
        };
        for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(y0, 0); y <= std::min(y1, rows - 1); ++y) {
            if (y == y0 || y == y1) {
                for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(x0, 0); x <= std::min(x1, cols - 1); ++x) {
                    visit(x, y);
                }
            }
            else {
                visit(x0, y);
                visit(x1, y);
            }
        }
    }

    std::span<const Point> points_;
    Point origin_;
    double cell_ = 1.0;
    std::size_t cols_ = 1;
    std::size_t rows_ = 1;
    std::vector<std::size_t> start_;
    std::vector<std::size_t> members_;
};

inline std::vector<std::size_t> nn_grid(std::span<const Point> points)
{
    const BucketGrid grid(points);
    std::vector<std::size_t> nn(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        nn[i] = grid.nearest(i);
    }
    return nn;
}

} // namespace detail

/// Derives indegrees, Q_k, Q and R from an NN assignment.
inline NNStructure summarize_nn(std::span<const Point> points, std::vector<std::size_t> nn_index)
{
    const std::size_t n = nn_index.size();
    if (points.size() != n) {
        throw ConsistencyError("NN index length differs from point count");
    }
    NNStructure s;
    s.indegree.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (nn_index[i] >= n || nn_index[i] == i) {
            throw ConsistencyError("invalid NN index");
        }
        ++s.indegree[nn_index[i]];
    }
    const std::size_t max_in = *std::max_element(s.indegree.begin(), s.indegree.end());
    s.q_counts.assign(max_in + 1, 0);
    for (std::size_t k : s.indegree) {
        ++s.q_counts[k];
    }
    // Each point of indegree k contributes k(k-1) ordered pairs sharing it.
    for (std::size_t k = 2; k < s.q_counts.size(); ++k) {
        s.q += static_cast<std::uint64_t>(k * (k - 1)) * s.q_counts[k];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (nn_index[nn_index[i]] == i) {
            ++s.r;
        }
        if (detail::squared_distance(points[i], points[nn_index[i]]) == 0.0) {
            ++s.duplicate_points;
        }
    }
    s.nn_index = std::move(nn_index);
    return s;
}

/// Nearest neighbor of every point under Euclidean distance; equidistant
/// candidates resolve to the lowest index.
inline NNStructure compute_nn(std::span<const Point> points, NNSearch search = NNSearch::automatic)
{
    detail::check_points(points);
    if (search == NNSearch::automatic) {
        search = points.size() <= 48 ? NNSearch::brute_force : NNSearch::grid;
    }
    auto nn = search == NNSearch::brute_force ? detail::nn_brute_force(points)
                                              : detail::nn_grid(points);
    return summarize_nn(points, std::move(nn));
}

inline NNStructure compute_nn(const LabeledPointSet& pts, NNSearch search = NNSearch::automatic)
{
    return compute_nn(pts.points(), search);
}

struct LabelPair {
    ClassLabel base;
    ClassLabel neighbor;

    friend bool operator==(const LabelPair&, const LabelPair&) = default;
};

inline std::vector<LabelPair> nn_pair_list(const LabeledPointSet& pts, const NNStructure& nns)
{
    if (nns.size() != pts.size()) {
        throw ConsistencyError("NN structure was not computed from this point set");
    }
    std::vector<LabelPair> pairs;
    pairs.reserve(pts.size());
    const auto labels = pts.labels();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        pairs.push_back({labels[i], labels[nns.nn_index[i]]});
    }
    return pairs;
}

} // namespace nnct
