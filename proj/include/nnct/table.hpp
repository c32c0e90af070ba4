#pragma once

// Two-class nearest neighbor contingency table (NNCT) and the moments of its
// cell counts under random labeling, given the shared (Q) and reflexive (R)
// NN counts of the underlying digraph.
//
// Cells are ordered row-wise everywhere: (11, 12, 21, 22) -> 0..3.
// Class indices inside this header are 0-based (class label 1 -> index 0).

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>

#include "errors.hpp"
#include "geometry.hpp"
#include "numerics.hpp"

namespace nnct {

using CountMatrix = std::array<std::array<std::uint64_t, 2>, 2>;
using RealMatrix2 = std::array<std::array<double, 2>, 2>;

inline constexpr std::size_t cell_index(std::size_t base, std::size_t neighbor) noexcept
{
    return 2 * base + neighbor;
}

class ContingencyTable {
public:
    ContingencyTable() = default;

    explicit ContingencyTable(const CountMatrix& counts) : counts_(counts)
    {
        if (total() < 2) {
            throw InvalidInput("contingency table needs at least 2 pairs");
        }
    }

    std::uint64_t operator()(std::size_t base, std::size_t neighbor) const
    {
        return counts_.at(base).at(neighbor);
    }

    const CountMatrix& counts() const noexcept { return counts_; }

    std::uint64_t row_sum(std::size_t i) const { return counts_.at(i)[0] + counts_.at(i)[1]; }
    std::uint64_t col_sum(std::size_t j) const { return counts_[0].at(j) + counts_[1].at(j); }
    std::uint64_t total() const noexcept
    {
        return counts_[0][0] + counts_[0][1] + counts_[1][0] + counts_[1][1];
    }

    /// Cell count as a percentage of its row sum (0 for an empty row).
    double row_percentage(std::size_t i, std::size_t j) const
    {
        const auto row = row_sum(i);
        return row == 0 ? 0.0 : 100.0 * static_cast<double>(counts_.at(i).at(j)) / static_cast<double>(row);
    }

    Vector<4> as_vector() const
    {
        return {static_cast<double>(counts_[0][0]), static_cast<double>(counts_[0][1]),
                static_cast<double>(counts_[1][0]), static_cast<double>(counts_[1][1])};
    }

    /// Swap the class roles: N'_{ij} = N_{(1-i)(1-j)}.
    ContingencyTable swapped_classes() const
    {
        return ContingencyTable(CountMatrix{{{counts_[1][1], counts_[1][0]}, {counts_[0][1], counts_[0][0]}}});
    }

    friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;

private:
    CountMatrix counts_{};
};

/// Class sizes (row sums of the NNCT).
struct Margins {
    std::uint64_t n1 = 0;
    std::uint64_t n2 = 0;

    std::uint64_t total() const noexcept { return n1 + n2; }
    std::uint64_t size(std::size_t cls) const { return cls == 0 ? n1 : n2; }

    static Margins of(const ContingencyTable& t) { return {t.row_sum(0), t.row_sum(1)}; }

    /// Checks n == n1 + n2 and n >= 2.
    static Margins checked(std::uint64_t n1, std::uint64_t n2, std::uint64_t n)
    {
        if (n1 + n2 != n) {
            throw InvalidInput("margins inconsistent: n1 + n2 != n");
        }
        if (n < 2) {
            throw InvalidInput("at least 2 points are required");
        }
        return {n1, n2};
    }
};

/// Counts (base class, NN class) pairs. A class with no members yields an
/// all-zero row; tests reject such tables, the table itself is well defined.
inline ContingencyTable build_nnct(const LabeledPointSet& pts, const NNStructure& nns)
{
    if (nns.size() != pts.size()) {
        throw ConsistencyError("NN structure was not computed from this point set");
    }
    CountMatrix counts{};
    const auto labels = pts.labels();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ++counts[labels[i] - 1][labels[nns.nn_index[i]] - 1];
    }
    return ContingencyTable(counts);
}

/// E[N_ij] = n_i (n_i - 1)/(n - 1) on the diagonal, n_i n_j/(n - 1) off it.
inline RealMatrix2 expected_counts(const Margins& m)
{
    const double n = static_cast<double>(m.total());
    if (m.total() < 2) {
        throw InvalidInput("at least 2 points are required");
    }
    RealMatrix2 e{};
    for (std::size_t i = 0; i < 2; ++i) {
        const double ni = static_cast<double>(m.size(i));
        for (std::size_t j = 0; j < 2; ++j) {
            const double nj = static_cast<double>(m.size(j));
            e[i][j] = (i == j ? ni * (ni - 1.0) : ni * nj) / (n - 1.0);
        }
    }
    return e;
}

/// Probability that a uniformly random ordered tuple of distinct points carries
/// the given class sequence under random labeling. Zero whenever a class is
/// asked for more points than it has.
inline double label_sequence_probability(const Margins& m, std::span<const std::size_t> classes)
{
    std::array<double, 2> remaining{static_cast<double>(m.n1), static_cast<double>(m.n2)};
    double total = static_cast<double>(m.total());
    double p = 1.0;
    for (std::size_t cls : classes) {
        if (remaining.at(cls) <= 0.0 || total <= 0.0) {
            return 0.0;
        }
        p *= remaining[cls] / total;
        remaining[cls] -= 1.0;
        total -= 1.0;
    }
    return p;
}

inline double label_sequence_probability(const Margins& m, std::initializer_list<std::size_t> classes)
{
    return label_sequence_probability(m, std::span<const std::size_t>(classes.begin(), classes.size()));
}

/// Pair, triplet and quartet class probabilities for every ordered class sequence.
struct PairProbabilities {
    std::array<std::array<double, 2>, 2> pair{};
    std::array<std::array<std::array<double, 2>, 2>, 2> triple{};
    std::array<std::array<std::array<std::array<double, 2>, 2>, 2>, 2> quad{};

    double p(std::size_t i, std::size_t j) const { return pair.at(i).at(j); }
    double p(std::size_t i, std::size_t j, std::size_t k) const { return triple.at(i).at(j).at(k); }
    double p(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const
    {
        return quad.at(i).at(j).at(k).at(l);
    }
};

inline PairProbabilities pair_probabilities(const Margins& m)
{
    if (m.total() < 2) {
        throw InvalidInput("at least 2 points are required");
    }
    PairProbabilities out;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            out.pair[i][j] = label_sequence_probability(m, {i, j});
            for (std::size_t k = 0; k < 2; ++k) {
                out.triple[i][j][k] = label_sequence_probability(m, {i, j, k});
                for (std::size_t l = 0; l < 2; ++l) {
                    out.quad[i][j][k][l] = label_sequence_probability(m, {i, j, k, l});
                }
            }
        }
    }
    return out;
}

struct CovarianceModel {
    Margins margins;
    double q_used = 0.0;
    double r_used = 0.0;
    RealMatrix2 expected{};
    SymMatrix<4> sigma;

    double variance(std::size_t i, std::size_t j) const
    {
        const auto c = cell_index(i, j);
        return sigma(c, c);
    }

    double covariance(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const
    {
        return sigma(cell_index(i, j), cell_index(k, l));
    }
};

/// Full 4x4 covariance of the cell counts under random labeling for a digraph
/// with n points, Q shared-NN ordered pairs and R reflexive ordered pairs.
///
/// N_ij N_kl expands over ordered point pairs (s, t) as a sum of indicator
/// products. The pairs fall into six configurations by how {s, NN(s)} and
/// {t, NN(t)} overlap:
///
///   s = t                                   n pairs       2 distinct points
///   NN(s) = t, NN(t) = s                    R             2
///   NN(s) = NN(t), s != t                   Q             3
///   NN(s) = t, NN(t) != s                   n - R         3
///   NN(t) = s, NN(s) != t                   n - R         3
///   all four points distinct                n^2-3n-Q+R    4
///
/// Each configuration contributes count * P(labels match) where the labeling
/// probability is that of the forced class sequence on its distinct points.
/// Q and R may be real-valued (expected values substituted for observed ones).
inline CovarianceModel covariance_model(const Margins& m, double q, double r)
{
    if (m.total() < 4) {
        throw InvalidInput("covariance model needs at least 4 points");
    }
    if (!(q >= 0.0) || !(r >= 0.0) || !std::isfinite(q) || !std::isfinite(r)) {
        throw InvalidInput("Q and R must be finite and non-negative");
    }
    const double n = static_cast<double>(m.total());
    const double distinct4 = n * n - 3.0 * n - q + r;

    CovarianceModel model;
    model.margins = m;
    model.q_used = q;
    model.r_used = r;
    model.expected = expected_counts(m);

    for (std::size_t a = 0; a < 4; ++a) {
        const std::size_t i = a / 2, j = a % 2;
        for (std::size_t b = a; b < 4; ++b) {
            const std::size_t k = b / 2, l = b % 2;
            double second = 0.0;
            if (a == b) {
                second += n * label_sequence_probability(m, {i, j});
            }
            if (i == l && j == k) {
                second += r * label_sequence_probability(m, {i, j});
            }
            if (j == l) {
                second += q * label_sequence_probability(m, {i, k, j});
            }
            if (j == k) {
                second += (n - r) * label_sequence_probability(m, {i, j, l});
            }
            if (l == i) {
                second += (n - r) * label_sequence_probability(m, {k, i, j});
            }
            second += distinct4 * label_sequence_probability(m, {i, j, k, l});
            model.sigma.set(a, b, second - model.expected[i][j] * model.expected[k][l]);
        }
    }
    return model;
}

} // namespace nnct
