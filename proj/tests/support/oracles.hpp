#pragma once

// Reference computations used only by tests. None of these call into the
// covariance or test-statistic code they check.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nnct/geometry.hpp"
#include "nnct/random.hpp"

namespace oracle {

/// Ordered pairs (s, t), s != t, sharing a nearest neighbor.
inline std::uint64_t shared_nn_pairs(const std::vector<std::size_t>& nn)
{
    std::uint64_t q = 0;
    for (std::size_t s = 0; s < nn.size(); ++s) {
        for (std::size_t t = 0; t < nn.size(); ++t) {
            if (s != t && nn[s] == nn[t]) {
                ++q;
            }
        }
    }
    return q;
}

/// Ordered pairs (s, t) that are each other's nearest neighbor.
inline std::uint64_t reflexive_pairs(const std::vector<std::size_t>& nn)
{
    std::uint64_t r = 0;
    for (std::size_t s = 0; s < nn.size(); ++s) {
        if (nn[nn[s]] == s) {
            ++r;
        }
    }
    return r;
}

struct Moments {
    std::array<double, 4> mean{};
    std::array<std::array<double, 4>, 4> cov{};
};

/// Exact mean and covariance of the four cell counts over all C(n, n1)
/// labelings of a fixed NN digraph (random labeling, exhaustive enumeration).
inline Moments enumerate_labelings(const std::vector<std::size_t>& nn, std::size_t n1)
{
    const std::size_t n = nn.size();
    Moments m;
    std::array<double, 4> sum{};
    std::array<std::array<double, 4>, 4> sum2{};
    double count = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) {
            continue;
        }
        std::array<double, 4> cells{};
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = (mask >> i) & 1u ? 0 : 1;
            const std::size_t b = (mask >> nn[i]) & 1u ? 0 : 1;
            cells[2 * a + b] += 1.0;
        }
        for (std::size_t x = 0; x < 4; ++x) {
            sum[x] += cells[x];
            for (std::size_t y = 0; y < 4; ++y) {
                sum2[x][y] += cells[x] * cells[y];
            }
        }
        count += 1.0;
    }
    for (std::size_t x = 0; x < 4; ++x) {
        m.mean[x] = sum[x] / count;
    }
    for (std::size_t x = 0; x < 4; ++x) {
        for (std::size_t y = 0; y < 4; ++y) {
            m.cov[x][y] = sum2[x][y] / count - m.mean[x] * m.mean[y];
        }
    }
    return m;
}

/// Var[N_ij] in the usual closed form, written out term by term.
inline double closed_form_variance(double n1, double n2, double q, double r, int i, int j)
{
    const double n = n1 + n2;
    const double ni = i == 1 ? n1 : n2;
    const double nj = j == 1 ? n1 : n2;
    const double d2 = n * (n - 1);
    const double d3 = d2 * (n - 2);
    const double d4 = d3 * (n - 3);
    if (i == j) {
        const double pii = ni * (ni - 1) / d2;
        const double piii = ni * (ni - 1) * (ni - 2) / d3;
        const double piiii = ni * (ni - 1) * (ni - 2) * (ni - 3) / d4;
        return (n + r) * pii + (2 * n - 2 * r + q) * piii + (n * n - 3 * n - q + r) * piiii - (n * pii) * (n * pii);
    }
    const double pij = ni * nj / d2;
    const double piij = ni * (ni - 1) * nj / d3;
    const double piijj = ni * (ni - 1) * nj * (nj - 1) / d4;
    return n * pij + q * piij + (n * n - 3 * n - q + r) * piijj - (n * pij) * (n * pij);
}

/// Cov[N_11, N_22] in closed form.
inline double closed_form_cov_11_22(double n1, double n2, double q, double r)
{
    const double n = n1 + n2;
    const double p1122 = n1 * (n1 - 1) * n2 * (n2 - 1) / (n * (n - 1) * (n - 2) * (n - 3));
    const double p11 = n1 * (n1 - 1) / (n * (n - 1));
    const double p22 = n2 * (n2 - 1) / (n * (n - 1));
    return (n * n - 3 * n - q + r) * p1122 - n * n * p11 * p22;
}

inline std::vector<nnct::Point> uniform_points(std::size_t n, std::uint64_t seed, std::uint64_t index)
{
    nnct::StreamRng rng(seed, nnct::StreamPurpose::fixture, index);
    std::vector<nnct::Point> pts(n);
    for (auto& p : pts) {
        p.x = rng.uniform();
        p.y = rng.uniform();
    }
    return pts;
}

/// n points, the first n1 labeled 1, then shuffled.
inline nnct::LabeledPointSet random_labeled(std::size_t n, std::size_t n1, std::uint64_t seed, std::uint64_t index)
{
    nnct::StreamRng rng(seed + 1000003, nnct::StreamPurpose::fixture, index);
    std::vector<nnct::ClassLabel> labels(n, 2);
    for (std::size_t i = 0; i < n1; ++i) {
        labels[i] = 1;
    }
    rng.shuffle(labels);
    return nnct::LabeledPointSet(uniform_points(n, seed, index), std::move(labels));
}

} // namespace oracle
