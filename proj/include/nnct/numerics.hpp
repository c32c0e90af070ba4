#pragma once

// Small dense kernels: symmetric eigendecomposition (cyclic Jacobi),
// eigenvalue-truncated generalized inverse, and the chi-square / standard
// normal tail probabilities used for p-values.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace nnct {

template <std::size_t N>
using Vector = std::array<double, N>;

template <std::size_t N>
using SquareMatrix = std::array<std::array<double, N>, N>;

/// Absolute tolerance used when accepting a full matrix as symmetric.
inline constexpr double kSymmetryTolerance = 1e-12;

/// Eigenvalues at or below this fraction of the largest one are treated as zero
/// by generalized_inverse.
inline constexpr double kDefaultRelCutoff = 1e-8;

template <std::size_t N>
class SymMatrix {
public:
    SymMatrix() = default;

    /// Throws InvalidInput unless `full` is symmetric within kSymmetryTolerance.
    explicit SymMatrix(const SquareMatrix<N>& full) : a_(full)
    {
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (!(std::abs(full[i][j] - full[j][i]) <= kSymmetryTolerance)) {
                    throw InvalidInput("matrix is not symmetric");
                }
                a_[i][j] = a_[j][i] = 0.5 * (full[i][j] + full[j][i]);
            }
        }
    }

    static SymMatrix identity()
    {
        SymMatrix m;
        for (std::size_t i = 0; i < N; ++i) {
            m.a_[i][i] = 1.0;
        }
        return m;
    }

    static constexpr std::size_t order() noexcept { return N; }

    double operator()(std::size_t i, std::size_t j) const { return a_[i][j]; }

    /// Writes both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double v)
    {
        a_[i][j] = v;
        a_[j][i] = v;
    }

    const SquareMatrix<N>& full() const noexcept { return a_; }

private:
    SquareMatrix<N> a_{};
};

template <std::size_t N>
struct SymEigen {
    Vector<N> values{};        // ascending
    SquareMatrix<N> vectors{}; // vectors[i][k]: component i of eigenvector k
};

template <std::size_t N>
SymEigen<N> eigen_symmetric(const SymMatrix<N>& m)
{
    SquareMatrix<N> a = m.full();
    SquareMatrix<N> v{};
    for (std::size_t i = 0; i < N; ++i) {
        v[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            scale += a[i][i] * a[i][i];
            for (std::size_t j = i + 1; j < N; ++j) {
                off += a[i][j] * a[i][j];
            }
        }
        if (off == 0.0 || off <= 1e-32 * scale) {
            break;
        }
        for (std::size_t p = 0; p + 1 < N; ++p) {
            for (std::size_t q = p + 1; q < N; ++q) {
                if (a[p][q] == 0.0) {
                    continue;
                }
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < N; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < N; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < N; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::array<std::size_t, N> order{};
    for (std::size_t i = 0; i < N; ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] < a[y][y]; });
    SymEigen<N> out;
    for (std::size_t k = 0; k < N; ++k) {
        out.values[k] = a[order[k]][order[k]];
        for (std::size_t i = 0; i < N; ++i) {
            out.vectors[i][k] = v[i][order[k]];
        }
    }
    return out;
}

/// Pseudo-inverse from the eigendecomposition. Eigenvalues above
/// rel_cutoff * (largest |eigenvalue|) are inverted, the rest zeroed. When
/// max_rank < N only the max_rank largest retained eigenvalues are kept.
template <std::size_t N>
SymMatrix<N> generalized_inverse(const SymMatrix<N>& m, double rel_cutoff = kDefaultRelCutoff,
                                 std::size_t max_rank = N)
{
    if (!(rel_cutoff >= 0.0)) {
        throw InvalidInput("relative cutoff must be non-negative");
    }
    const SymEigen<N> eig = eigen_symmetric(m);
    double largest = 0.0;
    for (double value : eig.values) {
        largest = std::max(largest, std::abs(value));
    }
    Vector<N> inverse{};
    std::size_t kept = 0;
    // Descending so the rank cap keeps the dominant directions.
    for (std::size_t k = N; k-- > 0;) {
        const double value = eig.values[k];
        if (largest > 0.0 && std::abs(value) > rel_cutoff * largest && kept < max_rank) {
            inverse[k] = 1.0 / value;
            ++kept;
        }
    }
    SymMatrix<N> g;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i; j < N; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < N; ++k) {
                sum += eig.vectors[i][k] * inverse[k] * eig.vectors[j][k];
            }
            g.set(i, j, sum);
        }
    }
    return g;
}

template <std::size_t N>
double quadratic_form(const Vector<N>& x, const SymMatrix<N>& m)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            sum += x[i] * m(i, j) * x[j];
        }
    }
    return sum;
}

template <std::size_t N>
SquareMatrix<N> multiply(const SquareMatrix<N>& a, const SquareMatrix<N>& b)
{
    SquareMatrix<N> c{};
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < N; ++k) {
            for (std::size_t j = 0; j < N; ++j) {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    return c;
}

/// A * m * A^T, evaluated on the upper triangle only so the result is exactly symmetric.
template <std::size_t N>
SymMatrix<N> congruence(const SquareMatrix<N>& a, const SymMatrix<N>& m)
{
    SymMatrix<N> out;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i; j < N; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < N; ++k) {
                for (std::size_t l = 0; l < N; ++l) {
                    sum += a[i][k] * m(k, l) * a[j][l];
                }
            }
            out.set(i, j, sum);
        }
    }
    return out;
}

namespace detail {

// Regularized lower incomplete gamma P(a, x) by its power series (x < a + 1).
inline double gamma_p_series(double a, double x)
{
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 10000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction (x >= a + 1).
inline double gamma_q_continued_fraction(double a, double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace detail

/// Regularized upper incomplete gamma function Q(a, x).
inline double gamma_q(double a, double x)
{
    if (!(a > 0.0) || !(x >= 0.0)) {
        throw InvalidInput("gamma_q requires a > 0 and x >= 0");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    if (x < a + 1.0) {
        return 1.0 - detail::gamma_p_series(a, x);
    }
    return detail::gamma_q_continued_fraction(a, x);
}

/// Upper tail P(X >= x) of the chi-square distribution with df degrees of freedom.
inline double chi2_sf(double x, int df)
{
    if (df < 1) {
        throw InvalidInput("chi-square degrees of freedom must be >= 1");
    }
    if (!(x >= 0.0)) {
        throw InvalidInput("chi-square argument must be non-negative, got " + std::to_string(x));
    }
    return std::clamp(gamma_q(0.5 * df, 0.5 * x), 0.0, 1.0);
}

/// 1 - Phi(z).
inline double normal_sf(double z) noexcept
{
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

/// z with normal_sf(z) = p, for p in (0, 1). Bisection to full double precision.
inline double normal_upper_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidInput("quantile probability must lie in (0, 1)");
    }
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (normal_sf(mid) > p) {
            lo = mid;
        }
        else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace nnct
