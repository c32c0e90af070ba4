#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

#include "nnct/numerics.hpp"
#include "nnct/random.hpp"

using namespace nnct;
using Catch::Approx;

namespace {

SymMatrix<4> random_psd(StreamRng& rng, std::size_t rank)
{
    SquareMatrix<4> full{};
    for (std::size_t r = 0; r < rank; ++r) {
        Vector<4> v{};
        for (auto& x : v) {
            x = rng.uniform(-2.0, 2.0);
        }
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                full[i][j] += v[i] * v[j];
            }
        }
    }
    return SymMatrix<4>(full);
}

double max_abs_diff(const SquareMatrix<4>& a, const SquareMatrix<4>& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            d = std::max(d, std::abs(a[i][j] - b[i][j]));
        }
    }
    return d;
}

double max_abs(const SquareMatrix<4>& a)
{
    double d = 0.0;
    for (const auto& row : a) {
        for (double x : row) {
            d = std::max(d, std::abs(x));
        }
    }
    return d;
}

} // namespace

TEST_CASE("generalized inverse of simple matrices", "[numerics]")
{
    const SymMatrix<4> id = SymMatrix<4>::identity();
    CHECK(max_abs_diff(generalized_inverse(id).full(), id.full()) < 1e-14);

    SymMatrix<2> d;
    d.set(0, 0, 2.0);
    const SymMatrix<2> g = generalized_inverse(d);
    CHECK(g(0, 0) == Approx(0.5).epsilon(1e-14));
    CHECK(g(1, 1) == 0.0);
    CHECK(g(0, 1) == 0.0);
}

TEST_CASE("generalized inverse satisfies the Moore-Penrose identities", "[numerics][property]")
{
    StreamRng rng(3, StreamPurpose::fixture, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t rank = 1 + trial % 4;
        const SymMatrix<4> m = random_psd(rng, rank);
        const SymMatrix<4> g = generalized_inverse(m);
        const auto mgm = multiply(multiply(m.full(), g.full()), m.full());
        const auto gmg = multiply(multiply(g.full(), m.full()), g.full());
        CHECK(max_abs_diff(mgm, m.full()) <= 1e-8 * max_abs(m.full()));
        CHECK(max_abs_diff(gmg, g.full()) <= 1e-8 * max_abs(g.full()));
    }
}

TEST_CASE("rank cap keeps only the dominant directions", "[numerics]")
{
    SymMatrix<4> m;
    m.set(0, 0, 10.0);
    m.set(1, 1, 1e-3);
    m.set(2, 2, 4.0);
    const SymMatrix<4> g = generalized_inverse(m, kDefaultRelCutoff, 1);
    CHECK(g(0, 0) == Approx(0.1));
    CHECK(g(1, 1) == 0.0);
    CHECK(g(2, 2) == 0.0);
    const SymMatrix<4> g2 = generalized_inverse(m, kDefaultRelCutoff, 2);
    CHECK(g2(2, 2) == Approx(0.25));
    CHECK(g2(1, 1) == 0.0);
    // Relative cutoff above 1e-4 drops the small eigenvalue as well.
    CHECK(generalized_inverse(m, 1e-3)(1, 1) == 0.0);
    CHECK(generalized_inverse(m, 1e-5)(1, 1) == Approx(1e3));
}

TEST_CASE("non-symmetric input is rejected", "[numerics]")
{
    SquareMatrix<2> full{{{1.0, 2.0}, {2.5, 1.0}}};
    CHECK_THROWS_AS(SymMatrix<2>(full), InvalidInput);
    full[1][0] = 2.0 + 1e-13;
    CHECK_NOTHROW(SymMatrix<2>(full));
}

TEST_CASE("Jacobi eigendecomposition reconstructs and agrees with Eigen", "[numerics][property]")
{
    StreamRng rng(5, StreamPurpose::fixture, 0);
    for (int trial = 0; trial < 200; ++trial) {
        SquareMatrix<4> full{};
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = i; j < 4; ++j) {
                full[i][j] = full[j][i] = rng.uniform(-5.0, 5.0);
            }
            full[i][i] += 12.0; // well conditioned
        }
        const SymMatrix<4> m(full);
        const SymEigen<4> eig = eigen_symmetric(m);

        SquareMatrix<4> rebuilt{};
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                for (std::size_t k = 0; k < 4; ++k) {
                    rebuilt[i][j] += eig.vectors[i][k] * eig.values[k] * eig.vectors[j][k];
                }
            }
        }
        double err = 0.0, norm = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                err += std::pow(rebuilt[i][j] - full[i][j], 2);
                norm += full[i][j] * full[i][j];
            }
        }
        CHECK(std::sqrt(err / norm) < 1e-10);

        Eigen::Matrix4d em;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                em(i, j) = full[i][j];
            }
        }
        const Eigen::Vector4d ref = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(em).eigenvalues();
        for (int k = 0; k < 4; ++k) {
            CHECK(eig.values[k] == Approx(ref(k)).epsilon(1e-10));
        }
    }
}

TEST_CASE("chi-square tail probabilities", "[numerics]")
{
    CHECK(chi2_sf(3.36, 2) == Approx(0.1868).margin(0.0005));
    CHECK(chi2_sf(3.30, 1) == Approx(0.0693).margin(0.0005));
    for (int k = 1; k <= 6; ++k) {
        CHECK(chi2_sf(0.0, k) == 1.0);
    }
    for (double x : {0.01, 0.5, 3.36, 10.0, 52.72, 200.0}) {
        CHECK(chi2_sf(x, 2) == Approx(std::exp(-x / 2)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(chi2_sf(-0.1, 1), InvalidInput);
    CHECK_THROWS_AS(chi2_sf(1.0, 0), InvalidInput);
}

TEST_CASE("chi-square tail agrees with Boost.Math", "[numerics][property]")
{
    for (int df = 1; df <= 12; ++df) {
        for (double x = 0.05; x < 80.0; x *= 1.37) {
            const double ref = boost::math::gamma_q(0.5 * df, 0.5 * x);
            CHECK(chi2_sf(x, df) == Approx(ref).epsilon(1e-12).margin(1e-300));
        }
    }
}

TEST_CASE("chi-square tail is monotone", "[numerics][property]")
{
    for (int df = 1; df <= 5; ++df) {
        double previous = 1.0;
        for (double x = 0.1; x < 40.0; x += 0.1) {
            const double p = chi2_sf(x, df);
            CHECK(p <= previous);
            CHECK(chi2_sf(x, df + 1) >= p);
            previous = p;
        }
    }
}

TEST_CASE("standard normal tail", "[numerics]")
{
    CHECK(normal_sf(0.0) == 0.5);
    CHECK(normal_sf(1.6449) == Approx(0.05).margin(0.0002));
    const boost::math::normal_distribution<double> normal;
    for (double z = -8.0; z <= 8.0; z += 0.25) {
        CHECK(normal_sf(z) + normal_sf(-z) == Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(normal_sf(z) - boost::math::cdf(boost::math::complement(normal, z))) < 1e-7);
    }
    CHECK(normal_upper_quantile(0.05) == Approx(1.6448536269514722).epsilon(1e-12));
    CHECK(normal_upper_quantile(0.5) == Approx(0.0).margin(1e-12));
    CHECK_THROWS_AS(normal_upper_quantile(0.0), InvalidInput);
}
