#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "nnct/montecarlo.hpp"
#include "support/oracles.hpp"

using namespace nnct;
using Catch::Approx;

TEST_CASE("size band", "[montecarlo]")
{
    const SizeBand b = size_band(0.05, 10000);
    CHECK(b.lower == Approx(0.0464).margin(5e-5));
    CHECK(b.upper == Approx(0.0536).margin(5e-5));
    const SizeBand c = size_band(0.05, 2500);
    CHECK(c.lower == Approx(0.0428).margin(5e-5));
    CHECK(c.upper == Approx(0.0572).margin(5e-5));
    const SizeBand wide = size_band(0.05, 1000000000);
    CHECK(wide.upper - wide.lower < 1e-4);

    CHECK(classify_size(0.0427, b) == SizeFlag::conservative);
    CHECK(classify_size(0.0544, b) == SizeFlag::liberal);
    CHECK(classify_size(0.05, b) == SizeFlag::none);
    CHECK_THROWS_AS(size_band(0.0, 100), InvalidInput);
    CHECK_THROWS_AS(size_band(0.05, 0), InvalidInput);
}

TEST_CASE("segregation generator support", "[montecarlo]")
{
    StreamRng rng(1, StreamPurpose::pattern, 0);
    const double s = 0.25;
    const LabeledPointSet pts = generate(SegregationSpec{10000, 500, s}, rng);
    double mean_x = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point& p = pts.points()[i];
        if (pts.labels()[i] == 1) {
            CHECK((p.x >= 0.0 && p.x <= 1.0 - s && p.y >= 0.0 && p.y <= 1.0 - s));
            mean_x += p.x;
        }
        else {
            CHECK((p.x >= s && p.x <= 1.0 && p.y >= s && p.y <= 1.0));
        }
    }
    CHECK(pts.class_size(1) == 10000);
    CHECK(pts.class_size(2) == 500);
    // Class 1 x is uniform on (0, 3/4): mean 3/8; with s = 1/6 it would be 5/12.
    CHECK(mean_x / 10000.0 == Approx(0.375).margin(4 * 0.75 / std::sqrt(12.0 * 10000.0)));

    StreamRng rng2(1, StreamPurpose::pattern, 1);
    const LabeledPointSet six = generate(SegregationSpec{10000, 10, 1.0 / 6.0}, rng2);
    double m6 = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) {
        m6 += six.points()[i].x;
    }
    CHECK(m6 / 10000.0 == Approx(5.0 / 12.0).margin(4 * (5.0 / 6.0) / std::sqrt(12.0 * 10000.0)));
}

TEST_CASE("segregation with s = 0 reproduces CSR exactly", "[montecarlo]")
{
    StreamRng a(9, StreamPurpose::pattern, 4);
    StreamRng b(9, StreamPurpose::pattern, 4);
    const LabeledPointSet seg = generate(SegregationSpec{30, 20, 0.0}, a);
    const LabeledPointSet csr = generate(CsrSpec{30, 20}, b);
    for (std::size_t i = 0; i < seg.size(); ++i) {
        CHECK(seg.points()[i].x == csr.points()[i].x);
        CHECK(seg.points()[i].y == csr.points()[i].y);
        CHECK(seg.labels()[i] == csr.labels()[i]);
    }
}

TEST_CASE("association offspring lie within r of some class 1 point", "[montecarlo]")
{
    StreamRng rng(2, StreamPurpose::pattern, 0);
    const double r = 1.0 / 7.0;
    const LabeledPointSet pts = generate(AssociationSpec{40, 60, r}, rng);
    for (std::size_t j = 40; j < 100; ++j) {
        double best = 1e300;
        for (std::size_t i = 0; i < 40; ++i) {
            best = std::min(best, std::hypot(pts.points()[j].x - pts.points()[i].x,
                                             pts.points()[j].y - pts.points()[i].y));
        }
        CHECK(best <= r + 1e-12);
    }
}

TEST_CASE("random relabeling keeps coordinates, class sizes and the NN digraph", "[montecarlo]")
{
    const LabeledPointSet base = oracle::random_labeled(70, 30, 3, 0);
    const NNStructure nn0 = compute_nn(base);
    std::set<std::vector<ClassLabel>> seen;
    for (std::uint64_t k = 0; k < 20; ++k) {
        StreamRng rng(3, StreamPurpose::permutation, k);
        const LabeledPointSet p = generate(RLPermutationSpec{&base}, rng);
        CHECK(p.class_size(1) == 30);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(p.points()[i].x == base.points()[i].x);
        }
        const NNStructure nn = compute_nn(p);
        CHECK(nn.nn_index == nn0.nn_index);
        CHECK(nn.q == nn0.q);
        seen.insert({p.labels().begin(), p.labels().end()});
    }
    CHECK(seen.size() > 15);
}

TEST_CASE("invalid pattern specifications", "[montecarlo]")
{
    StreamRng rng(1, StreamPurpose::pattern, 0);
    CHECK_THROWS_AS(generate(CsrSpec{0, 5}, rng), InvalidInput);
    CHECK_THROWS_AS(generate(SegregationSpec{5, 5, 1.0}, rng), InvalidInput);
    CHECK_THROWS_AS(generate(SegregationSpec{5, 5, -0.1}, rng), InvalidInput);
    CHECK_THROWS_AS(generate(AssociationSpec{5, 5, 0.0}, rng), InvalidInput);
    CHECK_THROWS_AS(generate(RLPermutationSpec{nullptr}, rng), InvalidInput);
}

TEST_CASE("Q and R estimation", "[montecarlo]")
{
    const QREstimate two = estimate_qr(2, 50, 1);
    CHECK(two.q_per_point == 0.0);
    CHECK(two.r_per_point == 1.0);
    CHECK(two.q_se == 0.0);

    const QREstimate a = estimate_qr(60, 400, 11, 1);
    const QREstimate b = estimate_qr(60, 400, 11, 3);
    CHECK(a.q_per_point == b.q_per_point);
    CHECK(a.r_per_point == b.r_per_point);
    CHECK(a.q_se == b.q_se);
    const QREstimate c = estimate_qr(60, 400, 12, 1);
    CHECK(a.q_per_point != c.q_per_point);
    CHECK(a.q_per_point == Approx(0.63).margin(0.03));
    CHECK(a.r_per_point == Approx(0.62).margin(0.03));
    CHECK(a.q_hat() == Approx(60 * a.q_per_point));
    CHECK_THROWS_AS(estimate_qr(1, 10, 1), InvalidInput);
    CHECK_THROWS_AS(estimate_qr(10, 0, 1), InvalidInput);
}

TEST_CASE("rejection study bookkeeping", "[montecarlo]")
{
    SimulationConfig config;
    config.n_mc = 200;
    config.qr_n_mc = 100;
    config.seed = 4;
    const std::vector<SampleCombo> combos{{10, 10}, {30, 30}};
    const SizePowerReport r = empirical_size(combos, config);
    CHECK(r.entries.size() == 2 * 4 * 2);
    for (const auto& e : r.entries) {
        CHECK(e.n_mc == 200);
        CHECK(e.rejections + e.degenerate <= 200);
        CHECK(e.proportion == Approx(static_cast<double>(e.rejections) / 200.0));
        CHECK(e.standard_error == Approx(std::sqrt(e.proportion * (1 - e.proportion) / 200.0)));
        CHECK(e.combo_index == combo_index(e.combo));
        CHECK(e.proportion < 0.2);
    }

    config.workers = 3;
    const SizePowerReport again = empirical_size(combos, config);
    for (std::size_t k = 0; k < r.entries.size(); ++k) {
        CHECK(again.entries[k].rejections == r.entries[k].rejections);
    }

    config.alpha = 0.0;
    for (const auto& e : empirical_size({{10, 10}}, config).entries) {
        CHECK(e.rejections == 0);
    }

    config.alpha = 0.05;
    config.observed_mode = false;
    config.adjusted_mode = false;
    CHECK_THROWS_AS(empirical_size(combos, config), InvalidInput);
    config.observed_mode = true;
    config.n_mc = 0;
    CHECK_THROWS_AS(empirical_size(combos, config), InvalidInput);
}

TEST_CASE("power grows with segregation strength", "[montecarlo]")
{
    SimulationConfig config;
    config.n_mc = 300;
    config.adjusted_mode = false;
    config.seed = 8;
    const SizePowerReport r = empirical_power(segregation_alternatives(), {{30, 30}}, config);
    for (TestFlavor f : kOverallFlavors) {
        const double p1 = r.find({30, 30}, "HS_I", f, QRMode::Kind::observed).proportion;
        const double p3 = r.find({30, 30}, "HS_III", f, QRMode::Kind::observed).proportion;
        CHECK(p3 > p1);
        CHECK(p3 > 0.9);
    }
}

TEST_CASE("standard combinations", "[montecarlo]")
{
    CHECK(standard_combos().size() == 12);
    CHECK(combo_index({10, 10}) == 1);
    CHECK(combo_index({100, 100}) == 12);
    CHECK(combo_index({7, 7}) == 0);
    const auto stats = simulate_statistics(Scenario::csr(), {20, 20}, TestFlavor::dixon_c, 50, 1);
    CHECK(stats.size() == 50);
}
