#pragma once

// Point-pattern generators (CSR independence, segregation, association,
// random relabeling), Monte Carlo estimation of E[Q/n] and E[R/n] under CSR,
// and the empirical size / power protocol for the overall NNCT tests.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "segregation.hpp"
#include "table.hpp"

namespace nnct {

struct CsrSpec {
    std::uint64_t n1 = 0;
    std::uint64_t n2 = 0;
};

/// Class 1 uniform on (0, 1-s)^2, class 2 uniform on (s, 1)^2.
struct SegregationSpec {
    std::uint64_t n1 = 0;
    std::uint64_t n2 = 0;
    double s = 0.0;
};

/// Class 1 uniform on the unit square; each class 2 point is a uniformly chosen
/// class 1 point displaced by radius U(0, r) at angle U(0, 2 pi). Class 2 points
/// are not clipped to the square.
struct AssociationSpec {
    std::uint64_t n1 = 0;
    std::uint64_t n2 = 0;
    double r = 0.0;
};

/// Fixed coordinates with uniformly permuted labels.
struct RLPermutationSpec {
    const LabeledPointSet* base = nullptr;
};

using PatternSpec = std::variant<CsrSpec, SegregationSpec, AssociationSpec, RLPermutationSpec>;

namespace detail {

inline void check_sizes(std::uint64_t n1, std::uint64_t n2)
{
    if (n1 < 1 || n2 < 1) {
        throw InvalidInput("class sizes must be at least 1");
    }
}

inline std::vector<ClassLabel> block_labels(std::uint64_t n1, std::uint64_t n2)
{
    std::vector<ClassLabel> labels(n1 + n2, 2);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n1), 1);
    return labels;
}

} // namespace detail

inline void validate(const PatternSpec& spec)
{
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RLPermutationSpec>) {
                if (s.base == nullptr) {
                    throw InvalidInput("random relabeling needs a base point set");
                }
            }
            else {
                detail::check_sizes(s.n1, s.n2);
                if constexpr (std::is_same_v<T, SegregationSpec>) {
                    if (!(s.s >= 0.0 && s.s < 1.0)) {
                        throw InvalidInput("segregation parameter s must lie in [0, 1)");
                    }
                }
                if constexpr (std::is_same_v<T, AssociationSpec>) {
                    if (!(s.r > 0.0 && s.r < 1.0)) {
                        throw InvalidInput("association radius r must lie in (0, 1)");
                    }
                }
            }
        },
        spec);
}

/// Generated sets list class 1 points first, then class 2.
inline LabeledPointSet generate(const PatternSpec& spec, StreamRng& rng)
{
    validate(spec);
    return std::visit(
        [&](const auto& s) -> LabeledPointSet {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RLPermutationSpec>) {
                std::vector<ClassLabel> labels(s.base->labels().begin(), s.base->labels().end());
                rng.shuffle(labels);
                return s.base->relabeled(std::move(labels));
            }
            else {
                std::vector<Point> points;
                points.reserve(s.n1 + s.n2);
                if constexpr (std::is_same_v<T, CsrSpec>) {
                    for (std::uint64_t i = 0; i < s.n1 + s.n2; ++i) {
                        const double x = rng.uniform();
                        points.push_back({x, rng.uniform()});
                    }
                }
                else if constexpr (std::is_same_v<T, SegregationSpec>) {
                    for (std::uint64_t i = 0; i < s.n1; ++i) {
                        const double x = rng.uniform(0.0, 1.0 - s.s);
                        points.push_back({x, rng.uniform(0.0, 1.0 - s.s)});
                    }
                    for (std::uint64_t j = 0; j < s.n2; ++j) {
                        const double x = rng.uniform(s.s, 1.0);
                        points.push_back({x, rng.uniform(s.s, 1.0)});
                    }
                }
                else {
                    for (std::uint64_t i = 0; i < s.n1; ++i) {
                        const double x = rng.uniform();
                        points.push_back({x, rng.uniform()});
                    }
                    for (std::uint64_t j = 0; j < s.n2; ++j) {
                        const Point& anchor = points[rng.below(s.n1)];
                        const double radius = rng.uniform(0.0, s.r);
                        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
                        points.push_back({anchor.x + radius * std::cos(angle), anchor.y + radius * std::sin(angle)});
                    }
                }
                return LabeledPointSet(std::move(points), detail::block_labels(s.n1, s.n2));
            }
        },
        spec);
}

struct QREstimate {
    std::uint64_t n = 0;
    std::uint64_t n_mc = 0;
    double q_per_point = 0.0;
    double r_per_point = 0.0;
    double q_se = 0.0;
    double r_se = 0.0;

    double q_hat() const noexcept { return q_per_point * static_cast<double>(n); }
    double r_hat() const noexcept { return r_per_point * static_cast<double>(n); }
};

/// Means of Q/n and R/n over n_mc CSR samples of n points on the unit square.
/// Replication k uses stream (seed, qr_estimate, n * 2^32 + k); sums are exact
/// integers, so the estimate is bit-identical for any worker count.
inline QREstimate estimate_qr(std::uint64_t n, std::uint64_t n_mc, std::uint64_t seed, std::size_t workers = 1)
{
    if (n < 2) {
        throw InvalidInput("estimate_qr needs n >= 2");
    }
    if (n_mc < 1) {
        throw InvalidInput("estimate_qr needs n_mc >= 1");
    }
    struct Sums {
        std::uint64_t q = 0, r = 0;
        unsigned __int128 q2 = 0, r2 = 0;
    };
    const Sums sums = parallel_reduce(
        n_mc, workers, Sums{},
        [&](std::size_t k, Sums& acc) {
            StreamRng rng(seed, StreamPurpose::qr_estimate, (n << 32) + k);
            std::vector<Point> points(n);
            for (auto& p : points) {
                p.x = rng.uniform();
                p.y = rng.uniform();
            }
            const NNStructure nns = compute_nn(points);
            acc.q += nns.q;
            acc.r += nns.r;
            acc.q2 += static_cast<unsigned __int128>(nns.q) * nns.q;
            acc.r2 += static_cast<unsigned __int128>(nns.r) * nns.r;
        },
        [](Sums& into, const Sums& from) {
            into.q += from.q;
            into.r += from.r;
            into.q2 += from.q2;
            into.r2 += from.r2;
        });
    const double reps = static_cast<double>(n_mc);
    const double nn = static_cast<double>(n);
    auto se = [&](std::uint64_t sum, unsigned __int128 sum2) {
        if (n_mc < 2) {
            return 0.0;
        }
        const double mean = static_cast<double>(sum) / reps;
        const double var = (static_cast<double>(sum2) - reps * mean * mean) / (reps - 1.0);
        return std::sqrt(std::max(var, 0.0) / reps) / nn;
    };
    QREstimate e;
    e.n = n;
    e.n_mc = n_mc;
    e.q_per_point = static_cast<double>(sums.q) / reps / nn;
    e.r_per_point = static_cast<double>(sums.r) / reps / nn;
    e.q_se = se(sums.q, sums.q2);
    e.r_se = se(sums.r, sums.r2);
    return e;
}

struct SizeBand {
    double lower = 0.0;
    double upper = 0.0;
};

/// alpha -/+ z * sqrt(alpha (1 - alpha) / n_mc), z the upper `band_level`
/// normal quantile (one-sided proportion test in each direction).
inline SizeBand size_band(double alpha, std::uint64_t n_mc, double band_level = 0.05)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidInput("alpha must lie in (0, 1)");
    }
    if (n_mc < 1) {
        throw InvalidInput("n_mc must be at least 1");
    }
    const double z = normal_upper_quantile(band_level);
    const double half = z * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n_mc));
    return {alpha - half, alpha + half};
}

enum class SizeFlag { none, conservative, liberal };

inline std::string flag_name(SizeFlag f)
{
    switch (f) {
    case SizeFlag::conservative: return "conservative";
    case SizeFlag::liberal: return "liberal";
    case SizeFlag::none: break;
    }
    return "";
}

inline SizeFlag classify_size(double proportion, const SizeBand& band) noexcept
{
    if (proportion < band.lower) {
        return SizeFlag::conservative;
    }
    if (proportion > band.upper) {
        return SizeFlag::liberal;
    }
    return SizeFlag::none;
}

struct SampleCombo {
    std::uint64_t n1 = 0;
    std::uint64_t n2 = 0;

    friend bool operator==(const SampleCombo&, const SampleCombo&) = default;
};

/// The twelve class-size combinations of the size / power study, in figure order.
inline const std::vector<SampleCombo>& standard_combos()
{
    static const std::vector<SampleCombo> combos{{10, 10}, {10, 30}, {10, 50},  {30, 10},  {30, 30},  {30, 50},
                                                 {50, 10}, {50, 30}, {50, 50}, {50, 100}, {100, 50}, {100, 100}};
    return combos;
}

/// 1-based position in standard_combos(), 0 when not listed.
inline std::size_t combo_index(const SampleCombo& combo)
{
    const auto& combos = standard_combos();
    for (std::size_t i = 0; i < combos.size(); ++i) {
        if (combos[i] == combo) {
            return i + 1;
        }
    }
    return 0;
}

/// One null or alternative pattern family.
struct Scenario {
    enum class Kind { csr, segregation, association };

    Kind kind = Kind::csr;
    double parameter = 0.0;
    std::string name = "CSR";

    static Scenario csr() { return {}; }
    static Scenario segregation(double s, std::string name) { return {Kind::segregation, s, std::move(name)}; }
    static Scenario association(double r, std::string name) { return {Kind::association, r, std::move(name)}; }

    PatternSpec spec(const SampleCombo& c) const
    {
        switch (kind) {
        case Kind::segregation: return SegregationSpec{c.n1, c.n2, parameter};
        case Kind::association: return AssociationSpec{c.n1, c.n2, parameter};
        case Kind::csr: break;
        }
        return CsrSpec{c.n1, c.n2};
    }

    std::string kind_name() const
    {
        switch (kind) {
        case Kind::segregation: return "segregation";
        case Kind::association: return "association";
        case Kind::csr: break;
        }
        return "csr";
    }
};

/// s = 1/6, 1/4, 1/3.
inline std::vector<Scenario> segregation_alternatives()
{
    return {Scenario::segregation(1.0 / 6.0, "HS_I"), Scenario::segregation(1.0 / 4.0, "HS_II"),
            Scenario::segregation(1.0 / 3.0, "HS_III")};
}

/// r = 1/4, 1/7, 1/10.
inline std::vector<Scenario> association_alternatives()
{
    return {Scenario::association(1.0 / 4.0, "HA_I"), Scenario::association(1.0 / 7.0, "HA_II"),
            Scenario::association(1.0 / 10.0, "HA_III")};
}

/// Where adjusted-mode Q and R come from.
enum class QRSource {
    estimated,  // estimate_qr at the combo's n with qr_n_mc replications
    asymptotic, // kAsymptoticQPerPoint * n, kAsymptoticRPerPoint * n
};

struct SimulationConfig {
    std::uint64_t n_mc = 10000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    bool observed_mode = true;
    bool adjusted_mode = true;
    QRSource qr_source = QRSource::estimated;
    std::uint64_t qr_n_mc = 10000;
    /// Significance level of the proportion test behind conservative / liberal flags.
    double band_level = 0.05;
    TestOptions test_options;

    void validate() const
    {
        if (n_mc < 1) {
            throw InvalidInput("n_mc must be at least 1");
        }
        if (!(alpha >= 0.0 && alpha < 1.0)) {
            throw InvalidInput("alpha must lie in [0, 1)");
        }
        if (!observed_mode && !adjusted_mode) {
            throw InvalidInput("at least one QR mode must be selected");
        }
        if (adjusted_mode && qr_source == QRSource::estimated && qr_n_mc < 1) {
            throw InvalidInput("qr_n_mc must be at least 1");
        }
    }
};

struct SizePowerEntry {
    SampleCombo combo;
    std::size_t combo_index = 0;
    std::string scenario;
    std::string scenario_kind;
    double parameter = 0.0;
    TestFlavor flavor = TestFlavor::dixon_c;
    QRMode::Kind mode = QRMode::Kind::observed;
    double q_hat = 0.0; // adjusted mode only
    double r_hat = 0.0;
    std::uint64_t n_mc = 0;
    std::uint64_t rejections = 0;
    std::uint64_t degenerate = 0;
    double proportion = 0.0;
    double standard_error = 0.0;
    SizeFlag flag = SizeFlag::none;
};

struct SizePowerReport {
    double alpha = 0.05;
    std::uint64_t n_mc = 0;
    std::uint64_t seed = 0;
    SizeBand band;
    std::vector<SizePowerEntry> entries;

    const SizePowerEntry& find(const SampleCombo& combo, std::string_view scenario, TestFlavor flavor,
                               QRMode::Kind mode) const
    {
        for (const auto& e : entries) {
            if (e.combo == combo && e.scenario == scenario && e.flavor == flavor && e.mode == mode) {
                return e;
            }
        }
        throw InvalidInput("no such report entry");
    }
};

namespace detail {

inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) noexcept
{
    std::uint64_t s = a ^ (b * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

// Stream index for replication `rep` of (scenario, combo).
inline std::uint64_t replication_key(const Scenario& sc, const SampleCombo& c, std::uint64_t rep) noexcept
{
    std::uint64_t key = mix_key(static_cast<std::uint64_t>(sc.kind) + 1, std::bit_cast<std::uint64_t>(sc.parameter));
    key = mix_key(key, c.n1);
    key = mix_key(key, c.n2);
    return mix_key(key, rep);
}

struct RejectionCounts {
    std::array<std::array<std::uint64_t, 4>, 2> rejected{};
    std::array<std::array<std::uint64_t, 4>, 2> degenerate{};
};

} // namespace detail

/// Adjusted-mode QR for total size n under the configured source.
inline QRMode adjusted_mode_for(std::uint64_t n, const SimulationConfig& config)
{
    if (config.qr_source == QRSource::asymptotic) {
        return QRMode::asymptotic(n);
    }
    const QREstimate e = estimate_qr(n, config.qr_n_mc, config.seed, config.workers);
    return QRMode::adjusted(e.q_hat(), e.r_hat());
}

/// Rejection proportions of the four overall tests for each (scenario, combo).
inline SizePowerReport run_rejection_study(const std::vector<Scenario>& scenarios,
                                           const std::vector<SampleCombo>& combos, const SimulationConfig& config)
{
    config.validate();
    SizePowerReport report;
    report.alpha = config.alpha;
    report.n_mc = config.n_mc;
    report.seed = config.seed;
    if (config.alpha > 0.0) {
        report.band = size_band(config.alpha, config.n_mc, config.band_level);
    }

    std::map<std::uint64_t, QRMode> adjusted_cache;
    for (const SampleCombo& combo : combos) {
        detail::check_sizes(combo.n1, combo.n2);
        const std::uint64_t n = combo.n1 + combo.n2;
        if (n < 4) {
            throw InvalidInput("each combination needs at least 4 points");
        }
        std::vector<QRMode> modes;
        if (config.observed_mode) {
            modes.push_back(QRMode::observed());
        }
        if (config.adjusted_mode) {
            auto it = adjusted_cache.find(n);
            if (it == adjusted_cache.end()) {
                it = adjusted_cache.emplace(n, adjusted_mode_for(n, config)).first;
            }
            modes.push_back(it->second);
        }
        const Margins margins{combo.n1, combo.n2};

        for (const Scenario& scenario : scenarios) {
            const PatternSpec spec = scenario.spec(combo);
            validate(spec);
            std::vector<CovarianceModel> adjusted_models;
            for (const QRMode& mode : modes) {
                if (mode.is_adjusted()) {
                    adjusted_models.push_back(covariance_model(margins, mode.q_hat(), mode.r_hat()));
                }
            }

            const auto counts = parallel_reduce(
                config.n_mc, config.workers, detail::RejectionCounts{},
                [&](std::size_t rep, detail::RejectionCounts& acc) {
                    StreamRng rng(config.seed, StreamPurpose::pattern, detail::replication_key(scenario, combo, rep));
                    const LabeledPointSet pts = generate(spec, rng);
                    const NNStructure nns = compute_nn(pts);
                    const ContingencyTable table = build_nnct(pts, nns);
                    std::size_t adjusted_slot = 0;
                    for (std::size_t m = 0; m < modes.size(); ++m) {
                        const QRMode& mode = modes[m];
                        const std::size_t slot = mode.is_adjusted() ? 1 : 0;
                        const CovarianceModel cov =
                            mode.is_adjusted()
                                ? adjusted_models[adjusted_slot++]
                                : covariance_model(margins, static_cast<double>(nns.q), static_cast<double>(nns.r));
                        for (std::size_t f = 0; f < kOverallFlavors.size(); ++f) {
                            try {
                                const TestResult r =
                                    overall_test(kOverallFlavors[f], table, cov, mode, config.test_options);
                                if (config.alpha > 0.0 && r.p_value <= config.alpha) {
                                    ++acc.rejected[slot][f];
                                }
                            }
                            catch (const DegenerateTest&) {
                                ++acc.degenerate[slot][f];
                            }
                        }
                    }
                },
                [](detail::RejectionCounts& into, const detail::RejectionCounts& from) {
                    for (std::size_t s = 0; s < 2; ++s) {
                        for (std::size_t f = 0; f < 4; ++f) {
                            into.rejected[s][f] += from.rejected[s][f];
                            into.degenerate[s][f] += from.degenerate[s][f];
                        }
                    }
                });

            for (const QRMode& mode : modes) {
                const std::size_t slot = mode.is_adjusted() ? 1 : 0;
                for (std::size_t f = 0; f < kOverallFlavors.size(); ++f) {
                    SizePowerEntry e;
                    e.combo = combo;
                    e.combo_index = combo_index(combo);
                    e.scenario = scenario.name;
                    e.scenario_kind = scenario.kind_name();
                    e.parameter = scenario.parameter;
                    e.flavor = kOverallFlavors[f];
                    e.mode = mode.kind();
                    e.q_hat = mode.q_hat();
                    e.r_hat = mode.r_hat();
                    e.n_mc = config.n_mc;
                    e.rejections = counts.rejected[slot][f];
                    e.degenerate = counts.degenerate[slot][f];
                    e.proportion = static_cast<double>(e.rejections) / static_cast<double>(config.n_mc);
                    e.standard_error =
                        std::sqrt(e.proportion * (1.0 - e.proportion) / static_cast<double>(config.n_mc));
                    if (scenario.kind == Scenario::Kind::csr && config.alpha > 0.0) {
                        e.flag = classify_size(e.proportion, report.band);
                    }
                    report.entries.push_back(std::move(e));
                }
            }
        }
    }
    return report;
}

/// Rejection rates under CSR independence.
inline SizePowerReport empirical_size(const std::vector<SampleCombo>& combos, const SimulationConfig& config)
{
    return run_rejection_study({Scenario::csr()}, combos, config);
}

/// Rejection rates under segregation / association alternatives.
inline SizePowerReport empirical_power(const std::vector<Scenario>& alternatives,
                                       const std::vector<SampleCombo>& combos, const SimulationConfig& config)
{
    return run_rejection_study(alternatives, combos, config);
}

/// Raw statistic values of one flavor over n_mc samples of a scenario.
inline std::vector<double> simulate_statistics(const Scenario& scenario, const SampleCombo& combo, TestFlavor flavor,
                                               std::uint64_t n_mc, std::uint64_t seed, const QRMode& mode = QRMode::observed())
{
    const PatternSpec spec = scenario.spec(combo);
    const Margins margins{combo.n1, combo.n2};
    std::vector<double> stats;
    stats.reserve(n_mc);
    for (std::uint64_t rep = 0; rep < n_mc; ++rep) {
        StreamRng rng(seed, StreamPurpose::pattern, detail::replication_key(scenario, combo, rep));
        const LabeledPointSet pts = generate(spec, rng);
        const NNStructure nns = compute_nn(pts);
        const CovarianceModel cov = covariance_model(margins, mode.q_for(static_cast<double>(nns.q)),
                                                     mode.r_for(static_cast<double>(nns.r)));
        stats.push_back(overall_test(flavor, build_nnct(pts, nns), cov, mode).statistic);
    }
    return stats;
}

} // namespace nnct
