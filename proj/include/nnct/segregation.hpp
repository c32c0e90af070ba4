#pragma once

// Segregation / association tests on a two-class NNCT: Dixon's cell-specific
// Z tests, Dixon's overall C, and three quadratic-form overall tests (versions
// I, II, III), each either conditional on the observed Q, R or QR-adjusted.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "numerics.hpp"
#include "table.hpp"

namespace nnct {

/// Asymptotic E[Q/n] and E[R/n] for a homogeneous planar Poisson pattern.
inline constexpr double kAsymptoticQPerPoint = 0.6327860;
inline constexpr double kAsymptoticRPerPoint = 0.6211200;

class QRMode {
public:
    enum class Kind { observed, adjusted };

    static QRMode observed() noexcept { return QRMode(); }

    static QRMode adjusted(double q_hat, double r_hat)
    {
        if (!(q_hat > 0.0) || !(r_hat > 0.0) || !std::isfinite(q_hat) || !std::isfinite(r_hat)) {
            throw InvalidInput("adjusted Q and R must be positive and finite");
        }
        QRMode mode;
        mode.kind_ = Kind::adjusted;
        mode.q_hat_ = q_hat;
        mode.r_hat_ = r_hat;
        return mode;
    }

    /// Adjusted with the asymptotic per-point constants scaled by n.
    static QRMode asymptotic(std::uint64_t n)
    {
        return adjusted(kAsymptoticQPerPoint * static_cast<double>(n),
                        kAsymptoticRPerPoint * static_cast<double>(n));
    }

    Kind kind() const noexcept { return kind_; }
    bool is_adjusted() const noexcept { return kind_ == Kind::adjusted; }
    double q_hat() const noexcept { return q_hat_; }
    double r_hat() const noexcept { return r_hat_; }

    double q_for(double observed_q) const noexcept { return is_adjusted() ? q_hat_ : observed_q; }
    double r_for(double observed_r) const noexcept { return is_adjusted() ? r_hat_ : observed_r; }

    std::string_view name() const noexcept { return is_adjusted() ? "adjusted" : "observed"; }

    friend bool operator==(const QRMode&, const QRMode&) = default;

private:
    Kind kind_ = Kind::observed;
    double q_hat_ = 0.0;
    double r_hat_ = 0.0;
};

enum class TestFlavor { cell_z, dixon_c, version_i, version_ii, version_iii };

inline constexpr std::array<TestFlavor, 4> kOverallFlavors{TestFlavor::dixon_c, TestFlavor::version_i,
                                                           TestFlavor::version_ii, TestFlavor::version_iii};

inline std::string flavor_name(TestFlavor flavor)
{
    switch (flavor) {
    case TestFlavor::cell_z: return "Z";
    case TestFlavor::dixon_c: return "DixonC";
    case TestFlavor::version_i: return "VersionI";
    case TestFlavor::version_ii: return "VersionII";
    case TestFlavor::version_iii: return "VersionIII";
    }
    return "?";
}

inline std::optional<TestFlavor> parse_flavor(std::string_view text)
{
    for (TestFlavor f : kOverallFlavors) {
        if (text == flavor_name(f)) {
            return f;
        }
    }
    return std::nullopt;
}

enum class Sidedness { two_sided, upper, lower };

struct TestResult {
    TestFlavor flavor = TestFlavor::dixon_c;
    /// (base, NN) class indices, 0-based; set only for cell tests.
    std::optional<std::array<std::size_t, 2>> cell;
    double statistic = 0.0;
    /// Absent for the normal cell tests.
    std::optional<int> df;
    double p_value = 1.0;
    Sidedness sidedness = Sidedness::two_sided;
    QRMode qr_mode;
    double q_used = 0.0;
    double r_used = 0.0;

    /// "DixonC", "VersionI", ..., or "Z11".."Z22".
    std::string label() const
    {
        if (cell) {
            return "Z" + std::to_string((*cell)[0] + 1) + std::to_string((*cell)[1] + 1);
        }
        return flavor_name(flavor);
    }
};

struct TestOptions {
    /// Eigenvalue cutoff for the generalized inverses.
    double rel_cutoff = kDefaultRelCutoff;
};

namespace detail {

inline void check_same_margins(const ContingencyTable& table, const CovarianceModel& cov)
{
    if (table.row_sum(0) != cov.margins.n1 || table.row_sum(1) != cov.margins.n2) {
        throw ConsistencyError("covariance model margins differ from the table's row sums");
    }
}

inline void require_both_classes(const Margins& m)
{
    if (m.n1 == 0 || m.n2 == 0) {
        throw InvalidInput("both classes must be present");
    }
}

inline TestResult chi2_result(TestFlavor flavor, double statistic, int df, const CovarianceModel& cov,
                              const QRMode& mode)
{
    TestResult result;
    result.flavor = flavor;
    result.statistic = std::max(statistic, 0.0);
    result.df = df;
    result.p_value = chi2_sf(result.statistic, df);
    result.qr_mode = mode;
    result.q_used = cov.q_used;
    result.r_used = cov.r_used;
    return result;
}

} // namespace detail

/// Dixon's Z_ij = (N_ij - E[N_ij]) / sqrt(Var[N_ij]) with a normal reference.
inline TestResult cell_specific_test(const ContingencyTable& table, const CovarianceModel& cov, std::size_t i,
                                     std::size_t j, Sidedness sidedness = Sidedness::two_sided,
                                     const QRMode& mode = QRMode::observed())
{
    detail::check_same_margins(table, cov);
    if (i > 1 || j > 1) {
        throw InvalidInput("cell indices must be 0 or 1");
    }
    const double variance = cov.variance(i, j);
    if (!(variance > 0.0)) {
        throw DegenerateTest("cell " + std::to_string(i + 1) + std::to_string(j + 1) + " has zero variance");
    }
    const double z = (static_cast<double>(table(i, j)) - cov.expected[i][j]) / std::sqrt(variance);
    TestResult result;
    result.flavor = TestFlavor::cell_z;
    result.cell = std::array<std::size_t, 2>{i, j};
    result.statistic = z;
    result.sidedness = sidedness;
    switch (sidedness) {
    case Sidedness::two_sided: result.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(z))); break;
    case Sidedness::upper: result.p_value = normal_sf(z); break;
    case Sidedness::lower: result.p_value = normal_sf(-z); break;
    }
    result.qr_mode = mode;
    result.q_used = cov.q_used;
    result.r_used = cov.r_used;
    return result;
}

/// Dixon's overall statistic C = Y' S^{-1} Y over the diagonal cells, df = 2.
inline TestResult dixon_overall(const ContingencyTable& table, const CovarianceModel& cov,
                                const QRMode& mode = QRMode::observed())
{
    detail::check_same_margins(table, cov);
    detail::require_both_classes(cov.margins);
    const double v11 = cov.variance(0, 0);
    const double v22 = cov.variance(1, 1);
    const double c12 = cov.covariance(0, 0, 1, 1);
    const double det = v11 * v22 - c12 * c12;
    if (!(v11 > 0.0) || !(v22 > 0.0) || !(det > 1e-12 * v11 * v22)) {
        throw DegenerateTest("diagonal-cell covariance matrix is singular");
    }
    const double y1 = static_cast<double>(table(0, 0)) - cov.expected[0][0];
    const double y2 = static_cast<double>(table(1, 1)) - cov.expected[1][1];
    const double c = (y1 * y1 * v22 - 2.0 * y1 * y2 * c12 + y2 * y2 * v11) / det;
    return detail::chi2_result(TestFlavor::dixon_c, c, 2, cov, mode);
}

/// Dixon's C through the correlated-Z form (Z_AA^2 + Z_BB^2 - 2 r Z_AA Z_BB)/(1 - r^2).
inline double dixon_overall_from_z(const ContingencyTable& table, const CovarianceModel& cov)
{
    const double v11 = cov.variance(0, 0);
    const double v22 = cov.variance(1, 1);
    if (!(v11 > 0.0) || !(v22 > 0.0)) {
        throw DegenerateTest("diagonal cell has zero variance");
    }
    const double corr = cov.covariance(0, 0, 1, 1) / std::sqrt(v11 * v22);
    if (!(std::abs(corr) < 1.0)) {
        throw DegenerateTest("diagonal cells are perfectly correlated");
    }
    const double za = (static_cast<double>(table(0, 0)) - cov.expected[0][0]) / std::sqrt(v11);
    const double zb = (static_cast<double>(table(1, 1)) - cov.expected[1][1]) / std::sqrt(v22);
    return (za * za + zb * zb - 2.0 * corr * za * zb) / (1.0 - corr * corr);
}

/// Version I: cells centred at n_i c_j / n and scaled by sqrt(n_i c_j / n),
/// conditional on the observed column sums. df = 1.
inline TestResult version_i(const ContingencyTable& table, const CovarianceModel& cov,
                            const QRMode& mode = QRMode::observed(), const TestOptions& options = {})
{
    detail::check_same_margins(table, cov);
    detail::require_both_classes(cov.margins);
    if (table.col_sum(0) == 0 || table.col_sum(1) == 0) {
        throw DegenerateTest("version I needs both column sums positive");
    }
    const double n = static_cast<double>(table.total());
    std::array<double, 4> scale{};
    Vector<4> centred{};
    for (std::size_t a = 0; a < 4; ++a) {
        const std::size_t i = a / 2, j = a % 2;
        scale[a] = std::sqrt(static_cast<double>(table.row_sum(i)) * static_cast<double>(table.col_sum(j)) / n);
        centred[a] = (static_cast<double>(table(i, j)) - scale[a] * scale[a]) / scale[a];
    }
    SymMatrix<4> sigma;
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = a; b < 4; ++b) {
            sigma.set(a, b, cov.sigma(a, b) / (scale[a] * scale[b]));
        }
    }
    const double x2 = quadratic_form(centred, generalized_inverse(sigma, options.rel_cutoff));
    return detail::chi2_result(TestFlavor::version_i, x2, 1, cov, mode);
}

/// Version II: cells centred at n_i n_j / n and scaled by sqrt(n_i n_j / n). df = 2.
inline TestResult version_ii(const ContingencyTable& table, const CovarianceModel& cov,
                             const QRMode& mode = QRMode::observed(), const TestOptions& options = {})
{
    detail::check_same_margins(table, cov);
    detail::require_both_classes(cov.margins);
    const double n = static_cast<double>(table.total());
    std::array<double, 4> scale{};
    Vector<4> centred{};
    for (std::size_t a = 0; a < 4; ++a) {
        const std::size_t i = a / 2, j = a % 2;
        scale[a] = std::sqrt(static_cast<double>(table.row_sum(i)) * static_cast<double>(table.row_sum(j)) / n);
        centred[a] = (static_cast<double>(table(i, j)) - scale[a] * scale[a]) / scale[a];
    }
    SymMatrix<4> sigma;
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = a; b < 4; ++b) {
            sigma.set(a, b, cov.sigma(a, b) / (scale[a] * scale[b]));
        }
    }
    const double x2 = quadratic_form(centred, generalized_inverse(sigma, options.rel_cutoff));
    return detail::chi2_result(TestFlavor::version_ii, x2, 2, cov, mode);
}

/// Linear map T = A N taking cell counts to the version III contrasts
/// T_ij = N_ij - w_ij C_j, with w_ii = (n_i - 1)/(n - 1) and w_ij = n_i/(n - 1).
inline SquareMatrix<4> version_iii_transform(const Margins& m)
{
    const double n = static_cast<double>(m.total());
    SquareMatrix<4> a{};
    for (std::size_t row = 0; row < 4; ++row) {
        const std::size_t i = row / 2, j = row % 2;
        const double ni = static_cast<double>(m.size(i));
        const double w = (i == j ? ni - 1.0 : ni) / (n - 1.0);
        a[row][row] += 1.0;
        for (std::size_t k = 0; k < 2; ++k) {
            a[row][cell_index(k, j)] -= w;
        }
    }
    return a;
}

/// Version III: contrasts against column sums, covariance A S A'. df = 1.
///
/// The contrasts satisfy T_1j = -T_2j exactly, and T_11 + T_12 = (C_1 - n_1)/(n - 1)
/// is O(1/sqrt(n)), so A S A' has one dominant eigenvalue plus one of relative
/// size O(1/n). The statistic projects onto the dominant direction only
/// (generalized inverse capped at rank df = 1).
inline TestResult version_iii(const ContingencyTable& table, const CovarianceModel& cov,
                              const QRMode& mode = QRMode::observed(), const TestOptions& options = {})
{
    detail::check_same_margins(table, cov);
    detail::require_both_classes(cov.margins);
    const SquareMatrix<4> a = version_iii_transform(cov.margins);
    const Vector<4> counts = table.as_vector();
    Vector<4> contrasts{};
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            contrasts[r] += a[r][c] * counts[c];
        }
    }
    const SymMatrix<4> sigma = congruence(a, cov.sigma);
    const double x2 = quadratic_form(contrasts, generalized_inverse(sigma, options.rel_cutoff, 1));
    return detail::chi2_result(TestFlavor::version_iii, x2, 1, cov, mode);
}

/// Evaluates one overall flavor.
inline TestResult overall_test(TestFlavor flavor, const ContingencyTable& table, const CovarianceModel& cov,
                               const QRMode& mode = QRMode::observed(), const TestOptions& options = {})
{
    switch (flavor) {
    case TestFlavor::dixon_c: return dixon_overall(table, cov, mode);
    case TestFlavor::version_i: return version_i(table, cov, mode, options);
    case TestFlavor::version_ii: return version_ii(table, cov, mode, options);
    case TestFlavor::version_iii: return version_iii(table, cov, mode, options);
    case TestFlavor::cell_z: break;
    }
    throw InvalidInput("cell tests are not overall tests");
}

struct Battery {
    ContingencyTable table;
    double q_observed = 0.0;
    double r_observed = 0.0;
    QRMode qr_mode;
    CovarianceModel covariance;
    /// DixonC, VersionI, VersionII, VersionIII, then Z11, Z12, Z21, Z22.
    std::vector<TestResult> results;

    const TestResult& find(TestFlavor flavor) const
    {
        for (const auto& r : results) {
            if (r.flavor == flavor) {
                return r;
            }
        }
        throw InvalidInput("flavor not in battery");
    }
};

/// All four overall tests and the four cell tests from a table and its digraph's Q, R.
inline Battery run_battery(const ContingencyTable& table, double q_observed, double r_observed,
                           const QRMode& mode = QRMode::observed(), const TestOptions& options = {},
                           Sidedness cell_sidedness = Sidedness::two_sided)
{
    const Margins margins = Margins::of(table);
    detail::require_both_classes(margins);
    Battery battery;
    battery.table = table;
    battery.q_observed = q_observed;
    battery.r_observed = r_observed;
    battery.qr_mode = mode;
    battery.covariance = covariance_model(margins, mode.q_for(q_observed), mode.r_for(r_observed));
    for (TestFlavor flavor : kOverallFlavors) {
        battery.results.push_back(overall_test(flavor, table, battery.covariance, mode, options));
    }
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            battery.results.push_back(cell_specific_test(table, battery.covariance, i, j, cell_sidedness, mode));
        }
    }
    return battery;
}

inline Battery run_battery(const LabeledPointSet& pts, const QRMode& mode = QRMode::observed(),
                           const TestOptions& options = {}, Sidedness cell_sidedness = Sidedness::two_sided)
{
    const NNStructure nns = compute_nn(pts);
    return run_battery(build_nnct(pts, nns), static_cast<double>(nns.q), static_cast<double>(nns.r), mode,
                       options, cell_sidedness);
}

} // namespace nnct
