#pragma once

// Serialization of analysis results (JSON) and simulation reports (CSV, JSON).
// Field names are part of the output schema; see kReportSchemaVersion.

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "io.hpp"
#include "montecarlo.hpp"
#include "permutation.hpp"
#include "segregation.hpp"
#include "version.hpp"

namespace nnct {

struct PermutationSummary {
    TestFlavor flavor = TestFlavor::dixon_c;
    std::uint64_t n_perm = 0;
    double p_value = 1.0;
};

struct AnalysisReport {
    std::uint64_t n = 0;
    std::uint64_t n1 = 0;
    std::uint64_t n2 = 0;
    std::array<std::string, 2> class_names{"1", "2"};
    std::size_t duplicate_points = 0;
    Battery battery;
    /// "observed", "estimated" or "asymptotic".
    std::string qr_source = "observed";
    std::uint64_t qr_n_mc = 0;
    bool include_cells = false;
    std::optional<std::uint64_t> seed;
    std::vector<PermutationSummary> permutation;
};

inline std::string sidedness_name(Sidedness s)
{
    switch (s) {
    case Sidedness::upper: return "upper";
    case Sidedness::lower: return "lower";
    case Sidedness::two_sided: break;
    }
    return "two-sided";
}

inline nlohmann::ordered_json to_json(const TestResult& r)
{
    nlohmann::ordered_json j;
    j["flavor"] = r.label();
    j["statistic"] = r.statistic;
    j["df"] = r.df ? nlohmann::ordered_json(*r.df) : nlohmann::ordered_json(nullptr);
    j["p_value"] = r.p_value;
    if (r.cell) {
        j["sidedness"] = sidedness_name(r.sidedness);
    }
    j["q_used"] = r.q_used;
    j["r_used"] = r.r_used;
    return j;
}

inline nlohmann::ordered_json to_json(const AnalysisReport& report)
{
    const ContingencyTable& t = report.battery.table;
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tool_version"] = kVersion;
    j["input"] = {{"n", report.n},
                  {"n1", report.n1},
                  {"n2", report.n2},
                  {"classes", report.class_names},
                  {"duplicate_points", report.duplicate_points}};
    j["nnct"] = {{"counts", {{t(0, 0), t(0, 1)}, {t(1, 0), t(1, 1)}}},
                 {"row_sums", {t.row_sum(0), t.row_sum(1)}},
                 {"col_sums", {t.col_sum(0), t.col_sum(1)}},
                 {"total", t.total()},
                 {"row_percentages",
                  {{t.row_percentage(0, 0), t.row_percentage(0, 1)}, {t.row_percentage(1, 0), t.row_percentage(1, 1)}}}};
    const auto& e = report.battery.covariance.expected;
    j["expected"] = {{e[0][0], e[0][1]}, {e[1][0], e[1][1]}};
    j["q"] = report.battery.q_observed;
    j["r"] = report.battery.r_observed;
    nlohmann::ordered_json mode;
    mode["mode"] = std::string(report.battery.qr_mode.name());
    if (report.battery.qr_mode.is_adjusted()) {
        mode["source"] = report.qr_source;
        mode["q_hat"] = report.battery.qr_mode.q_hat();
        mode["r_hat"] = report.battery.qr_mode.r_hat();
        if (report.qr_n_mc > 0) {
            mode["n_mc"] = report.qr_n_mc;
        }
    }
    j["qr_mode"] = mode;
    j["seed"] = report.seed ? nlohmann::ordered_json(*report.seed) : nlohmann::ordered_json(nullptr);
    j["tests"] = nlohmann::ordered_json::array();
    for (const TestResult& r : report.battery.results) {
        if (r.cell && !report.include_cells) {
            continue;
        }
        j["tests"].push_back(to_json(r));
    }
    if (!report.permutation.empty()) {
        j["permutation"] = nlohmann::ordered_json::array();
        for (const auto& p : report.permutation) {
            j["permutation"].push_back({{"flavor", flavor_name(p.flavor)}, {"n_perm", p.n_perm}, {"p_value", p.p_value}});
        }
    }
    return j;
}

/// One row per reported test.
inline void write_analysis_csv(std::ostream& out, const AnalysisReport& report)
{
    out << "flavor,statistic,df,p_value,qr_mode,q_used,r_used\n";
    for (const TestResult& r : report.battery.results) {
        if (r.cell && !report.include_cells) {
            continue;
        }
        out << r.label() << ',' << format_double(r.statistic) << ',' << (r.df ? std::to_string(*r.df) : "") << ','
            << format_double(r.p_value) << ',' << r.qr_mode.name() << ',' << format_double(r.q_used) << ','
            << format_double(r.r_used) << '\n';
    }
}

inline std::string mode_name(QRMode::Kind kind) { return kind == QRMode::Kind::adjusted ? "adjusted" : "observed"; }

inline void write_report_csv(std::ostream& out, const SizePowerReport& report)
{
    out << "combo_index,n1,n2,scenario,kind,parameter,test,mode,q_hat,r_hat,n_mc,rejections,degenerate,"
           "proportion,standard_error,flag\n";
    for (const auto& e : report.entries) {
        out << e.combo_index << ',' << e.combo.n1 << ',' << e.combo.n2 << ',' << e.scenario << ',' << e.scenario_kind
            << ',' << format_double(e.parameter) << ',' << flavor_name(e.flavor) << ',' << mode_name(e.mode) << ','
            << format_double(e.q_hat) << ',' << format_double(e.r_hat) << ',' << e.n_mc << ',' << e.rejections << ','
            << e.degenerate << ',' << format_double(e.proportion) << ',' << format_double(e.standard_error) << ','
            << flag_name(e.flag) << '\n';
    }
}

/// Long format for plotting: x = combo index, one series per (scenario, test, mode).
inline void write_plot_csv(std::ostream& out, const SizePowerReport& report)
{
    out << "combo_index,combo,scenario,series,estimate\n";
    for (const auto& e : report.entries) {
        out << e.combo_index << ",\"(" << e.combo.n1 << ',' << e.combo.n2 << ")\"," << e.scenario << ','
            << flavor_name(e.flavor) << (e.mode == QRMode::Kind::adjusted ? "_qr" : "") << ','
            << format_double(e.proportion) << '\n';
    }
}

inline nlohmann::ordered_json to_json(const SizePowerReport& report)
{
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tool_version"] = kVersion;
    j["alpha"] = report.alpha;
    j["n_mc"] = report.n_mc;
    j["seed"] = report.seed;
    j["band"] = {report.band.lower, report.band.upper};
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
        nlohmann::ordered_json row;
        row["combo_index"] = e.combo_index;
        row["n1"] = e.combo.n1;
        row["n2"] = e.combo.n2;
        row["scenario"] = e.scenario;
        row["kind"] = e.scenario_kind;
        row["parameter"] = e.parameter;
        row["test"] = flavor_name(e.flavor);
        row["mode"] = mode_name(e.mode);
        if (e.mode == QRMode::Kind::adjusted) {
            row["q_hat"] = e.q_hat;
            row["r_hat"] = e.r_hat;
        }
        row["rejections"] = e.rejections;
        row["degenerate"] = e.degenerate;
        row["proportion"] = e.proportion;
        row["standard_error"] = e.standard_error;
        row["flag"] = flag_name(e.flag);
        j["entries"].push_back(std::move(row));
    }
    return j;
}

inline void write_qr_csv(std::ostream& out, const std::vector<QREstimate>& rows)
{
    out << "n,n_mc,q_over_n,r_over_n,q_se,r_se\n";
    for (const auto& e : rows) {
        out << e.n << ',' << e.n_mc << ',' << format_double(e.q_per_point) << ',' << format_double(e.r_per_point)
            << ',' << format_double(e.q_se) << ',' << format_double(e.r_se) << '\n';
    }
}

} // namespace nnct
