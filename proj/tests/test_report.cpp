#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "nnct/report.hpp"

using namespace nnct;
using Catch::Approx;

namespace {

AnalysisReport artificial_report(bool cells, QRMode mode = QRMode::observed())
{
    AnalysisReport r;
    r.battery = run_battery(ContingencyTable(CountMatrix{{{30, 20}, {19, 31}}}), 70, 60, mode);
    r.n = 100;
    r.n1 = 50;
    r.n2 = 50;
    r.class_names = {"X", "Y"};
    r.include_cells = cells;
    r.seed = 1;
    return r;
}

} // namespace

TEST_CASE("analysis JSON carries the table, moments and tests", "[report]")
{
    const auto j = to_json(artificial_report(false));
    CHECK(j["schema_version"] == kReportSchemaVersion);
    CHECK(j["input"]["n"] == 100);
    CHECK(j["nnct"]["counts"][0][0] == 30);
    CHECK(j["nnct"]["col_sums"][1] == 51);
    CHECK(j["q"] == 70.0);
    CHECK(j["qr_mode"]["mode"] == "observed");
    CHECK_FALSE(j["qr_mode"].contains("q_hat"));
    REQUIRE(j["tests"].size() == 4);
    CHECK(j["tests"][0]["flavor"] == "DixonC");
    CHECK(j["tests"][0]["df"] == 2);
    CHECK(j["tests"][0]["statistic"].get<double>() == Approx(3.3556).margin(5e-4));
    CHECK(j["expected"][0][0].get<double>() == Approx(50.0 * 49.0 / 99.0));

    const auto& counts = j["nnct"]["counts"];
    const auto& pct = j["nnct"]["row_percentages"];
    for (int i = 0; i < 2; ++i) {
        const double row = counts[i][0].get<double>() + counts[i][1].get<double>();
        for (int k = 0; k < 2; ++k) {
            CHECK(pct[i][k].get<double>() == Approx(100.0 * counts[i][k].get<double>() / row));
        }
    }
}

TEST_CASE("cell tests appear only when requested", "[report]")
{
    const auto j = to_json(artificial_report(true));
    REQUIRE(j["tests"].size() == 8);
    CHECK(j["tests"][4]["flavor"] == "Z11");
    CHECK(j["tests"][4]["df"].is_null());
    CHECK(j["tests"][4]["sidedness"] == "two-sided");
    CHECK_FALSE(j["tests"][0].contains("sidedness"));

    std::ostringstream csv;
    write_analysis_csv(csv, artificial_report(true));
    std::istringstream lines(csv.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        ++count;
    }
    CHECK(count == 9);
}

TEST_CASE("adjusted mode reports its Q and R", "[report]")
{
    AnalysisReport r = artificial_report(false, QRMode::adjusted(63.37, 62.17));
    r.qr_source = "estimated";
    r.qr_n_mc = 10000;
    const auto j = to_json(r);
    CHECK(j["qr_mode"]["mode"] == "adjusted");
    CHECK(j["qr_mode"]["q_hat"] == 63.37);
    CHECK(j["qr_mode"]["n_mc"] == 10000);
    CHECK(j["tests"][0]["q_used"] == 63.37);
    CHECK(j["q"] == 70.0);
}

TEST_CASE("JSON output is byte-stable through a parse and dump", "[report]")
{
    const std::string text = to_json(artificial_report(true)).dump(2);
    CHECK(nlohmann::ordered_json::parse(text).dump(2) == text);
    CHECK(to_json(artificial_report(true)).dump(2) == text);
}

TEST_CASE("simulation report writers", "[report]")
{
    SizePowerReport rep;
    rep.n_mc = 10;
    rep.band = size_band(0.05, 10);
    SizePowerEntry e;
    e.combo = {10, 10};
    e.combo_index = 1;
    e.scenario = "CSR";
    e.scenario_kind = "csr";
    e.n_mc = 10;
    e.rejections = 1;
    e.proportion = 0.1;
    e.mode = QRMode::Kind::adjusted;
    rep.entries.push_back(e);

    std::ostringstream csv;
    write_report_csv(csv, rep);
    CHECK(csv.str().find("1,10,10,CSR,csr,0,DixonC,adjusted,") != std::string::npos);
    std::ostringstream plot;
    write_plot_csv(plot, rep);
    CHECK(plot.str().find("DixonC_qr,0.1") != std::string::npos);
    const auto j = to_json(rep);
    CHECK(j["entries"][0]["mode"] == "adjusted");
    CHECK(j["entries"][0].contains("q_hat"));

    std::ostringstream qr;
    write_qr_csv(qr, {QREstimate{2, 5, 0.0, 1.0, 0.0, 0.0}});
    CHECK(qr.str() == "n,n_mc,q_over_n,r_over_n,q_se,r_se\n2,5,0,1,0,0\n");
}
