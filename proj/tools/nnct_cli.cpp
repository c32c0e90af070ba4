// nnct: nearest neighbor contingency table tests from the command line.
//
//   nnct analyze points.csv [--qr-mode observed|adjusted|adjusted-asymptotic] [--cells]
//   nnct analyze --table 157,54,52,131 --q 270 --r 236
//   nnct simulate size|power-seg|power-assoc [--combos 50,50 ...] [--nmc N] [--out prefix]
//   nnct estimate-qr --n 10,100,1000 [--nmc N]
//
// Exit codes: 0 success, 1 usage, 2 parse error, 3 invalid input,
// 4 degenerate test, 5 other failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nnct/nnct.hpp"

namespace {

enum ExitCode { ok = 0, usage = 1, parse = 2, invalid = 3, degenerate = 4, failure = 5 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Accepts decimals and simple fractions such as "1/6".
double parse_fraction(const std::string& text)
{
    const auto slash = text.find('/');
    try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
            const double v = std::stod(text, &used);
            if (used != text.size()) {
                throw UsageError("bad number: " + text);
            }
            return v;
        }
        const double num = std::stod(text.substr(0, slash), &used);
        if (used != slash) {
            throw UsageError("bad fraction: " + text);
        }
        const std::string den_text = text.substr(slash + 1);
        const double den = std::stod(den_text, &used);
        if (used != den_text.size() || den == 0.0) {
            throw UsageError("bad fraction: " + text);
        }
        return num / den;
    }
    catch (const std::logic_error&) {
        throw UsageError("bad number: " + text);
    }
}

std::vector<nnct::SampleCombo> parse_combos(const std::vector<std::string>& items)
{
    std::vector<nnct::SampleCombo> combos;
    for (const auto& item : items) {
        const auto comma = item.find(',');
        if (comma == std::string::npos) {
            throw UsageError("combination must look like n1,n2: " + item);
        }
        try {
            const long long n1 = std::stoll(item.substr(0, comma));
            const long long n2 = std::stoll(item.substr(comma + 1));
            if (n1 < 1 || n2 < 1) {
                throw UsageError("class sizes must be positive: " + item);
            }
            combos.push_back({static_cast<std::uint64_t>(n1), static_cast<std::uint64_t>(n2)});
        }
        catch (const std::logic_error&) {
            throw UsageError("combination must look like n1,n2: " + item);
        }
    }
    return combos;
}

/// Writes to the named file, or stdout when the name is empty or "-".
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) {
                throw std::runtime_error("cannot write " + path);
            }
        }
    }

    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

struct AnalyzeArgs {
    std::string input;
    std::vector<std::uint64_t> table;
    std::optional<double> q;
    std::optional<double> r;
    std::string qr_mode = "observed";
    std::optional<double> q_hat;
    std::optional<double> r_hat;
    std::uint64_t n_mc = 10000;
    std::uint64_t seed = 1;
    bool cells = false;
    std::string sided = "two";
    std::uint64_t n_perm = 0;
    std::string format = "json";
    std::vector<std::string> classes;
    std::string delimiter = ",";
    bool no_header = false;
    double rel_cutoff = nnct::kDefaultRelCutoff;
    std::size_t workers = 1;
    std::string output;
};

int run_analyze(const AnalyzeArgs& args)
{
    nnct::AnalysisReport report;
    report.include_cells = args.cells;
    report.seed = args.seed;

    std::optional<nnct::LabeledPointSet> points;
    nnct::ContingencyTable table;
    double q = 0.0;
    double r = 0.0;
    if (!args.table.empty()) {
        if (!args.input.empty()) {
            throw UsageError("give either an input file or --table, not both");
        }
        if (!args.q || !args.r) {
            throw UsageError("--table needs --q and --r");
        }
        table = nnct::ContingencyTable(nnct::CountMatrix{{{args.table[0], args.table[1]}, {args.table[2], args.table[3]}}});
        q = *args.q;
        r = *args.r;
    }
    else {
        if (args.input.empty()) {
            throw UsageError("an input file or --table is required");
        }
        if (args.delimiter.size() != 1) {
            throw UsageError("--delimiter must be a single character");
        }
        nnct::CsvOptions csv;
        csv.delimiter = args.delimiter[0];
        csv.header = args.no_header ? nnct::HeaderMode::absent : nnct::HeaderMode::automatic;
        csv.classes = args.classes;
        nnct::PointData data = nnct::read_points_csv(args.input, csv);
        report.class_names = data.class_names;
        const nnct::NNStructure nns = nnct::compute_nn(data.points);
        report.duplicate_points = nns.duplicate_points;
        if (nns.duplicate_points > 0) {
            std::cerr << "warning: " << nns.duplicate_points << " points have a duplicate location\n";
        }
        table = nnct::build_nnct(data.points, nns);
        q = static_cast<double>(nns.q);
        r = static_cast<double>(nns.r);
        points.emplace(std::move(data.points));
    }
    report.n1 = table.row_sum(0);
    report.n2 = table.row_sum(1);
    report.n = table.total();

    nnct::QRMode mode = nnct::QRMode::observed();
    if (args.qr_mode == "adjusted") {
        if (args.q_hat || args.r_hat) {
            if (!args.q_hat || !args.r_hat) {
                throw UsageError("--q-hat and --r-hat go together");
            }
            mode = nnct::QRMode::adjusted(*args.q_hat, *args.r_hat);
            report.qr_source = "supplied";
        }
        else {
            if (args.n_mc < 1) {
                throw UsageError("--nmc must be at least 1");
            }
            const nnct::QREstimate est = nnct::estimate_qr(report.n, args.n_mc, args.seed, args.workers);
            mode = nnct::QRMode::adjusted(est.q_hat(), est.r_hat());
            report.qr_source = "estimated";
            report.qr_n_mc = args.n_mc;
        }
    }
    else if (args.qr_mode == "adjusted-asymptotic") {
        mode = nnct::QRMode::asymptotic(report.n);
        report.qr_source = "asymptotic";
    }
    else if (args.qr_mode != "observed") {
        throw UsageError("unknown --qr-mode " + args.qr_mode);
    }

    nnct::Sidedness sided = nnct::Sidedness::two_sided;
    if (args.sided == "upper") {
        sided = nnct::Sidedness::upper;
    }
    else if (args.sided == "lower") {
        sided = nnct::Sidedness::lower;
    }
    else if (args.sided != "two") {
        throw UsageError("--sided must be two, upper or lower");
    }

    nnct::TestOptions options;
    options.rel_cutoff = args.rel_cutoff;
    report.battery = nnct::run_battery(table, q, r, mode, options, sided);

    if (args.n_perm > 0) {
        if (!points) {
            throw UsageError("--perm needs point data, not --table");
        }
        for (nnct::TestFlavor flavor : nnct::kOverallFlavors) {
            const auto perm = nnct::permutation_test(*points, flavor, args.n_perm, args.seed, args.workers, options);
            report.permutation.push_back({flavor, args.n_perm, perm.p_value});
        }
    }

    Output out(args.output);
    if (args.format == "json") {
        out.stream() << nnct::to_json(report).dump(2) << '\n';
    }
    else if (args.format == "csv") {
        nnct::write_analysis_csv(out.stream(), report);
    }
    else {
        throw UsageError("--format must be json or csv");
    }
    return ok;
}

struct SimulateArgs {
    std::string kind;
    std::vector<std::string> combos;
    std::optional<std::uint64_t> n_mc;
    std::uint64_t seed = 1;
    double alpha = 0.05;
    std::vector<std::string> s_values;
    std::vector<std::string> r_values;
    std::string qr_source = "estimated";
    std::uint64_t qr_n_mc = 10000;
    std::string modes = "observed,adjusted";
    std::size_t workers = 1;
    std::string out;
};

int run_simulate(const SimulateArgs& args)
{
    nnct::SimulationConfig config;
    config.n_mc = args.n_mc.value_or(args.kind == "size" ? 10000 : 1000);
    if (config.n_mc < 1) {
        throw UsageError("--nmc must be at least 1");
    }
    if (!(args.alpha >= 0.0 && args.alpha < 1.0)) {
        throw UsageError("--alpha must lie in [0, 1)");
    }
    config.alpha = args.alpha;
    config.seed = args.seed;
    config.workers = std::max<std::size_t>(1, args.workers);
    config.qr_n_mc = args.qr_n_mc;
    config.observed_mode = args.modes.find("observed") != std::string::npos;
    config.adjusted_mode = args.modes.find("adjusted") != std::string::npos;
    if (!config.observed_mode && !config.adjusted_mode) {
        throw UsageError("--modes must name observed and/or adjusted");
    }
    if (args.qr_source == "asymptotic") {
        config.qr_source = nnct::QRSource::asymptotic;
    }
    else if (args.qr_source != "estimated") {
        throw UsageError("--qr-source must be estimated or asymptotic");
    }
    const std::vector<nnct::SampleCombo> combos =
        args.combos.empty() ? nnct::standard_combos() : parse_combos(args.combos);

    std::vector<nnct::Scenario> scenarios;
    if (args.kind == "size") {
        scenarios.push_back(nnct::Scenario::csr());
    }
    else if (args.kind == "power-seg") {
        if (args.s_values.empty()) {
            scenarios = nnct::segregation_alternatives();
        }
        for (const auto& text : args.s_values) {
            const double s = parse_fraction(text);
            if (!(s >= 0.0 && s < 1.0)) {
                throw UsageError("--s values must lie in [0, 1)");
            }
            scenarios.push_back(nnct::Scenario::segregation(s, "s=" + text));
        }
    }
    else if (args.kind == "power-assoc") {
        if (args.r_values.empty()) {
            scenarios = nnct::association_alternatives();
        }
        for (const auto& text : args.r_values) {
            const double r = parse_fraction(text);
            if (!(r > 0.0 && r < 1.0)) {
                throw UsageError("--r values must lie in (0, 1)");
            }
            scenarios.push_back(nnct::Scenario::association(r, "r=" + text));
        }
    }
    else {
        throw UsageError("simulate kind must be size, power-seg or power-assoc");
    }

    const nnct::SizePowerReport report = nnct::run_rejection_study(scenarios, combos, config);
    if (args.out.empty() || args.out == "-") {
        nnct::write_report_csv(std::cout, report);
        return ok;
    }
    {
        Output csv(args.out + ".csv");
        nnct::write_report_csv(csv.stream(), report);
    }
    {
        Output json(args.out + ".json");
        json.stream() << nnct::to_json(report).dump(2) << '\n';
    }
    {
        Output plot(args.out + "_plot.csv");
        nnct::write_plot_csv(plot.stream(), report);
    }
    std::cerr << "wrote " << args.out << ".csv, " << args.out << ".json, " << args.out << "_plot.csv\n";
    return ok;
}

struct EstimateArgs {
    std::vector<std::uint64_t> sizes{10, 20, 30, 40, 50, 100, 500, 1000};
    std::uint64_t n_mc = 10000;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::string format = "csv";
    std::string output;
};

int run_estimate(const EstimateArgs& args)
{
    if (args.n_mc < 1) {
        throw UsageError("--nmc must be at least 1");
    }
    std::vector<nnct::QREstimate> rows;
    for (std::uint64_t n : args.sizes) {
        if (n < 2) {
            throw UsageError("--n values must be at least 2");
        }
        rows.push_back(nnct::estimate_qr(n, args.n_mc, args.seed, std::max<std::size_t>(1, args.workers)));
    }
    Output out(args.output);
    if (args.format == "csv") {
        nnct::write_qr_csv(out.stream(), rows);
    }
    else if (args.format == "json") {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& e : rows) {
            j.push_back({{"n", e.n},
                         {"n_mc", e.n_mc},
                         {"q_over_n", e.q_per_point},
                         {"r_over_n", e.r_per_point},
                         {"q_se", e.q_se},
                         {"r_se", e.r_se}});
        }
        out.stream() << j.dump(2) << '\n';
    }
    else {
        throw UsageError("--format must be csv or json");
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Nearest neighbor contingency table tests of spatial segregation and association"};
    app.set_version_flag("--version", std::string(nnct::kVersion));
    app.set_config("--config", "", "read options from a key = value file");
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* cmd_analyze = app.add_subcommand("analyze", "run the NNCT test battery on point data or a table");
    cmd_analyze->add_option("input", analyze.input, "CSV file with x, y, label columns");
    cmd_analyze->add_option("--table", analyze.table, "NNCT counts N11,N12,N21,N22 instead of points")
        ->delimiter(',')
        ->expected(4);
    cmd_analyze->add_option("--q", analyze.q, "observed Q (with --table)");
    cmd_analyze->add_option("--r", analyze.r, "observed R (with --table)");
    cmd_analyze->add_option("--qr-mode", analyze.qr_mode, "observed | adjusted | adjusted-asymptotic")
        ->check(CLI::IsMember({"observed", "adjusted", "adjusted-asymptotic"}));
    cmd_analyze->add_option("--q-hat", analyze.q_hat, "explicit adjusted Q (with --qr-mode adjusted)");
    cmd_analyze->add_option("--r-hat", analyze.r_hat, "explicit adjusted R (with --qr-mode adjusted)");
    cmd_analyze->add_option("--nmc", analyze.n_mc, "replications for estimating E[Q], E[R]");
    cmd_analyze->add_option("--seed", analyze.seed, "random seed");
    cmd_analyze->add_flag("--cells", analyze.cells, "include the four cell-specific Z tests");
    cmd_analyze->add_option("--sided", analyze.sided, "cell test alternative: two | upper | lower");
    cmd_analyze->add_option("--perm", analyze.n_perm, "random-labeling permutations for Monte Carlo p-values");
    cmd_analyze->add_option("--format", analyze.format, "json | csv");
    cmd_analyze->add_option("--classes", analyze.classes, "two class names mapped to classes 1 and 2")
        ->delimiter(',')
        ->expected(2);
    cmd_analyze->add_option("--delimiter", analyze.delimiter, "field delimiter");
    cmd_analyze->add_flag("--no-header", analyze.no_header, "first row is data");
    cmd_analyze->add_option("--rel-cutoff", analyze.rel_cutoff, "eigenvalue cutoff for generalized inverses");
    cmd_analyze->add_option("--workers", analyze.workers, "worker threads");
    cmd_analyze->add_option("-o,--output", analyze.output, "output file (default stdout)");

    SimulateArgs simulate;
    auto* cmd_simulate = app.add_subcommand("simulate", "empirical size or power of the overall tests");
    cmd_simulate->add_option("kind", simulate.kind, "size | power-seg | power-assoc")
        ->required()
        ->check(CLI::IsMember({"size", "power-seg", "power-assoc"}));
    cmd_simulate->add_option("--combos", simulate.combos, "class sizes n1,n2 (repeatable); default: 12 standard");
    cmd_simulate->add_option("--nmc", simulate.n_mc, "replications (default 10000 size, 1000 power)");
    cmd_simulate->add_option("--seed", simulate.seed, "random seed");
    cmd_simulate->add_option("--alpha", simulate.alpha, "nominal level");
    cmd_simulate->add_option("--s", simulate.s_values, "segregation parameters, e.g. 1/6,1/4,1/3")->delimiter(',');
    cmd_simulate->add_option("--r", simulate.r_values, "association radii, e.g. 1/4,1/7,1/10")->delimiter(',');
    cmd_simulate->add_option("--qr-source", simulate.qr_source, "estimated | asymptotic");
    cmd_simulate->add_option("--qr-nmc", simulate.qr_n_mc, "replications for adjusted-mode E[Q], E[R]");
    cmd_simulate->add_option("--modes", simulate.modes, "observed,adjusted (either or both)");
    cmd_simulate->add_option("--workers", simulate.workers, "worker threads");
    cmd_simulate->add_option("--out", simulate.out, "output prefix for .csv, .json and _plot.csv");

    EstimateArgs estimate;
    auto* cmd_estimate = app.add_subcommand("estimate-qr", "Monte Carlo E[Q/n] and E[R/n] under CSR");
    cmd_estimate->add_option("--n", estimate.sizes, "sample sizes")->delimiter(',');
    cmd_estimate->add_option("--nmc", estimate.n_mc, "replications per size");
    cmd_estimate->add_option("--seed", estimate.seed, "random seed");
    cmd_estimate->add_option("--workers", estimate.workers, "worker threads");
    cmd_estimate->add_option("--format", estimate.format, "csv | json");
    cmd_estimate->add_option("-o,--output", estimate.output, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (cmd_analyze->parsed()) {
            return run_analyze(analyze);
        }
        if (cmd_simulate->parsed()) {
            return run_simulate(simulate);
        }
        if (cmd_estimate->parsed()) {
            return run_estimate(estimate);
        }
    }
    catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    }
    catch (const nnct::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return parse;
    }
    catch (const nnct::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return invalid;
    }
    catch (const nnct::DegenerateTest& e) {
        std::cerr << "degenerate test: " << e.what() << '\n';
        return degenerate;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
    return usage;
}
