#include "pcbff/cli.hpp"

#include "pcbff/baselines.hpp"
#include "pcbff/bff.hpp"
#include "pcbff/error.hpp"
#include "pcbff/io.hpp"
#include "pcbff/pcstats.hpp"
#include "pcbff/simulate.hpp"
#include "pcbff/specfun.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace pcbff::cli {

namespace {

namespace fs = std::filesystem;

struct InputOptions {
    std::optional<double> t;
    std::optional<double> r;
    std::optional<int> n;
    std::optional<int> p;
    std::string data;
    std::string response;
    std::string target;
};

struct CurveOptions {
    double nu = 1.0;
    int bins = bff::kDefaultBins;
    std::string branch = "symmetric";
    bool positive_branch = false;
    std::string density = "exact";
    double grid_min = -0.99;
    double grid_max = 0.99;
    int grid_count = 199;
    std::string output;
    std::string format = "csv";
    unsigned threads = 0;
};

struct BaselineOptions {
    double alpha = 0.5;
    std::optional<int> k;
    std::optional<double> r2_null;
    std::optional<double> r2_full;
    int p0 = 1;
    int p1 = 2;
    int mc_samples = 10000;
    std::uint64_t seed = 1;
};

struct SimulateOptions {
    std::string config;
    std::string mode;
    std::vector<int> n;
    std::optional<double> rho_true;
    std::optional<double> nuisance_corr;
    std::optional<int> replicates;
    std::optional<std::uint64_t> seed;
    std::optional<double> nu;
    std::optional<int> bins;
    std::optional<unsigned> threads;
    std::string output_dir;
};

struct ResolvedInput {
    pcstats::TestSummary summary;
    std::optional<double> r;  // known when the input was r or data
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
    auto* t = cmd->add_option("--t", in.t, "t statistic of the target coefficient");
    auto* r = cmd->add_option("--r", in.r, "sample partial correlation r*");
    auto* n = cmd->add_option("--n", in.n, "sample size");
    auto* p = cmd->add_option("--p", in.p, "number of predictors including the target");
    auto* data = cmd->add_option("--data", in.data, "CSV data file (header row required)");
    cmd->add_option("--response", in.response, "response column (default: first column)");
    cmd->add_option("--target", in.target, "target predictor column (default: second column)");
    t->excludes(r);
    data->excludes(t)->excludes(r)->excludes(n)->excludes(p);
}

ResolvedInput resolve_input(const InputOptions& in) {
    ResolvedInput out;
    if (!in.data.empty()) {
        const auto data = io::read_data_csv(in.data, {in.response, in.target});
        const auto stats = pcstats::sufficient_stats(data);
        const auto r = pcstats::partial_corr_mle(stats);
        out.r = r.value;
        if (std::abs(r.value) >= 1.0) {
            throw DomainError("|r*| = 1: the t statistic is infinite");
        }
        out.summary = pcstats::t_statistic(r, stats.n, stats.p);
        return out;
    }
    if (!in.t && !in.r) {
        throw DomainError("give either --data or one of --t / --r together with --n and --p");
    }
    if (!in.n || !in.p) {
        throw DomainError("--n and --p are required with --t or --r");
    }
    if (*in.p < 1 || *in.n - *in.p - 1 < 1) {
        throw DomainError("need p >= 1 and n - p - 1 >= 1");
    }
    if (in.r) {
        out.r = *in.r;
        out.summary = pcstats::t_statistic(pcstats::PartialCorr{*in.r}, *in.n, *in.p);
    } else {
        if (!std::isfinite(*in.t)) {
            throw DomainError("--t must be finite");
        }
        out.summary = pcstats::TestSummary{*in.t, *in.n, *in.p};
    }
    return out;
}

densities::DensityForm parse_density(const std::string& text) {
    if (text == "exact") {
        return densities::DensityForm::exact;
    }
    if (text == "reference") {
        return densities::DensityForm::reference;
    }
    throw DomainError("unknown --density '" + text + "' (expected exact or reference)");
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

fs::path output_dir(const std::string& explicit_dir) {
    if (!explicit_dir.empty()) {
        return explicit_dir;
    }
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
        return env;
    }
    return ".";
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DomainError("cannot write '" + path.string() + "'");
    }
    return out;
}

void print_crossings(std::ostream& out, const bff::BffCurve& curve, double level) {
    const auto xs = bff::find_crossings(curve, level);
    out << "log BF10 = " << fmt(level, 0) << " crossed at rho*:";
    if (xs.empty()) {
        out << " none";
    }
    for (double x : xs) {
        out << ' ' << fmt(x, 3);
    }
    out << '\n';
}

bff::BffCurve compute_curve(const pcstats::TestSummary& summary, const CurveOptions& opts) {
    if (!(opts.grid_min > -1.0 && opts.grid_max < 1.0)) {
        throw DomainError("grid bounds must lie in (-1, 1)");
    }
    bff::QuadratureOptions q;
    q.bins = opts.bins;
    q.branch = opts.positive_branch ? bff::Branch::positive : bff::parse_branch(opts.branch);
    q.form = parse_density(opts.density);
    q.threads = opts.threads;
    const auto grid = bff::default_rho_grid(opts.grid_count, opts.grid_min, opts.grid_max);
    return bff::bff_curve(summary, grid, opts.nu, q);
}

void report_curve(std::ostream& out, const bff::BffCurve& curve) {
    const auto& s = curve.summary;
    out << "t = " << fmt(s.t1) << ", n = " << s.n << ", p = " << s.p << ", df = " << s.df()
        << '\n';
    out << "two-sided p-value = " << fmt(specfun::student_t_two_sided_p(s.t1, s.df())) << '\n';
    out << "nu = " << io::format_double(curve.nu) << ", bins = " << curve.quadrature_bins
        << ", branch = " << bff::to_string(curve.branch) << '\n';
    print_crossings(out, curve, -2.0);
    print_crossings(out, curve, -3.0);
    const auto best = bff::max_bff(curve, -std::numeric_limits<double>::infinity());
    out << "max log BF10 = " << fmt(best.log_bf) << " at rho* = " << fmt(best.rho_mode, 3)
        << '\n';
}

fs::path write_curve(const bff::BffCurve& curve, const CurveOptions& opts,
                     const std::string& default_name) {
    if (opts.format != "csv" && opts.format != "json") {
        throw DomainError("--format must be csv or json");
    }
    const fs::path path = opts.output.empty()
                              ? output_dir("") / (default_name + "." + opts.format)
                              : fs::path(opts.output);
    auto file = open_output(path);
    if (opts.format == "csv") {
        io::write_curve_csv(file, curve);
    } else {
        io::write_curve_json(file, curve);
    }
    return path;
}

int cmd_curve(const InputOptions& in, const CurveOptions& opts, std::ostream& out) {
    const auto input = resolve_input(in);
    const auto curve = compute_curve(input.summary, opts);
    report_curve(out, curve);
    out << "curve written to " << write_curve(curve, opts, "bff_curve").string() << '\n';
    return kExitOk;
}

int cmd_analyze(const InputOptions& in, bool json, std::ostream& out, std::ostream& err) {
    if (in.data.empty()) {
        throw DomainError("analyze needs --data");
    }
    const auto data = io::read_data_csv(in.data, {in.response, in.target});
    const auto stats = pcstats::sufficient_stats(data);
    const auto r = pcstats::partial_corr_mle(stats);
    const int df = stats.n - stats.p - 1;
    double t = 0.0;
    double p_value = 0.0;
    double z = 0.0;
    if (std::abs(r.value) >= 1.0) {
        t = std::copysign(std::numeric_limits<double>::infinity(), r.value);
        z = t;
        err << "warning: |r*| = 1, the t statistic is infinite\n";
    } else {
        t = pcstats::t_statistic(r, stats.n, stats.p).t1;
        p_value = specfun::student_t_two_sided_p(t, df);
        z = pcstats::fisher_z(r);
    }
    if (json) {
        out << "{\"n\": " << stats.n << ", \"p\": " << stats.p
            << ", \"target\": \"" << data.predictor_names.front() << "\", \"r\": "
            << io::format_double(r.value) << ", \"t\": \"" << io::format_double(t)
            << "\", \"df\": " << df << ", \"p_value\": " << io::format_double(p_value)
            << ", \"fisher_z\": \"" << io::format_double(z) << "\"}\n";
        return kExitOk;
    }
    out << "n = " << stats.n << '\n'
        << "p = " << stats.p << '\n'
        << "target = " << data.predictor_names.front() << '\n'
        << "r* = " << io::format_double(r.value) << '\n'
        << "t = " << io::format_double(t) << '\n'
        << "df = " << df << '\n'
        << "p-value = " << io::format_double(p_value) << '\n'
        << "fisher z = " << io::format_double(z) << '\n';
    return kExitOk;
}

int cmd_baselines(const InputOptions& in, const BaselineOptions& opts, std::ostream& out) {
    const bool have_input = !in.data.empty() || in.t || in.r;
    if (have_input) {
        const auto input = resolve_input(in);
        const auto& s = input.summary;
        const double r = input.r ? *input.r : pcstats::r_from_t(s.t1, s.df()).value;
        const int k = opts.k ? *opts.k : s.p - 1;
        out << "stretched-beta (alpha = " << io::format_double(opts.alpha) << ", r = " << fmt(r)
            << ", n = " << s.n << ", k = " << k << "): log BF10 = "
            << fmt(baselines::stretched_beta_log_bf(pcstats::PartialCorr{r}, s.n, k, opts.alpha))
            << '\n';
    }
    if (opts.r2_null || opts.r2_full) {
        if (!opts.r2_null || !opts.r2_full || !in.n) {
            throw DomainError("the JZS baseline needs --r2-null, --r2-full and --n");
        }
        const baselines::JzsInput jin{*opts.r2_null, *opts.r2_full, *in.n,
                                      opts.p0,      opts.p1,       opts.mc_samples,
                                      opts.seed};
        const auto est = baselines::jzs_estimate(jin);
        out << "JZS (R0^2 = " << io::format_double(jin.r2_null)
            << ", R1^2 = " << io::format_double(jin.r2_full) << ", n = " << jin.n
            << ", p0 = " << jin.p0 << ", p1 = " << jin.p1 << "): log BF10 = " << fmt(est.log_bf)
            << " (MC s.e. " << fmt(est.std_error) << ")\n";
    }
    if (!have_input && !opts.r2_null && !opts.r2_full) {
        throw DomainError("baselines needs --t/--r/--data input or --r2-null/--r2-full");
    }
    return kExitOk;
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out) {
    simulate::SimScenario scn;
    if (!opts.config.empty()) {
        scn = io::load_scenario(opts.config);
    }
    if (!opts.mode.empty()) {
        scn.mode = simulate::parse_study_mode(opts.mode);
    }
    if (!opts.n.empty()) {
        scn.n_values = opts.n;
    }
    if (opts.rho_true) {
        scn.rho_true = *opts.rho_true;
    }
    if (opts.nuisance_corr) {
        scn.nuisance_corr = *opts.nuisance_corr;
    }
    if (opts.replicates) {
        scn.replicates = *opts.replicates;
    }
    if (opts.seed) {
        scn.seed = *opts.seed;
    }
    if (opts.nu) {
        scn.nu = *opts.nu;
    }
    if (opts.bins) {
        scn.bins = *opts.bins;
    }
    if (opts.threads) {
        scn.threads = *opts.threads;
    }
    simulate::validate(scn);
    const auto result = simulate::run_oc(scn);

    const fs::path dir = output_dir(opts.output_dir);
    const fs::path records = dir / "oc_records.csv";
    const fs::path aggregates = dir / "oc_aggregates.csv";
    {
        auto file = open_output(records);
        io::write_oc_records_csv(file, result);
    }
    {
        auto file = open_output(aggregates);
        io::write_oc_aggregates_csv(file, result);
    }

    out << "mode = " << simulate::to_string(scn.mode) << ", replicates = " << scn.replicates
        << ", seed = " << scn.seed << ", bins = " << scn.bins << '\n';
    for (const auto& cell : result.cells) {
        const auto& s = cell.summary;
        out << "n = " << cell.n << ", omega = " << fmt(cell.omega_true, 3)
            << ": mean max log BFF = " << fmt(s.mean_max_log_bff) << " (s.e. "
            << fmt(s.se_max_log_bff) << "), mean true log BF = " << fmt(s.mean_true_log_bf)
            << ", mean stretched-beta log BF = " << fmt(s.mean_sb_log_bf)
            << ", mean |dev| max/sb = " << fmt(s.mean_abs_dev_max) << '/'
            << fmt(s.mean_abs_dev_sb) << '\n';
    }
    out << "records written to " << records.string() << '\n'
        << "aggregates written to " << aggregates.string() << '\n';
    return kExitOk;
}

int cmd_example(CurveOptions opts, std::ostream& out) {
    constexpr double kT = -0.06;
    constexpr double kR = -0.06;
    constexpr int kN = 40;
    constexpr int kP = 2;
    const pcstats::TestSummary summary{kT, kN, kP};

    out << "Rapid resumption: search time (X) vs rapid-resumption rate (Y), controlling for age "
           "(Z)\n";
    const auto curve = compute_curve(summary, opts);
    report_curve(out, curve);
    if (!opts.output.empty() || std::getenv(kOutputDirEnv) != nullptr) {
        out << "curve written to " << write_curve(curve, opts, "example_curve").string() << '\n';
    }

    out << "\nNote: t = -0.06 on 37 df is used as reported; r* = -0.06 itself would give t = "
        << fmt(pcstats::t_statistic(pcstats::PartialCorr{kR}, kN, kP).t1, 3) << ".\n";
    out << "Comparison baselines:\n";
    for (int k : {kP, kP - 1}) {
        out << "  stretched-beta (alpha = 0.5, r = -0.06, n = 40, k = " << k
            << "): log BF10 = "
            << fmt(baselines::stretched_beta_log_bf(pcstats::PartialCorr{kR}, kN, k, 0.5))
            << '\n';
    }
    // Observed correlations: r_XY = .51, r_XZ = -.78, r_YZ = -.66.
    const double rxy = 0.51;
    const double rxz = -0.78;
    const double ryz = -0.66;
    const double r2_null = ryz * ryz;
    const double r2_full =
        (rxy * rxy + ryz * ryz - 2.0 * rxy * ryz * rxz) / (1.0 - rxz * rxz);
    const auto jzs = baselines::jzs_estimate({r2_null, r2_full, kN, 1, 2, 10000, 1});
    out << "  JZS mixture g-prior (R0^2 = " << fmt(r2_null, 6) << ", R1^2 = " << fmt(r2_full, 6)
        << " from the observed correlations): log BF10 = " << fmt(jzs.log_bf) << " (MC s.e. "
        << fmt(jzs.std_error) << ")\n";
    out << "  The R^2 inputs behind the commonly quoted JZS value of -2.04 are not available; "
           "the figure above uses the rounded observed correlations.\n";
    return kExitOk;
}

void add_curve_options(CLI::App* cmd, CurveOptions& c) {
    cmd->add_option("--nu", c.nu, "moment prior order")->check(CLI::Range(1.0, 1e6));
    cmd->add_option("--bins", c.bins, "quadrature bins")->check(CLI::PositiveNumber);
    cmd->add_option("--branch", c.branch, "symmetric or positive")
        ->check(CLI::IsMember({"symmetric", "positive"}));
    cmd->add_flag("--positive-branch", c.positive_branch, "shorthand for --branch positive");
    cmd->add_option("--density", c.density, "exact or reference")
        ->check(CLI::IsMember({"exact", "reference"}));
    cmd->add_option("--grid-min", c.grid_min, "smallest rho* on the grid");
    cmd->add_option("--grid-max", c.grid_max, "largest rho* on the grid");
    cmd->add_option("--grid-count", c.grid_count, "number of grid points")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--output,-o", c.output, "curve output file");
    cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayes factor functions for partial correlation tests", "pcbff"};
    app.require_subcommand(1);

    InputOptions input;
    CurveOptions curve_opts;
    BaselineOptions base_opts;
    SimulateOptions sim_opts;
    bool analyze_json = false;

    auto* curve = app.add_subcommand("curve", "BFF curve from summary statistics or a CSV file");
    add_input_options(curve, input);
    add_curve_options(curve, curve_opts);

    auto* analyze = app.add_subcommand("analyze", "sufficient statistics, r*, t and p-value");
    add_input_options(analyze, input);
    analyze->add_flag("--json", analyze_json, "machine-readable output");

    auto* base = app.add_subcommand("baselines", "stretched-beta and JZS Bayes factors");
    add_input_options(base, input);
    base->add_option("--alpha", base_opts.alpha, "stretched-beta alpha");
    base->add_option("--k", base_opts.k, "number of conditioning variables (default p - 1)");
    base->add_option("--r2-null", base_opts.r2_null, "R^2 of the null regression");
    base->add_option("--r2-full", base_opts.r2_full, "R^2 of the full regression");
    base->add_option("--p0", base_opts.p0, "predictors in the null regression");
    base->add_option("--p1", base_opts.p1, "predictors in the full regression");
    base->add_option("--mc-samples", base_opts.mc_samples, "Monte Carlo draws for JZS");
    base->add_option("--seed", base_opts.seed, "Monte Carlo seed for JZS");

    auto* sim = app.add_subcommand("simulate", "operating-characteristic simulation study");
    sim->add_option("--config", sim_opts.config, "scenario JSON file");
    sim->add_option("--mode", sim_opts.mode, "null, point or sweep")
        ->check(CLI::IsMember({"null", "point", "sweep"}));
    sim->add_option("--n", sim_opts.n, "sample sizes")->delimiter(',');
    sim->add_option("--rho-true", sim_opts.rho_true, "generating partial correlation");
    sim->add_option("--nuisance-corr", sim_opts.nuisance_corr, "rho_XZ = rho_YZ");
    sim->add_option("--replicates", sim_opts.replicates, "Monte Carlo replicates per cell");
    sim->add_option("--seed", sim_opts.seed, "RNG seed");
    sim->add_option("--nu", sim_opts.nu, "moment prior order");
    sim->add_option("--bins", sim_opts.bins, "quadrature bins");
    sim->add_option("--threads", sim_opts.threads, "worker threads (0 = all cores)");
    sim->add_option("--output-dir", sim_opts.output_dir, "directory for the two CSV files");

    auto* example = app.add_subcommand("example", "rapid-resumption worked example");
    add_curve_options(example, curve_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (curve->parsed()) {
            return cmd_curve(input, curve_opts, out);
        }
        if (analyze->parsed()) {
            return cmd_analyze(input, analyze_json, out, err);
        }
        if (base->parsed()) {
            return cmd_baselines(input, base_opts, out);
        }
        if (sim->parsed()) {
            return cmd_simulate(sim_opts, out);
        }
        return cmd_example(curve_opts, out);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << '\n';
        return kExitModel;
    }
}

}  // namespace pcbff::cli
