#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "roughmix/roughmix.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace roughmix::cli {

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
    return hex.str();
}

namespace {

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

unsigned env_threads() {
    if (const char* v = std::getenv("ROUGHMIX_THREADS")) {
        try {
            return static_cast<unsigned>(std::stoul(v));
        } catch (const std::exception&) {
            throw ConfigError(std::string("ROUGHMIX_THREADS is not a number: ") + v);
        }
    }
    return 0;
}

std::vector<std::uint64_t> replicate_seeds(std::uint64_t base, std::size_t count) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < count; ++i) seeds.push_back(derive_seed(base, i));
    return seeds;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::istringstream cs(cell);
        T v{};
        if (!(cs >> v) || !(cs >> std::ws).eof()) throw ConfigError(what + ": cannot parse '" + cell + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

/// Options shared by every subcommand, plus the run's manifest.
struct Context {
    std::string out_dir = ".";
    unsigned threads = 0;
    std::ostream* log = &std::cerr;
    std::string command;
    std::vector<std::string> args;
    json config = json::object();
    std::optional<std::uint64_t> seed;
    json inputs = json::object();
    json outputs = json::array();
    json results = json::object();

    fs::path output(const std::string& name) {
        outputs.push_back(name);
        return fs::path(out_dir) / name;
    }
    void input(const std::string& path) { inputs[path] = sha256_file(path); }

    void write_manifest() {
        json m = {{"tool", "roughmix"},
                  {"version", kVersion},
                  {"command", command},
                  {"args", args},
                  {"config", config},
                  {"seed", seed ? json(*seed) : json(nullptr)},
                  {"inputs", inputs},
                  {"outputs", outputs},
                  {"results", results},
                  {"created_utc", utc_now()}};
        io::save_json(fs::path(out_dir) / "manifest.json", m);
    }
};

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + file.string());
    out << text;
}

// ---- subcommands ---------------------------------------------------------

struct SimArgs {
    std::string spec;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string method = "circulant";
};

void run_sim(const SimArgs& a, Context& ctx) {
    ctx.input(a.spec);
    const GmfbmSpec spec = io::spec_from_json(io::load_json(a.spec));
    if (a.n < 1) throw ConfigError("--n must be >= 1");
    const GmfbmSampler sampler(spec, TimeGrid::uniform(spec.horizon, a.n), parse_sample_method(a.method));
    const SamplePath path = sampler.draw(a.seed);
    io::save_path_csv(ctx.output("path.csv"), path);
    ctx.seed = a.seed;
    ctx.config = {{"spec", io::to_json(spec)}, {"n", a.n}, {"method", a.method}};
    ctx.results["warnings"] = path.warnings;
}

struct LiftArgs {
    std::string input;
    double p = 2.0;
    std::optional<int> dyadic;
};

void run_lift(const LiftArgs& a, Context& ctx) {
    ctx.input(a.input);
    SamplePath path = io::load_path_csv(a.input);
    if (a.dyadic) path = dyadic_nodes(path, *a.dyadic);
    io::save_json(ctx.output("level2.json"), io::to_json(lift_piecewise_linear(path, a.p)));
    ctx.config = {{"p", a.p}, {"dyadic", a.dyadic ? json(*a.dyadic) : json(nullptr)}};
}

struct SigArgs {
    std::string input;
    int level = kDefaultLevel;
    bool log = false;
};

void run_sig(const SigArgs& a, Context& ctx) {
    ctx.input(a.input);
    const SamplePath path = io::load_path_csv(a.input);
    const TruncatedTensor sig = a.log ? log_signature(path, a.level) : signature(path, a.level);
    io::save_json(ctx.output(a.log ? "log_signature.json" : "signature.json"), io::to_json(sig));
    ctx.config = {{"level", a.level}, {"log", a.log}};
}

struct SolveArgs {
    std::string driver;
    std::string lift;
    std::string field = "linear";
    std::string y0 = "1.0";
};

void run_solve(const SolveArgs& a, Context& ctx) {
    ctx.input(a.driver);
    const SamplePath path = io::load_path_csv(a.driver);
    Level2RoughPath rp;
    if (!a.lift.empty()) {
        ctx.input(a.lift);
        rp = io::rough_path_from_json(io::load_json(a.lift));
        if (rp.times.size() != path.size())
            throw ComposabilityError("--lift has " + std::to_string(rp.times.size()) + " nodes but the driver has " +
                                     std::to_string(path.size()));
        for (std::size_t i = 0; i < path.size(); ++i)
            if (std::abs(rp.times[i] - path.grid[i]) > 1e-12 * std::max(1.0, std::abs(path.grid[i])))
                throw ComposabilityError("--lift and --driver live on different time grids");
    } else {
        rp = lift_piecewise_linear(path);
    }
    const VectorField field = make_field(a.field, rp.dim());
    const auto y0_list = parse_list<double>(a.y0, "--y0");
    Eigen::VectorXd y0(static_cast<Eigen::Index>(field.state_dim));
    if (y0_list.size() == 1) {
        y0.setConstant(y0_list.front());
    } else if (y0_list.size() == field.state_dim) {
        for (std::size_t i = 0; i < y0_list.size(); ++i) y0(static_cast<Eigen::Index>(i)) = y0_list[i];
    } else {
        throw ConfigError("--y0 needs 1 or " + std::to_string(field.state_dim) + " values");
    }
    const RdeSolution sol = solve(rp, field, y0);
    std::ostringstream csv;
    io::write_solution_csv(csv, sol);
    write_text(ctx.output("solution.csv"), csv.str());
    ctx.config = {{"field", a.field}, {"y0", y0_list}, {"lift", a.lift.empty() ? "piecewise-linear" : "file"}};
}

struct EstimateArgs {
    std::string input;
    std::size_t components = 1;
    std::string lags = "auto";
    std::size_t bootstrap = 0;
    std::uint64_t seed = 0;
    double weight_exponent = 0.5;
};

void run_estimate(const EstimateArgs& a, Context& ctx) {
    ctx.input(a.input);
    const SamplePath path = io::load_path_csv(a.input);
    const std::vector<std::size_t> lags =
        a.lags == "auto" ? default_lags(path.grid.intervals()) : parse_list<std::size_t>(a.lags, "--lags");
    MixtureOptions opts;
    opts.weight_exponent = a.weight_exponent;
    opts.bootstrap = a.bootstrap;
    opts.seed = a.seed;
    opts.threads = ctx.threads;
    const FitReport rep = fit_mixture(path, lags, a.components, opts);
    io::save_json(ctx.output("fit.json"), io::to_json(rep));
    if (a.bootstrap > 0) ctx.seed = a.seed;
    ctx.config = {{"components", a.components}, {"lags", lags}, {"bootstrap", a.bootstrap},
                  {"weight_exponent", a.weight_exponent}};
}

struct CauchyArgs {
    std::string spec;
    int m_min = 4;
    int m_max = 10;
    double p = 2.1;
    std::size_t seeds = 20;
    std::uint64_t seed = 1;
    std::string method = "circulant";
};

void run_bench_cauchy(const CauchyArgs& a, Context& ctx) {
    ctx.input(a.spec);
    const GmfbmSpec spec = io::spec_from_json(io::load_json(a.spec));
    CauchyOptions opts;
    opts.m_min = a.m_min;
    opts.method = parse_sample_method(a.method);
    opts.threads = ctx.threads;
    const auto seeds = replicate_seeds(a.seed, a.seeds);
    const CauchyReport rep = cauchy_diagnostic(spec, a.m_max, a.p, seeds, opts);

    std::ostringstream rows, summary;
    rows << "m,seed,d_p\n";
    for (const auto& r : rep.rows) rows << r.m << ',' << r.seed << ',' << io::format_double(r.d_p) << '\n';
    summary << "m,stat,value\n";
    for (std::size_t j = 0; j < rep.levels.size(); ++j)
        summary << rep.levels[j] << ",median_d_p," << io::format_double(rep.median[j]) << '\n';
    write_text(ctx.output("cauchy.csv"), rows.str());
    write_text(ctx.output("cauchy_summary.csv"), summary.str());
    for (const auto& w : rep.warnings) *ctx.log << "warning: " << w << '\n';

    ctx.seed = a.seed;
    ctx.config = {{"spec", io::to_json(spec)}, {"m_min", a.m_min}, {"m_max", a.m_max}, {"p", a.p},
                  {"seeds", a.seeds}, {"method", a.method}};
    ctx.results = {{"strictly_decreasing", rep.strictly_decreasing},
                   {"log2_decay_slope", rep.log2_decay_slope},
                   {"warnings", rep.warnings}};
}

struct SharpnessArgs {
    double hurst = 0.15;
    int m_min = 6;
    int m_max = 10;
    std::size_t seeds = 50;
    std::uint64_t seed = 1;
    std::string method = "circulant";
};

void run_bench_sharpness(const SharpnessArgs& a, Context& ctx) {
    SharpnessOptions opts;
    opts.m_min = a.m_min;
    opts.method = parse_sample_method(a.method);
    opts.threads = ctx.threads;
    const auto seeds = replicate_seeds(a.seed, a.seeds);
    const SharpnessReport rep = sharpness_probe(a.hurst, a.m_max, seeds, opts);

    std::ostringstream csv;
    csv << "m,stat,value\n";
    for (std::size_t j = 0; j < rep.levels.size(); ++j)
        csv << rep.levels[j] << ",levy_area_variance," << io::format_double(rep.area_variance[j]) << '\n';
    write_text(ctx.output("sharpness.csv"), csv.str());

    ctx.seed = a.seed;
    ctx.config = {{"hurst", a.hurst}, {"m_min", a.m_min}, {"m_max", a.m_max}, {"seeds", a.seeds},
                  {"method", a.method}};
    ctx.results = {{"growth_ratio", rep.growth_ratio},
                   {"relative_spread", rep.relative_spread},
                   {"grows", rep.grows},
                   {"stabilizes", rep.stabilizes}};
}

struct RateArgs {
    std::string spec;
    std::string field = "linear";
    double y0 = 1.0;
    int m_min = 6;
    int m_max = 12;
    int reference_extra = 2;
    std::size_t seeds = 20;
    std::uint64_t seed = 1;
    std::string method = "circulant";
};

void run_bench_rate(const RateArgs& a, Context& ctx) {
    GmfbmSpec spec{{0.5}, {1.0}, 1, 1.0};
    if (!a.spec.empty()) {
        ctx.input(a.spec);
        spec = io::spec_from_json(io::load_json(a.spec));
    }
    if (a.m_max < a.m_min) throw ConfigError("--m-max must be >= --m-min");
    std::vector<int> levels;
    for (int m = a.m_min; m <= a.m_max; ++m) levels.push_back(m);
    const VectorField field = make_field(a.field, static_cast<std::size_t>(spec.dim));
    const Eigen::VectorXd y0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(field.state_dim), a.y0);
    RateOptions opts;
    opts.reference_extra = a.reference_extra;
    opts.method = parse_sample_method(a.method);
    opts.threads = ctx.threads;
    const auto seeds = replicate_seeds(a.seed, a.seeds);
    const RateReport rep = convergence_rate(spec, field, y0, levels, seeds, opts);

    std::ostringstream csv;
    csv << "mesh,err,seed\n";
    for (const auto& r : rep.rows)
        csv << io::format_double(r.mesh) << ',' << io::format_double(r.error) << ',' << r.seed << '\n';
    write_text(ctx.output("rate.csv"), csv.str());

    ctx.seed = a.seed;
    ctx.config = {{"spec", io::to_json(spec)}, {"field", a.field}, {"y0", a.y0}, {"m_min", a.m_min},
                  {"m_max", a.m_max}, {"reference_extra", a.reference_extra}, {"seeds", a.seeds},
                  {"method", a.method}};
    ctx.results = {{"median_slope", rep.median_slope},
                   {"predicted_exponent", rep.predicted_exponent},
                   {"seed_slopes", rep.seed_slopes}};
}

struct ScalingArgs {
    double hurst_i = 0.5;
    double hurst_j = 0.75;
    std::size_t paths = 10000;
    std::string scales = "0.0625,0.125,0.25,0.5,1";
    std::size_t intervals = 1024;
    std::uint64_t seed = 1;
    std::string method = "circulant";
};

void run_bench_scaling(const ScalingArgs& a, Context& ctx) {
    const auto scales = parse_list<double>(a.scales, "--scales");
    CrossTermOptions opts;
    opts.intervals = a.intervals;
    opts.method = parse_sample_method(a.method);
    opts.threads = ctx.threads;
    const CrossTermReport rep = cross_term_scaling(a.hurst_i, a.hurst_j, scales, a.paths, a.seed, opts);

    std::ostringstream csv;
    csv << "scale,second_moment,standard_error\n";
    for (std::size_t s = 0; s < rep.scales.size(); ++s)
        csv << io::format_double(rep.scales[s]) << ',' << io::format_double(rep.second_moment[s]) << ','
            << io::format_double(rep.standard_error[s]) << '\n';
    write_text(ctx.output("scaling.csv"), csv.str());

    ctx.seed = a.seed;
    ctx.config = {{"hurst_i", a.hurst_i}, {"hurst_j", a.hurst_j}, {"paths", a.paths}, {"scales", scales},
                  {"intervals", a.intervals}, {"method", a.method}};
    ctx.results = {{"slope", rep.slope}, {"slope_se", rep.slope_se}, {"expected_slope", rep.expected_slope}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Generalized mixed fractional Brownian motion: simulation, rough path lifts, signatures, "
                 "RDE solving and estimation",
                 "roughmix"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    Context ctx;
    std::optional<unsigned> threads;
    auto common = [&](CLI::App* sub) {
        sub->add_option("-o,--out", ctx.out_dir, "Output directory")->capture_default_str();
        sub->add_option("--threads", threads, "Worker threads (0: all cores; default $ROUGHMIX_THREADS)");
    };

    SimArgs sim;
    auto* sim_cmd = app.add_subcommand("sim", "Sample a GMFBM path on a uniform grid");
    sim_cmd->add_option("--spec", sim.spec, "Spec JSON file")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--n", sim.n, "Number of grid intervals")->required();
    sim_cmd->add_option("--seed", sim.seed, "Random seed")->required();
    sim_cmd->add_option("--method", sim.method, "cholesky or circulant")->capture_default_str();
    common(sim_cmd);

    LiftArgs lift;
    auto* lift_cmd = app.add_subcommand("lift", "Level-2 lift of a path CSV");
    lift_cmd->add_option("--input", lift.input, "Path CSV")->required()->check(CLI::ExistingFile);
    lift_cmd->add_option("--p", lift.p, "p-variation exponent recorded with the lift")->capture_default_str();
    lift_cmd->add_option("--dyadic", lift.dyadic, "Lift the dyadic approximation of this level instead");
    common(lift_cmd);

    SigArgs sig;
    auto* sig_cmd = app.add_subcommand("sig", "Truncated signature of a path CSV");
    sig_cmd->add_option("--input", sig.input, "Path CSV")->required()->check(CLI::ExistingFile);
    sig_cmd->add_option("--level", sig.level, "Truncation level")->capture_default_str();
    sig_cmd->add_flag("--log", sig.log, "Emit the log-signature");
    common(sig_cmd);

    SolveArgs slv;
    auto* solve_cmd = app.add_subcommand("solve", "Solve an RDE with the Davie scheme");
    solve_cmd->add_option("--driver", slv.driver, "Driver path CSV")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--lift", slv.lift, "Level-2 JSON (default: lift the driver)")->check(CLI::ExistingFile);
    solve_cmd->add_option("--field", slv.field, "linear, bilinear or bounded-sigmoid")->capture_default_str();
    solve_cmd->add_option("--y0", slv.y0, "Initial state (one value or comma list)")->capture_default_str();
    common(solve_cmd);

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand("estimate", "Fit Hurst exponents and weights to a path CSV");
    est_cmd->add_option("--input", est.input, "Path CSV")->required()->check(CLI::ExistingFile);
    est_cmd->add_option("--components", est.components, "Number of components")->capture_default_str();
    est_cmd->add_option("--lags", est.lags, "auto or comma list of lags")->capture_default_str();
    est_cmd->add_option("--bootstrap", est.bootstrap, "Block-bootstrap replicates")->capture_default_str();
    est_cmd->add_option("--seed", est.seed, "Bootstrap seed")->capture_default_str();
    est_cmd->add_option("--weight-exponent", est.weight_exponent, "Lag weight exponent")->capture_default_str();
    common(est_cmd);

    CauchyArgs cau;
    auto* cau_cmd = app.add_subcommand("bench-cauchy", "d_p distances between consecutive dyadic lifts");
    cau_cmd->add_option("--spec", cau.spec, "Spec JSON file")->required()->check(CLI::ExistingFile);
    cau_cmd->add_option("--m-min", cau.m_min)->capture_default_str();
    cau_cmd->add_option("--m-max", cau.m_max)->capture_default_str();
    cau_cmd->add_option("--p", cau.p)->capture_default_str();
    cau_cmd->add_option("--seeds", cau.seeds, "Number of replicates")->capture_default_str();
    cau_cmd->add_option("--seed", cau.seed, "Base seed")->capture_default_str();
    cau_cmd->add_option("--method", cau.method)->capture_default_str();
    common(cau_cmd);

    SharpnessArgs shp;
    auto* shp_cmd = app.add_subcommand("bench-sharpness", "Levy-area variance of dyadic lifts across levels");
    shp_cmd->add_option("--hurst", shp.hurst)->capture_default_str();
    shp_cmd->add_option("--m-min", shp.m_min)->capture_default_str();
    shp_cmd->add_option("--m-max", shp.m_max)->capture_default_str();
    shp_cmd->add_option("--seeds", shp.seeds, "Number of replicates")->capture_default_str();
    shp_cmd->add_option("--seed", shp.seed, "Base seed")->capture_default_str();
    shp_cmd->add_option("--method", shp.method)->capture_default_str();
    common(shp_cmd);

    RateArgs rate;
    auto* rate_cmd = app.add_subcommand("bench-rate", "Empirical convergence rate of the Davie scheme");
    rate_cmd->add_option("--spec", rate.spec, "Spec JSON file (default: Brownian motion)")->check(CLI::ExistingFile);
    rate_cmd->add_option("--field", rate.field)->capture_default_str();
    rate_cmd->add_option("--y0", rate.y0)->capture_default_str();
    rate_cmd->add_option("--m-min", rate.m_min)->capture_default_str();
    rate_cmd->add_option("--m-max", rate.m_max)->capture_default_str();
    rate_cmd->add_option("--reference-extra", rate.reference_extra)->capture_default_str();
    rate_cmd->add_option("--seeds", rate.seeds, "Number of replicates")->capture_default_str();
    rate_cmd->add_option("--seed", rate.seed, "Base seed")->capture_default_str();
    rate_cmd->add_option("--method", rate.method)->capture_default_str();
    common(rate_cmd);

    ScalingArgs scl;
    auto* scl_cmd = app.add_subcommand("bench-scaling", "Second moment of the cross iterated integral vs. scale");
    scl_cmd->add_option("--hurst-i", scl.hurst_i)->capture_default_str();
    scl_cmd->add_option("--hurst-j", scl.hurst_j)->capture_default_str();
    scl_cmd->add_option("--paths", scl.paths)->capture_default_str();
    scl_cmd->add_option("--scales", scl.scales, "Comma list of interval lengths")->capture_default_str();
    scl_cmd->add_option("--intervals", scl.intervals)->capture_default_str();
    scl_cmd->add_option("--seed", scl.seed, "Base seed")->capture_default_str();
    scl_cmd->add_option("--method", scl.method)->capture_default_str();
    common(scl_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kConfigError;
    }

    try {
        ctx.threads = threads ? *threads : env_threads();
        ctx.args = args;
        ctx.log = &err;
        CLI::App* chosen = app.get_subcommands().front();
        ctx.command = chosen->get_name();
        fs::create_directories(ctx.out_dir);

        if (chosen == sim_cmd) run_sim(sim, ctx);
        else if (chosen == lift_cmd) run_lift(lift, ctx);
        else if (chosen == sig_cmd) run_sig(sig, ctx);
        else if (chosen == solve_cmd) run_solve(slv, ctx);
        else if (chosen == est_cmd) run_estimate(est, ctx);
        else if (chosen == cau_cmd) run_bench_cauchy(cau, ctx);
        else if (chosen == shp_cmd) run_bench_sharpness(shp, ctx);
        else if (chosen == rate_cmd) run_bench_rate(rate, ctx);
        else if (chosen == scl_cmd) run_bench_scaling(scl, ctx);
        ctx.config["threads"] = ctx.threads;
        ctx.write_manifest();
        return kOk;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const EstimationError& e) {
        err << "estimation error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
}

}  // namespace roughmix::cli
