// msport command-line front end. Talks to the library only through msport.h.

#include "msport/msport.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Failure {
    msport_status status;
    std::string message;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !is.eof()) throw UsageError(std::string(flag) + ": cannot parse '" + item + "'");
        out.push_back(v);
    }
    return out;
}

void check(msport_status s) {
    if (s != MSPORT_OK) throw Failure{s, msport_last_error()};
}

fs::path default_out_dir() {
    const char* env = std::getenv("MSPORT_OUT_DIR");
    return env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
}

// temp file + rename so readers never see a partial file
void write_atomic(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Failure{MSPORT_IO_ERROR, "IoError: cannot open " + tmp.string() + " for writing"};
        f << contents;
        f.flush();
        if (!f) throw Failure{MSPORT_IO_ERROR, "IoError: write to " + tmp.string() + " failed"};
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Failure{MSPORT_IO_ERROR, "IoError: cannot rename " + tmp.string() + ": " + ec.message()};
}

struct Result {
    msport_result* r = nullptr;
    ~Result() { msport_result_free(r); }
    std::string get(const char* name) const {
        const char* s = msport_result_get(r, name);
        return s != nullptr ? s : "";
    }
};

struct Panel {
    msport_panel* p = nullptr;
    ~Panel() { msport_panel_free(p); }
};

// Reads key=value lines into --key=value tokens. Keys must name an option of
// the subcommand.
std::vector<std::string> config_tokens(const fs::path& file, const CLI::App& sub) {
    std::ifstream in(file);
    if (!in) throw UsageError("cannot read config file " + file.string());
    std::vector<std::string> tokens;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(file.string() + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "config" || key == "help" || sub.get_option_no_throw("--" + key) == nullptr)
            throw UsageError(file.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "' for " +
                             sub.get_name());
        if (key == "input")
            tokens.push_back(value);
        else
            tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

// Splices config-file tokens in right after the subcommand so that flags on
// the command line, which come later, take precedence.
std::vector<std::string> expand_config(int argc, char** argv, const CLI::App& app) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) return args;
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands([](const CLI::App*) { return true; }))
        if (s->get_name() == args[0]) sub = s;
    if (sub == nullptr) return args;
    for (std::size_t k = 1; k < args.size(); ++k) {
        std::string path;
        std::size_t span = 0;
        if (args[k] == "--config" && k + 1 < args.size()) {
            path = args[k + 1];
            span = 2;
        } else if (args[k].rfind("--config=", 0) == 0) {
            path = args[k].substr(9);
            span = 1;
        }
        if (span == 0) continue;
        auto tokens = config_tokens(path, *sub);
        args.erase(args.begin() + static_cast<long>(k), args.begin() + static_cast<long>(k + span));
        args.insert(args.begin() + 1, tokens.begin(), tokens.end());
        break;
    }
    return args;
}

struct SimulateOpts {
    std::string kind = "gaussian";
    std::size_t n = 1024;
    std::uint64_t seed = 0;
    std::size_t assets = 1;
    double sigma = 0.01, hurst = 0.5, rho = 0.0, rho_inf = 0.8, h_rho = 0.3;
    double sigma_low = 0.01, sigma_high = 0.03, drift = 0.0, intermittency = 0.2;
    std::string switch_points;
    std::string out;
    std::string out_dir;
};

struct EstimateOpts {
    std::string input, method = "sf", scales, q_grid, out_dir;
    int order = 1;
    bool pairs = false;
};

struct OptimizeOpts {
    std::string input, scales = "1,2,5,10,21", cov = "product", aggregation = "nonoverlapping", objective = "minvar", out_dir;
    bool long_only = false;
    double mu_target = 0.0, risk_free = 0.0, ridge = -1.0;
};

struct BacktestOpts {
    std::string input, scales = "1,2,5,10,21", cov = "product", strategies = "table", out_dir;
    int lookback = 125, rebalance = 21;
    double risk_free = 0.0;
    bool allow_short = false;
};

struct ReproOpts {
    std::uint64_t seed = 7;
    std::size_t length = 16384;
    std::string out_dir;
};

fs::path out_dir_or_default(const std::string& dir) { return dir.empty() ? default_out_dir() : fs::path(dir); }

Panel load(const std::string& input) {
    Panel p;
    check(msport_panel_load_csv(input.c_str(), &p.p));
    return p;
}

void run_simulate(const SimulateOpts& o, bool to_file) {
    msport_simulate_params sp;
    msport_simulate_params_init(&sp);
    sp.kind = o.kind.c_str();
    sp.length = o.n;
    sp.seed = o.seed;
    sp.assets = o.assets;
    sp.sigma_daily = o.sigma;
    sp.hurst = o.hurst;
    sp.rho = o.rho;
    sp.rho_inf = o.rho_inf;
    sp.h_rho = o.h_rho;
    sp.sigma_low = o.sigma_low;
    sp.sigma_high = o.sigma_high;
    sp.drift = o.drift;
    sp.intermittency = o.intermittency;
    const auto points = parse_list<std::size_t>(o.switch_points, "--switch-points");
    sp.switch_points = points.empty() ? nullptr : points.data();
    sp.n_switch_points = points.size();
    Panel p;
    check(msport_panel_simulate(&sp, &p.p));
    Result csv;
    check(msport_panel_prices_csv(p.p, &csv.r));
    if (!o.out.empty()) {
        write_atomic(o.out, csv.get("csv"));
    } else if (to_file) {
        write_atomic(out_dir_or_default(o.out_dir) / (o.kind + "_" + std::to_string(o.seed) + ".csv"), csv.get("csv"));
    } else {
        std::cout << csv.get("csv");
    }
}

void run_estimate(const EstimateOpts& o) {
    const Panel p = load(o.input);
    const auto scales = parse_list<int>(o.scales, "--scales");
    const auto q = parse_list<double>(o.q_grid, "--q-grid");
    msport_estimate_params ep;
    msport_estimate_params_init(&ep);
    ep.method = o.method.c_str();
    ep.scales = scales.empty() ? nullptr : scales.data();
    ep.n_scales = scales.size();
    ep.q_grid = q.empty() ? nullptr : q.data();
    ep.n_q = q.size();
    ep.detrend_order = o.order;
    ep.pairs = o.pairs ? 1 : 0;
    Result r;
    check(msport_estimate(p.p, &ep, &r.r));
    const fs::path dir = out_dir_or_default(o.out_dir);
    write_atomic(dir / "estimate.json", r.get("json"));
    write_atomic(dir / "estimate.csv", r.get("csv"));
    std::cout << r.get("text");
}

void run_optimize(const OptimizeOpts& o, bool has_target) {
    const Panel p = load(o.input);
    const auto scales = parse_list<int>(o.scales, "--scales");
    msport_optimize_params op;
    msport_optimize_params_init(&op);
    op.scales = scales.empty() ? nullptr : scales.data();
    op.n_scales = scales.size();
    op.covariance = o.cov.c_str();
    op.aggregation = o.aggregation.c_str();
    op.objective = o.objective.c_str();
    op.long_only = o.long_only || has_target ? 1 : 0;
    op.has_mu_target = has_target ? 1 : 0;
    op.mu_target = o.mu_target;
    op.risk_free = o.risk_free;
    op.ridge = o.ridge;
    Result r;
    check(msport_optimize(p.p, &op, &r.r));
    const fs::path dir = out_dir_or_default(o.out_dir);
    write_atomic(dir / "weights.csv", r.get("csv"));
    write_atomic(dir / "covariance.csv", r.get("covariance_csv"));
    write_atomic(dir / "optimize.json", r.get("json"));
    std::cout << r.get("text");
}

void run_backtest(const BacktestOpts& o) {
    const Panel p = load(o.input);
    const auto scales = parse_list<int>(o.scales, "--scales");
    msport_backtest_params bp;
    msport_backtest_params_init(&bp);
    bp.lookback = o.lookback;
    bp.rebalance_every = o.rebalance;
    bp.scales = scales.empty() ? nullptr : scales.data();
    bp.n_scales = scales.size();
    bp.covariance = o.cov.c_str();
    bp.strategies = o.strategies.c_str();
    bp.risk_free = o.risk_free;
    bp.long_only = o.allow_short ? 0 : 1;
    Result r;
    check(msport_backtest(p.p, &bp, &r.r));
    const fs::path dir = out_dir_or_default(o.out_dir);
    write_atomic(dir / "backtest.json", r.get("json"));
    write_atomic(dir / "backtest.csv", r.get("csv"));
    write_atomic(dir / "backtest.txt", r.get("text"));
    std::cout << r.get("text");
}

void run_repro(const ReproOpts& o) {
    Result r;
    check(msport_repro(o.seed, o.length, &r.r));
    const fs::path dir = out_dir_or_default(o.out_dir);
    write_atomic(dir / "repro.json", r.get("json"));
    write_atomic(dir / "repro.csv", r.get("csv"));
    write_atomic(dir / "repro.txt", r.get("text"));
    std::cout << r.get("text");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale portfolio construction: scaling estimation, multiscale covariance, optimization, backtests"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    const std::string config_help = "key=value file (one per line, '#' comments) mirroring the long flags; flags win";
    const std::string out_dir_help = "output directory (default: $MSPORT_OUT_DIR, else the current directory)";

    SimulateOpts so;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic price panel (CSV)");
    sim->add_option("--kind", so.kind, "gaussian | fgn | correlated | epps | regime_switch | cascade")->capture_default_str();
    sim->add_option("--n", so.n, "number of returns (the file holds n+1 price rows)")->capture_default_str();
    sim->add_option("--seed", so.seed, "RNG seed")->capture_default_str();
    sim->add_option("--assets", so.assets, "number of assets")->capture_default_str();
    sim->add_option("--sigma", so.sigma, "daily volatility")->capture_default_str();
    sim->add_option("--hurst", so.hurst, "Hurst exponent (fgn)")->capture_default_str();
    sim->add_option("--rho", so.rho, "constant pairwise correlation (correlated, regime_switch)")->capture_default_str();
    sim->add_option("--rho-inf", so.rho_inf, "long-horizon correlation (epps)")->capture_default_str();
    sim->add_option("--h-rho", so.h_rho, "correlation scaling exponent (epps)")->capture_default_str();
    sim->add_option("--sigma-low", so.sigma_low, "calm-regime volatility (regime_switch)")->capture_default_str();
    sim->add_option("--sigma-high", so.sigma_high, "turbulent-regime volatility (regime_switch)")->capture_default_str();
    sim->add_option("--switch-points", so.switch_points, "comma list of regime switch rows (regime_switch)");
    sim->add_option("--drift", so.drift, "per-day mean log return (regime_switch)")->capture_default_str();
    sim->add_option("--intermittency", so.intermittency, "cascade lambda^2 in (0, 0.5)")->capture_default_str();
    sim->add_option("--out", so.out, "output CSV path (default: standard output, or <out-dir>/<kind>_<seed>.csv when an output directory is set)");
    sim->add_option("--out-dir", so.out_dir, out_dir_help);
    sim->add_option("--config", config_help);

    EstimateOpts eo;
    auto* est = app.add_subcommand("estimate", "Scaling exponents and multifractal spectra");
    est->add_option("input", eo.input, "price CSV (date column then one column per asset)")->required();
    est->add_option("--method", eo.method, "sf (structure functions) | mfdfa")->capture_default_str();
    est->add_option("--scales", eo.scales, "comma list of scales (sf default 1,2,5,10,21; mfdfa default 16..n/8)");
    est->add_option("--q-grid", eo.q_grid, "comma list of moment orders (default -4,-3,-2,-1,1,2,3,4)");
    est->add_option("--order", eo.order, "MF-DFA detrending polynomial order")->capture_default_str();
    est->add_flag("--pairs", eo.pairs, "also estimate correlation scaling for every asset pair");
    est->add_option("--out-dir", eo.out_dir, out_dir_help);
    est->add_option("--config", config_help);

    OptimizeOpts oo;
    auto* opt = app.add_subcommand("optimize", "Portfolio weights from the multiscale covariance");
    opt->add_option("input", oo.input, "price CSV")->required();
    opt->add_option("--scales", oo.scales, "comma list of scales in trading days")->capture_default_str();
    opt->add_option("--cov", oo.cov, "product | l1")->capture_default_str();
    opt->add_option("--aggregation", oo.aggregation, "nonoverlapping | overlapping")->capture_default_str();
    opt->add_option("--objective", oo.objective, "minvar | maxsharpe")->capture_default_str();
    opt->add_flag("--long-only", oo.long_only, "forbid short positions");
    auto* target = opt->add_option("--mu-target", oo.mu_target, "minimum expected per-day log return (implies --long-only)");
    opt->add_option("--risk-free", oo.risk_free, "per-day risk-free rate (maxsharpe)")->capture_default_str();
    opt->add_option("--ridge", oo.ridge, "diagonal ridge; negative selects 1e-8 * trace / N")->capture_default_str();
    opt->add_option("--out-dir", oo.out_dir, out_dir_help);
    opt->add_option("--config", config_help);

    BacktestOpts bo;
    auto* bt = app.add_subcommand("backtest", "Walk-forward comparison of allocation strategies");
    bt->add_option("input", bo.input, "price CSV")->required();
    bt->add_option("--lookback", bo.lookback, "estimation window in trading days")->capture_default_str();
    bt->add_option("--rebalance", bo.rebalance, "holding period in trading days")->capture_default_str();
    bt->add_option("--scales", bo.scales, "comma list of scales for the multiscale strategies")->capture_default_str();
    bt->add_option("--cov", bo.cov, "product | l1")->capture_default_str();
    bt->add_option("--strategies", bo.strategies,
                   "'table' for the four table rows, or a comma list of equal_weight, markowitz_daily, "
                   "markowitz_multiscale[_overlapping], max_sharpe_daily, max_sharpe_multiscale[_overlapping]")
        ->capture_default_str();
    bt->add_option("--risk-free", bo.risk_free, "per-day risk-free rate (max Sharpe strategies)")->capture_default_str();
    bt->add_flag("--allow-short", bo.allow_short, "drop the long-only constraint");
    bt->add_option("--out-dir", bo.out_dir, out_dir_help);
    bt->add_option("--config", config_help);

    ReproOpts ro;
    auto* rep = app.add_subcommand("repro", "Run simulate -> estimate -> optimize -> backtest on the synthetic fixtures");
    rep->add_option("--seed", ro.seed, "master seed")->capture_default_str();
    rep->add_option("--length", ro.length, "length of the scaling fixtures (power of two)")->capture_default_str();
    rep->add_option("--out-dir", ro.out_dir, out_dir_help);
    rep->add_option("--config", config_help);

    try {
        std::vector<std::string> args = expand_config(argc, argv, app);
        std::reverse(args.begin(), args.end());
        app.parse(args);

        if (*sim) run_simulate(so, !so.out_dir.empty() || std::getenv("MSPORT_OUT_DIR") != nullptr);
        if (*est) run_estimate(eo);
        if (*opt) run_optimize(oo, target->count() > 0);
        if (*bt) run_backtest(bo);
        if (*rep) run_repro(ro);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        const int category = msport_status_category(f.status);
        return category == 0 ? 3 : category;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
