// Drives the msport executable as a subprocess.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs `msport <args>` in `dir`; stdout is captured, stderr discarded unless asked.
Run msport(const std::string& args, const fs::path& dir, const std::string& env = "", bool merge_stderr = false) {
    const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" MSPORT_BIN "' " + args +
                            (merge_stderr ? " 2>&1" : " 2>/dev/null");
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("msport_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("help documents every flag") {
    const std::map<std::string, std::vector<std::string>> flags{
        {"simulate",
         {"--kind", "--n", "--seed", "--assets", "--sigma", "--hurst", "--rho", "--rho-inf", "--h-rho", "--sigma-low",
          "--sigma-high", "--switch-points", "--drift", "--intermittency", "--out", "--out-dir", "--config"}},
        {"estimate", {"--method", "--scales", "--q-grid", "--order", "--pairs", "--out-dir", "--config"}},
        {"optimize",
         {"--scales", "--cov", "--aggregation", "--objective", "--long-only", "--mu-target", "--risk-free", "--ridge",
          "--out-dir", "--config"}},
        {"backtest",
         {"--lookback", "--rebalance", "--scales", "--cov", "--strategies", "--risk-free", "--allow-short", "--out-dir",
          "--config"}},
        {"repro", {"--seed", "--length", "--out-dir", "--config"}},
    };
    const auto dir = scratch("help");
    for (const auto& [sub, list] : flags) {
        const auto r = msport(sub + " --help", dir);
        CHECK(r.code == 0);
        for (const auto& f : list) {
            INFO(sub << " " << f);
            CHECK(r.out.find("  " + f + " ") != std::string::npos);
        }
    }
    CHECK(msport("--help", dir).code == 0);
}

TEST_CASE("simulate writes n+1 price rows") {
    const auto dir = scratch("sim");
    const auto r = msport("simulate --kind fgn --hurst 0.7 --n 16384 --seed 42 --out fgn.csv", dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    const std::string csv = slurp(dir / "fgn.csv");
    CHECK(count_lines(csv) == 16385 + 1);
    CHECK(!fs::exists(dir / "fgn.csv.tmp"));
}

TEST_CASE("simulate is deterministic") {
    const auto dir = scratch("det");
    REQUIRE(msport("simulate --kind gaussian --n 16 --seed 1 --out a.csv", dir).code == 0);
    REQUIRE(msport("simulate --kind gaussian --n 16 --seed 1 --out b.csv", dir).code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    const auto s = msport("simulate --kind gaussian --n 16 --seed 1", dir);
    CHECK(s.out == slurp(dir / "a.csv"));
}

TEST_CASE("usage and data errors map to exit codes") {
    const auto dir = scratch("err");
    const auto bad = msport("simulate --kind brownian_bridge --n 64", dir, "", true);
    CHECK(bad.code == 1);
    CHECK(bad.out.find("kind") != std::string::npos);
    CHECK(msport("simulate --bogus 1", dir).code == 1);
    CHECK(msport("frobnicate", dir).code == 1);
    CHECK(msport("simulate --kind gaussian --n 8 --seed 1", dir).code == 2);
    CHECK(msport("estimate missing.csv", dir).code == 2);
}

TEST_CASE("config file with flag precedence") {
    const auto dir = scratch("cfg");
    {
        std::ofstream cfg(dir / "sim.cfg");
        cfg << "# fixture\nkind = fgn\nhurst=0.7\nn=64\nseed = 3\nout=from_file.csv\n";
    }
    REQUIRE(msport("simulate --config sim.cfg", dir).code == 0);
    REQUIRE(msport("simulate --kind fgn --hurst 0.7 --n 64 --seed 3 --out direct.csv", dir).code == 0);
    CHECK(slurp(dir / "from_file.csv") == slurp(dir / "direct.csv"));

    REQUIRE(msport("simulate --config sim.cfg --seed 4 --out override.csv", dir).code == 0);
    REQUIRE(msport("simulate --kind fgn --hurst 0.7 --n 64 --seed 4 --out direct4.csv", dir).code == 0);
    CHECK(slurp(dir / "override.csv") == slurp(dir / "direct4.csv"));

    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "kind=fgn\ncolour=blue\n";
    }
    CHECK(msport("simulate --config bad.cfg", dir).code == 1);
    CHECK(msport("simulate --config nowhere.cfg", dir).code == 1);
}

TEST_CASE("output directory from the environment") {
    const auto dir = scratch("env");
    const auto out = scratch("env_out");
    REQUIRE(msport("simulate --kind gaussian --n 32 --seed 5", dir, "MSPORT_OUT_DIR='" + out.string() + "'").code == 0);
    CHECK(fs::exists(out / "gaussian_5.csv"));
    REQUIRE(msport("simulate --kind gaussian --n 32 --seed 6 --out-dir sub", dir).code == 0);
    CHECK(fs::exists(dir / "sub" / "gaussian_6.csv"));
}

TEST_CASE("estimate, optimize and backtest end to end") {
    const auto dir = scratch("e2e");
    REQUIRE(msport("simulate --kind fgn --hurst 0.7 --n 16384 --seed 42 --out fgn.csv", dir).code == 0);
    const auto est = msport("estimate fgn.csv --method mfdfa", dir);
    REQUIRE(est.code == 0);
    CHECK(!est.out.empty());
    const auto ej = Json::parse(slurp(dir / "estimate.json"));
    double h2 = 0.0;
    const auto& spec = ej["assets"][0]["spectrum"];
    for (std::size_t k = 0; k < spec["q"].size(); ++k)
        if (spec["q"][k].get<double>() == 2.0) h2 = spec["h"][k].get<double>();
    CHECK(std::abs(h2 - 0.7) < 0.05);

    REQUIRE(msport("simulate --kind epps --assets 2 --n 16384 --seed 8 --out epps.csv", dir).code == 0);
    REQUIRE(msport("estimate epps.csv --pairs", dir).code == 0);
    const auto pj = Json::parse(slurp(dir / "estimate.json"));
    CHECK(std::abs(pj["pairs"][0]["h_rho"]["exponent"].get<double>() - 0.3) < 0.1);

    REQUIRE(msport("simulate --kind correlated --assets 3 --n 2000 --seed 2 --out c.csv", dir).code == 0);
    REQUIRE(msport("optimize c.csv", dir).code == 0);
    CHECK(slurp(dir / "weights.csv").rfind("asset_id,weight\n", 0) == 0);
    CHECK(fs::exists(dir / "covariance.csv"));
    CHECK(msport("optimize c.csv --mu-target 1.0", dir).code == 3);

    REQUIRE(msport("simulate --kind regime_switch --assets 4 --n 800 --seed 3 --out r.csv", dir).code == 0);
    const auto bt = msport("backtest r.csv", dir);
    REQUIRE(bt.code == 0);
    const auto bj = Json::parse(slurp(dir / "backtest.json"));
    CHECK(bj["lookback"] == 125);
    CHECK(bj["rebalance_every"] == 21);
    REQUIRE(bj["table"].size() == 4);
    const std::string table = slurp(dir / "backtest.txt");
    CHECK(count_lines(table) >= 5);
    CHECK(table.find("Multiscale Markowitz (Overlapping)") != std::string::npos);
    CHECK(table.find("Sortino Ratio") != std::string::npos);

    REQUIRE(msport("simulate --kind gaussian --assets 2 --n 100 --seed 3 --out short.csv", dir).code == 0);
    const auto sh = msport("backtest short.csv", dir, "", true);
    CHECK(sh.code == 2);
    CHECK(sh.out.find("PanelTooShort") != std::string::npos);
}
