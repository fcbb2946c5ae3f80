#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "etm/app.hpp"
#include "etm/csv.hpp"
#include "etm/errors.hpp"

using namespace etm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("etm_app_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ETM_EXE) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

RunConfig short_preset(double beta, double t_end = 0.05) {
    auto cfg = preset_gaussian_wells(beta);
    cfg.solver.t_end = t_end;
    cfg.solver.snapshot_times = {0.0, 0.01, t_end};
    return cfg;
}

} // namespace

TEST_CASE("csv number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 6.14421235332821e-06, -2.5e300, 0.0, 1e-12, 123456789.125}) {
        const auto s = csv::format(v);
        CHECK(std::stod(s) == v);
        CHECK(s.find(',') == std::string::npos);
    }
    CHECK(csv::format(0.13) == "0.13");
    CHECK(snapshot_file_name(0.001) == "snapshot_t0.001.csv");
    CHECK(snapshot_file_name(1.0) == "snapshot_t1.csv");
}

TEST_CASE("equilibrium run has identically zero diagnostics") {
    auto cfg = short_preset(0.0, 0.1);
    cfg.initial_condition = ExpressionInitial{{{std::nullopt, "1"}}, {{std::nullopt, "1"}}};
    const auto res = execute_run(cfg);
    CHECK(res.completed);
    for (const auto& r : res.rows) {
        CHECK(r.S_pair == 0.0);
        CHECK(r.dissipation == 0.0);
        CHECK(r.distance.dist_n == 0.0);
        CHECK(r.distance.dist_w == 0.0);
        CHECK(r.log_entropy == 0.0);
        CHECK(r.newton_iters == 0);
    }
}

TEST_CASE("run outputs") {
    const auto dir = scratch("outputs");
    const auto cfg = short_preset(0.25);
    REQUIRE(run_and_write(cfg, dir / "a") == kExitSuccess);
    REQUIRE(run_and_write(cfg, dir / "b") == kExitSuccess);

    SUBCASE("byte-identical reruns") {
        for (const auto& entry : fs::directory_iterator(dir / "a"))
            CHECK(slurp(entry.path()) == slurp(dir / "b" / entry.path().filename()));
    }
    SUBCASE("trajectory file") {
        const auto text = slurp(dir / "a" / "trajectory.csv");
        CHECK(text.find('\r') == std::string::npos);
        std::string header;
        const auto rows = read_csv(dir / "a" / "trajectory.csv", &header);
        CHECK(header == kTrajectoryHeader);
        REQUIRE(rows.size() > 2);
        CHECK(rows.front()[0] == 0.0);
        CHECK(rows.back()[0] == 0.05);
        for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k][0] > rows[k - 1][0]);
    }
    SUBCASE("snapshots agree with (u, v)") {
        for (double t : cfg.solver.snapshot_times) {
            std::string header;
            const auto rows = read_csv(dir / "a" / snapshot_file_name(t), &header);
            CHECK(header == "x,n,theta,u,v");
            REQUIRE(rows.size() == 501);
            for (const auto& r : rows) {
                const double u = r[1] * std::pow(r[2], 0.5 - 0.25);
                const double v = r[1] * std::pow(r[2], 1.5 - 0.25);
                CHECK(std::abs(r[3] - u) <= 1e-12 * u);
                CHECK(std::abs(r[4] - v) <= 1e-12 * v);
            }
        }
    }
    SUBCASE("summary") {
        const auto text = slurp(dir / "a" / "summary.json");
        CHECK(text.find("\"status\": \"completed\"") != std::string::npos);
        CHECK(text.find("\"exp_rate\"") != std::string::npos);
        CHECK(text.find("\"verdict\": \"pass\"") != std::string::npos);
        CHECK(text.find("\"newton_tol\"") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("aborted run dumps the last good state") {
    const auto dir = scratch("abort");
    auto cfg = short_preset(0.0);
    cfg.solver.adaptive = false;
    cfg.solver.dt_init = cfg.solver.dt_max = 0.5;
    CHECK(run_and_write(cfg, dir) == kExitSolverAbort);
    CHECK(fs::exists(dir / "last_good_state.csv"));
    CHECK(slurp(dir / "summary.json").find("\"aborted\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("sweep") {
    const auto dir = scratch("sweep");
    const auto base = short_preset(0.0);
    const auto entries = sweep({-0.25, 0.25}, base, dir);
    REQUIRE(entries.size() == 2);
    for (const auto& e : entries) CHECK(e.exit_code == kExitSuccess);
    CHECK(fs::exists(dir / "beta_-0.25" / "trajectory.csv"));
    CHECK(fs::exists(dir / "beta_0.25" / "trajectory.csv"));
    std::string header;
    const auto rows = read_csv(dir / "decay_combined.csv", &header);
    CHECK(header == "beta,t,rel_dist_n,rel_dist_w");
    CHECK(rows.front()[0] == -0.25);
    CHECK(rows.back()[0] == 0.25);

    CHECK_THROWS_AS(sweep({}, base, dir), ConfigError);
    CHECK_THROWS_AS(sweep({-0.75, 0.75}, base, dir), ConfigError);
    auto extended = base;
    extended.allow_extended_beta = true;
    const auto ext = sweep({-0.75, 0.75}, extended, dir / "ext");
    CHECK(ext.size() == 2);
    fs::remove_all(dir);
}

TEST_CASE("verify suite passes on the preset") {
    for (const auto& c : verify(preset_gaussian_wells(0.25))) {
        INFO(c.name << " " << c.detail);
        CHECK(c.passed);
    }
}

TEST_CASE("command line exit codes") {
    const auto dir = scratch("cli");
    write_file(dir / "ok.json",
               R"j({"model": {"beta": 0.25}, "solver": {"t_end": 0.02}, "initial_condition": {"kind": "preset"}})j");
    write_file(dir / "ext.json",
               R"j({"model": {"beta": 0.75}, "solver": {"t_end": 0.02}, "initial_condition": {"kind": "preset"}})j");
    write_file(dir / "bad.json", R"j({"model": {"beta": 0.25}, "initial_condition": {"kind": "preset"}, "x": 1})j");
    write_file(dir / "abort.json", R"j({"model": {"beta": 0}, "solver": {"dt_init": 0.5, "dt_max": 0.5,
        "adaptive": false}, "initial_condition": {"kind": "preset"}})j");
    const std::string d = dir.string();

    CHECK(run_cli("simulate --config " + d + "/ok.json --out " + d + "/o1") == 0);
    CHECK(fs::exists(dir / "o1" / "trajectory.csv"));
    CHECK(run_cli("simulate --config " + d + "/bad.json --out " + d + "/o2") == 2);
    CHECK(run_cli("simulate --config " + d + "/missing.json") == 2);
    CHECK(run_cli("simulate --config " + d + "/ext.json --out " + d + "/o3") == 2);
    CHECK(run_cli("simulate --config " + d + "/ext.json --out " + d + "/o3 --allow-extended-beta") == 0);
    CHECK(run_cli("simulate --config " + d + "/abort.json --out " + d + "/o4") == 3);
    CHECK(run_cli("simulate") == 2);
    CHECK(run_cli("verify --config " + d + "/ok.json") == 0);
    CHECK(run_cli("sweep --betas -0.25,0.25 --config " + d + "/ok.json --out " + d + "/sw") == 0);
    CHECK(fs::exists(dir / "sw" / "decay_combined.csv"));
    CHECK(run_cli("sweep --betas '' --config " + d + "/ok.json --out " + d + "/sw2") == 2);
    CHECK(run_cli("sweep --betas -0.75,0.75 --config " + d + "/ok.json --out " + d + "/sw3") == 2);

    CHECK(run_cli("region-scan --beta-min -0.5 --beta-max 0.5 --beta-step 0.1 --b-min -10 --b-max 10 --b-step 0.5 "
                  "--out " + d + "/region.csv") == 0);
    const auto region = slurp(dir / "region.csv");
    CHECK(region.rfind("beta,b,member,margin_linear,margin_cubic\n", 0) == 0);
    CHECK(region.find("\n0,5,true,11,229\n") != std::string::npos);
    CHECK(run_cli("region-scan --beta-min 0.5 --beta-max -0.5 --beta-step 0.1 --b-min -10 --b-max 10 --b-step 0.5 "
                  "--out " + d + "/r2.csv") == 2);
    fs::remove_all(dir);
}
