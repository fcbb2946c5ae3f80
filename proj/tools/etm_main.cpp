#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "etm/app.hpp"
#include "etm/errors.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw etm::ConfigError("betas", "'" + item + "' is not a number");
        }
        if (used != item.size()) throw etm::ConfigError("betas", "'" + item + "' is not a number");
        out.push_back(v);
    }
    return out;
}

etm::RunConfig load(const std::string& path, bool allow_extended) {
    std::string text;
    {
        std::ifstream in(path);
        if (!in) throw etm::ConfigError("config", "cannot read " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    if (!allow_extended) return etm::parse_run_config(text);
    // the flag has to take effect before validation
    auto json = nlohmann::json::parse(text, nullptr, false);
    if (json.is_discarded() || !json.is_object()) return etm::parse_run_config(text);
    json["allow_extended_beta"] = true;
    return etm::parse_run_config(json.dump());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Implicit finite-difference solver for a degenerate energy-transport system"};
    app.require_subcommand(1);

    std::string config_path, out_dir, region_out, betas_text;
    bool allow_extended = false;
    etm::RegionScanSpec region;

    auto* simulate = app.add_subcommand("simulate", "run one simulation");
    simulate->add_option("--config", config_path, "JSON run configuration")->required();
    simulate->add_option("--out", out_dir, "output directory (default: output_dir of the config)");
    simulate->add_flag("--allow-extended-beta", allow_extended, "accept beta outside [-1/2, 1/2)");

    auto* scan = app.add_subcommand("region-scan", "tabulate the admissible set");
    scan->add_option("--beta-min", region.beta.min);
    scan->add_option("--beta-max", region.beta.max);
    scan->add_option("--beta-step", region.beta.step);
    scan->add_option("--b-min", region.b.min);
    scan->add_option("--b-max", region.b.max);
    scan->add_option("--b-step", region.b.step);
    scan->add_option("--out", region_out, "CSV file")->required();

    auto* sw = app.add_subcommand("sweep", "one run per beta");
    sw->add_option("--betas", betas_text, "comma separated list")->required();
    sw->add_option("--config", config_path, "base configuration")->required();
    sw->add_option("--out", out_dir, "output directory (default: output_dir of the config)");
    sw->add_flag("--allow-extended-beta", allow_extended, "accept beta outside [-1/2, 1/2)");

    auto* ver = app.add_subcommand("verify", "invariant checks on a short trajectory");
    ver->add_option("--config", config_path, "JSON run configuration")->required();
    ver->add_flag("--allow-extended-beta", allow_extended, "accept beta outside [-1/2, 1/2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? etm::kExitSuccess : etm::kExitConfigError;
    }

    try {
        const fs::path base_dir = config_path.empty() ? fs::path{} : fs::path(config_path).parent_path();
        if (*simulate) {
            const auto cfg = load(config_path, allow_extended);
            return etm::run_and_write(cfg, out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir), base_dir);
        }
        if (*scan) {
            region.validate();
            etm::write_region_scan(region, region_out);
            return etm::kExitSuccess;
        }
        if (*sw) {
            const auto betas = parse_list(betas_text);
            auto cfg = load(config_path, allow_extended);
            const auto entries =
                etm::sweep(betas, cfg, out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir), base_dir);
            int rc = etm::kExitSuccess;
            for (const auto& e : entries) {
                std::cout << "beta=" << e.beta << " exit=" << e.exit_code << " " << e.message << '\n';
                if (e.exit_code != etm::kExitSuccess) rc = etm::kExitSolverAbort;
            }
            return rc;
        }
        if (*ver) {
            const auto cfg = load(config_path, allow_extended);
            const auto checks = etm::verify(cfg, base_dir);
            bool ok = true;
            for (const auto& c : checks) {
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
                if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
                std::cout << '\n';
                ok = ok && c.passed;
            }
            return ok ? etm::kExitSuccess : etm::kExitVerifyFailed;
        }
    } catch (const etm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return etm::kExitConfigError;
    } catch (const etm::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return etm::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return etm::kExitSolverAbort;
    }
    return etm::kExitSuccess;
}
