#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "dsflow/shell.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string out = "out";
    std::optional<int> n, grid;
    std::optional<double> tmax, cfl;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
    auto* opt = cmd->add_option("--config", f.config, "scenario config file (key = value lines)");
    if (config_required) opt->required();
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--n", f.n, "override hypersurface dimension");
    cmd->add_option("--grid", f.grid, "override grid intervals N");
    cmd->add_option("--tmax", f.tmax, "override t_max");
    cmd->add_option("--cfl", f.cfl, "override cfl");
}

int load_scenario(const CommonFlags& f, dsflow::Scenario& s) {
    try {
        s = f.config.empty() ? dsflow::Scenario{} : dsflow::parse_config(f.config);
        if (f.n) s.n = *f.n;
        if (f.grid) s.N = *f.grid;
        if (f.tmax) s.flow.t_max = *f.tmax;
        if (f.cfl) s.flow.cfl = *f.cfl;
        if (!(s.flow.cfl > 0 && s.flow.cfl <= 1)) throw dsflow::ConfigError("cfl out of (0,1]");
        if (s.n < 2) throw dsflow::ConfigError("n must be >= 2");
        if (s.N < 16) throw dsflow::ConfigError("N must be >= 16");
    } catch (const dsflow::ConfigError& e) {
        std::cerr << "configuration rejected: " << e.what() << "\n";
        return dsflow::kExitConfig;
    }
    return dsflow::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"locally constrained inverse mean curvature flow on de Sitter graphs"};
    app.require_subcommand(1);

    CommonFlags run_f, check_f, dual_f;
    std::string check_profile;

    auto* run_cmd = app.add_subcommand("run", "time-step a scenario and persist trace/report");
    add_common(run_cmd, run_f, true);

    auto* check_cmd = app.add_subcommand("check", "run the property suites on a scenario/profile");
    add_common(check_cmd, check_f, false);
    check_cmd->add_option("--profile", check_profile, "profile CSV instead of a scenario config");
    std::string check_report;
    check_cmd->add_option("--report", check_report, "write JSON report here (default stdout)");

    auto* slice_cmd = app.add_subcommand("slice-table", "emit slice analytics as CSV");
    int st_n = 2, st_steps = 30;
    double st_rmin = 0.1, st_rmax = 3.0;
    slice_cmd->add_option("--n", st_n, "hypersurface dimension");
    slice_cmd->add_option("--rmin", st_rmin, "smallest radius");
    slice_cmd->add_option("--rmax", st_rmax, "largest radius");
    slice_cmd->add_option("--steps", st_steps, "grid steps");

    auto* dual_cmd = app.add_subcommand("dual-check", "duality identity report (convex profiles)");
    add_common(dual_cmd, dual_f, false);
    std::string dual_report;
    dual_cmd->add_option("--report", dual_report, "write JSON report here (default stdout)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run several scenarios in a worker pool");
    std::vector<std::string> sweep_configs;
    std::string sweep_out = "out";
    int sweep_workers = 4;
    sweep_cmd->add_option("configs", sweep_configs, "scenario config files")->required();
    sweep_cmd->add_option("--out", sweep_out, "output root (one subdirectory per scenario)");
    sweep_cmd->add_option("--workers", sweep_workers, "worker pool size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            dsflow::Scenario s;
            if (int rc = load_scenario(run_f, s)) return rc;
            return dsflow::cmd_run(s, run_f.out);
        }
        if (check_cmd->parsed()) {
            if (!check_profile.empty()) return dsflow::cmd_check_profile(check_profile, check_report);
            dsflow::Scenario s;
            if (int rc = load_scenario(check_f, s)) return rc;
            return dsflow::cmd_check(s, check_report);
        }
        if (slice_cmd->parsed()) return dsflow::cmd_slice_table(st_n, st_rmin, st_rmax, st_steps, std::cout);
        if (dual_cmd->parsed()) {
            dsflow::Scenario s;
            if (int rc = load_scenario(dual_f, s)) return rc;
            return dsflow::cmd_dual_check(s, dual_report);
        }
        if (sweep_cmd->parsed()) return dsflow::cmd_sweep(sweep_configs, sweep_out, sweep_workers);
    } catch (const dsflow::ConfigError& e) {
        std::cerr << "configuration rejected: " << e.what() << "\n";
        return dsflow::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dsflow::kExitGuard;
    }
    return dsflow::kExitOk;
}
