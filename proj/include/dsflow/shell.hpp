#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dsflow/flowcore.hpp"

namespace dsflow {

struct SliceInitial {
    double r = 1.0;
};
struct LegendreInitial {
    double r = 1.0;
    double eps = 0.1;
    int ell = 2;
};
struct CustomInitial {
    std::string path;
};
using Initial = std::variant<SliceInitial, LegendreInitial, CustomInitial>;

struct Scenario {
    std::string name = "scenario";
    int n = 2;
    int N = 200;
    Initial initial = LegendreInitial{};
    FlowConfig flow;
};

/// Parses `key = value` lines ('#' starts a comment; unknown keys rejected
/// with key name and line number). Missing keys take defaults.
Scenario parse_config(const std::string& path);
Scenario parse_config_text(const std::string& text, const std::string& origin = "<string>");

/// Canonical serialization; parse_config_text(emit_config(s)) == s.
std::string emit_config(const Scenario& s);

bool operator==(const Scenario& a, const Scenario& b);

/// Builds the initial profile and runs the admissibility gates
/// (parse -> spacelike -> mean-convex); gate failures are ConfigError.
RadialProfile initial_profile(const Scenario& s);

/// Exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitGuard = 3;
inline constexpr int kExitSuite = 4;

/// Runs a scenario; writes trace.csv, report.json, final_profile.csv under
/// out_dir. Returns kExitOk on Converged/MaxTimeReached, kExitGuard on guard
/// trips, kExitConfig on gate rejection.
int cmd_run(const Scenario& s, const std::string& out_dir);

/// Property-suite driver: frame-vs-oracle, Minkowski identities, evolution
/// residual orders, duality (when strictly convex). Writes a pass/fail JSON
/// to report_path (empty = stdout). Returns kExitOk or kExitSuite.
int cmd_check(const Scenario& s, const std::string& report_path);
int cmd_check_profile(const std::string& profile_path, const std::string& report_path);

/// slice-table: CSV r, area, volume, H1, W2 on a radius grid.
int cmd_slice_table(int n, double r_min, double r_max, int steps, std::ostream& os);

/// dual-check: duality identity report as JSON. Returns kExitOk/kExitSuite.
int cmd_dual_check(const Scenario& s, const std::string& report_path);

/// sweep: independent scenarios in a worker pool, one output dir per name.
int cmd_sweep(const std::vector<std::string>& config_paths, const std::string& out_root,
              int workers);

}  // namespace dsflow
