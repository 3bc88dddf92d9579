#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsflow/functionals.hpp"

namespace dsflow {

struct FlowConfig {
    double cfl = 0.4;          // in (0,1]
    double t_max = 50.0;
    double osc_tol = 1e-7;     // convergence: max rho - min rho below this
    double umbilic_tol = 1e-9; // convergence: max |Aring|^2 below this
    double eps_v = 1e-6;       // spacelikeness floor on v^2
    double eps_H = 1e-8;       // parabolicity floor on H1
    int record_every = 50;     // accepted steps between records
};

enum class FlowStatus {
    Converged,
    MaxTimeReached,
    SpacelikeBreached,
    MeanConvexityLost,
    StepUnderflow,
};

std::string to_string(FlowStatus s);

struct FlowTrace {
    std::vector<FunctionalRecord> records;  // strictly increasing in t
    FlowStatus status = FlowStatus::MaxTimeReached;
    std::optional<double> r_infinity;       // present iff Converged
    double wall_time = 0;                   // seconds
    int steps = 0;
    RadialProfile final_profile;            // state at the last record time
};

/// Normal speed f = u - theta'(rho)/H1 per node.
/// Throws MeanConvexityError if H1 <= eps_H anywhere.
std::vector<double> speed(const GeometryFrame& fr, const RadialProfile& p,
                          double eps_H = 1e-8);

/// Graph-gauge rate d(rho)/dt at fixed spherical coordinate:
/// f*v = theta(rho) - theta'(rho) v / H1.
std::vector<double> graph_rhs(const RadialProfile& p, double eps_H = 1e-8);

/// One classical RK4 step of graph_rhs with the parabolic CFL step
///   dt = cfl * h^2 * min_i( n H1^2 th^2 v^2 / th' ).
std::pair<RadialProfile, double> step(const RadialProfile& p, const FlowConfig& cfg);

/// Same RK4 update with a caller-chosen dt (diagnostics and order tests).
RadialProfile step_with_dt(const RadialProfile& p, double dt, const FlowConfig& cfg = {});

/// Time-steps to convergence or t_max, recording functionals; guard trips
/// land in the returned status, never as exceptions. on_record, when set,
/// streams each record as it is produced (incremental trace persistence).
using RecordSink = std::function<void(const FunctionalRecord&)>;
FlowTrace run(const RadialProfile& p0, const FlowConfig& cfg, const RecordSink& on_record = {});

/// Post-hoc checks over a trace: barrier monotonicity, H1 lower bound,
/// area conservation, W2 monotonicity, and the dW2 rate identity.
struct MonitorParams {
    double area_tol = 1e-4;           // relative drift bound
    double rho_slack_per_step = 1e-10;
    double w2_slack = 1e-8;           // absolute backstep allowance
    double minH1_tol = 1e-6;
    double dw2_rel_tol = 0.02;
    double dw2_floor_frac = 1e-2;     // rate check only where pred >= frac*max(pred)
    int steps_per_record = 50;
};

struct MonitorReport {
    bool ok = true;
    std::vector<std::string> violations;  // each names the check and first offending t
    double max_area_drift = 0;
    double worst_dw2_rel = 0;
    int dw2_checked = 0;
    double max_rho_increase = 0;
    double min_rho_decrease = 0;
    double w2_backstep = 0;
    double minH1_drop = 0;
};

MonitorReport monitors(const FlowTrace& trace, const MonitorParams& mp = {});

/// Pointwise residual of the evolution identity for rho,
///   L rho = th - 2 th'/(H1 v) + th'^2/(th H1^2) + th'^2 |grad rho|^2/(n th H1^2),
/// where L = d_t - th'/(n H1^2) Delta - th rho_;^k d_k and the Lagrangian
/// rate d_t rho = f/v is substituted analytically (snapshot identity).
std::vector<double> residual_ev_rho(const RadialProfile& p, const GeometryFrame& fr);

/// Pointwise residual of L u = -th'/(n H1^2) |Aring|^2 u - th^2/H1 |grad rho|^2
/// with d_t u = f th' + th g(grad rho, grad f) substituted analytically.
std::vector<double> residual_ev_u(const RadialProfile& p, const GeometryFrame& fr);

/// Residual of the traced shape-operator evolution
///   d_t (n H1) = Delta f - f |A|^2 + n f
/// along Lagrangian trajectories; d_t(nH1) by a Richardson-extrapolated short
/// time difference of graph steps plus first-order upwind drift advection
/// with velocity f rho' / (v th^2). Diagnostic accuracy (~2 digits).
std::vector<double> residual_trace_h(const RadialProfile& p, const FlowConfig& cfg);

}  // namespace dsflow
