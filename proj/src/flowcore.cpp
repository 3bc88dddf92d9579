#include "dsflow/flowcore.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace dsflow {

std::string to_string(FlowStatus s) {
    switch (s) {
        case FlowStatus::Converged: return "Converged";
        case FlowStatus::MaxTimeReached: return "MaxTimeReached";
        case FlowStatus::SpacelikeBreached: return "SpacelikeBreached";
        case FlowStatus::MeanConvexityLost: return "MeanConvexityLost";
        case FlowStatus::StepUnderflow: return "StepUnderflow";
    }
    return "?";
}

std::vector<double> speed(const GeometryFrame& fr, const RadialProfile& p, double eps_H) {
    if (!(fr.min_H1 > eps_H)) throw MeanConvexityError(fr.min_H1);
    std::vector<double> f(p.N + 1);
    for (int i = 0; i <= p.N; ++i) f[i] = fr.u[i] - fr.thp[i] / fr.H1[i];
    return f;
}

namespace {

void graph_rhs_into(const GeometryFrame& fr, double eps_H, std::vector<double>& out) {
    if (!(fr.min_H1 > eps_H)) throw MeanConvexityError(fr.min_H1);
    const std::size_t m = fr.H1.size();
    out.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        out[i] = fr.th[i] - fr.thp[i] * fr.v[i] / fr.H1[i];
}

double cfl_dt(const GeometryFrame& fr, double h, double cfl) {
    // inverse of the principal diffusion coefficient th'/(n H1^2) g^{psi psi}
    double m = std::numeric_limits<double>::infinity();
    const int n = fr.n;
    for (std::size_t i = 0; i < fr.H1.size(); ++i) {
        const double g = n * fr.H1[i] * fr.H1[i] * fr.th[i] * fr.th[i] * fr.v[i] * fr.v[i] /
                         fr.thp[i];
        m = std::min(m, g);
    }
    return cfl * h * h * m;
}

struct RkWorkspace {
    GeometryFrame fr;
    RadialProfile stage;
    std::vector<double> k1, k2, k3, k4;
};

// One RK4 step with a given dt; the frame of the input state is provided.
void rk4_step(const RadialProfile& p, const GeometryFrame& fr0, double dt, const FlowConfig& cfg,
              RkWorkspace& ws, RadialProfile& out) {
    const int N = p.N;
    graph_rhs_into(fr0, cfg.eps_H, ws.k1);
    ws.stage = p;
    for (int i = 0; i <= N; ++i) ws.stage.rho[i] = p.rho[i] + 0.5 * dt * ws.k1[i];
    frame_into(ws.stage, ws.fr, cfg.eps_v);
    graph_rhs_into(ws.fr, cfg.eps_H, ws.k2);
    for (int i = 0; i <= N; ++i) ws.stage.rho[i] = p.rho[i] + 0.5 * dt * ws.k2[i];
    frame_into(ws.stage, ws.fr, cfg.eps_v);
    graph_rhs_into(ws.fr, cfg.eps_H, ws.k3);
    for (int i = 0; i <= N; ++i) ws.stage.rho[i] = p.rho[i] + dt * ws.k3[i];
    frame_into(ws.stage, ws.fr, cfg.eps_v);
    graph_rhs_into(ws.fr, cfg.eps_H, ws.k4);
    out = p;
    for (int i = 0; i <= N; ++i)
        out.rho[i] = p.rho[i] + dt / 6.0 * (ws.k1[i] + 2 * ws.k2[i] + 2 * ws.k3[i] + ws.k4[i]);
}

}  // namespace

std::vector<double> graph_rhs(const RadialProfile& p, double eps_H) {
    GeometryFrame fr = frame(p);
    std::vector<double> out;
    graph_rhs_into(fr, eps_H, out);
    return out;
}

std::pair<RadialProfile, double> step(const RadialProfile& p, const FlowConfig& cfg) {
    GeometryFrame fr0 = frame(p, cfg.eps_v);
    const double dt = cfl_dt(fr0, p.h(), cfg.cfl);
    if (dt < 1e-12) throw std::runtime_error("step underflow: dt = " + std::to_string(dt));
    RkWorkspace ws;
    RadialProfile out;
    rk4_step(p, fr0, dt, cfg, ws, out);
    return {std::move(out), dt};
}

RadialProfile step_with_dt(const RadialProfile& p, double dt, const FlowConfig& cfg) {
    GeometryFrame fr0 = frame(p, cfg.eps_v);
    RkWorkspace ws;
    RadialProfile out;
    rk4_step(p, fr0, dt, cfg, ws, out);
    return out;
}

FlowTrace run(const RadialProfile& p0, const FlowConfig& cfg, const RecordSink& on_record) {
    const auto t_start = std::chrono::steady_clock::now();
    FlowTrace trace;
    VolumeCache vcache(p0.model);
    RadialProfile p = p0, next = p0;
    RkWorkspace ws;
    GeometryFrame fr;
    double t = 0;
    int steps_since_record = 0;
    double last_record_t = -1;

    auto push_record = [&](const GeometryFrame& f) {
        if (!trace.records.empty() && !(t > trace.records.back().t)) return;
        trace.records.push_back(record(p, f, t, vcache));
        if (on_record) on_record(trace.records.back());
        last_record_t = t;
    };

    try {
        while (true) {
            frame_into(p, fr, cfg.eps_v);
            if (trace.records.empty()) push_record(fr);

            const auto [mn, mx] = std::minmax_element(p.rho.begin(), p.rho.end());
            const double osc = *mx - *mn;
            if (osc < cfg.osc_tol && fr.max_ring2 < cfg.umbilic_tol) {
                if (t > last_record_t) push_record(fr);
                trace.status = FlowStatus::Converged;
                trace.r_infinity = std::accumulate(p.rho.begin(), p.rho.end(), 0.0) / p.rho.size();
                const double a0 = trace.records.front().area;
                const double rec = std::abs(phi1(p.model, *trace.r_infinity) - a0) / a0;
                if (rec >= 1e-3)
                    throw std::logic_error("converged slice fails area reconciliation: " +
                                           std::to_string(rec));
                break;
            }
            if (t >= cfg.t_max) {
                if (t > last_record_t) push_record(fr);
                trace.status = FlowStatus::MaxTimeReached;
                break;
            }

            double dt = cfl_dt(fr, p.h(), cfg.cfl);
            if (dt < 1e-12) {
                if (t > last_record_t) push_record(fr);
                trace.status = FlowStatus::StepUnderflow;
                break;
            }
            if (t + dt > cfg.t_max) dt = cfg.t_max - t;

            rk4_step(p, fr, dt, cfg, ws, next);
            std::swap(p, next);
            t += dt;
            ++trace.steps;
            if (++steps_since_record >= cfg.record_every) {
                frame_into(p, fr, cfg.eps_v);
                push_record(fr);
                steps_since_record = 0;
            }
        }
    } catch (const SpacelikeError&) {
        trace.status = FlowStatus::SpacelikeBreached;
    } catch (const MeanConvexityError&) {
        trace.status = FlowStatus::MeanConvexityLost;
    }

    trace.final_profile = std::move(p);
    trace.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return trace;
}

MonitorReport monitors(const FlowTrace& trace, const MonitorParams& mp) {
    MonitorReport rep;
    const auto& rs = trace.records;
    if (rs.size() < 2) {
        rep.ok = false;
        rep.violations.push_back("trace has fewer than 2 records");
        return rep;
    }
    auto flag = [&](const std::string& what, double t, double mag) {
        rep.ok = false;
        std::ostringstream os;
        os << what << " at t=" << t << " (magnitude " << mag << ")";
        rep.violations.push_back(os.str());
    };

    const double rho_slack = mp.rho_slack_per_step * mp.steps_per_record;
    const double a0 = rs.front().area;
    const double h10 = rs.front().min_H1;
    bool rho_up_flagged = false, rho_dn_flagged = false, w2_flagged = false;
    for (std::size_t k = 0; k + 1 < rs.size(); ++k) {
        const double up = rs[k + 1].max_rho - rs[k].max_rho;
        const double dn = rs[k].min_rho - rs[k + 1].min_rho;
        const double bk = rs[k].W2 - rs[k + 1].W2;
        rep.max_rho_increase = std::max(rep.max_rho_increase, up);
        rep.min_rho_decrease = std::max(rep.min_rho_decrease, dn);
        rep.w2_backstep = std::max(rep.w2_backstep, bk);
        if (up > rho_slack && !rho_up_flagged) {
            flag("max_rho increased", rs[k + 1].t, up);
            rho_up_flagged = true;
        }
        if (dn > rho_slack && !rho_dn_flagged) {
            flag("min_rho decreased", rs[k + 1].t, dn);
            rho_dn_flagged = true;
        }
        if (bk > mp.w2_slack && !w2_flagged) {
            flag("W2 decreased", rs[k + 1].t, bk);
            w2_flagged = true;
        }
    }

    bool area_flagged = false, h1_flagged = false;
    for (const auto& r : rs) {
        const double drift = std::abs(r.area - a0) / a0;
        rep.max_area_drift = std::max(rep.max_area_drift, drift);
        if (drift > mp.area_tol && !area_flagged) {
            flag("area drift", r.t, drift);
            area_flagged = true;
        }
        const double drop = h10 - r.min_H1;
        rep.minH1_drop = std::max(rep.minH1_drop, drop);
        if (drop > mp.minH1_tol && !h1_flagged) {
            flag("min H1 dropped", r.t, drop);
            h1_flagged = true;
        }
    }

    // dW2/dt identity on the middle 80% of records, where the rate is
    // resolvable above the discretization-drift floor
    double pred_max = 0;
    for (const auto& r : rs) pred_max = std::max(pred_max, r.dW2_predicted);
    const std::size_t k0 = rs.size() / 10, k1 = rs.size() - rs.size() / 10;
    bool dw2_flagged = false;
    for (std::size_t k = std::max<std::size_t>(k0, 1); k + 1 < k1; ++k) {
        const double pred = rs[k].dW2_predicted;
        if (pred < mp.dw2_floor_frac * pred_max) continue;
        const double fd = (rs[k + 1].W2 - rs[k - 1].W2) / (rs[k + 1].t - rs[k - 1].t);
        const double rel = std::abs(fd - pred) / pred;
        rep.worst_dw2_rel = std::max(rep.worst_dw2_rel, rel);
        ++rep.dw2_checked;
        if (rel > mp.dw2_rel_tol && !dw2_flagged) {
            flag("dW2/dt mismatch", rs[k].t, rel);
            dw2_flagged = true;
        }
    }
    return rep;
}

std::vector<double> residual_ev_rho(const RadialProfile& p, const GeometryFrame& fr) {
    const int N = p.N;
    const int n = p.model.n;
    std::vector<double> f = speed(fr, p);
    std::vector<double> lap = laplace_beltrami(p, p.rho);
    std::vector<double> res(N + 1);
    for (int i = 0; i <= N; ++i) {
        const double th = fr.th[i], thp = fr.thp[i], v = fr.v[i], H1 = fr.H1[i];
        const double g2 = fr.grad2rho[i];
        const double lhs = f[i] / v - thp / (n * H1 * H1) * lap[i] - th * g2;
        const double rhs = th - 2 * thp / (H1 * v) + thp * thp / (th * H1 * H1) +
                           thp * thp / (n * th * H1 * H1) * g2;
        res[i] = lhs - rhs;
    }
    return res;
}

std::vector<double> residual_ev_u(const RadialProfile& p, const GeometryFrame& fr) {
    const int N = p.N;
    const int n = p.model.n;
    const double h = p.h();
    std::vector<double> f = speed(fr, p);
    std::vector<double> lap_u = laplace_beltrami(p, fr.u);

    // even-parity central derivatives of f and u on the grid
    auto ddpsi = [&](const std::vector<double>& g, int i) {
        if (i == 0 || i == N) return 0.0;
        return (g[i + 1] - g[i - 1]) / (2 * h);
    };

    std::vector<double> res(N + 1);
    for (int i = 0; i <= N; ++i) {
        const double th = fr.th[i], thp = fr.thp[i], v = fr.v[i], H1 = fr.H1[i];
        const double gpp = 1.0 / (th * th * v * v);  // g^{psi psi}
        const double rp = fr.rho_prime[i];
        const double g2 = fr.grad2rho[i];
        const double dtu = f[i] * thp + th * rp * gpp * ddpsi(f, i);
        const double lhs =
            dtu - thp / (n * H1 * H1) * lap_u[i] - th * rp * gpp * ddpsi(fr.u, i);
        const double rhs = -thp / (n * H1 * H1) * fr.ring2[i] * fr.u[i] - th * th / H1 * g2;
        res[i] = lhs - rhs;
    }
    return res;
}

std::vector<double> residual_trace_h(const RadialProfile& p, const FlowConfig& cfg) {
    const int N = p.N;
    const int n = p.model.n;
    const double h = p.h();
    GeometryFrame fr = frame(p, cfg.eps_v);
    std::vector<double> f = speed(fr, p, cfg.eps_H);
    std::vector<double> lap_f = laplace_beltrami(p, f);

    const double dt = 0.25 * cfl_dt(fr, h, cfg.cfl);
    RkWorkspace ws;
    RadialProfile p_half = p, p_full = p;
    rk4_step(p, fr, 0.5 * dt, cfg, ws, p_half);
    rk4_step(p, fr, dt, cfg, ws, p_full);
    GeometryFrame fr_half = frame(p_half, cfg.eps_v);
    GeometryFrame fr_full = frame(p_full, cfg.eps_v);

    std::vector<double> res(N + 1);
    for (int i = 0; i <= N; ++i) {
        const double phi0 = n * fr.H1[i];
        // Richardson: D(dt) and D(dt/2) one-sided differences -> O(dt^2)
        const double D1 = (n * fr_full.H1[i] - phi0) / dt;
        const double D2 = (n * fr_half.H1[i] - phi0) / (0.5 * dt);
        const double dt_phi = 2 * D2 - D1;

        // Lagrangian drift velocity in psi: f rho' / (v th^2); upwind advection
        const double c = f[i] * fr.rho_prime[i] / (fr.v[i] * fr.th[i] * fr.th[i]);
        double adv = 0;
        if (i > 0 && i < N)
            adv = c * ((c >= 0 ? (n * fr.H1[i] - n * fr.H1[i - 1])
                               : (n * fr.H1[i + 1] - n * fr.H1[i])) /
                       h);
        const double rhs = lap_f[i] - f[i] * fr.normA2[i] + n * f[i];
        res[i] = dt_phi + adv - rhs;
    }
    return res;
}

}  // namespace dsflow
