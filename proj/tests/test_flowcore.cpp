#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "dsflow/flowcore.hpp"

using namespace dsflow;

namespace {

double maxabs(std::span<const double> v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// equal-area slice radius
double area_radius(const WarpModel& m, double area) {
    double lo = 1e-8, hi = 50;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (phi1(m, mid) < area ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("speed: slices are stationary; regression snapshot at N=400") {
    const WarpModel m = WarpModel::de_sitter(2);
    const RadialProfile s = slice_profile(m, 200, 1.0);
    CHECK(maxabs(speed(frame(s), s)) < 1e-13);

    // frozen snapshot (independent prototype): rho = 1 + 0.1 P2, N = 400,
    // f at psi = 0, pi/4, pi/2, 3pi/4, pi
    const RadialProfile p = legendre_profile(m, 400, 1.0, 0.1, 2);
    const GeometryFrame fr = frame(p);
    const std::vector<double> f = speed(fr, p);
    const double expected[5] = {-2.5954369967e-01, -5.7453245418e-02, 1.2495483433e-01,
                                -5.7453245418e-02, -2.5954369967e-01};
    const int idx[5] = {0, 100, 200, 300, 400};
    for (int k = 0; k < 5; ++k) CHECK(f[idx[k]] == doctest::Approx(expected[k]).epsilon(1e-9));

    // qualitative sign pattern: f carries the sign of -(rho - r_area),
    // r_area the area-equivalent slice radius
    const FunctionalRecord rec = record(p, fr, 0.0);
    const double r_eq = area_radius(m, rec.area);
    for (int k = 0; k < 5; ++k) CHECK(f[idx[k]] * (p.rho[idx[k]] - r_eq) < 0.0);

    // speed at the spatial maximum of rho is nonpositive
    const int argmax =
        static_cast<int>(std::max_element(p.rho.begin(), p.rho.end()) - p.rho.begin());
    CHECK(f[argmax] <= 0.0);
}

TEST_CASE("speed guards mean convexity") {
    const WarpModel m = WarpModel::de_sitter(2);
    const RadialProfile p = legendre_profile(m, 200, 1.0, 0.1, 2);
    const GeometryFrame fr = frame(p);
    CHECK_THROWS_AS(speed(fr, p, /*eps_H=*/1.0), MeanConvexityError);
}

TEST_CASE("graph_rhs: slices stationary; graph and Lagrangian rates agree at extrema") {
    const WarpModel m3 = WarpModel::de_sitter(3);
    const RadialProfile s = slice_profile(m3, 128, 0.7);
    CHECK(maxabs(graph_rhs(s)) < 1e-13);

    const WarpModel m = WarpModel::de_sitter(2);
    const RadialProfile p = legendre_profile(m, 400, 1.0, 0.1, 2);
    const GeometryFrame fr = frame(p);
    const std::vector<double> f = speed(fr, p);
    const std::vector<double> g = graph_rhs(p);
    const double h = p.h();
    for (int i : {static_cast<int>(std::max_element(p.rho.begin(), p.rho.end()) - p.rho.begin()),
                  static_cast<int>(std::min_element(p.rho.begin(), p.rho.end()) - p.rho.begin())}) {
        const double lagrangian = f[i] / fr.v[i];
        CHECK(std::abs(g[i] - lagrangian) < 10 * h * h * std::max(1.0, std::abs(f[i])));
    }
}

TEST_CASE("step: slices are fixed points to round-off") {
    for (int n : {2, 3, 5}) {
        const WarpModel m = WarpModel::de_sitter(n);
        for (double r : {0.2, 1.0, 3.0}) {
            RadialProfile p = slice_profile(m, 100, r);
            FlowConfig cfg;
            double drift = 0;
            for (int k = 0; k < 50; ++k) {
                auto [q, dt] = step(p, cfg);
                p = std::move(q);
                for (double x : p.rho) drift = std::max(drift, std::abs(x - r));
                CHECK(dt > 0);
            }
            CHECK(drift < 1e-12);
        }
    }
}

TEST_CASE("step: one step contracts the oscillation of a perturbed slice") {
    const WarpModel m = WarpModel::de_sitter(2);
    const RadialProfile p = legendre_profile(m, 200, 1.0, 0.1, 2);
    auto [q, dt] = step(p, FlowConfig{});
    CHECK(dt > 0);
    CHECK(*std::max_element(q.rho.begin(), q.rho.end()) <
          *std::max_element(p.rho.begin(), p.rho.end()));
    CHECK(*std::min_element(q.rho.begin(), q.rho.end()) >
          *std::min_element(p.rho.begin(), p.rho.end()));
}

TEST_CASE("step: RK4 defect scales like dt^5 (halving dt shrinks it ~32x)") {
    // coarse grid so the test step sizes sit inside the parabolic stability
    // region; one-step-vs-two-half-steps defect is (15/16) C dt^5
    const WarpModel m = WarpModel::de_sitter(2);
    const RadialProfile p0 = legendre_profile(m, 16, 1.0, 0.1, 2);
    auto defect = [&](double dt) {
        const RadialProfile a = step_with_dt(p0, dt);
        const RadialProfile b = step_with_dt(step_with_dt(p0, 0.5 * dt), 0.5 * dt);
        double d = 0;
        for (int i = 0; i <= p0.N; ++i) d = std::max(d, std::abs(a.rho[i] - b.rho[i]));
        return d;
    };
    const double ratio = defect(0.02) / defect(0.01);
    CHECK(ratio > 20.0);
    CHECK(ratio < 45.0);
}

TEST_CASE("run: slice start converges immediately with r_infinity = r") {
    const WarpModel m = WarpModel::de_sitter(2);
    const FlowTrace tr = run(slice_profile(m, 200, 1.3), FlowConfig{});
    CHECK(tr.status == FlowStatus::Converged);
    REQUIRE(tr.r_infinity.has_value());
    CHECK(*tr.r_infinity == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(tr.records.size() == 1);
    CHECK(tr.steps == 0);
}

TEST_CASE("run: standard perturbed scenario converges, reconciles area, passes monitors") {
    const WarpModel m = WarpModel::de_sitter(2);
    const RadialProfile p = legendre_profile(m, 200, 1.0, 0.1, 2);
    FlowConfig cfg;
    const FlowTrace tr = run(p, cfg);
    REQUIRE(tr.status == FlowStatus::Converged);
    REQUIRE(tr.r_infinity.has_value());
    const double a0 = tr.records.front().area;
    CHECK(std::abs(phi1(m, *tr.r_infinity) - a0) / a0 < 1e-3);

    for (std::size_t k = 0; k + 1 < tr.records.size(); ++k)
        CHECK(tr.records[k].t < tr.records[k + 1].t);

    MonitorParams mp;
    mp.steps_per_record = cfg.record_every;
    const MonitorReport rep = monitors(tr, mp);
    for (const auto& v : rep.violations) MESSAGE(v);
    CHECK(rep.ok);
    CHECK(rep.max_area_drift < 1e-4);
    CHECK(rep.dw2_checked > 10);
    CHECK(rep.worst_dw2_rel < 0.02);

    // W2 increases strictly while the surface is visibly non-umbilic
    for (std::size_t k = 0; k + 1 < tr.records.size(); ++k)
        if (tr.records[k].max_ring2 > 10 * cfg.umbilic_tol)
            CHECK(tr.records[k + 1].W2 > tr.records[k].W2);

    // the limit slice: H1 approaches tanh(r_infinity) uniformly
    CHECK(std::abs(tr.records.back().max_H1 - std::tanh(*tr.r_infinity)) < 1e-6);
    CHECK(std::abs(tr.records.back().min_H1 - std::tanh(*tr.r_infinity)) < 1e-6);
}

TEST_CASE("run: guard trips are recorded, not thrown") {
    const WarpModel m = WarpModel::de_sitter(2);
    const FlowTrace tr = run(legendre_profile(m, 200, 1.0, 1.6, 2), FlowConfig{});
    CHECK(tr.status == FlowStatus::SpacelikeBreached);
    CHECK(!tr.r_infinity.has_value());

    // step underflow: nearly degenerate slice kept from converging
    FlowConfig tiny;
    tiny.osc_tol = 1e-300;
    tiny.umbilic_tol = 1e-300;
    tiny.eps_H = 1e-300;
    const FlowTrace tr2 = run(legendre_profile(m, 200, 1e-9, 1e-11, 2), tiny);
    CHECK(tr2.status == FlowStatus::StepUnderflow);
}

TEST_CASE("monitors flag violations in a synthetic trace") {
    FlowTrace tr;
    for (int k = 0; k < 20; ++k) {
        FunctionalRecord r;
        r.t = k * 0.1;
        r.area = 10.0;
        r.min_rho = 1.0;
        r.max_rho = 2.0;
        r.W2 = 1.0 + 0.01 * k;
        r.dW2_predicted = 0.1;
        r.min_H1 = 0.5;
        tr.records.push_back(r);
    }
    tr.records[10].max_rho = 2.5;  // barrier violation
    tr.records[12].area = 10.5;    // conservation violation
    tr.records[15].W2 = 0.0;       // monotonicity violation
    tr.records[16].min_H1 = 0.2;   // H1 bound violation
    const MonitorReport rep = monitors(tr);
    CHECK(!rep.ok);
    CHECK(rep.violations.size() >= 4);
}

TEST_CASE("residual_ev_rho: zero on slices, second-order on perturbed profiles") {
    const WarpModel m = WarpModel::de_sitter(2);
    const RadialProfile s = slice_profile(m, 128, 1.0);
    CHECK(maxabs(residual_ev_rho(s, frame(s))) < 1e-12);

    double prev = 0;
    for (int N : {100, 200, 400}) {
        const RadialProfile p = legendre_profile(m, N, 1.0, 0.1, 2);
        const double e = maxabs(residual_ev_rho(p, frame(p)));
        if (N > 100) CHECK(std::log2(prev / e) >= 1.8);
        prev = e;
    }
}

TEST_CASE("residual_ev_u: zero on slices, order >= 1.8 under refinement") {
    const WarpModel m = WarpModel::de_sitter(2);
    const RadialProfile s = slice_profile(m, 128, 1.0);
    CHECK(maxabs(residual_ev_u(s, frame(s))) < 1e-12);

    double prev = 0;
    for (int N : {100, 200, 400, 800}) {
        const RadialProfile p = legendre_profile(m, N, 1.0, 0.1, 2);
        const double e = maxabs(residual_ev_u(p, frame(p)));
        if (N > 100) CHECK(std::log2(prev / e) >= 1.8);
        prev = e;
    }
}

TEST_CASE("residual_trace_h: slice exact, small-eps structure check") {
    const WarpModel m = WarpModel::de_sitter(2);
    FlowConfig cfg;
    const RadialProfile s = slice_profile(m, 128, 1.0);
    CHECK(maxabs(residual_trace_h(s, cfg)) < 1e-9);

    for (double eps : {1e-2, 1e-3}) {
        const RadialProfile p = legendre_profile(m, 200, 1.0, eps, 2);
        const GeometryFrame fr = frame(p);
        const std::vector<double> f = speed(fr, p);
        const std::vector<double> lf = laplace_beltrami(p, f);
        double scale = 0;
        for (int i = 0; i <= p.N; ++i)
            scale = std::max(scale, std::abs(lf[i]) + std::abs(f[i]) * fr.normA2[i] +
                                        m.n * std::abs(f[i]));
        const double rel = maxabs(residual_trace_h(p, cfg)) / scale;
        CHECK(rel < 0.02);
    }
}

TEST_CASE("integral rate identities along the flow (volume, area, total H1)") {
    const WarpModel m = WarpModel::de_sitter(2);
    const int n = m.n;
    RadialProfile p = legendre_profile(m, 200, 1.0, 0.1, 2);
    FlowConfig cfg;

    // march into the resolved mid-run regime; snapshot A, middle B, end C
    for (int k = 0; k < 400; ++k) p = step(p, cfg).first;
    const RadialProfile A = p;
    double span = 0;
    const int steps_fd = 25;
    for (int k = 0; k < steps_fd; ++k) {
        auto [q, dt] = step(p, cfg);
        p = std::move(q);
        span += dt;
    }
    const RadialProfile B = p;
    for (int k = 0; k < steps_fd; ++k) {
        auto [q, dt] = step(p, cfg);
        p = std::move(q);
        span += dt;
    }
    const RadialProfile C = p;

    const GeometryFrame fr = frame(B);
    const std::vector<double> f = speed(fr, B);
    std::vector<double> w(B.N + 1);
    auto integ = [&](auto&& fn) {
        for (int i = 0; i <= B.N; ++i) w[i] = fn(i);
        return surface_integral(B, fr, w);
    };
    const double int_f = integ([&](int i) { return f[i]; });
    const double int_fH1 = integ([&](int i) { return f[i] * fr.H1[i]; });
    const double int_fH2 = integ([&](int i) { return f[i] * fr.H2[i]; });
    const double gross_f = integ([&](int i) { return std::abs(f[i]); });
    const double gross_fH1 = integ([&](int i) { return std::abs(f[i]) * fr.H1[i]; });
    const double gross_fH2 = integ([&](int i) { return std::abs(f[i] * fr.H2[i]); });

    auto functionals_of = [&](const RadialProfile& q) {
        const FunctionalRecord r = record(q, frame(q), 0.0);
        return std::array<double, 3>{r.volume, r.area, r.total_H1};
    };
    const auto FA = functionals_of(A);
    const auto FC = functionals_of(C);

    auto rate_err = [&](double fd, double pred, double gross) {
        const double scale = std::max({std::abs(fd), std::abs(pred), 0.02 * gross, 1e-300});
        return std::abs(fd - pred) / scale;
    };
    CHECK(rate_err((FC[0] - FA[0]) / span, int_f, gross_f) < 0.02);
    CHECK(rate_err((FC[1] - FA[1]) / span, n * int_fH1, n * gross_fH1) < 0.02);
    CHECK(rate_err((FC[2] - FA[2]) / span, (n - 1) * int_fH2 + int_f,
                   (n - 1) * gross_fH2 + gross_f) < 0.02);
}
