#include "dsflow/oracle.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace dsflow::oracle {

namespace {

using V4 = std::array<double, 4>;

double mdot(const V4& a, const V4& b) {
    return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

V4 embed_point(double rho, double psi, double chi) {
    return {std::sinh(rho), std::cosh(rho) * std::cos(psi),
            std::cosh(rho) * std::sin(psi) * std::cos(chi),
            std::cosh(rho) * std::sin(psi) * std::sin(chi)};
}

struct Patch {
    V4 y, t_psi, y_pp;
};

Patch patch_derivs(const std::function<double(double)>& rho, double psi, double d) {
    const V4 y0 = embed_point(rho(psi), psi, 0);
    const V4 yp = embed_point(rho(psi + d), psi + d, 0);
    const V4 ym = embed_point(rho(psi - d), psi - d, 0);
    Patch out;
    out.y = y0;
    for (int c = 0; c < 4; ++c) {
        out.t_psi[c] = (yp[c] - ym[c]) / (2 * d);
        out.y_pp[c] = (yp[c] - 2 * y0[c] + ym[c]) / (d * d);
    }
    return out;
}

// kappas at one point from patch derivatives; the chi-direction second
// fundamental form is closed-form from the rotation orbit (d2y/dchi2 at
// chi=0 has the single component -cosh(rho) sin(psi) e2).
std::pair<double, double> kappas_from(const Patch& q, double rho, double psi) {
    // normal: <nu,y> = <nu,t_psi> = 0 in span{e0,e1,e2}, <nu,nu> = -1, nu0 > 0
    const double det = q.y[1] * q.t_psi[2] - q.y[2] * q.t_psi[1];
    if (std::abs(det) < 1e-300) throw std::runtime_error("oracle: degenerate tangent system");
    const double B = (q.y[0] * q.t_psi[2] - q.y[2] * q.t_psi[0]) / det;
    const double C = (q.y[1] * q.t_psi[0] - q.y[0] * q.t_psi[1]) / det;
    V4 nu = {1.0, B, C, 0.0};
    const double s = -mdot(nu, nu);
    if (!(s > 0)) throw std::runtime_error("oracle: normal is not timelike");
    const double inv = 1.0 / std::sqrt(s);
    for (auto& c : nu) c *= inv;
    if (nu[0] < 0)
        for (auto& c : nu) c = -c;

    const double g11 = mdot(q.t_psi, q.t_psi);
    const double h11 = -mdot(q.y_pp, nu);
    const double orbit = std::cosh(rho) * std::sin(psi);
    const double g22 = orbit * orbit;
    const double h22 = orbit * nu[2];  // -<(0,0,-orbit,0), nu>
    return {h11 / g11, h22 / g22};
}

}  // namespace

Kappas embedding_curvatures(const WarpModel& model, const std::function<double(double)>& rho,
                            std::span<const double> psi, double delta) {
    if (model.kind != SpaceKind::DeSitter)
        throw std::domain_error("embedding oracle: de Sitter model required");
    Kappas out;
    out.kappa_rad.resize(psi.size());
    out.kappa_ang.resize(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const Patch a = patch_derivs(rho, psi[i], delta);
        const Patch b = patch_derivs(rho, psi[i], delta / 2);
        auto [kr_a, ka_a] = kappas_from(a, rho(psi[i]), psi[i]);
        auto [kr_b, ka_b] = kappas_from(b, rho(psi[i]), psi[i]);
        out.kappa_rad[i] = (4 * kr_b - kr_a) / 3;  // Richardson in delta
        out.kappa_ang[i] = (4 * ka_b - ka_a) / 3;
    }
    return out;
}

Kappas embedding_curvatures(const RadialProfile& p) {
    const int N = p.N;
    const double h = p.h();
    Kappas out;
    out.kappa_rad.resize(N + 1);
    out.kappa_ang.resize(N + 1);
    for (int i = 1; i < N; ++i) {
        Patch q;
        q.y = embed_point(p.rho[i], p.psi[i], 0);
        const V4 yp = embed_point(p.rho[i + 1], p.psi[i + 1], 0);
        const V4 ym = embed_point(p.rho[i - 1], p.psi[i - 1], 0);
        for (int c = 0; c < 4; ++c) {
            q.t_psi[c] = (yp[c] - ym[c]) / (2 * h);
            q.y_pp[c] = (yp[c] - 2 * q.y[c] + ym[c]) / (h * h);
        }
        auto [kr, ka] = kappas_from(q, p.rho[i], p.psi[i]);
        out.kappa_rad[i] = kr;
        out.kappa_ang[i] = ka;
    }
    out.kappa_rad[0] = out.kappa_rad[1];
    out.kappa_ang[0] = out.kappa_ang[1];
    out.kappa_rad[N] = out.kappa_rad[N - 1];
    out.kappa_ang[N] = out.kappa_ang[N - 1];
    return out;
}

}  // namespace dsflow::oracle
