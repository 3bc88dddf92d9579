#include "dsflow/duality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsflow {

AmbientCurve embed(const RadialProfile& p, double eps_v) {
    const int N = p.N;
    AmbientCurve c;
    c.n = p.model.n;
    c.y.resize(N + 1);
    c.nu.resize(N + 1);

    std::vector<double> rp, rpp;
    derivatives(p, rp, rpp);

    for (int i = 0; i <= N; ++i) {
        const double rho = p.rho[i], psi = p.psi[i];
        const double ch = std::cosh(rho), sh = std::sinh(rho);
        const double cp = std::cos(psi), sp = std::sin(psi);
        c.y[i] = {sh, ch * cp, ch * sp};
        const double v2 = 1.0 - rp[i] * rp[i] / (ch * ch);
        if (!(v2 > eps_v)) throw SpacelikeError(v2);
        // nu = a w1 + b w2, w1 = (ch, sh cp, sh sp) (coordinate d_r),
        // w2 = (0, -sp, cp); orthogonality to the tangent rho' w1 + ch w2
        // gives b = a rho'/ch, normalization <nu,nu> = -1 gives a = 1/v.
        const double a = 1.0 / std::sqrt(v2);
        const double b = a * rp[i] / ch;
        c.nu[i] = {a * ch, a * sh * cp - b * sp, a * sh * sp + b * cp};
    }
    return c;
}

namespace {

// monotone cubic Hermite (Fritsch-Carlson) through (x_k, y_k) on an
// increasing abscissa; evaluated at query points q
std::vector<double> pchip(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& q) {
    const std::size_t m = x.size();
    std::vector<double> d(m - 1), slope(m);
    for (std::size_t k = 0; k + 1 < m; ++k) d[k] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
    slope[0] = d[0];
    slope[m - 1] = d[m - 2];
    for (std::size_t k = 1; k + 1 < m; ++k) {
        if (d[k - 1] * d[k] <= 0) {
            slope[k] = 0;
        } else {
            const double w1 = 2 * (x[k + 1] - x[k]) + (x[k] - x[k - 1]);
            const double w2 = (x[k + 1] - x[k]) + 2 * (x[k] - x[k - 1]);
            slope[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    std::vector<double> out(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        double xq = std::clamp(q[j], x.front(), x.back());
        auto it = std::upper_bound(x.begin(), x.end(), xq);
        std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - x.begin() - 1, 0), m - 2);
        const double hk = x[k + 1] - x[k];
        const double t = (xq - x[k]) / hk;
        const double t2 = t * t, t3 = t2 * t;
        out[j] = (2 * t3 - 3 * t2 + 1) * y[k] + (t3 - 2 * t2 + t) * hk * slope[k] +
                 (-2 * t3 + 3 * t2) * y[k + 1] + (t3 - t2) * hk * slope[k + 1];
    }
    return out;
}

}  // namespace

DualSurface dualize(const AmbientCurve& curve, const RadialProfile& p, const GeometryFrame& fr,
                    double kappa_floor) {
    const int N = p.N;
    const double h = p.h();
    double kmin = fr.kappa_rad[0];
    for (int i = 0; i <= N; ++i)
        kmin = std::min({kmin, fr.kappa_rad[i], fr.kappa_ang[i]});
    if (!(kmin > kappa_floor)) throw NotConvexError(kmin);

    DualSurface d;
    d.x = curve.nu;
    d.r_tilde.resize(N + 1);
    d.psi_tilde.resize(N + 1);
    d.metric_rad.assign(N + 1, 0.0);

    for (int i = 0; i <= N; ++i) {
        const MinkVec& x = d.x[i];
        const double norm = mink_dot(x, x);
        if (std::abs(norm + 1.0) > 1e-10)
            throw std::logic_error("dual point left the hyperboloid: <x,x> = " +
                                   std::to_string(norm));
        d.r_tilde[i] = std::acosh(std::max(1.0, x.t));
        d.psi_tilde[i] = std::atan2(x.y, x.x);
    }
    d.psi_tilde[0] = 0.0;
    d.psi_tilde[N] = M_PI;
    for (int i = 1; i < N; ++i) {
        if (d.psi_tilde[i] <= d.psi_tilde[i - 1])
            throw NotConvexError(kmin);  // Gauss map must be monotone in psi
        d.metric_rad[i] = mink_dot((1.0 / (2 * h)) * (d.x[i + 1] - d.x[i - 1]),
                                   (1.0 / (2 * h)) * (d.x[i + 1] - d.x[i - 1]));
    }

    // resample the dual graph rho-tilde(psi-tilde) onto a uniform grid and run
    // the hyperbolic graph formulas (h-tilde v-tilde^{-1} = -rho_;ij + hbar)
    const int M = N;
    d.grid_psi.resize(M + 1);
    for (int j = 0; j <= M; ++j) d.grid_psi[j] = M_PI * j / M;
    d.grid_rho = pchip(d.psi_tilde, d.r_tilde, d.grid_psi);
    d.grid_rho_src = pchip(d.psi_tilde, p.rho, d.grid_psi);

    const double hg = M_PI / M;
    d.grid_v.resize(M + 1);
    d.grid_u.resize(M + 1);
    d.grid_kappa_rad.resize(M + 1);
    d.grid_kappa_ang.resize(M + 1);
    for (int j = 0; j <= M; ++j) {
        double rp, rpp;
        if (j == 0) {
            rp = 0;
            rpp = 2 * (d.grid_rho[1] - d.grid_rho[0]) / (hg * hg);
        } else if (j == M) {
            rp = 0;
            rpp = 2 * (d.grid_rho[M - 1] - d.grid_rho[M]) / (hg * hg);
        } else {
            rp = (d.grid_rho[j + 1] - d.grid_rho[j - 1]) / (2 * hg);
            rpp = (d.grid_rho[j + 1] - 2 * d.grid_rho[j] + d.grid_rho[j - 1]) / (hg * hg);
        }
        const double th = std::sinh(d.grid_rho[j]);   // theta-tilde
        const double thp = std::cosh(d.grid_rho[j]);  // theta-tilde'
        const double v = std::sqrt(1.0 + rp * rp / (th * th));
        d.grid_v[j] = v;
        d.grid_u[j] = th / v;
        d.grid_kappa_rad[j] = (-th * rpp + 2 * thp * rp * rp + th * th * thp) /
                              (th * th * th * v * v * v);
        if (j == 0 || j == M) {
            d.grid_kappa_ang[j] = (thp - rpp / th) / (th * v);
        } else {
            const double cot = std::cos(d.grid_psi[j]) / std::sin(d.grid_psi[j]);
            d.grid_kappa_ang[j] = (thp - rp * cot / th) / (th * v);
        }
    }
    return d;
}

std::vector<double> dual_speed_identity(const GeometryFrame& fr, const RadialProfile& p,
                                        const DualSurface& dual) {
    const int N = p.N;
    const int n = p.model.n;
    std::vector<double> out(N + 1);
    for (int i = 0; i <= N; ++i) {
        const double kr = fr.kappa_rad[i], ka = fr.kappa_ang[i];
        if (!(kr > 0 && ka > 0)) throw NotConvexError(std::min(kr, ka));
        const double ktr = 1.0 / kr, kta = 1.0 / ka;
        // sigma_n = ktr * kta^{n-1}; sigma_{n-1} = kta^{n-1} + (n-1) ktr kta^{n-2}
        const double kta_nm2 = std::pow(kta, n - 2);
        const double sig_n = ktr * kta_nm2 * kta;
        const double sig_nm1 = kta_nm2 * kta + (n - 1) * ktr * kta_nm2;
        const double u_tilde = fr.thp[i];  // support exchange: u-tilde = theta'(rho)
        const double thp_tilde = std::cosh(dual.r_tilde[i]);
        const double dual_speed = thp_tilde - n * u_tilde * sig_n / sig_nm1;
        const double primal_speed = fr.u[i] - fr.thp[i] / fr.H1[i];
        out[i] = dual_speed - primal_speed;
    }
    return out;
}

std::vector<MinkVec> dual_normals(const DualSurface& dual, double h) {
    const int N = static_cast<int>(dual.x.size()) - 1;
    std::vector<MinkVec> nu(N + 1);
    for (int i = 1; i < N; ++i) {
        const MinkVec T = (1.0 / (2 * h)) * (dual.x[i + 1] - dual.x[i - 1]);
        const MinkVec& x = dual.x[i];
        // solve <nu,x> = <nu,T> = 0 in span{e0,e1,e2} with A = nu_t fixed,
        // then normalize to <nu,nu> = +1 (spacelike) with nu_t > 0
        const double det = x.x * T.y - x.y * T.x;
        MinkVec v;
        if (std::abs(det) > 1e-14) {
            v = {1.0, (x.t * T.y - x.y * T.t) / det, (x.x * T.t - x.t * T.x) / det};
        } else {
            v = {0.0, -T.y, T.x};  // time component decouples
        }
        const double s = mink_dot(v, v);
        if (!(s > 0)) throw std::runtime_error("dual normal is not spacelike");
        v = (1.0 / std::sqrt(s)) * v;
        if (v.t < 0) v = -1.0 * v;
        nu[i] = v;
    }
    if (N >= 2) {
        nu[0] = nu[1];
        nu[N] = nu[N - 1];
    }
    return nu;
}

}  // namespace dsflow
