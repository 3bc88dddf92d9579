#include "dsflow/spaceform.hpp"

#include <cmath>
#include <stdexcept>

namespace dsflow {

WarpModel WarpModel::de_sitter(int n) {
    if (n < 2) throw std::domain_error("WarpModel: n must be >= 2");
    return {n, SpaceKind::DeSitter};
}

WarpModel WarpModel::hyperbolic(int n) {
    if (n < 2) throw std::domain_error("WarpModel: n must be >= 2");
    return {n, SpaceKind::Hyperbolic};
}

double unit_sphere_area(int n) {
    return 2.0 * std::pow(M_PI, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

namespace {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1] (QUADPACK values).
constexpr double kKronrodX[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kGaussW[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
    double value;
    double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - half * kKronrodX[i]);
        fv[14 - i] = f(c + half * kKronrodX[i]);
    }
    fv[7] = f(c);
    double kron = 0, gauss = 0;
    for (int i = 0; i < 7; ++i) kron += kKronrodW[i] * (fv[i] + fv[14 - i]);
    kron += kKronrodW[7] * fv[7];
    // Gauss points are the odd-index Kronrod points
    gauss = kGaussW[3] * fv[7];
    for (int i = 0; i < 3; ++i) gauss += kGaussW[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    kron *= half;
    gauss *= half;
    return {kron, std::abs(kron - gauss)};
}

double integrate_rec(const std::function<double(double)>& f, double a, double b, double rel_tol,
                     double abs_tol, double whole_scale, int depth) {
    PanelResult p = gk15(f, a, b);
    if (p.error <= std::max(rel_tol * whole_scale, abs_tol) || depth >= 50) return p.value;
    const double m = 0.5 * (a + b);
    return integrate_rec(f, a, m, rel_tol, abs_tol * 0.5, whole_scale, depth + 1) +
           integrate_rec(f, m, b, rel_tol, abs_tol * 0.5, whole_scale, depth + 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol) {
    if (a == b) return 0.0;
    PanelResult first = gk15(f, a, b);
    const double scale = std::abs(first.value);
    if (first.error <= std::max(rel_tol * scale, abs_tol)) return first.value;
    const double m = 0.5 * (a + b);
    return integrate_rec(f, a, m, rel_tol, abs_tol * 0.5, scale, 1) +
           integrate_rec(f, m, b, rel_tol, abs_tol * 0.5, scale, 1);
}

double warp_volume(const WarpModel& model, double r) {
    const int n = model.n;
    return integrate_adaptive([&](double s) { return std::pow(model.theta(s), n); }, 0.0, r);
}

SliceData slice_data(const WarpModel& model, double r) {
    if (r <= 0) throw std::domain_error("slice_data: radius must be positive");
    if (model.kind != SpaceKind::DeSitter)
        throw std::domain_error("slice_data: de Sitter model required");
    const double wn = unit_sphere_area(model.n);
    SliceData s;
    s.radius = r;
    s.area = wn * std::pow(model.theta(r), model.n);
    s.volume = wn * warp_volume(model, r);
    s.H1 = model.theta_prime(r) / model.theta(r);
    s.total_H1 = s.H1 * s.area;
    s.W2 = s.total_H1 - s.volume;
    return s;
}

double phi1(const WarpModel& model, double r) {
    if (r <= 0) throw std::domain_error("phi1: radius must be positive");
    return unit_sphere_area(model.n) * std::pow(model.theta(r), model.n);
}

double phi2(const WarpModel& model, double r) {
    if (r <= 0) throw std::domain_error("phi2: radius must be positive");
    const double wn = unit_sphere_area(model.n);
    return wn * model.theta_prime(r) * std::pow(model.theta(r), model.n - 1) -
           wn * warp_volume(model, r);
}

double phi_of_area(const WarpModel& model, double a) {
    const double wn = unit_sphere_area(model.n);
    if (a <= wn) throw std::domain_error("phi_of_area: area must exceed the equator area omega_n");
    double lo = 1e-8, hi = 50.0;
    if (phi1(model, hi) < a) throw std::domain_error("phi_of_area: area outside bracket");
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, lo); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // double precision exhausted
        (phi1(model, mid) < a ? lo : hi) = mid;
    }
    const double r = 0.5 * (lo + hi);
    if (std::abs(phi1(model, r) - a) / a > 1e-12)
        throw std::runtime_error("phi_of_area: inversion tolerance not met");
    return phi2(model, r);
}

}  // namespace dsflow
