#include "dsflow/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace dsflow {

std::string functional_csv_header() {
    return "t,min_rho,max_rho,area,volume,total_H1,W2,dW2_predicted,"
           "min_H1,max_H1,max_ring2,min_v2,mink1_residual,mink2_residual";
}

std::string functional_csv_row(const FunctionalRecord& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.t << ',' << r.min_rho << ',' << r.max_rho << ',' << r.area << ',' << r.volume << ','
       << r.total_H1 << ',' << r.W2 << ',' << r.dW2_predicted << ',' << r.min_H1 << ','
       << r.max_H1 << ',' << r.max_ring2 << ',' << r.min_v2 << ',' << r.mink1_residual << ','
       << r.mink2_residual;
    return os.str();
}

double polar_quadrature(double h, std::span<const double> F) {
    const std::size_t m = F.size();
    if (m < 5) throw std::domain_error("polar_quadrature: need at least 5 nodes");
    double sum = 0.5 * (F[0] + F[m - 1]);
    for (std::size_t i = 1; i + 1 < m; ++i) sum += F[i];
    const double trap = h * sum;
    // Euler-Maclaurin endpoint correction with O(h^4) one-sided derivatives
    const double d0 =
        (-25 * F[0] + 48 * F[1] - 36 * F[2] + 16 * F[3] - 3 * F[4]) / (12 * h);
    const double d1 = (25 * F[m - 1] - 48 * F[m - 2] + 36 * F[m - 3] - 16 * F[m - 4] +
                       3 * F[m - 5]) /
                      (12 * h);
    return trap - h * h / 12.0 * (d1 - d0);
}

double surface_integral(const RadialProfile& p, const GeometryFrame& fr,
                        std::span<const double> integrand) {
    const int N = p.N;
    const int n = p.model.n;
    if (static_cast<int>(integrand.size()) != N + 1)
        throw std::domain_error("surface_integral: integrand size mismatch");
    std::vector<double> F(N + 1);
    for (int i = 0; i <= N; ++i)
        F[i] = integrand[i] * std::pow(fr.th[i], n) * fr.v[i] *
               std::pow(std::sin(p.psi[i]), n - 1);
    return unit_sphere_area(n - 1) * polar_quadrature(p.h(), F);
}

void VolumeCache::ensure(double lo, double hi) {
    const bool have = lo_ <= hi_;
    if (have && lo >= lo_ && hi <= hi_) return;
    if (have) {
        lo = std::min(lo, lo_);
        hi = std::max(hi, hi_);
    }
    lo = std::max(0.0, lo - 0.01);
    hi = hi + 0.01;
    const int cells = static_cast<int>(std::ceil((hi - lo) / dr_));
    val_.assign(cells + 1, 0.0);
    slope_.assign(cells + 1, 0.0);
    const int n = model_.n;
    double acc = integrate_adaptive([&](double s) { return std::pow(model_.theta(s), n); }, 0.0, lo);
    val_[0] = acc;
    slope_[0] = std::pow(model_.theta(lo), n);
    for (int k = 1; k <= cells; ++k) {
        const double a = lo + (k - 1) * dr_, b = lo + k * dr_;
        acc += integrate_adaptive([&](double s) { return std::pow(model_.theta(s), n); }, a, b);
        val_[k] = acc;
        slope_[k] = std::pow(model_.theta(b), n);
    }
    lo_ = lo;
    hi_ = lo + cells * dr_;
}

double VolumeCache::operator()(double r) const {
    if (!(lo_ <= hi_) || r < lo_ || r > hi_)
        throw std::domain_error("VolumeCache: query outside covered range");
    const int cells = static_cast<int>(val_.size()) - 1;
    int k = std::min(static_cast<int>((r - lo_) / dr_), cells - 1);
    const double t = (r - (lo_ + k * dr_)) / dr_;
    const double y0 = val_[k], y1 = val_[k + 1];
    const double m0 = slope_[k] * dr_, m1 = slope_[k + 1] * dr_;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * m1;
}

namespace {

double enclosed_volume_impl(const RadialProfile& p, const std::function<double(double)>& V) {
    const int N = p.N;
    const int n = p.model.n;
    std::vector<double> F(N + 1);
    for (int i = 0; i <= N; ++i) F[i] = std::pow(std::sin(p.psi[i]), n - 1) * V(p.rho[i]);
    return unit_sphere_area(n - 1) * polar_quadrature(p.h(), F);
}

}  // namespace

double enclosed_volume(const RadialProfile& p, VolumeCache& cache) {
    const auto [lo, hi] = std::minmax_element(p.rho.begin(), p.rho.end());
    cache.ensure(*lo, *hi);
    return enclosed_volume_impl(p, [&](double r) { return cache(r); });
}

double enclosed_volume(const RadialProfile& p) {
    VolumeCache cache(p.model);
    return enclosed_volume(p, cache);
}

namespace {

FunctionalRecord record_impl(const RadialProfile& p, const GeometryFrame& fr, double t,
                             double volume) {
    const int N = p.N;
    const int n = p.model.n;
    FunctionalRecord r;
    r.t = t;
    const auto [mn, mx] = std::minmax_element(p.rho.begin(), p.rho.end());
    r.min_rho = *mn;
    r.max_rho = *mx;
    r.min_H1 = fr.min_H1;
    r.max_H1 = fr.max_H1;
    r.max_ring2 = fr.max_ring2;
    r.min_v2 = fr.min_v2;
    r.volume = volume;

    std::vector<double> w(N + 1);
    auto integ = [&](auto&& f) {
        for (int i = 0; i <= N; ++i) w[i] = f(i);
        return surface_integral(p, fr, w);
    };
    r.area = integ([&](int) { return 1.0; });
    r.total_H1 = integ([&](int i) { return fr.H1[i]; });
    r.W2 = r.total_H1 - r.volume;

    const double lhs1 = integ([&](int i) { return fr.thp[i]; });
    const double rhs1 = integ([&](int i) { return fr.u[i] * fr.H1[i]; });
    const double lhs2 = integ([&](int i) { return fr.thp[i] * fr.H1[i]; });
    const double rhs2 = integ([&](int i) { return fr.u[i] * fr.H2[i]; });
    r.mink1_residual = std::abs(lhs1 - rhs1) / std::abs(rhs1);
    r.mink2_residual = std::abs(lhs2 - rhs2) / std::abs(rhs2);

    // dW2/dt of the flow: (n-1) int theta' (H1^2 - H2) / H1
    r.dW2_predicted =
        (n - 1) * integ([&](int i) { return fr.thp[i] * (fr.H1[i] * fr.H1[i] - fr.H2[i]) / fr.H1[i]; });
    return r;
}

}  // namespace

FunctionalRecord record(const RadialProfile& p, const GeometryFrame& fr, double t,
                        VolumeCache& cache) {
    return record_impl(p, fr, t, enclosed_volume(p, cache));
}

FunctionalRecord record(const RadialProfile& p, const GeometryFrame& fr, double t) {
    return record_impl(p, fr, t, enclosed_volume(p));
}

double minkowski_gap(const WarpModel& model, const FunctionalRecord& r) {
    return phi_of_area(model, r.area) - r.W2;
}

}  // namespace dsflow
