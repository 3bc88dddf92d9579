#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dsflow/axigraph.hpp"

namespace dsflow {

/// One time sample of the global functionals. CSV column order is fixed:
/// t, min_rho, max_rho, area, volume, total_H1, W2, dW2_predicted,
/// min_H1, max_H1, max_ring2, min_v2, mink1_residual, mink2_residual.
struct FunctionalRecord {
    double t = 0;
    double min_rho = 0, max_rho = 0;
    double area = 0;
    double volume = 0;
    double total_H1 = 0;
    double W2 = 0;             // total_H1 - volume
    double dW2_predicted = 0;  // (n-1) int theta' (H1^2 - H2)/H1  (>= 0)
    double min_H1 = 0, max_H1 = 0, max_ring2 = 0, min_v2 = 0;
    double mink1_residual = 0;  // |int th' H0 - int u H1| / int u H1
    double mink2_residual = 0;  // |int th' H1 - int u H2| / int u H2
};

std::string functional_csv_header();
std::string functional_csv_row(const FunctionalRecord& r);

/// Trapezoid with Euler-Maclaurin endpoint correction over [0,pi].
/// F holds node values of the full integrand (including any sin^{n-1} weight);
/// end derivatives from one-sided 5-point stencils, so smooth integrands with
/// sin-weight endpoints integrate to O(h^4) while generic data stays O(h^2).
double polar_quadrature(double h, std::span<const double> F);

/// int_Sigma f = omega_{n-1} * quadrature of f * th^n(rho) * v * sin^{n-1}psi.
double surface_integral(const RadialProfile& p, const GeometryFrame& fr,
                        std::span<const double> integrand);

/// Cubic-Hermite table of V(r) = int_0^r theta^n with analytic slopes theta^n,
/// nodes spaced 1e-3; rebuilt if queried outside the covered range.
class VolumeCache {
  public:
    explicit VolumeCache(const WarpModel& model) : model_(model) {}
    void ensure(double lo, double hi);
    double operator()(double r) const;
    const WarpModel& model() const { return model_; }

  private:
    WarpModel model_;
    double lo_ = 1, hi_ = 0, dr_ = 1e-3;  // empty until ensure()
    std::vector<double> val_, slope_;
};

/// vol(Sigma-hat) = omega_{n-1} * quadrature of sin^{n-1}psi * V(rho(psi)).
double enclosed_volume(const RadialProfile& p);
double enclosed_volume(const RadialProfile& p, VolumeCache& cache);

/// Fills a full record from a profile and its frame.
FunctionalRecord record(const RadialProfile& p, const GeometryFrame& fr, double t);
FunctionalRecord record(const RadialProfile& p, const GeometryFrame& fr, double t,
                        VolumeCache& cache);

/// phi(area) - W2; nonnegative for spacelike mean-convex surfaces, zero
/// exactly on totally umbilic ones.
double minkowski_gap(const WarpModel& model, const FunctionalRecord& r);

}  // namespace dsflow
