#pragma once

#include <cmath>
#include <functional>

namespace dsflow {

enum class SpaceKind { DeSitter, Hyperbolic };

/// Warped-product model of the ambient space form.
///
/// De Sitter (upper branch): gbar = -dr^2 + theta^2(r) sigma, theta = cosh.
/// Hyperbolic:               gbar = +dr^2 + theta^2(r) sigma, theta = sinh.
/// In both cases theta'' = theta.
struct WarpModel {
    int n = 2;  // hypersurface dimension, n >= 2
    SpaceKind kind = SpaceKind::DeSitter;

    double theta(double r) const {
        return kind == SpaceKind::DeSitter ? std::cosh(r) : std::sinh(r);
    }
    double theta_prime(double r) const {
        return kind == SpaceKind::DeSitter ? std::sinh(r) : std::cosh(r);
    }

    static WarpModel de_sitter(int n);
    static WarpModel hyperbolic(int n);
};

/// Closed-form data of the round coordinate slice {r = const}.
struct SliceData {
    double radius = 0;
    double area = 0;
    double volume = 0;
    double H1 = 0;        // theta'/theta, in (0,1) for de Sitter r > 0
    double total_H1 = 0;  // H1 * area
    double W2 = 0;        // total_H1 - volume
};

/// Measure of the unit n-sphere, 2 pi^{(n+1)/2} / Gamma((n+1)/2).
double unit_sphere_area(int n);

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a,b].
/// Subdivides until the local error estimate is below
/// max(rel_tol*|I|, abs_tol); abs_tol acts as the absolute fallback.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-13, double abs_tol = 1e-14);

/// V(r) = int_0^r theta^n(s) ds by adaptive quadrature.
double warp_volume(const WarpModel& model, double r);

/// All closed-form slice quantities at radius r > 0 (de Sitter only).
SliceData slice_data(const WarpModel& model, double r);

/// Slice area as a function of radius: phi1(r) = omega_n theta^n(r).
double phi1(const WarpModel& model, double r);

/// Slice W2 as a function of radius:
/// phi2(r) = omega_n theta'(r) theta^{n-1}(r) - omega_n V(r).
double phi2(const WarpModel& model, double r);

/// phi = phi2 o phi1^{-1}: the value of W2 on the slice of area a.
/// Requires a > omega_n (the equator area); inverse by bracketed bisection
/// on [1e-8, 50] to |phi1(r) - a|/a < 1e-12.
double phi_of_area(const WarpModel& model, double a);

}  // namespace dsflow
