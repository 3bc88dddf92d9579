#pragma once

#include <array>
#include <vector>

#include "dsflow/axigraph.hpp"

namespace dsflow {

/// A point/vector of Minkowski R^{n+2} restricted to the axisymmetric
/// representative span {e0, e1, e2}; trailing components vanish identically.
struct MinkVec {
    double t = 0, x = 0, y = 0;
};

inline double mink_dot(const MinkVec& a, const MinkVec& b) {
    return -a.t * b.t + a.x * b.x + a.y * b.y;
}
inline MinkVec operator-(const MinkVec& a, const MinkVec& b) { return {a.t - b.t, a.x - b.x, a.y - b.y}; }
inline MinkVec operator+(const MinkVec& a, const MinkVec& b) { return {a.t + b.t, a.x + b.x, a.y + b.y}; }
inline MinkVec operator*(double s, const MinkVec& a) { return {s * a.t, s * a.x, s * a.y}; }

/// Hypersurface embedded in the Minkowski hyperquadric <y,y> = 1, y^0 > 0,
/// through (r,p) -> (theta'(r), theta(r) p), with the future-directed unit
/// normal (<nu,nu> = -1, nu^0 > 0).
struct AmbientCurve {
    int n = 2;
    std::vector<MinkVec> y;
    std::vector<MinkVec> nu;
};

AmbientCurve embed(const RadialProfile& p, double eps_v = 1e-6);

/// Gauss-map dual of a strictly convex spacelike hypersurface: x-tilde = nu,
/// landing on the hyperboloid <x,x> = -1 (hyperbolic space), plus the dual
/// graph data resampled to a uniform psi-tilde grid.
struct DualSurface {
    std::vector<MinkVec> x;          // dual points (= nu of the source)
    std::vector<double> r_tilde;     // arccosh(x^0), dual radial coordinate
    std::vector<double> psi_tilde;   // dual polar angle per source node
    std::vector<double> metric_rad;  // FD <d_psi x, d_psi x> (source-node indexed)

    // hyperbolic graph machinery on the uniform psi-tilde grid
    std::vector<double> grid_psi;        // uniform in [0,pi]
    std::vector<double> grid_rho;        // rho-tilde resampled
    std::vector<double> grid_v;          // v-tilde = sqrt(1 + rho'^2/sinh^2)
    std::vector<double> grid_u;          // u-tilde = sinh(rho-tilde)/v-tilde
    std::vector<double> grid_kappa_rad;  // hyperbolic graph curvatures
    std::vector<double> grid_kappa_ang;
    std::vector<double> grid_rho_src;    // source rho interpolated to the grid
};

/// Throws NotConvexError if any principal curvature <= kappa_floor.
DualSurface dualize(const AmbientCurve& curve, const RadialProfile& p,
                    const GeometryFrame& fr, double kappa_floor = 1e-6);

/// Per-node difference of the two expressions for the flow speed,
///   (theta-tilde'(r-tilde) - n u-tilde sigma_n(k-tilde)/sigma_{n-1}(k-tilde))
///   - (u - theta'(rho)/H1),
/// with k-tilde_i = 1/kappa_i and u-tilde = theta'(rho). Exact algebraic
/// identity: vanishes to round-off on strictly convex surfaces.
std::vector<double> dual_speed_identity(const GeometryFrame& fr, const RadialProfile& p,
                                        const DualSurface& dual);

/// Reconstructs the de Sitter points from the dual surface as its unit
/// normals (<nu-tilde, nu-tilde> = +1, time component matching the upper
/// branch); used by the involution check.
std::vector<MinkVec> dual_normals(const DualSurface& dual, double h);

}  // namespace dsflow
