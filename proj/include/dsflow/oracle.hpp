#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dsflow/axigraph.hpp"

namespace dsflow::oracle {

/// Brute-force curvatures from the Minkowski embedding
///   y(psi,chi) = (sinh rho, cosh rho cos psi, cosh rho sin psi cos chi,
///                 cosh rho sin psi sin chi),
/// independent of the closed-form graph reduction: tangents and the second
/// fundamental form h_ij = -<d2y, nu> by central finite differences in psi
/// (Richardson-extrapolated), normal from the orthogonality system, angular
/// direction from the rotational orbit through the point.
struct Kappas {
    std::vector<double> kappa_rad;
    std::vector<double> kappa_ang;
};

/// Analytic-profile variant: rho as a callable, FD step delta (with a
/// delta/2 Richardson pass). Evaluated at the given psi nodes.
Kappas embedding_curvatures(const WarpModel& model, const std::function<double(double)>& rho,
                            std::span<const double> psi, double delta);

/// Grid variant: differentiates the embedded grid points themselves
/// (interior nodes only; pole entries are copied from their neighbors).
Kappas embedding_curvatures(const RadialProfile& p);

}  // namespace dsflow::oracle
