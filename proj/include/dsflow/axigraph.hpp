#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dsflow/errors.hpp"
#include "dsflow/spaceform.hpp"

namespace dsflow {

/// Axisymmetric spacelike graph rho(psi) over S^n, sampled on the uniform
/// polar grid psi_i = i*pi/N, i = 0..N. Even reflection across both poles
/// (ghost nodes) encodes the smooth-axis parity.
struct RadialProfile {
    WarpModel model;
    int N = 0;                // grid intervals, N >= 16
    std::vector<double> psi;  // N+1 nodes
    std::vector<double> rho;  // N+1 positive values (upper branch)

    double h() const { return psi.size() > 1 ? psi[1] - psi[0] : 0.0; }
};

RadialProfile slice_profile(const WarpModel& model, int N, double r);

/// rho(psi) = r + eps * P_ell(cos psi).
RadialProfile legendre_profile(const WarpModel& model, int N, double r, double eps, int ell);

/// Two-column CSV (psi, rho) with a comment header carrying n and N.
void save_profile_csv(const RadialProfile& p, const std::string& path);
RadialProfile load_profile_csv(const std::string& path);

/// Pointwise differential-geometry frame of a profile.
/// Curvatures follow the graph reduction of v^{-1} h_ij = rho_;ij + hbar_ij
/// with induced-metric covariant derivatives:
///   kappa_rad = (th rho'' + th^2 th' - 2 th' rho'^2) / (th^3 v^3)
///   kappa_ang = (th' + rho' cot(psi)/th) / (th v),  pole limit: rho' cot -> rho''
struct GeometryFrame {
    int n = 2;
    std::vector<double> v;          // in (0,1], spacelike tilt factor
    std::vector<double> u;          // support function theta/v
    std::vector<double> kappa_rad;
    std::vector<double> kappa_ang;
    std::vector<double> H1;
    std::vector<double> H2;
    std::vector<double> normA2;     // |A|^2
    std::vector<double> ring2;      // |Aring|^2 = |A|^2 - n H1^2 = ((n-1)/n)(k_rad-k_ang)^2
    std::vector<double> grad2rho;   // |grad rho|^2 in the induced metric
    double min_v2 = 0, min_H1 = 0, max_H1 = 0, max_ring2 = 0;

    // cached per-node warp data (implementation convenience)
    std::vector<double> th, thp, rho_prime, rho_second;
};

/// Second-order central differences with parity ghost nodes.
/// At the poles rho' = 0 exactly and rho'' = 2(rho_1 - rho_0)/h^2.
void derivatives(const RadialProfile& p, std::vector<double>& rho_prime,
                 std::vector<double>& rho_second);

/// Computes the frame; throws SpacelikeError if min v^2 <= eps_v.
GeometryFrame frame(const RadialProfile& p, double eps_v = 1e-6);
void frame_into(const RadialProfile& p, GeometryFrame& out, double eps_v = 1e-6);

/// Laplace-Beltrami of a scalar field on the graph, conservative flux form:
///   Delta f = (1/W) d/dpsi( th^{n-2} v^{-1} sin^{n-1}psi f' ),
///   W = th^n v sin^{n-1}psi.
/// Poles use the finite-volume limit Delta f = n f'' / th^2 (flux vanishes
/// with the sin^{n-1} weight).
std::vector<double> laplace_beltrami(const RadialProfile& p, std::span<const double> field,
                                     double eps_v = 1e-6);

}  // namespace dsflow
