#include "dsflow/axigraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dsflow {

namespace {

void validate(const RadialProfile& p) {
    if (p.N < 16) throw std::domain_error("RadialProfile: N must be >= 16");
    if (static_cast<int>(p.rho.size()) != p.N + 1 || p.psi.size() != p.rho.size())
        throw std::domain_error("RadialProfile: inconsistent node counts");
    for (double r : p.rho)
        if (!(r > 0)) throw std::domain_error("RadialProfile: rho must stay positive (upper branch)");
}

}  // namespace

RadialProfile slice_profile(const WarpModel& model, int N, double r) {
    if (r <= 0) throw std::domain_error("slice_profile: radius must be positive");
    RadialProfile p;
    p.model = model;
    p.N = N;
    p.psi.resize(N + 1);
    p.rho.assign(N + 1, r);
    for (int i = 0; i <= N; ++i) p.psi[i] = M_PI * i / N;
    validate(p);
    return p;
}

RadialProfile legendre_profile(const WarpModel& model, int N, double r, double eps, int ell) {
    RadialProfile p = slice_profile(model, N, r);
    for (int i = 0; i <= N; ++i) p.rho[i] = r + eps * std::legendre(ell, std::cos(p.psi[i]));
    validate(p);
    return p;
}

void save_profile_csv(const RadialProfile& p, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write profile: " + path);
    os.precision(17);
    os << "# n=" << p.model.n << " N=" << p.N << "\n";
    os << "psi,rho\n";
    for (int i = 0; i <= p.N; ++i) os << p.psi[i] << "," << p.rho[i] << "\n";
}

RadialProfile load_profile_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read profile: " + path);
    RadialProfile p;
    int n = -1, N = -1;
    std::string line;
    std::vector<double> rho, psi_file;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t pn = line.find("n=");
            std::size_t pN = line.find("N=");
            if (pn != std::string::npos) n = std::stoi(line.substr(pn + 2));
            if (pN != std::string::npos) N = std::stoi(line.substr(pN + 2));
            continue;
        }
        if (line.rfind("psi", 0) == 0) continue;  // column header
        std::istringstream ls(line);
        double psi_v, rho_v;
        char comma;
        if (!(ls >> psi_v >> comma >> rho_v)) throw std::runtime_error("bad profile row: " + line);
        psi_file.push_back(psi_v);
        rho.push_back(rho_v);
    }
    if (n < 2 || N < 16) throw std::runtime_error("profile header must carry n>=2 and N>=16");
    if (static_cast<int>(rho.size()) != N + 1)
        throw std::runtime_error("profile row count does not match N+1");
    p.model = WarpModel::de_sitter(n);
    p.N = N;
    p.rho = std::move(rho);
    p.psi.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
        p.psi[i] = M_PI * i / N;
        if (std::abs(psi_file[i] - p.psi[i]) > 1e-9)
            throw std::runtime_error("profile psi column is not the uniform grid i*pi/N");
    }
    validate(p);
    return p;
}

void derivatives(const RadialProfile& p, std::vector<double>& rho_prime,
                 std::vector<double>& rho_second) {
    validate(p);
    const int N = p.N;
    const double h = p.h();
    rho_prime.assign(N + 1, 0.0);
    rho_second.assign(N + 1, 0.0);
    const auto& r = p.rho;
    for (int i = 1; i < N; ++i) {
        rho_prime[i] = (r[i + 1] - r[i - 1]) / (2 * h);
        rho_second[i] = (r[i + 1] - 2 * r[i] + r[i - 1]) / (h * h);
    }
    // ghost reflection: rho_{-1} = rho_1, rho_{N+1} = rho_{N-1}
    rho_second[0] = 2 * (r[1] - r[0]) / (h * h);
    rho_second[N] = 2 * (r[N - 1] - r[N]) / (h * h);
}

void frame_into(const RadialProfile& p, GeometryFrame& out, double eps_v) {
    const int N = p.N;
    const int n = p.model.n;
    out.n = n;
    derivatives(p, out.rho_prime, out.rho_second);

    auto resize = [N](std::vector<double>& v) { v.resize(N + 1); };
    resize(out.v); resize(out.u); resize(out.kappa_rad); resize(out.kappa_ang);
    resize(out.H1); resize(out.H2); resize(out.normA2); resize(out.ring2);
    resize(out.grad2rho); resize(out.th); resize(out.thp);

    double min_v2 = 1.0;
    for (int i = 0; i <= N; ++i) {
        out.th[i] = p.model.theta(p.rho[i]);
        out.thp[i] = p.model.theta_prime(p.rho[i]);
        const double rp = out.rho_prime[i];
        const double v2 = 1.0 - rp * rp / (out.th[i] * out.th[i]);
        min_v2 = std::min(min_v2, v2);
    }
    out.min_v2 = min_v2;
    if (!(min_v2 > eps_v)) throw SpacelikeError(min_v2);

    for (int i = 0; i <= N; ++i) {
        const double th = out.th[i], thp = out.thp[i];
        const double rp = out.rho_prime[i], rpp = out.rho_second[i];
        const double v2 = 1.0 - rp * rp / (th * th);
        const double v = std::sqrt(v2);
        out.v[i] = v;
        out.u[i] = th / v;
        out.kappa_rad[i] = (th * rpp + th * th * thp - 2 * thp * rp * rp) / (th * th * th * v2 * v);
        if (i == 0 || i == N) {
            // removable pole singularity: rho' cot(psi) -> rho''
            out.kappa_ang[i] = (thp + rpp / th) / (th * v);
        } else {
            const double cot = std::cos(p.psi[i]) / std::sin(p.psi[i]);
            out.kappa_ang[i] = (thp + rp * cot / th) / (th * v);
        }
        const double kr = out.kappa_rad[i], ka = out.kappa_ang[i];
        out.H1[i] = (kr + (n - 1) * ka) / n;
        out.H2[i] = (2 * kr * ka + (n - 2) * ka * ka) / n;
        out.normA2[i] = kr * kr + (n - 1) * ka * ka;
        const double d = kr - ka;
        out.ring2[i] = (double(n - 1) / n) * d * d;
        out.grad2rho[i] = rp * rp / (th * th * v2);
    }
    out.min_H1 = *std::min_element(out.H1.begin(), out.H1.end());
    out.max_H1 = *std::max_element(out.H1.begin(), out.H1.end());
    out.max_ring2 = *std::max_element(out.ring2.begin(), out.ring2.end());
}

GeometryFrame frame(const RadialProfile& p, double eps_v) {
    GeometryFrame out;
    frame_into(p, out, eps_v);
    return out;
}

namespace {

// int_a^b sin^m by the standard reduction formula (exact; needed so the
// finite-volume cells next to the poles stay consistent for n >= 3)
double sin_power_integral(int m, double a, double b) {
    if (m == 0) return b - a;
    if (m == 1) return std::cos(a) - std::cos(b);
    const double boundary = (std::pow(std::sin(a), m - 1) * std::cos(a) -
                             std::pow(std::sin(b), m - 1) * std::cos(b)) /
                            m;
    return boundary + (double(m - 1) / m) * sin_power_integral(m - 2, a, b);
}

}  // namespace

std::vector<double> laplace_beltrami(const RadialProfile& p, std::span<const double> field,
                                     double eps_v) {
    const int N = p.N;
    const int n = p.model.n;
    if (static_cast<int>(field.size()) != N + 1)
        throw std::domain_error("laplace_beltrami: field size mismatch");
    const double h = p.h();

    std::vector<double> rp, rpp;
    derivatives(p, rp, rpp);

    double min_v2 = 1.0;
    std::vector<double> thv(N + 1), vv(N + 1);
    for (int i = 0; i <= N; ++i) {
        thv[i] = p.model.theta(p.rho[i]);
        const double v2 = 1.0 - rp[i] * rp[i] / (thv[i] * thv[i]);
        min_v2 = std::min(min_v2, v2);
        vv[i] = std::sqrt(v2);
    }
    if (!(min_v2 > eps_v)) throw SpacelikeError(min_v2);

    // face fluxes F_{i+1/2} = th^{n-2} v^{-1} sin^{n-1} * f' at the midpoint
    std::vector<double> flux(N);
    for (int i = 0; i < N; ++i) {
        const double rho_m = 0.5 * (p.rho[i] + p.rho[i + 1]);
        const double psi_m = 0.5 * (p.psi[i] + p.psi[i + 1]);
        const double rp_m = (p.rho[i + 1] - p.rho[i]) / h;
        const double th_m = p.model.theta(rho_m);
        const double v2_m = 1.0 - rp_m * rp_m / (th_m * th_m);
        if (!(v2_m > 0)) throw SpacelikeError(v2_m);
        const double M = std::pow(th_m, n - 2) / std::sqrt(v2_m) * std::pow(std::sin(psi_m), n - 1);
        flux[i] = M * (field[i + 1] - field[i]) / h;
    }

    // finite-volume cells: flux difference over the exact cell measure
    // th^n v int sin^{n-1}; pole cells have a single face (flux vanishes
    // with the sin^{n-1} weight at the axis)
    std::vector<double> out(N + 1);
    for (int i = 1; i < N; ++i) {
        const double vol = thv[i] == 0 ? 0
                                       : std::pow(thv[i], n) * vv[i] *
                                             sin_power_integral(n - 1, p.psi[i] - 0.5 * h,
                                                                p.psi[i] + 0.5 * h);
        out[i] = (flux[i] - flux[i - 1]) / vol;
    }
    const double vol0 = std::pow(thv[0], n) * vv[0] * sin_power_integral(n - 1, 0.0, 0.5 * h);
    const double volN =
        std::pow(thv[N], n) * vv[N] * sin_power_integral(n - 1, M_PI - 0.5 * h, M_PI);
    out[0] = flux[0] / vol0;
    out[N] = -flux[N - 1] / volN;
    return out;
}

}  // namespace dsflow
