#include "fwm/steady_state.hpp"

#include <cmath>
#include <sstream>

#include "fwm/errors.hpp"

namespace fwm {

namespace {

using cd = std::complex<double>;
constexpr cd I1{0.0, 1.0};

struct ThreeLevelPoint {
    double p11, p22, p44;
    cd r21, r41, r42;
};

// Coherence block eliminated against the populations, then the 2x2
// population balance solved in closed form. The Omega slots of the master
// equation carry the rotating-frame couplings (half the quoted Rabi).
ThreeLevelPoint solve_three_level_point(double v, const AtomEnsemble& ens,
                                        const DriveConfig& drv) {
    const double G = ens.gamma_e;
    const double g = ens.gamma_d;
    const double kp = drv.k_pump();
    const double kc = drv.k_control();
    const double delta = drv.two_photon_detuning();
    const cd G21 = G - I1 * (drv.delta_p - kp * v);
    const cd G41 = g - I1 * (delta - (kp - kc) * v);
    const cd G42 = (G + g) - I1 * (drv.delta_c + kc * v);
    const cd P = drv.coupling_p();
    const cd C = drv.coupling_c();

    Eigen::Matrix3cd M;
    M << G21, -I1 * std::conj(C), 0.0,
         -I1 * C, G41, I1 * P,
         0.0, I1 * std::conj(P), G42;
    Eigen::Matrix<cd, 3, 2> S;
    S << I1 * P, 0.0,
         0.0, 0.0,
         0.0, I1 * C;
    Eigen::Matrix<cd, 3, 2> X = M.partialPivLu().solve(S);
    if (!X.allFinite()) {
        std::ostringstream os;
        os << "three-level coherence system singular at v=" << v;
        throw numeric_error(os.str());
    }
    const cd A0 = X(0, 0), A1 = X(1, 0), A2 = X(2, 0);
    const cd B0 = X(0, 1), B1 = X(1, 1), B2 = X(2, 1);

    // rdot22 = -2G p22 + g_rep p44 + 2 Im(P* r21) - 2 Im(C* r42) = 0
    // rdot44 = -2g p44 + 2 Im(C* r42) = 0
    // with r2x = A.. Pi1 + B.. Pi2, Pi1 = 1 - 2 p22 - p44, Pi2 = p22 - p44.
    const double g_rep =
        ens.cascade_repump == CascadeRepump::ground ? g : 2.0 * g;
    const double d1 = 2.0 * (std::imag(std::conj(P) * A0) -
                             std::imag(std::conj(C) * A2));
    const double d2 = 2.0 * (std::imag(std::conj(P) * B0) -
                             std::imag(std::conj(C) * B2));
    const double e1 = 2.0 * std::imag(std::conj(C) * A2);
    const double e2 = 2.0 * std::imag(std::conj(C) * B2);
    const double a11 = -2.0 * G - 2.0 * d1 + d2;
    const double a12 = g_rep - d1 - d2;
    const double k1 = d1;
    const double a21 = -2.0 * e1 + e2;
    const double a22 = -2.0 * g - e1 - e2;
    const double k2 = e1;
    const double det = a11 * a22 - a12 * a21;
    if (det == 0.0 || !std::isfinite(det)) {
        std::ostringstream os;
        os << "three-level population balance singular at v=" << v;
        throw numeric_error(os.str());
    }
    ThreeLevelPoint out;
    out.p22 = (-k1 * a22 + a12 * k2) / det;
    out.p44 = (-a11 * k2 + a21 * k1) / det;
    out.p11 = 1.0 - out.p22 - out.p44;
    const double pi1 = 1.0 - 2.0 * out.p22 - out.p44;
    const double pi2 = out.p22 - out.p44;
    out.r21 = A0 * pi1 + B0 * pi2;
    out.r41 = A1 * pi1 + B1 * pi2;
    out.r42 = A2 * pi1 + B2 * pi2;
    return out;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
    return out;
}

Eigen::MatrixXcd liouvillian_matrix(const Eigen::MatrixXcd& h,
                                    const std::vector<Eigen::MatrixXcd>& jumps) {
    const Eigen::Index n = h.rows();
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd l =
        -I1 * (kron(id, h) - kron(h.transpose(), id));
    for (const auto& j : jumps) {
        Eigen::MatrixXcd jdj = j.adjoint() * j;
        l += kron(j.conjugate(), j) -
             0.5 * (kron(id, jdj) + kron(jdj.transpose(), id));
    }
    return l;
}

}  // namespace

void DensityMatrix::validate(double herm_tol, double psd_tol) const {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
        throw numeric_error("density matrix not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > herm_tol ||
        std::abs(rho.trace().imag()) > herm_tol)
        throw numeric_error("density matrix trace != 1");
    for (int i = 0; i < 4; ++i) {
        double p = rho(i, i).real();
        if (p < -psd_tol || p > 1.0 + psd_tol)
            throw numeric_error("population outside [0,1]");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(
        0.5 * (rho + rho.adjoint()));
    if (es.eigenvalues().minCoeff() < -psd_tol)
        throw numeric_error("density matrix not positive semidefinite");
}

DensityMatrix solve_three_level(double v, const AtomEnsemble& ens,
                                const DriveConfig& drv) {
    ThreeLevelPoint p = solve_three_level_point(v, ens, drv);
    DensityMatrix dm;
    dm.velocity = v;
    dm.rho(0, 0) = p.p11;
    dm.rho(1, 1) = p.p22;
    dm.rho(3, 3) = p.p44;
    dm.rho(1, 0) = p.r21;
    dm.rho(0, 1) = std::conj(p.r21);
    dm.rho(3, 0) = p.r41;
    dm.rho(0, 3) = std::conj(p.r41);
    dm.rho(3, 1) = p.r42;
    dm.rho(1, 3) = std::conj(p.r42);
    return dm;
}

std::complex<double> weak_pump_rho41(double v, const AtomEnsemble& ens,
                                     const DriveConfig& drv) {
    ComplexRates r =
        complex_rates(v, ens, drv, drv.k_s_central(), drv.k_i_central());
    const cd P = drv.coupling_p();
    const cd C = drv.coupling_c();
    return -P * C / (r.g21 * r.g41 + std::norm(C));
}

std::complex<double> weak_pump_rho31(double delta_s, double v,
                                     const AtomEnsemble& ens,
                                     const DriveConfig& drv,
                                     std::complex<double> omega_s,
                                     std::complex<double> omega_i) {
    DriveConfig d = drv;
    d.delta_s = delta_s;
    ComplexRates r = complex_rates(v, ens, d, d.k_s_central(), d.k_i_central());
    const cd P = d.coupling_p();
    const cd C = d.coupling_c();
    return I1 * omega_s / r.g31 -
           I1 * C * P * std::conj(omega_i) /
               (r.g31 * (r.g21 * r.g41 + std::norm(C)));
}

Eigen::MatrixXcd steady_state_kernel(const Eigen::MatrixXcd& hamiltonian,
                                     const std::vector<Eigen::MatrixXcd>& jumps) {
    const Eigen::Index n = hamiltonian.rows();
    Eigen::MatrixXcd l = liouvillian_matrix(hamiltonian, jumps);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(l, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    int kernel_dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= 1e-10 * smax) ++kernel_dim;
    if (smax == 0.0) kernel_dim = static_cast<int>(sv.size());
    if (kernel_dim != 1) {
        std::ostringstream os;
        os << "steady-state kernel dimension " << kernel_dim
           << " (expected 1); singular values:";
        for (Eigen::Index i = 0; i < sv.size(); ++i) os << ' ' << sv(i);
        throw degeneracy_error(os.str());
    }
    Eigen::VectorXcd k = svd.matrixV().col(n * n - 1);
    Eigen::MatrixXcd rho = Eigen::Map<Eigen::MatrixXcd>(k.data(), n, n);
    cd tr = rho.trace();
    if (std::abs(tr) < 1e-14)
        throw degeneracy_error("steady-state kernel vector is traceless");
    rho /= tr;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return rho;
}

DensityMatrix liouvillian_null_space(double v, const AtomEnsemble& ens,
                                     const DriveConfig& drv, int levels,
                                     std::complex<double> omega_s,
                                     std::complex<double> omega_i) {
    if (levels != 3 && levels != 4)
        throw config_error("liouvillian_null_space: levels must be 3 or 4");
    const double G = ens.gamma_e;
    const double g = ens.gamma_d;
    const double kp = drv.k_pump();
    const double kc = drv.k_control();
    const double dp_eff = drv.delta_p - kp * v;
    const double delta_eff = drv.two_photon_detuning() - (kp - kc) * v;
    const cd P = drv.coupling_p();
    const cd C = drv.coupling_c();

    DensityMatrix dm;
    dm.velocity = v;
    if (levels == 3) {
        // basis |1>, |2>, |4>
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 3);
        h(1, 1) = -dp_eff;
        h(2, 2) = -delta_eff;
        h(1, 0) = -P;
        h(0, 1) = -std::conj(P);
        h(2, 1) = -C;
        h(1, 2) = -std::conj(C);
        std::vector<Eigen::MatrixXcd> jumps;
        Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(3, 3);
        j(0, 1) = std::sqrt(2.0 * G);
        jumps.push_back(j);
        if (ens.cascade_repump == CascadeRepump::ground) {
            j.setZero(); j(1, 2) = std::sqrt(g); jumps.push_back(j);
            j.setZero(); j(0, 2) = std::sqrt(g); jumps.push_back(j);
        } else {
            j.setZero(); j(1, 2) = std::sqrt(2.0 * g); jumps.push_back(j);
        }
        Eigen::MatrixXcd rho = steady_state_kernel(h, jumps);
        const int map[3] = {0, 1, 3};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) dm.rho(map[a], map[b]) = rho(a, b);
        return dm;
    }

    // basis |1>, |2>, |3>, |4>
    const double ks = drv.k_s_central();
    const double ds_eff = drv.delta_s - ks * v;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(4, 4);
    h(1, 1) = -dp_eff;
    h(2, 2) = -ds_eff;
    h(3, 3) = -delta_eff;
    h(1, 0) = -P;            h(0, 1) = -std::conj(P);
    h(3, 1) = -C;            h(1, 3) = -std::conj(C);
    h(2, 0) = -omega_s;      h(0, 2) = -std::conj(omega_s);
    h(3, 2) = -omega_i;      h(2, 3) = -std::conj(omega_i);
    std::vector<Eigen::MatrixXcd> jumps;
    Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(4, 4);
    j(0, 1) = std::sqrt(2.0 * G); jumps.push_back(j);
    j.setZero(); j(0, 2) = std::sqrt(2.0 * G); jumps.push_back(j);
    j.setZero(); j(1, 3) = std::sqrt(g); jumps.push_back(j);
    j.setZero(); j(2, 3) = std::sqrt(g); jumps.push_back(j);
    dm.rho = steady_state_kernel(h, jumps);
    return dm;
}

VelocitySolution solve_over_grid(const VelocityGrid& grid,
                                 const AtomEnsemble& ens,
                                 const DriveConfig& drv) {
    VelocitySolution out;
    const std::size_t n = grid.size();
    out.v = grid.nodes;
    out.w = grid.weights;
    out.rho11.resize(n);
    out.rho41.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        ThreeLevelPoint p;
        try {
            p = solve_three_level_point(grid.nodes[j], ens, drv);
        } catch (const numeric_error& e) {
            std::ostringstream os;
            os << e.what() << " (velocity node " << j << ")";
            throw numeric_error(os.str());
        }
        out.rho11[j] = p.p11;
        out.rho41[j] = p.r41;
        out.p22 += grid.weights[j] * p.p22;
        out.p44 += grid.weights[j] * p.p44;
        out.rho41_bar += grid.weights[j] * p.r41;
    }
    return out;
}

VelocityResolvedState velocity_average(const VelocityGrid& grid,
                                       const AtomEnsemble& ens,
                                       const DriveConfig& drv) {
    VelocityResolvedState out;
    out.slices.reserve(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        VelocitySlice s;
        s.velocity = grid.nodes[j];
        s.weight = grid.weights[j];
        try {
            s.dm = solve_three_level(grid.nodes[j], ens, drv);
        } catch (const numeric_error& e) {
            std::ostringstream os;
            os << e.what() << " (velocity node " << j << ")";
            throw numeric_error(os.str());
        }
        out.p22 += s.weight * s.dm.p22();
        out.p44 += s.weight * s.dm.p44();
        out.rho41_bar += s.weight * s.dm.rho41();
        out.slices.push_back(std::move(s));
    }
    return out;
}

}  // namespace fwm
