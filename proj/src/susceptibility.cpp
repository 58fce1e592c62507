#include "fwm/susceptibility.hpp"

#include <cmath>
#include <thread>

#include "fwm/constants.hpp"
#include "fwm/errors.hpp"

namespace fwm {

namespace {
using cd = std::complex<double>;
constexpr cd I1{0.0, 1.0};

double chi_prefactor_density(const AtomEnsemble& ens) {
    return density_from_od(ens);
}
}  // namespace

DopplerKernel::DopplerKernel(const VelocitySolution& sol,
                             const AtomEnsemble& ens, const DriveConfig& drv) {
    const std::size_t n = sol.v.size();
    const double ks = drv.k_s_central();
    gamma_ = ens.gamma_e;
    ksv_.resize(n);
    a_.resize(n);
    b_.resize(n);
    double ksv_max = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        ksv_[j] = ks * sol.v[j];
        a_[j] = sol.w[j] * sol.rho41[j];
        b_[j] = sol.w[j] * sol.rho11[j];
        ksv_max = std::max(ksv_max, std::abs(ksv_[j]));
    }
    const double r = 3.0 * ksv_max;
    wing_r2_ = r * r;
    for (int m = 0; m <= kMoments; ++m) {
        cd am{};
        double bm = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double p = 1.0;
            for (int q = 0; q < m; ++q) p *= ksv_[j];
            am += a_[j] * p;
            bm += b_[j] * p;
        }
        a_mom_[m] = am;
        b_mom_[m] = bm;
    }
    if (ens.chi1_denominator == Chi1Denominator::gamma21) {
        q_const_ = true;
        const double kp = drv.k_pump();
        cd q{};
        for (std::size_t j = 0; j < n; ++j) {
            cd den = gamma_ - I1 * (drv.delta_p - kp * sol.v[j]);
            q += b_[j] / den;
        }
        q_const_value_ = q;
    }
}

bool DopplerKernel::in_wing(double delta_s) const {
    return gamma_ * gamma_ + delta_s * delta_s > wing_r2_;
}

void DopplerKernel::eval(double delta_s, cd& s_out, cd& q_out) const {
    if (in_wing(delta_s)) {
        // 1/(D + i ksv) = (1/D) sum_m (-i ksv / D)^m with D = Gamma - i ds
        const cd d = gamma_ - I1 * delta_s;
        const cd inv_d = 1.0 / d;
        cd s{}, q{};
        cd f = inv_d;
        for (int m = 0; m <= kMoments; ++m) {
            s += a_mom_[m] * f;
            q += b_mom_[m] * f;
            f *= -I1 * inv_d;
        }
        s_out = s;
        q_out = q_const_ ? q_const_value_ : q;
        return;
    }
    double sre = 0.0, sim = 0.0, qre = 0.0, qim = 0.0;
    const double g = gamma_;
    const std::size_t n = ksv_.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double dre = g;
        const double dim = ksv_[j] - delta_s;  // Im of Gamma - i(ds - ksv)
        const double inv = 1.0 / (dre * dre + dim * dim);
        const double cre = dre * inv;
        const double cim = -dim * inv;  // 1/denom = cre + i cim
        const double are = a_[j].real();
        const double aim = a_[j].imag();
        sre += are * cre - aim * cim;
        sim += are * cim + aim * cre;
        qre += b_[j] * cre;
        qim += b_[j] * cim;
    }
    s_out = {sre, sim};
    q_out = q_const_ ? q_const_value_ : cd{qre, qim};
}

cd DopplerKernel::eval_s(double delta_s) const {
    cd s, q;
    eval(delta_s, s, q);
    return s;
}

SusceptibilityTable evaluate_susceptibilities(std::span<const double> delta_s,
                                              const AtomEnsemble& ens,
                                              const DriveConfig& drv,
                                              const VelocityGrid& grid,
                                              int threads) {
    VelocitySolution sol = solve_over_grid(grid, ens, drv);
    DopplerKernel kernel(sol, ens, drv);
    const double n_at = chi_prefactor_density(ens);
    const double chi1_pref = ens.signal_absorption_scale * n_at *
        ens.dipole_31 * ens.dipole_31 / (phys::epsilon0 * phys::hbar);
    const double kappa_pref =
        2.0 * std::sqrt(drv.omega_s_central() * drv.omega_i_central()) /
        phys::speed_of_light * n_at * ens.dipole_31 * ens.dipole_43 /
        (phys::epsilon0 * phys::hbar);

    SusceptibilityTable out;
    const std::size_t m = delta_s.size();
    out.chi1.resize(m);
    out.kappa.resize(m);
    out.p22 = sol.p22;
    out.p44 = sol.p44;

    auto worker = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            cd s, q;
            kernel.eval(delta_s[k], s, q);
            out.chi1[k] = chi1_pref * I1 * q;
            out.kappa[k] = kappa_pref * s;
        }
    };
    int nt = std::max(1, threads);
    if (nt == 1 || m < 1024) {
        worker(0, m);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (m + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            std::size_t lo = t * chunk;
            std::size_t hi = std::min(m, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

std::complex<double> chi3(double delta_s, const AtomEnsemble& ens,
                          const DriveConfig& drv, const VelocityGrid& grid) {
    if (drv.omega_p == 0.0 || drv.omega_c == 0.0)
        throw numeric_error(
            "chi3 undefined at zero drive (field normalization vanishes); "
            "use chi3_weak_pump or kappa");
    VelocitySolution sol = solve_over_grid(grid, ens, drv);
    DopplerKernel kernel(sol, ens, drv);
    const double n_at = chi_prefactor_density(ens);
    const double ep = drv.field_p(ens);
    const double ec = drv.field_c(ens);
    return I1 * n_at * ens.dipole_31 * ens.dipole_43 /
           (phys::epsilon0 * phys::hbar * ep * ec) * kernel.eval_s(delta_s);
}

std::complex<double> chi3_weak_pump(double delta_s, const AtomEnsemble& ens,
                                    const DriveConfig& drv,
                                    const VelocityGrid& grid) {
    DriveConfig d = drv;
    d.delta_s = delta_s;
    const double n_at = chi_prefactor_density(ens);
    const cd c = d.coupling_c();
    const double mu_prod =
        ens.dipole_31 * ens.dipole_43 * ens.dipole_21 * ens.dipole_42;
    cd acc{};
    for (std::size_t j = 0; j < grid.size(); ++j) {
        ComplexRates r = complex_rates(grid.nodes[j], ens, d,
                                       d.k_s_central(), d.k_i_central());
        acc += grid.weights[j] /
               (r.g31 * (r.g21 * r.g41 + std::norm(c)));
    }
    const double h3 = phys::hbar * phys::hbar * phys::hbar;
    return n_at / (I1 * phys::epsilon0 * h3) * mu_prod * acc;
}

std::complex<double> chi1_signal(double delta_s, const AtomEnsemble& ens,
                                 const DriveConfig& drv,
                                 const VelocityGrid& grid) {
    VelocitySolution sol = solve_over_grid(grid, ens, drv);
    DopplerKernel kernel(sol, ens, drv);
    cd s, q;
    kernel.eval(delta_s, s, q);
    const double n_at = chi_prefactor_density(ens);
    return ens.signal_absorption_scale * n_at * ens.dipole_31 *
           ens.dipole_31 / (phys::epsilon0 * phys::hbar) * I1 * q;
}

std::complex<double> kappa(double delta_s, const AtomEnsemble& ens,
                           const DriveConfig& drv, const VelocityGrid& grid) {
    VelocitySolution sol = solve_over_grid(grid, ens, drv);
    DopplerKernel kernel(sol, ens, drv);
    const double n_at = chi_prefactor_density(ens);
    const double pref =
        2.0 * std::sqrt(drv.omega_s_central() * drv.omega_i_central()) /
        phys::speed_of_light * n_at * ens.dipole_31 * ens.dipole_43 /
        (phys::epsilon0 * phys::hbar);
    return pref * kernel.eval_s(delta_s);
}

SusceptibilitySample susceptibility_sample(double delta_s,
                                           const AtomEnsemble& ens,
                                           const DriveConfig& drv,
                                           const VelocityGrid& grid) {
    SusceptibilitySample out;
    out.delta_s = delta_s;
    VelocitySolution sol = solve_over_grid(grid, ens, drv);
    DopplerKernel kernel(sol, ens, drv);
    cd s, q;
    kernel.eval(delta_s, s, q);
    const double n_at = chi_prefactor_density(ens);
    out.chi1_s = ens.signal_absorption_scale * n_at * ens.dipole_31 *
                 ens.dipole_31 / (phys::epsilon0 * phys::hbar) * I1 * q;
    const double ep = drv.field_p(ens);
    const double ec = drv.field_c(ens);
    if (ep > 0.0 && ec > 0.0)
        out.chi3 = I1 * n_at * ens.dipole_31 * ens.dipole_43 /
                   (phys::epsilon0 * phys::hbar * ep * ec) * s;
    out.kappa = 2.0 * std::sqrt(drv.omega_s_central() * drv.omega_i_central()) /
                phys::speed_of_light * n_at * ens.dipole_31 * ens.dipole_43 /
                (phys::epsilon0 * phys::hbar) * s;
    return out;
}

CoherenceTermDiagnostic compare_rho32_term(const AtomEnsemble& ens,
                                           const DriveConfig& drv,
                                           const VelocityGrid& grid,
                                           std::complex<double> omega_s,
                                           std::complex<double> omega_i,
                                           int stride) {
    if (stride < 1) throw config_error("stride must be >= 1");
    CoherenceTermDiagnostic out;
    const cd p = drv.coupling_p();
    double wsum = 0.0;
    for (std::size_t j = 0; j < grid.size(); j += stride) {
        DensityMatrix dm = liouvillian_null_space(grid.nodes[j], ens, drv, 4,
                                                  omega_s, omega_i);
        double w = grid.weights[j];
        out.pump_rho32_abs += w * std::abs(p * dm.rho(2, 1));
        out.idler_rho41_abs += w * std::abs(std::conj(omega_i) * dm.rho41());
        wsum += w;
    }
    out.pump_rho32_abs /= wsum;
    out.idler_rho41_abs /= wsum;
    out.ratio = out.idler_rho41_abs > 0.0
                    ? out.pump_rho32_abs / out.idler_rho41_abs
                    : 0.0;
    return out;
}

}  // namespace fwm
