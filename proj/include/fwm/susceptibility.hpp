#pragma once

#include <complex>
#include <span>
#include <vector>

#include "fwm/atom.hpp"
#include "fwm/steady_state.hpp"

namespace fwm {

struct SusceptibilitySample {
    double delta_s = 0.0;
    std::complex<double> chi1_s{};
    std::complex<double> chi3{};
    std::complex<double> kappa{};
};

// Velocity sums S(ds) = sum_j w_j rho41_j / Gamma31(ds, v_j) and
// Q(ds) = sum_j w_j rho11_j / Gamma31(ds, v_j), evaluated directly in the
// Doppler core and through a moment expansion in the far wings
// (|Gamma - i ds| > 3 k_s v_max), where the expansion is accurate to ~1e-10.
class DopplerKernel {
public:
    DopplerKernel(const VelocitySolution& sol, const AtomEnsemble& ens,
                  const DriveConfig& drv);

    void eval(double delta_s, std::complex<double>& s_out,
              std::complex<double>& q_out) const;
    std::complex<double> eval_s(double delta_s) const;

    // true when delta_s falls in the moment-expansion region
    bool in_wing(double delta_s) const;

private:
    static constexpr int kMoments = 24;
    std::vector<double> ksv_;
    std::vector<std::complex<double>> a_;
    std::vector<double> b_;
    std::array<std::complex<double>, kMoments + 1> a_mom_{};
    std::array<double, kMoments + 1> b_mom_{};
    double gamma_ = 0.0;
    double wing_r2_ = 0.0;  // threshold on |Gamma - i ds|^2
    bool q_const_ = false;  // chi1 denominator independent of delta_s
    std::complex<double> q_const_value_{};
};

// Batch evaluation used by the wavefunction assembly.
struct SusceptibilityTable {
    std::vector<std::complex<double>> chi1;   // per delta_s sample
    std::vector<std::complex<double>> kappa;  // per delta_s sample
    double p22 = 0.0;
    double p44 = 0.0;
};

SusceptibilityTable evaluate_susceptibilities(std::span<const double> delta_s,
                                              const AtomEnsemble& ens,
                                              const DriveConfig& drv,
                                              const VelocityGrid& grid,
                                              int threads = 1);

// Third-order susceptibility from the full (non-perturbative) per-velocity
// steady state. The quantized idler amplitude cancels analytically; the
// evaluated kernel is rho41/Gamma31 per velocity class.
std::complex<double> chi3(double delta_s, const AtomEnsemble& ens,
                          const DriveConfig& drv, const VelocityGrid& grid);

// Weak-pump closed form, used as the analytic oracle for chi3.
std::complex<double> chi3_weak_pump(double delta_s, const AtomEnsemble& ens,
                                    const DriveConfig& drv,
                                    const VelocityGrid& grid);

// Signal linear susceptibility from the driven populations.
std::complex<double> chi1_signal(double delta_s, const AtomEnsemble& ens,
                                 const DriveConfig& drv,
                                 const VelocityGrid& grid);

// The idler linear susceptibility is small and neglected throughout.
inline std::complex<double> chi1_idler(double /*delta_i*/) { return {0.0, 0.0}; }

// Nonlinear coupling kappa = -i (2 sqrt(ws wi)/c) chi3 E_p E_c; the field
// amplitudes cancel against the chi3 normalization, so this stays finite
// for vanishing drive.
std::complex<double> kappa(double delta_s, const AtomEnsemble& ens,
                           const DriveConfig& drv, const VelocityGrid& grid);

SusceptibilitySample susceptibility_sample(double delta_s,
                                           const AtomEnsemble& ens,
                                           const DriveConfig& drv,
                                           const VelocityGrid& grid);

// Magnitudes of the two source terms of the rho31 equation evaluated from
// the four-level oracle with probe couplings; the pump*rho32 term is the
// one dropped in the chi3 fast path.
struct CoherenceTermDiagnostic {
    double pump_rho32_abs = 0.0;
    double idler_rho41_abs = 0.0;
    double ratio = 0.0;  // pump term over idler term
};

CoherenceTermDiagnostic compare_rho32_term(const AtomEnsemble& ens,
                                           const DriveConfig& drv,
                                           const VelocityGrid& grid,
                                           std::complex<double> omega_s,
                                           std::complex<double> omega_i,
                                           int stride = 16);

}  // namespace fwm
