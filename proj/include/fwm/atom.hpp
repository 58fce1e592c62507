#pragma once

#include <complex>
#include <vector>

namespace fwm {

// How the 2*gamma_d decay of the top level is routed in the three-level
// reduction (the physical cascade leaves through a level that the reduction
// does not keep).
enum class CascadeRepump {
    ground,   // gamma_d -> |2>, gamma_d -> |1>
    p_level,  // all 2*gamma_d -> |2>
};

// Denominator used in the signal linear susceptibility; `gamma31` is the
// physical choice, `gamma21` reproduces the alternative bookkeeping where the
// pump-coherence rate is used instead (kept for sensitivity analysis).
enum class Chi1Denominator {
    gamma31,
    gamma21,
};

// Ladder system |1> (5S1/2) -- |2> (5P3/2, pump) -- |4> (5D5/2), with |3>
// (5P3/2, signal) completing the parametric loop. Decay rate of |2> and |3>
// is 2*gamma_e, decay of |4> is 2*gamma_d split evenly between |2> and |3>.
struct AtomEnsemble {
    double temperature = 328.15;     // K
    double length = 25e-3;           // m
    double optical_depth = 9.3;      // dimensionless, |1>->|3> resonance
    double mass = 1.40999e-25;       // kg (85Rb)
    double gamma_e = 0.0;            // rad/s, half the decay rate of |2>,|3>
    double gamma_d = 0.0;            // rad/s, half the decay rate of |4>
    double dipole_21 = 0.0;          // C m, effective
    double dipole_31 = 0.0;          // C m
    double dipole_42 = 0.0;          // C m
    double dipole_43 = 0.0;          // C m
    double lambda_21 = 780.241e-9;   // m, |1>->|2>,|3> transition
    double lambda_42 = 776.0e-9;     // m, |2>,|3>->|4> transition
    // Fraction of the OD-measurement absorbance seen by the heralded signal
    // (the cascade emission lines overlap only part of the hyperfine
    // absorption manifold, which the four-level model does not resolve).
    double signal_absorption_scale = 0.62;
    CascadeRepump cascade_repump = CascadeRepump::ground;
    Chi1Denominator chi1_denominator = Chi1Denominator::gamma31;

    // 85Rb D2 / 5D5/2 values; dipoles are decay-matched with a 1/sqrt(3)
    // isotropic-polarization factor (see data/rb85.cfg for provenance).
    static AtomEnsemble rb85();

    void validate() const;  // throws config_error

    double omega_21() const;  // rad/s, transition frequency |1>->|2>,|3>
    double omega_42() const;  // rad/s, transition frequency |2>,|3>->|4>
};

// Pump/control drive plus the signal/idler frequency bookkeeping.
// Rabi convention: omega_p/omega_c are the full (on-resonance flopping)
// Rabi frequencies as quoted by experiments; the rotating-wave couplings
// are half that, so the field half-amplitude is E = hbar*Omega/(2 mu).
// Pump and signal propagate along +z, control and idler along -z; the
// phase-mismatch formula already carries those signs, so all wavenumbers
// here are magnitudes.
struct DriveConfig {
    double omega_p = 0.0;    // rad/s, pump Rabi frequency
    double omega_c = 0.0;    // rad/s, control Rabi frequency
    double delta_p = 0.0;    // rad/s, pump detuning from |1>->|2>
    double delta_c = 0.0;    // rad/s, control detuning from |2>->|4>
    double delta_s = 0.0;    // rad/s, signal detuning (scan variable)
    double lambda_p = 780.241e-9;  // m
    double lambda_c = 776.0e-9;    // m

    void validate() const;

    double two_photon_detuning() const { return delta_p + delta_c; }
    // Parametric constraint delta_s + delta_i = delta_p + delta_c.
    double delta_i() const { return two_photon_detuning() - delta_s; }

    double omega_pump() const;     // rad/s, absolute pump frequency
    double omega_control() const;  // rad/s
    // Central frequencies fixed by energy conservation with the idler
    // anchored on the |4>->|3> resonance shifted by the two-photon detuning;
    // with that choice delta_s = 0 sits at the |1>->|3> resonance.
    double omega_s_central() const;
    double omega_i_central() const;

    // Rotating-frame coupling amplitudes (the Omega slots in the master
    // equation are these).
    double coupling_p() const { return 0.5 * omega_p; }
    double coupling_c() const { return 0.5 * omega_c; }

    double k_pump() const;       // rad/m, omega_pump/c
    double k_control() const;    // rad/m
    double k_s_central() const;  // rad/m
    double k_i_central() const;  // rad/m

    // Field half-amplitudes E = hbar*Omega/mu (the full amplitude is 2E).
    double field_p(const AtomEnsemble& ens) const;
    double field_c(const AtomEnsemble& ens) const;
};

// Quadrature rule for integrals of f(v)*g(v) over the 1-D Maxwell-Boltzmann
// distribution f. Weights carry the density factor and sum to 1.
struct VelocityGrid {
    std::vector<double> nodes;    // m/s, symmetric about 0
    std::vector<double> weights;  // dimensionless
    double v_thermal = 0.0;       // m/s

    std::size_t size() const { return nodes.size(); }
};

// Complex decay rates of the six coherences for an atom moving with
// velocity v along +z.
struct ComplexRates {
    std::complex<double> g21, g31, g42, g43, g41, g32;
};

double thermal_velocity(const AtomEnsemble& ens);  // sqrt(kB T / m)

// Classic Gauss-Hermite rule mapped onto f(v). Exact for polynomials of
// degree < 2*order but useless for kernels with structure much narrower
// than v_thermal (natural-width Lorentzians); see build_velocity_grid_dense.
VelocityGrid build_velocity_grid(const AtomEnsemble& ens, int order);

// Uniform trapezoid grid over +-span_vt thermal velocities with Gaussian
// weights. Resolves Lorentzian kernels of half width >= ~3*span*v_T/order.
VelocityGrid build_velocity_grid_dense(const AtomEnsemble& ens, int order,
                                       double span_vt = 8.0);

// Dense grid with the node count chosen from the narrowest kernel scale
// (natural width over optical wavenumber) so that quadrature errors stay
// below ~1e-8. order_scale multiplies the automatic node count.
VelocityGrid default_velocity_grid(const AtomEnsemble& ens,
                                   const DriveConfig& drv,
                                   double order_scale = 1.0);

ComplexRates complex_rates(double v, const AtomEnsemble& ens,
                           const DriveConfig& drv, double k_s, double k_i);

// OD = n * sigma_eff * L with sigma_eff the peak Doppler-broadened
// absorption cross-section of the |1>->|3> transition.
double effective_cross_section(const AtomEnsemble& ens);
double density_from_od(const AtomEnsemble& ens);
double od_from_density(const AtomEnsemble& ens, double density);

}  // namespace fwm
