#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fwm/atom.hpp"
#include "fwm/steady_state.hpp"

namespace fwm {

// Uniform signal-frequency grid centered on omega_s_central; sample k sits
// at delta_s = (k - samples/2) * span / samples, so the conjugate time grid
// has tau = 0 as a sample point.
struct FrequencyGrid {
    double center = 0.0;  // rad/s
    double span = 0.0;    // rad/s
    int samples = 0;      // power of two, >= 4096

    double domega() const { return span / samples; }
    double delta_s(int k) const { return (k - samples / 2) * domega(); }
    void validate() const;

    static FrequencyGrid make(const DriveConfig& drv, double span,
                              int samples);
};

struct WaveformParams {
    double optical_depth = 0.0;
    double temperature = 0.0;
    double length = 0.0;
    double omega_p = 0.0;
    double omega_c = 0.0;
    double delta_p = 0.0;
    double delta_c = 0.0;
    double center = 0.0;
    double span = 0.0;
    int samples = 0;
    double p22 = 0.0;  // velocity-averaged populations behind this build
    double p44 = 0.0;
};

// Sampled bi-photon amplitude envelope (carrier at omega_s_central removed);
// |psi|^2 integrates to the raw pair rate.
struct BiphotonWaveform {
    std::vector<double> tau;              // s, uniform, tau=0 at samples/2
    std::vector<std::complex<double>> psi;  // 1/s
    double dtau = 0.0;
    WaveformParams params;

    double rate() const;  // integral of |psi|^2 dtau
};

struct IntensityProfile {
    std::vector<double> tau;
    std::vector<double> values;
    double dtau = 0.0;

    double total() const;  // integral dt
};

// Signal/idler wavenumbers at a frequency-grid point. The signal branch
// uses sqrt(1 + chi1) with the principal root; the idler susceptibility is
// neglected.
struct Wavenumbers {
    std::complex<double> k_s;
    double k_i;
};
Wavenumbers wavenumbers(double delta_s, std::complex<double> chi1_s,
                        const DriveConfig& drv);

// dk = (k_s - k_i) - (k_p - k_c), counter-propagating convention folded in.
std::complex<double> phase_mismatch(std::complex<double> k_s, double k_i,
                                    double k_p, double k_c);

// Transform core: psi(tau_m) = (L/2pi) sum_k F_k exp(-i domega k' tau_m)
// domega, with k' = k - samples/2 and tau_m = m * 2pi/span for
// m in [-samples/2, samples/2). Checks the discrete Parseval identity.
BiphotonWaveform assemble_waveform(const FrequencyGrid& grid,
                                   std::span<const std::complex<double>> integrand,
                                   double length);

// Assemble psi(tau) from the susceptibility tables on the given grid.
// Checks: power-of-two sample count, integrand decayed to <1e-4 of its peak
// at the grid edge, span at least 20x the integrand bandwidth, discrete
// Parseval identity to 1e-9.
BiphotonWaveform biphoton_wavefunction(const FrequencyGrid& grid,
                                       const AtomEnsemble& ens,
                                       const DriveConfig& drv,
                                       const VelocityGrid& vgrid,
                                       int threads = 1);

// |psi|^2 convolved with a unit-mass sech detector-jitter kernel of the
// given FWHM (0 = identity).
IntensityProfile convolve_jitter(const BiphotonWaveform& wf,
                                 double jitter_fwhm);
IntensityProfile convolve_jitter(const IntensityProfile& intensity,
                                 double jitter_fwhm);

// Linear-interpolated full width at half of the global maximum. Throws if
// the curve crosses half max more than twice.
double fwhm(std::span<const double> x, std::span<const double> y);

struct Calibration {
    double c_g = 1.0;
    double c_r = 1.0;
    double c_eta = 1.0;
};

struct SourceFigures {
    bool defined = false;       // false for vanishing drive
    double pair_rate = 0.0;     // counts/s after calibration
    double singles_s = 0.0;     // counts/s, consistent with g2 floor
    double singles_i = 0.0;     // counts/s (= pair_rate / eta)
    double g2si_max = 0.0;      // from the jitter-convolved peak
    double eta = 0.0;
    double duration_fwhm = 0.0;         // s, before jitter
    double duration_fwhm_jitter = 0.0;  // s, after jitter
    double tau_peak = 0.0;              // s, of the jittered profile
    double rate_raw = 0.0;       // model units before calibration
    double singles_s_raw = 0.0;  // 2 p22 gamma_e OD
    double singles_i_raw = 0.0;  // 2 p44 gamma_d OD
    double g2_raw = 0.0;
    double eta_raw = 0.0;
    double peak_jittered_raw = 0.0;
    Calibration calibration;
};

// All deterministic figures of merit for one model point.
// N_s = 2 rho22 Gamma OD and N_i = 2 rho44 gamma OD feed the g2/eta
// formulas; the calibrated signal singles rate is chosen so that the
// accidental floor reproduces the calibrated g2 peak.
SourceFigures source_figures(const BiphotonWaveform& wf,
                             const VelocityResolvedState& state,
                             const AtomEnsemble& ens,
                             const Calibration& cal, double jitter_fwhm);

SourceFigures source_figures(const BiphotonWaveform& wf, double p22,
                             double p44, const AtomEnsemble& ens,
                             const Calibration& cal, double jitter_fwhm);

// Two-column (tau_seconds, |psi|^2) CSV with the generating parameters in
// '#' header lines.
void write_waveform_csv(std::ostream& os, const BiphotonWaveform& wf);

}  // namespace fwm
