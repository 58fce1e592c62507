#include "fwm/biphoton.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fwm/constants.hpp"
#include "fwm/errors.hpp"
#include "fwm/susceptibility.hpp"

namespace fwm {

namespace {
using cd = std::complex<double>;
constexpr cd I1{0.0, 1.0};

std::mutex fftw_mutex;  // FFTW planner is not thread-safe

// forward DFT X_m = sum_k x_k exp(-2 pi i k m / N)
void fft_forward(std::vector<cd>& data) {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_plan plan = fftw_plan_dft_1d(
        static_cast<int>(data.size()),
        reinterpret_cast<fftw_complex*>(data.data()),
        reinterpret_cast<fftw_complex*>(data.data()), FFTW_FORWARD,
        FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

void fft_backward(std::vector<cd>& data) {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_plan plan = fftw_plan_dft_1d(
        static_cast<int>(data.size()),
        reinterpret_cast<fftw_complex*>(data.data()),
        reinterpret_cast<fftw_complex*>(data.data()), FFTW_BACKWARD,
        FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Width of the region where |F| >= max/2 (outermost crossings); robust
// against multi-lobed spectra.
double spectral_bandwidth(const std::vector<double>& absf, double domega) {
    double peak = *std::max_element(absf.begin(), absf.end());
    double half = 0.5 * peak;
    std::size_t lo = 0, hi = absf.size() - 1;
    while (lo < absf.size() && absf[lo] < half) ++lo;
    while (hi > 0 && absf[hi] < half) --hi;
    if (hi <= lo) return domega;
    return (hi - lo) * domega;
}
}  // namespace

void FrequencyGrid::validate() const {
    if (!is_power_of_two(samples) || samples < 4096)
        throw config_error(
            "frequency grid: samples must be a power of two >= 4096");
    if (!(span > 0.0)) throw config_error("frequency grid: span must be > 0");
    if (!(center > 0.0)) throw config_error("frequency grid: center must be > 0");
}

FrequencyGrid FrequencyGrid::make(const DriveConfig& drv, double span,
                                  int samples) {
    FrequencyGrid g;
    g.center = drv.omega_s_central();
    g.span = span;
    g.samples = samples;
    g.validate();
    return g;
}

double BiphotonWaveform::rate() const {
    double acc = 0.0;
    for (const cd& p : psi) acc += std::norm(p);
    return acc * dtau;
}

double IntensityProfile::total() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * dtau;
}

Wavenumbers wavenumbers(double delta_s, cd chi1_s, const DriveConfig& drv) {
    cd root = std::sqrt(1.0 + chi1_s);
    if (root.real() <= 0.0)
        throw numeric_error("wavenumbers: sqrt(1+chi) branch ambiguous");
    const double ws = drv.omega_s_central() + delta_s;
    const double wi = drv.omega_i_central() - delta_s;
    Wavenumbers out;
    out.k_s = root * ws / phys::speed_of_light;
    out.k_i = wi / phys::speed_of_light;
    return out;
}

cd phase_mismatch(cd k_s, double k_i, double k_p, double k_c) {
    return (k_s - k_i) - (k_p - k_c);
}

BiphotonWaveform assemble_waveform(const FrequencyGrid& grid,
                                   std::span<const cd> integrand,
                                   double length) {
    grid.validate();
    const int n = grid.samples;
    if (static_cast<int>(integrand.size()) != n)
        throw config_error("assemble_waveform: integrand size mismatch");
    const double domega = grid.domega();

    double freq_energy = 0.0;
    for (const cd& v : integrand) freq_energy += std::norm(v);
    freq_energy *= length * length / (2.0 * std::numbers::pi) * domega;

    // psi(tau_m) = (L dO / 2pi) (-1)^m DFT[F]_(m mod N),  m in [-N/2, N/2)
    std::vector<cd> x(integrand.begin(), integrand.end());
    fft_forward(x);
    BiphotonWaveform wf;
    wf.dtau = 2.0 * std::numbers::pi / grid.span;
    wf.tau.resize(n);
    wf.psi.resize(n);
    const double scale = length * domega / (2.0 * std::numbers::pi);
    for (int m = -n / 2; m < n / 2; ++m) {
        int out_idx = m + n / 2;
        int src_idx = (m + n) % n;
        double sign = (m & 1) ? -1.0 : 1.0;
        wf.tau[out_idx] = m * wf.dtau;
        wf.psi[out_idx] = scale * sign * x[src_idx];
    }

    double time_energy = wf.rate();
    if (freq_energy > 0.0 &&
        std::abs(time_energy - freq_energy) > 1e-9 * freq_energy)
        throw numeric_error("Parseval identity violated in waveform build");
    wf.params.length = length;
    wf.params.center = grid.center;
    wf.params.span = grid.span;
    wf.params.samples = grid.samples;
    return wf;
}

BiphotonWaveform biphoton_wavefunction(const FrequencyGrid& grid,
                                       const AtomEnsemble& ens,
                                       const DriveConfig& drv,
                                       const VelocityGrid& vgrid,
                                       int threads) {
    grid.validate();
    const int n = grid.samples;
    const double domega = grid.domega();
    const double length = ens.length;
    const double kp = drv.k_pump();
    const double kc = drv.k_control();

    std::vector<double> deltas(n);
    for (int k = 0; k < n; ++k) deltas[k] = grid.delta_s(k);
    SusceptibilityTable table =
        evaluate_susceptibilities(deltas, ens, drv, vgrid, threads);

    // F(omega) = kappa * sinc(dk L / 2) * exp(i (k_s + k_i) L / 2)
    std::vector<cd> f(n);
    for (int k = 0; k < n; ++k) {
        Wavenumbers kn = wavenumbers(deltas[k], table.chi1[k], drv);
        cd dk = phase_mismatch(kn.k_s, kn.k_i, kp, kc);
        cd x = dk * length * 0.5;
        cd sinc = std::abs(x) < 1e-12 ? cd{1.0, 0.0} : std::sin(x) / x;
        cd prop = std::exp(I1 * (kn.k_s + kn.k_i) * (length * 0.5));
        f[k] = table.kappa[k] * sinc * prop;
    }

    std::vector<double> absf(n);
    double fmax = 0.0;
    for (int k = 0; k < n; ++k) {
        absf[k] = std::abs(f[k]);
        fmax = std::max(fmax, absf[k]);
    }
    if (fmax > 0.0) {
        if (std::max(absf.front(), absf.back()) > 1e-4 * fmax) {
            std::ostringstream os;
            os << "frequency span too small: integrand at grid edge is "
               << std::max(absf.front(), absf.back()) / fmax
               << " of its peak (limit 1e-4)";
            throw resolution_error(os.str());
        }
        double bw = spectral_bandwidth(absf, domega);
        if (grid.span < 20.0 * bw) {
            std::ostringstream os;
            os << "frequency span " << grid.span
               << " rad/s is below 20x the integrand bandwidth " << bw;
            throw resolution_error(os.str());
        }
    }

    BiphotonWaveform wf = assemble_waveform(grid, f, length);

    wf.params.optical_depth = ens.optical_depth;
    wf.params.temperature = ens.temperature;
    wf.params.length = ens.length;
    wf.params.omega_p = drv.omega_p;
    wf.params.omega_c = drv.omega_c;
    wf.params.delta_p = drv.delta_p;
    wf.params.delta_c = drv.delta_c;
    wf.params.center = grid.center;
    wf.params.span = grid.span;
    wf.params.samples = grid.samples;
    wf.params.p22 = table.p22;
    wf.params.p44 = table.p44;
    return wf;
}

namespace {
IntensityProfile convolve_impl(const std::vector<double>& tau,
                               const std::vector<double>& values, double dtau,
                               double jitter_fwhm) {
    IntensityProfile out;
    out.tau = tau;
    out.dtau = dtau;
    if (jitter_fwhm < 0.0)
        throw config_error("jitter FWHM must be >= 0");
    if (jitter_fwhm == 0.0) {
        out.values = values;
        return out;
    }
    const int n = static_cast<int>(values.size());
    // sech(t/t0) has FWHM 2 t0 arccosh(2)
    const double t0 = jitter_fwhm / (2.0 * std::acosh(2.0));
    std::vector<double> kern(n);
    double ksum = 0.0;
    for (int j = 0; j < n; ++j) {
        kern[j] = 1.0 / std::cosh(tau[j] / t0);
        ksum += kern[j];
    }
    // discrete mass vs the analytic integral pi t0
    double missing = 1.0 - ksum * dtau / (std::numbers::pi * t0);
    if (missing > 1e-6) {
        std::ostringstream os;
        os << "jitter kernel truncated: " << missing
           << " of its mass falls outside the time grid";
        throw resolution_error(os.str());
    }
    for (double& k : kern) k /= ksum;  // unit discrete mass

    const int m = 2 * n;
    std::vector<cd> a(m, cd{0.0, 0.0}), b(m, cd{0.0, 0.0});
    for (int j = 0; j < n; ++j) a[j] = values[j];
    for (int j = 0; j < n; ++j) {
        int d = j - n / 2;  // kernel sample at offset d
        b[(d + m) % m] = kern[j];
    }
    fft_forward(a);
    fft_forward(b);
    for (int j = 0; j < m; ++j) a[j] *= b[j];
    fft_backward(a);
    out.values.resize(n);
    for (int j = 0; j < n; ++j)
        out.values[j] = std::max(0.0, a[j].real() / m);
    return out;
}
}  // namespace

IntensityProfile convolve_jitter(const BiphotonWaveform& wf,
                                 double jitter_fwhm) {
    std::vector<double> in(wf.psi.size());
    for (std::size_t j = 0; j < wf.psi.size(); ++j) in[j] = std::norm(wf.psi[j]);
    return convolve_impl(wf.tau, in, wf.dtau, jitter_fwhm);
}

IntensityProfile convolve_jitter(const IntensityProfile& intensity,
                                 double jitter_fwhm) {
    return convolve_impl(intensity.tau, intensity.values, intensity.dtau,
                         jitter_fwhm);
}

double fwhm(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3)
        throw config_error("fwhm: need matching arrays with >= 3 samples");
    std::size_t imax = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] > y[imax]) imax = i;
    const double half = 0.5 * y[imax];
    if (!(half > 0.0)) throw numeric_error("fwhm: peak is not positive");

    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        const double a = y[i] - half;
        const double b = y[i + 1] - half;
        if (a == 0.0 && b == 0.0) continue;
        if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0))
            crossings.push_back(x[i] + (0.0 - a) * (x[i + 1] - x[i]) / (b - a));
    }
    if (crossings.size() > 2) {
        std::ostringstream os;
        os << "fwhm ambiguous: " << crossings.size()
           << " half-maximum crossings at";
        for (double c : crossings) os << ' ' << c;
        throw numeric_error(os.str());
    }
    double left = x.front();
    double right = x.back();
    for (double c : crossings) {
        if (c <= x[imax]) left = std::max(left, c);
        if (c >= x[imax]) right = std::min(right, c);
    }
    return right - left;
}

void write_waveform_csv(std::ostream& os, const BiphotonWaveform& wf) {
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    const WaveformParams& p = wf.params;
    os << "# fwm waveform v1\n";
    os << "# od = " << fmt(p.optical_depth) << "\n";
    os << "# temperature_k = " << fmt(p.temperature) << "\n";
    os << "# length_mm = " << fmt(p.length * 1e3) << "\n";
    os << "# omega_p_mhz = " << fmt(p.omega_p / (2e6 * std::numbers::pi)) << "\n";
    os << "# omega_c_mhz = " << fmt(p.omega_c / (2e6 * std::numbers::pi)) << "\n";
    os << "# delta_p_mhz = " << fmt(p.delta_p / (2e6 * std::numbers::pi)) << "\n";
    os << "# delta_c_mhz = " << fmt(p.delta_c / (2e6 * std::numbers::pi)) << "\n";
    os << "# center_rad_s = " << fmt(p.center) << "\n";
    os << "# span_rad_s = " << fmt(p.span) << "\n";
    os << "# samples = " << p.samples << "\n";
    os << "tau_s,psi_sq\n";
    for (std::size_t i = 0; i < wf.tau.size(); ++i)
        os << fmt(wf.tau[i]) << ',' << fmt(std::norm(wf.psi[i])) << "\n";
}

SourceFigures source_figures(const BiphotonWaveform& wf,
                             const VelocityResolvedState& state,
                             const AtomEnsemble& ens,
                             const Calibration& cal, double jitter_fwhm) {
    return source_figures(wf, state.p22, state.p44, ens, cal, jitter_fwhm);
}

SourceFigures source_figures(const BiphotonWaveform& wf, double p22,
                             double p44, const AtomEnsemble& ens,
                             const Calibration& cal, double jitter_fwhm) {
    SourceFigures out;
    out.calibration = cal;
    out.rate_raw = wf.rate();
    out.singles_s_raw = 2.0 * p22 * ens.gamma_e * ens.optical_depth;
    out.singles_i_raw = 2.0 * p44 * ens.gamma_d * ens.optical_depth;

    if (out.rate_raw <= 0.0 || out.singles_i_raw <= 0.0 ||
        out.singles_s_raw <= 0.0) {
        if (out.rate_raw > 0.0)
            throw numeric_error(
                "source_figures: zero singles rate with nonzero pair rate");
        out.defined = false;  // vanishing drive: figures flagged undefined
        return out;
    }

    IntensityProfile jittered = convolve_jitter(wf, jitter_fwhm);
    std::size_t ipk = 0;
    for (std::size_t i = 1; i < jittered.values.size(); ++i)
        if (jittered.values[i] > jittered.values[ipk]) ipk = i;
    out.peak_jittered_raw = jittered.values[ipk];
    out.tau_peak = jittered.tau[ipk];

    out.g2_raw = out.peak_jittered_raw / (out.singles_s_raw * out.singles_i_raw);
    out.eta_raw = out.rate_raw / out.singles_i_raw;

    out.pair_rate = cal.c_r * out.rate_raw;
    out.g2si_max = cal.c_g * out.g2_raw;
    out.eta = cal.c_eta * out.eta_raw;
    out.singles_i = out.pair_rate / out.eta;
    // signal singles fixed so that 1 + R p_max / (N_s N_i) = g2
    const double p_max = out.peak_jittered_raw / out.rate_raw;  // 1/s
    if (out.g2si_max > 1.0)
        out.singles_s = out.pair_rate * p_max /
                        ((out.g2si_max - 1.0) * out.singles_i);
    else
        out.singles_s = 0.0;

    std::vector<double> intensity(wf.psi.size());
    for (std::size_t j = 0; j < wf.psi.size(); ++j)
        intensity[j] = std::norm(wf.psi[j]);
    out.duration_fwhm = fwhm(wf.tau, intensity);
    out.duration_fwhm_jitter = fwhm(jittered.tau, jittered.values);
    out.defined = true;
    return out;
}

}  // namespace fwm
