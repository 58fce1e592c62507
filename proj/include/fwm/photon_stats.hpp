#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fwm/biphoton.hpp"

namespace fwm {

enum class Channel : std::uint8_t { idler = 0, signal1 = 1, signal2 = 2 };

using ChannelMask = std::uint8_t;
inline ChannelMask mask(Channel c) {
    return static_cast<ChannelMask>(1u << static_cast<unsigned>(c));
}
inline constexpr ChannelMask kSignalBoth = 0b110;

struct TagRecord {
    std::uint8_t channel = 0;
    std::uint64_t t_ps = 0;
};

// Time-ordered detector clicks; timestamps are picoseconds from the start
// of the run.
struct TagStream {
    std::vector<TagRecord> records;
    std::uint64_t duration_ps = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

struct BackgroundRates {
    double idler = 0.0;   // counts/s
    double signal = 0.0;  // counts/s, split over the two signal detectors
};

// Forward Monte Carlo consistent with the analytic model: pair events are a
// Poisson process at the calibrated rate, the signal-minus-idler delay is
// drawn from |psi|^2 and smeared by one sech jitter draw (the measured
// kernel is the combined two-detector response), and the remaining singles
// are independent Poisson streams. Signal clicks split 50:50 between the
// two detectors. Bit-identical for a fixed seed.
TagStream generate_tags(const SourceFigures& figures,
                        const BiphotonWaveform& wf,
                        const BackgroundRates& background, double jitter_fwhm,
                        double duration, std::uint64_t seed,
                        std::uint64_t config_hash = 0);

struct CorrelationHistogram {
    std::vector<double> bin_edges;  // seconds, size counts.size()+1
    std::vector<std::uint64_t> counts;
    double baseline = 0.0;  // expected accidental counts per bin

    std::vector<double> normalized() const;
    double bin_center(std::size_t i) const {
        return 0.5 * (bin_edges[i] + bin_edges[i + 1]);
    }
};

// Histogram of t_b - t_a coincidences normalized by the accidental level
// N_a N_b binwidth T.
CorrelationHistogram estimate_g2(const TagStream& tags, ChannelMask a,
                                 ChannelMask b, double bin_width,
                                 double max_lag);

struct HeraldedStats {
    double n_i = 0.0;       // idler counts
    double n_is1 = 0.0;     // idler-signal1 coincidences in the window
    double n_is2 = 0.0;
    double n_is1s2 = 0.0;   // triple coincidences
    double g_c = 0.0;
    double window = 0.0;    // s
    double e_c = 0.0;       // captured fraction of the heralded envelope
    double p_s = 0.0;       // P(exactly one signal click | herald)
    double p_c = 0.0;       // P(click in both signal detectors | herald)
    double tau_peak = 0.0;  // s, window anchor
};

// Grangier-style conditional auto-correlation with an asymmetric window
// [tau_peak, tau_peak + window) anchored at the cross-correlation peak.
HeraldedStats conditional_autocorrelation(const TagStream& tags,
                                          double window);

// E_c(window) = heralded signal counts inside [tau_peak, tau_peak+window)
// over the counts in the wide reference window (4 ns).
std::vector<std::pair<double, double>> heralded_fraction(
    const TagStream& tags, std::span<const double> windows);

// Background-subtracted pair rate and heralding efficiency from the
// coincidence counts in [tau_peak - before, tau_peak + after].
struct PairRateEstimate {
    double pair_rate = 0.0;   // counts/s
    double idler_rate = 0.0;  // counts/s
    double eta = 0.0;
    double sigma_pair_rate = 0.0;
    double sigma_eta = 0.0;
};

PairRateEstimate estimate_pair_rate(const TagStream& tags,
                                    double window_before = 1e-9,
                                    double window_after = 6e-9);

double cauchy_schwarz_ratio(double g2si_max, double g_ss0 = 2.0,
                            double g_ii0 = 2.0);

// |Int sqrt(G1 G2) dt|^2 / [Int G1 dt Int G2 dt]
double temporal_likeness(std::span<const double> g1,
                         std::span<const double> g2);

// Coincidence probability after a 50:50 beam splitter for wavepackets
// psi1, psi2 on a common grid, the second delayed by `delay` (rounded to
// the grid): P = (1 - purity |<psi1|psi2(.-delay)>|^2) / 2.
double hom_coincidence(std::span<const std::complex<double>> psi1,
                       std::span<const std::complex<double>> psi2,
                       double dtau, double delay, double purity);

struct HomScan {
    std::vector<double> delays;
    std::vector<double> probabilities;
};

HomScan hom_scan(std::span<const std::complex<double>> psi1,
                 std::span<const std::complex<double>> psi2, double dtau,
                 double max_delay, int points, double purity);

// V = 1 - P(0)/P(inf) with P(inf) = 1/2.
double hom_visibility(std::span<const std::complex<double>> psi1,
                      std::span<const std::complex<double>> psi2, double dtau,
                      double purity);

struct QngResult {
    bool quantum_non_gaussian = false;
    double margin = 0.0;  // P_s^3/3 - P_c
};

// Criterion P_c < P_s^3 / 3 (valid for P_c << P_s).
QngResult qng_check(double p_s, double p_c);

void write_tag_stream(std::ostream& os, const TagStream& tags);
TagStream read_tag_stream(std::istream& is);
std::string tag_stream_to_string(const TagStream& tags);

}  // namespace fwm
