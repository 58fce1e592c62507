#include "fwm/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "fwm/errors.hpp"

namespace fwm {

namespace {

// Deterministic uniform in [0,1): fixed bit recipe, independent of the
// standard library's distribution implementations.
double canonical(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exponential_gap(std::mt19937_64& rng, double rate) {
    return -std::log1p(-canonical(rng)) / rate;
}

// Inverse-CDF sampler over a sampled nonnegative density.
class EnvelopeSampler {
public:
    EnvelopeSampler(const std::vector<double>& tau,
                    const std::vector<double>& values, double dtau)
        : tau_(tau), dtau_(dtau) {
        cdf_.resize(values.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            acc += std::max(0.0, values[i]);
            cdf_[i] = acc;
        }
        if (!(acc > 0.0))
            throw numeric_error("pair-delay density has zero mass");
        for (double& c : cdf_) c /= acc;
    }

    double sample(std::mt19937_64& rng) const {
        const double u = canonical(rng);
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
        if (i >= cdf_.size()) i = cdf_.size() - 1;
        return tau_[i] + (canonical(rng) - 0.5) * dtau_;
    }

private:
    std::vector<double> tau_;
    std::vector<double> cdf_;
    double dtau_;
};

double sech_jitter_sample(std::mt19937_64& rng, double fwhm) {
    if (fwhm <= 0.0) return 0.0;
    const double t0 = fwhm / (2.0 * std::acosh(2.0));
    // CDF of sech(t/t0)/(pi t0) is (2/pi) atan(exp(t/t0))
    double u = canonical(rng);
    u = std::min(std::max(u, 1e-15), 1.0 - 1e-15);
    return t0 * std::log(std::tan(0.5 * std::numbers::pi * u));
}

std::uint64_t to_ps(double seconds) {
    return static_cast<std::uint64_t>(std::llround(seconds * 1e12));
}

std::vector<double> channel_times(const TagStream& tags, ChannelMask m) {
    std::vector<double> out;
    for (const TagRecord& r : tags.records)
        if (mask(static_cast<Channel>(r.channel)) & m)
            out.push_back(static_cast<double>(r.t_ps) * 1e-12);
    return out;
}

// Peak of the idler-signal cross-correlation, used to anchor coincidence
// windows.
double cross_correlation_peak(const std::vector<double>& idler,
                              const std::vector<double>& signal) {
    constexpr double bin = 50e-12;
    constexpr double lag = 20e-9;
    const int nbins = static_cast<int>(2.0 * lag / bin);
    std::vector<std::uint64_t> hist(nbins, 0);
    std::size_t lo = 0;
    for (double t : idler) {
        while (lo < signal.size() && signal[lo] < t - lag) ++lo;
        for (std::size_t j = lo; j < signal.size() && signal[j] < t + lag; ++j) {
            int b = static_cast<int>((signal[j] - t + lag) / bin);
            if (b >= 0 && b < nbins) ++hist[b];
        }
    }
    std::size_t ipk = 0;
    std::uint64_t cmax = 0;
    for (std::size_t i = 0; i < hist.size(); ++i)
        if (hist[i] > cmax) { cmax = hist[i]; ipk = i; }
    if (cmax == 0)
        throw numeric_error("no idler-signal coincidences within 20 ns");
    double center = -lag + (ipk + 0.5) * bin;
    // parabolic peak interpolation; the raw argmax bin wanders by a bin or
    // two at realistic counting noise
    if (ipk > 0 && ipk + 1 < hist.size()) {
        double ym = static_cast<double>(hist[ipk - 1]);
        double y0 = static_cast<double>(hist[ipk]);
        double yp = static_cast<double>(hist[ipk + 1]);
        double denom = ym - 2.0 * y0 + yp;
        if (denom < 0.0) {
            double shift = 0.5 * (ym - yp) / denom;
            if (std::abs(shift) <= 1.0) center += shift * bin;
        }
    }
    return center;
}

}  // namespace

TagStream generate_tags(const SourceFigures& figures,
                        const BiphotonWaveform& wf,
                        const BackgroundRates& background, double jitter_fwhm,
                        double duration, std::uint64_t seed,
                        std::uint64_t config_hash) {
    if (!figures.defined)
        throw numeric_error("generate_tags: source figures undefined");
    if (!(duration > 0.0)) throw config_error("duration must be > 0");
    const double r_pair = figures.pair_rate;
    const double n_s = figures.singles_s;
    const double n_i = figures.singles_i;
    if (r_pair > n_s || r_pair > n_i) {
        std::ostringstream os;
        os << "generate_tags: pair rate " << r_pair
           << " exceeds a singles rate (N_s=" << n_s << ", N_i=" << n_i << ")";
        throw numeric_error(os.str());
    }

    std::vector<double> intensity(wf.psi.size());
    for (std::size_t j = 0; j < wf.psi.size(); ++j)
        intensity[j] = std::norm(wf.psi[j]);
    EnvelopeSampler delay_sampler(wf.tau, intensity, wf.dtau);

    std::mt19937_64 rng(seed);
    TagStream out;
    out.duration_ps = to_ps(duration);
    out.seed = seed;
    out.config_hash = config_hash;

    // correlated pairs
    if (r_pair > 0.0) {
        double t = exponential_gap(rng, r_pair);
        while (t < duration) {
            out.records.push_back({static_cast<std::uint8_t>(Channel::idler),
                                   to_ps(t)});
            double delay = delay_sampler.sample(rng) +
                           sech_jitter_sample(rng, jitter_fwhm);
            double ts = t + delay;
            bool to_s1 = (rng() & 1u) != 0;
            if (ts >= 0.0 && ts <= duration)
                out.records.push_back(
                    {static_cast<std::uint8_t>(to_s1 ? Channel::signal1
                                                     : Channel::signal2),
                     to_ps(ts)});
            t += exponential_gap(rng, r_pair);
        }
    }
    // uncorrelated singles and background
    auto poisson_stream = [&](double rate, bool is_idler) {
        if (rate <= 0.0) return;
        double t = exponential_gap(rng, rate);
        while (t < duration) {
            std::uint8_t ch;
            if (is_idler) {
                ch = static_cast<std::uint8_t>(Channel::idler);
            } else {
                bool to_s1 = (rng() & 1u) != 0;
                ch = static_cast<std::uint8_t>(to_s1 ? Channel::signal1
                                                     : Channel::signal2);
            }
            out.records.push_back({ch, to_ps(t)});
            t += exponential_gap(rng, rate);
        }
    };
    poisson_stream(n_i - r_pair + background.idler, true);
    poisson_stream(n_s - r_pair + background.signal, false);

    std::sort(out.records.begin(), out.records.end(),
              [](const TagRecord& a, const TagRecord& b) {
                  return a.t_ps != b.t_ps ? a.t_ps < b.t_ps
                                          : a.channel < b.channel;
              });
    return out;
}

std::vector<double> CorrelationHistogram::normalized() const {
    std::vector<double> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        out[i] = baseline > 0.0 ? counts[i] / baseline : 0.0;
    return out;
}

CorrelationHistogram estimate_g2(const TagStream& tags, ChannelMask a,
                                 ChannelMask b, double bin_width,
                                 double max_lag) {
    if (!(bin_width > 0.0)) throw config_error("bin_width must be > 0");
    if (!(max_lag > 0.0)) throw config_error("max_lag must be > 0");
    std::vector<double> ta = channel_times(tags, a);
    std::vector<double> tb = channel_times(tags, b);
    if (ta.empty() || tb.empty())
        throw numeric_error("estimate_g2: a channel has no clicks");

    const int nbins = std::max(1, static_cast<int>(2.0 * max_lag / bin_width));
    CorrelationHistogram h;
    h.counts.assign(nbins, 0);
    h.bin_edges.resize(nbins + 1);
    for (int i = 0; i <= nbins; ++i)
        h.bin_edges[i] = -max_lag + i * bin_width;

    std::size_t lo = 0;
    for (double t : ta) {
        while (lo < tb.size() && tb[lo] < t - max_lag) ++lo;
        for (std::size_t j = lo; j < tb.size() && tb[j] < t + max_lag; ++j) {
            int bin = static_cast<int>((tb[j] - t + max_lag) / bin_width);
            if (bin >= 0 && bin < nbins) ++h.counts[bin];
        }
    }
    const double duration = static_cast<double>(tags.duration_ps) * 1e-12;
    h.baseline = static_cast<double>(ta.size()) * static_cast<double>(tb.size()) *
                 bin_width / duration;
    return h;
}

HeraldedStats conditional_autocorrelation(const TagStream& tags,
                                          double window) {
    if (!(window > 0.0)) throw config_error("window must be > 0");
    std::vector<double> idler = channel_times(tags, mask(Channel::idler));
    std::vector<double> s1 = channel_times(tags, mask(Channel::signal1));
    std::vector<double> s2 = channel_times(tags, mask(Channel::signal2));
    if (idler.empty() || (s1.empty() && s2.empty()))
        throw numeric_error("conditional_autocorrelation: empty channels");
    std::vector<double> s_both = channel_times(tags, kSignalBoth);
    const double tpk = cross_correlation_peak(idler, s_both);

    auto count_in = [](const std::vector<double>& v, double lo, double hi) {
        return static_cast<double>(
            std::lower_bound(v.begin(), v.end(), hi) -
            std::lower_bound(v.begin(), v.end(), lo));
    };

    HeraldedStats st;
    st.window = window;
    st.tau_peak = tpk;
    st.n_i = static_cast<double>(idler.size());
    double heralds_single = 0.0, heralds_double = 0.0;
    double wide_counts = 0.0;
    const double wide = std::max(4e-9, window);
    for (double t : idler) {
        const double lo = t + tpk;
        const double c1 = count_in(s1, lo, lo + window);
        const double c2 = count_in(s2, lo, lo + window);
        st.n_is1 += c1;
        st.n_is2 += c2;
        st.n_is1s2 += c1 * c2;
        if (c1 + c2 == 1.0) heralds_single += 1.0;
        if (c1 > 0.0 && c2 > 0.0) heralds_double += 1.0;
        wide_counts += count_in(s1, lo, lo + wide) + count_in(s2, lo, lo + wide);
    }
    if (st.n_is1 == 0.0 || st.n_is2 == 0.0)
        throw numeric_error(
            "conditional_autocorrelation: zero two-fold coincidences");
    st.g_c = st.n_is1s2 * st.n_i / (st.n_is1 * st.n_is2);
    st.p_s = heralds_single / st.n_i;
    st.p_c = heralds_double / st.n_i;
    st.e_c = wide_counts > 0.0 ? (st.n_is1 + st.n_is2) / wide_counts : 0.0;
    return st;
}

std::vector<std::pair<double, double>> heralded_fraction(
    const TagStream& tags, std::span<const double> windows) {
    std::vector<double> idler = channel_times(tags, mask(Channel::idler));
    std::vector<double> s_both = channel_times(tags, kSignalBoth);
    if (idler.empty() || s_both.empty())
        throw numeric_error("heralded_fraction: empty channels");
    const double tpk = cross_correlation_peak(idler, s_both);
    double wide = 4e-9;
    for (double w : windows) wide = std::max(wide, w);

    auto counts_in_window = [&](double w) {
        double acc = 0.0;
        for (double t : idler) {
            auto lo = std::lower_bound(s_both.begin(), s_both.end(), t + tpk);
            auto hi = std::lower_bound(s_both.begin(), s_both.end(),
                                       t + tpk + w);
            acc += static_cast<double>(hi - lo);
        }
        return acc;
    };
    const double denom = counts_in_window(wide);
    std::vector<std::pair<double, double>> out;
    out.reserve(windows.size());
    for (double w : windows)
        out.emplace_back(w, denom > 0.0 ? counts_in_window(w) / denom : 0.0);
    return out;
}

PairRateEstimate estimate_pair_rate(const TagStream& tags,
                                    double window_before,
                                    double window_after) {
    std::vector<double> idler = channel_times(tags, mask(Channel::idler));
    std::vector<double> sig = channel_times(tags, kSignalBoth);
    if (idler.empty() || sig.empty())
        throw numeric_error("estimate_pair_rate: empty channels");
    const double tpk = cross_correlation_peak(idler, sig);
    const double duration = static_cast<double>(tags.duration_ps) * 1e-12;
    double coincidences = 0.0;
    for (double t : idler) {
        auto lo = std::lower_bound(sig.begin(), sig.end(), t + tpk - window_before);
        auto hi = std::lower_bound(sig.begin(), sig.end(), t + tpk + window_after);
        coincidences += static_cast<double>(hi - lo);
    }
    const double span = window_before + window_after;
    const double accidentals = static_cast<double>(idler.size()) *
                               static_cast<double>(sig.size()) * span /
                               duration;
    PairRateEstimate out;
    out.idler_rate = static_cast<double>(idler.size()) / duration;
    out.pair_rate = (coincidences - accidentals) / duration;
    out.sigma_pair_rate = std::sqrt(std::max(coincidences, 1.0)) / duration;
    out.eta = (coincidences - accidentals) / static_cast<double>(idler.size());
    out.sigma_eta = std::sqrt(std::max(coincidences, 1.0)) /
                    static_cast<double>(idler.size());
    return out;
}

double cauchy_schwarz_ratio(double g2si_max, double g_ss0, double g_ii0) {
    if (!(g2si_max >= 1.0) || !(g_ss0 >= 1.0) || !(g_ii0 >= 1.0))
        throw config_error("cauchy_schwarz_ratio: inputs must be >= 1");
    return g2si_max * g2si_max / (g_ss0 * g_ii0);
}

double temporal_likeness(std::span<const double> g1,
                         std::span<const double> g2) {
    if (g1.size() != g2.size() || g1.empty())
        throw config_error("temporal_likeness: need matching nonempty grids");
    double s12 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i) {
        if (g1[i] < 0.0 || g2[i] < 0.0)
            throw config_error("temporal_likeness: negative intensity");
        s12 += std::sqrt(g1[i]) * std::sqrt(g2[i]);
        s1 += g1[i];
        s2 += g2[i];
    }
    if (!(s1 > 0.0) || !(s2 > 0.0))
        throw config_error("temporal_likeness: zero-integral input");
    return s12 * s12 / (s1 * s2);
}

namespace {
double overlap_sq(std::span<const std::complex<double>> psi1,
                  std::span<const std::complex<double>> psi2, long shift) {
    std::complex<double> ov{0.0, 0.0};
    double n1 = 0.0, n2 = 0.0;
    const long n = static_cast<long>(psi1.size());
    for (long k = 0; k < n; ++k) {
        n1 += (std::conj(psi1[k]) * psi1[k]).real();
        n2 += (std::conj(psi2[k]) * psi2[k]).real();
        long j = k - shift;
        if (j >= 0 && j < n) ov += std::conj(psi1[k]) * psi2[j];
    }
    if (!(n1 > 0.0) || !(n2 > 0.0))
        throw config_error("hom: zero-norm wavepacket");
    return (ov.real() * ov.real() + ov.imag() * ov.imag()) / (n1 * n2);
}
}  // namespace

double hom_coincidence(std::span<const std::complex<double>> psi1,
                       std::span<const std::complex<double>> psi2,
                       double dtau, double delay, double purity) {
    if (psi1.size() != psi2.size() || psi1.empty())
        throw config_error("hom: need matching nonempty wavepackets");
    if (!(purity > 0.0) || purity > 1.0)
        throw config_error("hom: purity must be in (0, 1]");
    if (!(dtau > 0.0)) throw config_error("hom: dtau must be > 0");
    const long shift = std::lround(delay / dtau);
    return 0.5 * (1.0 - purity * overlap_sq(psi1, psi2, shift));
}

HomScan hom_scan(std::span<const std::complex<double>> psi1,
                 std::span<const std::complex<double>> psi2, double dtau,
                 double max_delay, int points, double purity) {
    if (points < 2) throw config_error("hom_scan: points must be >= 2");
    HomScan out;
    out.delays.reserve(points);
    out.probabilities.reserve(points);
    for (int i = 0; i < points; ++i) {
        double d = -max_delay + 2.0 * max_delay * i / (points - 1);
        out.delays.push_back(d);
        out.probabilities.push_back(
            hom_coincidence(psi1, psi2, dtau, d, purity));
    }
    return out;
}

double hom_visibility(std::span<const std::complex<double>> psi1,
                      std::span<const std::complex<double>> psi2, double dtau,
                      double purity) {
    double p0 = hom_coincidence(psi1, psi2, dtau, 0.0, purity);
    return 1.0 - p0 / 0.5;
}

QngResult qng_check(double p_s, double p_c) {
    if (!(p_s >= 0.0) || !(p_c >= 0.0) || p_c > p_s || p_s > 1.0)
        throw config_error("qng_check: need 0 <= P_c <= P_s <= 1");
    QngResult out;
    out.margin = p_s * p_s * p_s / 3.0 - p_c;
    out.quantum_non_gaussian = p_c < p_s * p_s * p_s / 3.0;
    return out;
}

void write_tag_stream(std::ostream& os, const TagStream& tags) {
    os << "# fwm-tagstream v1\n";
    os << "# seed " << tags.seed << "\n";
    os << "# config_hash " << std::hex << tags.config_hash << std::dec << "\n";
    os << "# duration_ps " << tags.duration_ps << "\n";
    for (const TagRecord& r : tags.records)
        os << static_cast<unsigned>(r.channel) << ' ' << r.t_ps << "\n";
}

TagStream read_tag_stream(std::istream& is) {
    TagStream out;
    std::string line;
    bool header_seen = false;
    std::uint64_t prev = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "fwm-tagstream") {
                header_seen = true;
            } else if (key == "seed") {
                ls >> out.seed;
            } else if (key == "config_hash") {
                ls >> std::hex >> out.config_hash >> std::dec;
            } else if (key == "duration_ps") {
                ls >> out.duration_ps;
            }
            continue;
        }
        std::istringstream ls(line);
        unsigned ch;
        std::uint64_t t;
        if (!(ls >> ch >> t) || ch > 2)
            throw config_error("malformed tag-stream record: " + line);
        if (t < prev)
            throw config_error("tag-stream timestamps not time-ordered");
        if (t > out.duration_ps && out.duration_ps > 0)
            throw config_error("tag-stream timestamp beyond duration");
        prev = t;
        out.records.push_back({static_cast<std::uint8_t>(ch), t});
    }
    if (!header_seen)
        throw config_error("missing fwm-tagstream header");
    return out;
}

std::string tag_stream_to_string(const TagStream& tags) {
    std::ostringstream os;
    write_tag_stream(os, tags);
    return os.str();
}

}  // namespace fwm
