#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "fwm/errors.hpp"
#include "fwm/photon_stats.hpp"

using namespace fwm;
using cd = std::complex<double>;

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

// synthetic wavepacket: asymmetric one-sided exponential rise/decay
BiphotonWaveform synthetic_waveform(double peak_tau = 1e-9,
                                    double decay = 0.8e-9, int n = 16384,
                                    double dtau = 2e-12) {
    BiphotonWaveform wf;
    wf.dtau = dtau;
    wf.tau.resize(n);
    wf.psi.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = (i - n / 2) * dtau;
        wf.tau[i] = t;
        double x = t - peak_tau;
        double env = x < 0.0 ? std::exp(x / 60e-12) : std::exp(-x / decay);
        wf.psi[i] = std::sqrt(env);
    }
    return wf;
}

BiphotonWaveform delta_waveform(double at, int n = 8192, double dtau = 2e-12) {
    BiphotonWaveform wf;
    wf.dtau = dtau;
    wf.tau.resize(n);
    wf.psi.assign(n, cd{0.0, 0.0});
    for (int i = 0; i < n; ++i) wf.tau[i] = (i - n / 2) * dtau;
    int idx = static_cast<int>(std::lround(at / dtau)) + n / 2;
    wf.psi[idx] = 1.0;
    return wf;
}

SourceFigures synthetic_figures(double rate, double n_s, double n_i) {
    SourceFigures f;
    f.defined = true;
    f.pair_rate = rate;
    f.singles_s = n_s;
    f.singles_i = n_i;
    f.eta = n_i > 0.0 ? rate / n_i : 0.0;
    return f;
}
}  // namespace

TEST_SUITE_BEGIN("photon_stats");

TEST_CASE("tag generation is seed-deterministic") {
    BiphotonWaveform wf = synthetic_waveform();
    SourceFigures fig = synthetic_figures(2e3, 2e4, 3e4);
    TagStream a = generate_tags(fig, wf, {}, 590e-12, 2.0, 99);
    TagStream b = generate_tags(fig, wf, {}, 590e-12, 2.0, 99);
    CHECK(tag_stream_to_string(a) == tag_stream_to_string(b));
    TagStream c = generate_tags(fig, wf, {}, 590e-12, 2.0, 100);
    CHECK(tag_stream_to_string(a) != tag_stream_to_string(c));
    // expected channel counts within 5 sigma of duration x rate
    std::size_t n_idler = 0;
    for (const TagRecord& r : a.records)
        if (r.channel == 0) ++n_idler;
    double expect = 3e4 * 2.0;
    CHECK(std::abs(static_cast<double>(n_idler) - expect) <
          5.0 * std::sqrt(expect));
    for (std::size_t i = 1; i < a.records.size(); ++i)
        CHECK(a.records[i].t_ps >= a.records[i - 1].t_ps);
}

TEST_CASE("independent streams give a flat cross-correlation") {
    BiphotonWaveform wf = synthetic_waveform();
    SourceFigures fig = synthetic_figures(0.0, 4e4, 4e4);
    TagStream tags = generate_tags(fig, wf, {}, 0.0, 20.0, 5);
    CorrelationHistogram h =
        estimate_g2(tags, mask(Channel::idler), kSignalBoth, 1e-9, 100e-9);
    std::vector<double> g = h.normalized();
    double sigma = 1.0 / std::sqrt(h.baseline);
    for (double v : g) CHECK(std::abs(v - 1.0) < 5.0 * sigma);
}

TEST_CASE("pure pair source") {
    const double r = 5e3;
    BiphotonWaveform wf = delta_waveform(1e-9);
    SourceFigures fig = synthetic_figures(r, r, r);

    SUBCASE("deterministic delay lands in a single bin") {
        TagStream tags = generate_tags(fig, wf, {}, 0.0, 10.0, 21);
        CorrelationHistogram h = estimate_g2(tags, mask(Channel::idler),
                                             kSignalBoth, 100e-12, 5e-9);
        std::uint64_t total = 0, peak = 0;
        std::size_t ipk = 0;
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            total += h.counts[i];
            if (h.counts[i] > peak) { peak = h.counts[i]; ipk = i; }
        }
        // all true pairs in one bin; a handful of cross-pair accidentals may
        // land elsewhere
        CHECK(static_cast<double>(peak) > 0.99 * static_cast<double>(total));
        CHECK(h.bin_center(ipk) == doctest::Approx(1e-9).epsilon(0.1));
    }

    SUBCASE("every herald has a partner") {
        TagStream tags = generate_tags(fig, wf, {}, 0.0, 50.0, 22);
        PairRateEstimate pr = estimate_pair_rate(tags);
        CHECK(pr.eta > 0.99);
        CHECK(pr.eta < 1.01);
        CHECK(std::abs(pr.pair_rate - r) < 5.0 * pr.sigma_pair_rate);
    }

    SUBCASE("never two signals per herald") {
        // smooth envelope so the peak-anchored window catches the partners
        BiphotonWaveform smooth = synthetic_waveform();
        TagStream tags = generate_tags(fig, smooth, {}, 0.0, 50.0, 23);
        HeraldedStats st = conditional_autocorrelation(tags, 2.5e-9);
        CHECK(st.g_c == 0.0);
        CHECK(st.p_c == 0.0);
        // partner capture limited by the window and the pre-peak rise mass
        CHECK(st.p_s > 0.8);
    }
}

TEST_CASE("inconsistent rates are rejected") {
    BiphotonWaveform wf = synthetic_waveform();
    SourceFigures fig = synthetic_figures(5e3, 2e3, 6e3);  // R > N_s
    CHECK_THROWS_AS(generate_tags(fig, wf, {}, 0.0, 1.0, 1), numeric_error);
    SourceFigures undef;
    CHECK_THROWS_AS(generate_tags(undef, wf, {}, 0.0, 1.0, 1), numeric_error);
}

TEST_CASE("estimator guards") {
    BiphotonWaveform wf = synthetic_waveform();
    SourceFigures fig = synthetic_figures(1e3, 2e3, 2e3);
    TagStream tags = generate_tags(fig, wf, {}, 0.0, 1.0, 3);
    CHECK_THROWS_AS(estimate_g2(tags, mask(Channel::idler), kSignalBoth,
                                -1.0, 1e-9),
                    config_error);
    TagStream empty;
    empty.duration_ps = 1000000;
    CHECK_THROWS_AS(estimate_g2(empty, mask(Channel::idler), kSignalBoth,
                                1e-10, 1e-9),
                    numeric_error);
    CHECK_THROWS_AS(conditional_autocorrelation(empty, 1e-9), numeric_error);
}

TEST_CASE("heralded fraction grows with the window and saturates") {
    BiphotonWaveform wf = synthetic_waveform();
    const double r = 20e3;
    SourceFigures fig = synthetic_figures(r, 1.2 * r, 1.5 * r);
    TagStream tags = generate_tags(fig, wf, {}, 300e-12, 40.0, 17);
    std::vector<double> windows = {0.2e-9, 0.5e-9, 1e-9, 2e-9, 3e-9, 4e-9};
    auto ec = heralded_fraction(tags, windows);
    for (std::size_t i = 1; i < ec.size(); ++i)
        CHECK(ec[i].second >= ec[i - 1].second);
    CHECK(ec.back().second == doctest::Approx(1.0).epsilon(0.02));
    CHECK(ec.front().second < 0.9);
}

TEST_CASE("statistics are invariant under a global time shift") {
    BiphotonWaveform wf = synthetic_waveform();
    SourceFigures fig = synthetic_figures(8e3, 2e4, 3e4);
    TagStream tags = generate_tags(fig, wf, {}, 590e-12, 5.0, 31);
    HeraldedStats a = conditional_autocorrelation(tags, 2.5e-9);
    TagStream shifted = tags;
    shifted.duration_ps += 2000000000;  // +2 ms headroom
    for (TagRecord& r : shifted.records) r.t_ps += 1000000000;
    HeraldedStats b = conditional_autocorrelation(shifted, 2.5e-9);
    CHECK(a.g_c == b.g_c);
    CHECK(a.p_s == b.p_s);
    CHECK(a.n_is1 == b.n_is1);
}

TEST_CASE("cauchy-schwarz ratio") {
    CHECK(cauchy_schwarz_ratio(709.0) ==
          doctest::Approx(709.0 * 709.0 / 4.0));
    CHECK(cauchy_schwarz_ratio(709.0) > 1e5);
    CHECK(cauchy_schwarz_ratio(2.0) == doctest::Approx(1.0));
    CHECK(cauchy_schwarz_ratio(1.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(cauchy_schwarz_ratio(0.5), config_error);
}

TEST_CASE("temporal likeness") {
    std::vector<double> g1(1000), g2(1000), g3(1000, 0.0);
    for (int i = 0; i < 1000; ++i) {
        double t = (i - 500) * 4e-12;
        g1[i] = std::exp(-t * t / (2.0 * 400e-24));
        g2[i] = g1[i] * (1.0 + 0.05 * std::sin(i * 0.02));  // 5% asymmetry
        if (i < 300) g3[i] = 1.0;  // disjoint from a shifted copy
    }
    CHECK(std::abs(temporal_likeness(g1, g1) - 1.0) < 1e-12);
    CHECK(temporal_likeness(g1, g2) > 0.99);
    std::vector<double> g4(1000, 0.0);
    for (int i = 700; i < 1000; ++i) g4[i] = 1.0;
    CHECK(temporal_likeness(g3, g4) == 0.0);
    CHECK_THROWS_AS(temporal_likeness(g3, std::vector<double>(1000, 0.0)),
                    config_error);
    CHECK_THROWS_AS(temporal_likeness(g1, std::vector<double>(7, 1.0)),
                    config_error);
}

TEST_CASE("hong-ou-mandel interference") {
    const int n = 4096;
    const double dtau = 4e-12;
    std::vector<cd> psi1(n), psi2(n);
    for (int i = 0; i < n; ++i) {
        double t = (i - n / 2) * dtau;
        double env = std::exp(-t * t / (2.0 * 9e-20));
        psi1[i] = env;
        psi2[i] = env;
    }

    SUBCASE("perfect bunching for identical pure states") {
        CHECK(hom_coincidence(psi1, psi2, dtau, 0.0, 1.0) == 0.0);
        CHECK(hom_visibility(psi1, psi1, dtau, 1.0) == 1.0);
    }

    SUBCASE("distinguishable limit") {
        CHECK(hom_coincidence(psi1, psi2, dtau, 5e-9, 1.0) ==
              doctest::Approx(0.5).epsilon(1e-9));
    }

    SUBCASE("purity bounds the visibility") {
        double v = hom_visibility(psi1, psi2, dtau, 0.8);
        CHECK(std::abs(v - 0.8) < 1e-12);
    }

    SUBCASE("dip is symmetric for real envelopes") {
        HomScan scan = hom_scan(psi1, psi2, dtau, 2e-9, 41, 1.0);
        for (int i = 0; i < 41; ++i) {
            CHECK(scan.probabilities[i] ==
                  doctest::Approx(scan.probabilities[40 - i]).epsilon(1e-12));
            CHECK(scan.probabilities[i] <= 0.5 + 1e-12);
        }
    }

    SUBCASE("invalid purity") {
        CHECK_THROWS_AS(hom_coincidence(psi1, psi2, dtau, 0.0, 0.0),
                        config_error);
        CHECK_THROWS_AS(hom_coincidence(psi1, psi2, dtau, 0.0, 1.2),
                        config_error);
    }
}

TEST_CASE("quantum non-gaussian criterion") {
    QngResult a = qng_check(0.09, 2.5e-5);
    CHECK(a.quantum_non_gaussian);
    CHECK(a.margin == doctest::Approx(0.09 * 0.09 * 0.09 / 3.0 - 2.5e-5));
    QngResult b = qng_check(0.09, 1.6e-4);
    CHECK(b.quantum_non_gaussian);
    CHECK(b.margin == doctest::Approx(8.3e-5).epsilon(2e-3));
    double ps = 0.2;
    QngResult c = qng_check(ps, ps * ps * ps / 3.0);
    CHECK_FALSE(c.quantum_non_gaussian);  // strict inequality at the boundary
    CHECK_THROWS_AS(qng_check(0.1, 0.2), config_error);
    CHECK_THROWS_AS(qng_check(-0.1, 0.0), config_error);
}

TEST_CASE("tag stream file format") {
    BiphotonWaveform wf = synthetic_waveform();
    SourceFigures fig = synthetic_figures(3e3, 8e3, 9e3);
    TagStream tags = generate_tags(fig, wf, {}, 590e-12, 1.0, 77, 0xabcdef12345678ull);

    SUBCASE("bit-exact round trip") {
        std::string text = tag_stream_to_string(tags);
        std::istringstream in(text);
        TagStream back = read_tag_stream(in);
        CHECK(back.seed == tags.seed);
        CHECK(back.config_hash == tags.config_hash);
        CHECK(back.duration_ps == tags.duration_ps);
        CHECK(back.records.size() == tags.records.size());
        CHECK(tag_stream_to_string(back) == text);
    }

    SUBCASE("reader rejects malformed input") {
        std::istringstream bad1("0 100\n");
        CHECK_THROWS_AS(read_tag_stream(bad1), config_error);  // no header
        std::istringstream bad2(
            "# fwm-tagstream v1\n# duration_ps 1000\n7 100\n");
        CHECK_THROWS_AS(read_tag_stream(bad2), config_error);  // bad channel
        std::istringstream bad3(
            "# fwm-tagstream v1\n# duration_ps 1000\n0 500\n0 300\n");
        CHECK_THROWS_AS(read_tag_stream(bad3), config_error);  // out of order
    }
}

TEST_SUITE_END();
