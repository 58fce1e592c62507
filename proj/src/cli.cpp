#include "fwm/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

#include "fwm/config.hpp"
#include "fwm/errors.hpp"
#include "fwm/photon_stats.hpp"
#include "fwm/susceptibility.hpp"
#include "fwm/sweep.hpp"

namespace fwm::cli {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

struct CommonOpts {
    std::string config_path;
    std::string calibration_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 0;
    bool have_seed = false;
};

ModelConfig load_model(const CommonOpts& opts) {
    ModelConfig cfg = opts.config_path.empty()
                          ? default_model_config()
                          : load_model_config(opts.config_path);
    if (opts.threads > 0) cfg.numerics.threads = opts.threads;
    if (opts.have_seed) cfg.tags.seed = opts.seed;
    return cfg;
}

Calibration load_cal(const CommonOpts& opts) {
    if (opts.calibration_path.empty()) return Calibration{};
    return load_calibration(opts.calibration_path);
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "model config file");
    cmd->add_option("--calibration", opts.calibration_path,
                    "calibration file from the calibrate subcommand");
    cmd->add_option("--out", opts.out_dir, "output directory");
    auto* seed = cmd->add_option("--seed", opts.seed, "random seed");
    seed->each([&opts](const std::string&) { opts.have_seed = true; });
    cmd->add_option("--threads", opts.threads, "worker threads");
}

int cmd_sweep(const CommonOpts& opts) {
    ModelConfig cfg = load_model(opts);
    if (opts.config_path.empty())
        throw config_error("sweep requires --config with a [sweep] section");
    SweepConfig sc = sweep_config_from_ini(
        IniDocument::parse_file(opts.config_path));
    sc.out_dir = opts.out_dir;
    if (opts.have_seed) sc.seed = opts.seed;
    Calibration cal = load_cal(opts);
    std::filesystem::create_directories(opts.out_dir);
    SweepResult res = run_sweep(cfg, sc, cal);
    auto csv_path = std::filesystem::path(opts.out_dir) / "sweep.csv";
    std::ofstream f(csv_path);
    f << res.csv;
    write_sweep_plots(res, sc, opts.out_dir);
    std::cout << "wrote " << csv_path.string() << " (" << res.rows.size()
              << " rows)\n";
    return 0;
}

int cmd_calibrate(const CommonOpts& opts, const std::string& reference) {
    ModelConfig cfg = load_model(opts);
    CalibrationReport rep = calibrate(cfg, reference);
    std::filesystem::create_directories(opts.out_dir);
    auto path = std::filesystem::path(opts.out_dir) / "calibration.cfg";
    save_calibration(path.string(), rep.calibration,
                     "fitted against " + reference);
    for (const std::string& line : rep.lines) std::cout << line << "\n";
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_waveform(const CommonOpts& opts) {
    ModelConfig cfg = load_model(opts);
    Calibration cal = load_cal(opts);
    BiphotonWaveform wf;
    SourceFigures fig = evaluate_point(cfg, cal, &wf);
    std::filesystem::create_directories(opts.out_dir);
    auto path = std::filesystem::path(opts.out_dir) / "waveform.csv";
    std::ofstream f(path);
    write_waveform_csv(f, wf);
    std::cout << "wrote " << path.string() << "\n";
    if (fig.defined) {
        std::cout << "r_cps " << fig.pair_rate << "\n"
                  << "g2max " << fig.g2si_max << "\n"
                  << "eta " << fig.eta << "\n"
                  << "fwhm_pre_ns " << fig.duration_fwhm * 1e9 << "\n"
                  << "fwhm_post_ns " << fig.duration_fwhm_jitter * 1e9 << "\n";
    } else {
        std::cout << "figures undefined (no drive)\n";
    }
    return 0;
}

int cmd_tags(const CommonOpts& opts, double duration_override) {
    ModelConfig cfg = load_model(opts);
    Calibration cal = load_cal(opts);
    if (duration_override > 0.0) cfg.tags.duration = duration_override;
    BiphotonWaveform wf;
    SourceFigures fig = evaluate_point(cfg, cal, &wf);
    if (!fig.defined) throw numeric_error("figures undefined (no drive)");
    TagStream tags =
        generate_tags(fig, wf, cfg.background, cfg.numerics.jitter_fwhm,
                      cfg.tags.duration, cfg.tags.seed, config_hash(cfg));
    std::filesystem::create_directories(opts.out_dir);
    auto path = std::filesystem::path(opts.out_dir) / "tags.txt";
    {
        std::ofstream f(path);
        write_tag_stream(f, tags);
    }

    nlohmann::json summary;
    summary["seed"] = tags.seed;
    summary["duration_s"] = cfg.tags.duration;
    summary["records"] = tags.records.size();
    summary["model"] = {{"r_cps", fig.pair_rate},
                        {"g2max", fig.g2si_max},
                        {"eta", fig.eta}};
    CorrelationHistogram h =
        estimate_g2(tags, mask(Channel::idler), kSignalBoth, 100e-12, 20e-9);
    std::vector<double> norm = h.normalized();
    double g2max_hat = 0.0;
    for (double v : norm) g2max_hat = std::max(g2max_hat, v);
    summary["g2max_hat"] = g2max_hat;
    PairRateEstimate pr = estimate_pair_rate(tags);
    summary["r_hat_cps"] = pr.pair_rate;
    summary["eta_hat"] = pr.eta;
    try {
        HeraldedStats hs = conditional_autocorrelation(tags, 2.5e-9);
        summary["g_c_hat"] = hs.g_c;
        summary["p_s_hat"] = hs.p_s;
        summary["p_c_hat"] = hs.p_c;
        QngResult qng = qng_check(hs.p_s, hs.p_c);
        summary["qng"] = qng.quantum_non_gaussian;
        std::vector<double> windows;
        for (int i = 1; i <= 16; ++i) windows.push_back(0.25e-9 * i);
        auto ec = heralded_fraction(tags, windows);
        nlohmann::json jc = nlohmann::json::array();
        for (auto& [w, e] : ec) jc.push_back({{"window_ns", w * 1e9}, {"e_c", e}});
        summary["e_c_curve"] = jc;
    } catch (const numeric_error& e) {
        summary["heralded_stats_error"] = e.what();
    }
    auto spath = std::filesystem::path(opts.out_dir) / "summary.json";
    std::ofstream sf(spath);
    sf << summary.dump(2) << "\n";
    std::cout << "wrote " << path.string() << " and " << spath.string() << "\n";
    return 0;
}

int cmd_pareto(const CommonOpts& opts, const std::string& data_path) {
    ModelConfig cfg = load_model(opts);
    Calibration cal = load_cal(opts);
    auto records = load_source_comparison(data_path);
    std::optional<SourceComparisonRecord> model_point;
    try {
        SourceFigures fig = evaluate_point(cfg, cal);
        if (fig.defined) {
            SourceComparisonRecord r;
            r.reference = "model";
            r.source = "Hot vapor";
            r.rate_kcps = fig.pair_rate / 1e3;
            r.g2max = fig.g2si_max;
            r.car_derived = false;
            model_point = r;
        }
    } catch (const std::exception&) {
        // comparison plot is still useful without the model point
    }
    std::filesystem::create_directories(opts.out_dir);
    auto csv_path = std::filesystem::path(opts.out_dir) / "pareto.csv";
    std::ofstream f(csv_path);
    pareto_report(records, model_point, f,
                  (std::filesystem::path(opts.out_dir) / "pareto.svg").string());
    std::cout << "wrote " << csv_path.string() << "\n";
    return 0;
}

int cmd_check(const CommonOpts& opts) {
    ModelConfig cfg = load_model(opts);
    cfg.numerics.freq_samples = std::min(cfg.numerics.freq_samples, 1 << 15);
    cfg.numerics.freq_span_ghz = std::min(cfg.numerics.freq_span_ghz, 200.0);
    int failures = 0;
    auto report = [&](const std::string& name, bool ok,
                      const std::string& detail = "") {
        std::cout << (ok ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << "\n";
        if (!ok) ++failures;
    };

    {
        VelocityGrid g = build_velocity_grid(cfg.ensemble, 64);
        double wsum = 0.0;
        for (double w : g.weights) wsum += w;
        report("gauss-hermite weights sum to 1", std::abs(wsum - 1.0) < 1e-12);
        VelocityGrid g16 = build_velocity_grid(cfg.ensemble, 16);
        double m2 = 0.0;
        for (std::size_t i = 0; i < g16.size(); ++i)
            m2 += g16.weights[i] * g16.nodes[i] * g16.nodes[i];
        double vt2 = g16.v_thermal * g16.v_thermal;
        report("gauss-hermite second moment", std::abs(m2 / vt2 - 1.0) < 1e-9);
    }
    {
        std::mt19937_64 rng(7);
        bool ok = true;
        for (int i = 0; i < 32; ++i) {
            double v = -600.0 + 1200.0 * (rng() >> 11) * 0x1.0p-53;
            ComplexRates r = complex_rates(v, cfg.ensemble, cfg.drive,
                                           cfg.drive.k_s_central(),
                                           cfg.drive.k_i_central());
            ok = ok && std::abs(r.g21.real() - cfg.ensemble.gamma_e) == 0.0 &&
                 std::abs(r.g41.real() - cfg.ensemble.gamma_d) == 0.0;
        }
        report("complex rates real parts velocity-independent", ok);
    }
    {
        bool ok = true;
        double worst = 0.0;
        std::mt19937_64 rng(11);
        auto uni = [&] { return (rng() >> 11) * 0x1.0p-53; };
        for (int i = 0; i < 5; ++i) {
            DriveConfig d = cfg.drive;
            d.omega_p = two_pi * 20e6 * uni();
            d.omega_c = two_pi * 30e6 * uni();
            d.delta_p = two_pi * 2e9 * (uni() - 0.5);
            d.delta_c = two_pi * 2e9 * (uni() - 0.5);
            double v = 500.0 * (uni() - 0.5);
            DensityMatrix fast = solve_three_level(v, cfg.ensemble, d);
            DensityMatrix oracle =
                liouvillian_null_space(v, cfg.ensemble, d, 3);
            double diff = (fast.rho - oracle.rho).cwiseAbs().maxCoeff();
            worst = std::max(worst, diff);
            ok = ok && diff < 1e-10;
        }
        report("steady state matches Liouvillian kernel", ok,
               "max diff " + std::to_string(worst));
    }
    {
        DriveConfig d = cfg.drive;
        d.omega_p = two_pi * 1e3;
        VelocityGrid g = default_velocity_grid(cfg.ensemble, d, 0.5);
        bool ok = true;
        double worst = 0.0;
        for (double mhz : {-40.0, -10.0, 0.0, 10.0, 40.0}) {
            auto full = chi3(two_pi * mhz * 1e6, cfg.ensemble, d, g);
            auto weak = chi3_weak_pump(two_pi * mhz * 1e6, cfg.ensemble, d, g);
            double rel = std::abs(full - weak) / std::abs(weak);
            worst = std::max(worst, rel);
            ok = ok && rel < 1e-6;
        }
        report("chi3 matches weak-pump oracle", ok,
               "max rel " + std::to_string(worst));
    }
    {
        bool ok = true;
        std::string detail;
        try {
            evaluate_point(cfg, Calibration{});  // Parseval checked inside
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        report("waveform build (Parseval, span checks)", ok, detail);
    }
    {
        ModelConfig c = cfg;
        c.tags.duration = 0.05;
        BiphotonWaveform wf;
        SourceFigures fig = evaluate_point(c, Calibration{.c_g = 1.0,
                                                          .c_r = 1e-2,
                                                          .c_eta = 1e-2},
                                           &wf);
        TagStream t1 = generate_tags(fig, wf, c.background,
                                     c.numerics.jitter_fwhm, c.tags.duration,
                                     42, 0);
        TagStream t2 = generate_tags(fig, wf, c.background,
                                     c.numerics.jitter_fwhm, c.tags.duration,
                                     42, 0);
        report("tag generation deterministic",
               tag_stream_to_string(t1) == tag_stream_to_string(t2));
    }
    return failures == 0 ? 0 : 3;
}
}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Four-wave-mixing bi-photon source simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string reference_csv;
    std::string data_path = "data/table_s1.csv";
    double duration_override = 0.0;

    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    add_common(sweep, opts);
    CLI::App* calib = app.add_subcommand(
        "calibrate", "fit the g2/R/eta rescaling factors to a reference CSV");
    add_common(calib, opts);
    calib->add_option("--reference", reference_csv, "reference CSV")
        ->required();
    CLI::App* wave = app.add_subcommand("waveform",
                                        "compute the bi-photon waveform");
    add_common(wave, opts);
    CLI::App* tags = app.add_subcommand(
        "tags", "simulate detector time tags and run the estimators");
    add_common(tags, opts);
    tags->add_option("--duration", duration_override, "simulated seconds");
    CLI::App* pareto = app.add_subcommand(
        "pareto", "source-comparison scatter from the bundled dataset");
    add_common(pareto, opts);
    pareto->add_option("--data", data_path, "comparison dataset CSV");
    CLI::App* check = app.add_subcommand("check", "run the invariant suite");
    add_common(check, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sweep->parsed()) return cmd_sweep(opts);
        if (calib->parsed()) return cmd_calibrate(opts, reference_csv);
        if (wave->parsed()) return cmd_waveform(opts);
        if (tags->parsed()) return cmd_tags(opts, duration_override);
        if (pareto->parsed()) return cmd_pareto(opts, data_path);
        if (check->parsed()) return cmd_check(opts);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace fwm::cli
