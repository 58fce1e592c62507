#include "fwm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "fwm/errors.hpp"
#include "fwm/svg.hpp"

namespace fwm {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

VelocityGrid make_grid(const ModelConfig& cfg, double scale) {
    if (cfg.numerics.velocity_order > 0) {
        int order = std::max(
            257, static_cast<int>(cfg.numerics.velocity_order * scale)) | 1;
        return build_velocity_grid_dense(cfg.ensemble, order,
                                         cfg.numerics.velocity_span_vt);
    }
    return default_velocity_grid(cfg.ensemble, cfg.drive, scale);
}
}  // namespace

std::vector<double> SweepAxis::values() const {
    std::vector<double> out;
    out.reserve(points);
    for (int i = 0; i < points; ++i) {
        double u = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        if (log_scale)
            out.push_back(min * std::pow(max / min, u));
        else
            out.push_back(min + (max - min) * u);
    }
    return out;
}

const std::vector<std::string>& valid_sweep_parameters() {
    static const std::vector<std::string> names = {
        "od", "omega_p_mhz", "omega_c_mhz", "delta_p_mhz", "delta_c_mhz",
        "temperature_k"};
    return names;
}

void apply_parameter(ModelConfig& cfg, const std::string& name, double value) {
    if (name == "od") cfg.ensemble.optical_depth = value;
    else if (name == "omega_p_mhz") cfg.drive.omega_p = two_pi * 1e6 * value;
    else if (name == "omega_c_mhz") cfg.drive.omega_c = two_pi * 1e6 * value;
    else if (name == "delta_p_mhz") cfg.drive.delta_p = two_pi * 1e6 * value;
    else if (name == "delta_c_mhz") cfg.drive.delta_c = two_pi * 1e6 * value;
    else if (name == "temperature_k") cfg.ensemble.temperature = value;
    else {
        std::ostringstream os;
        os << "unknown sweep parameter '" << name << "'; valid names:";
        for (const auto& n : valid_sweep_parameters()) os << ' ' << n;
        throw config_error(os.str());
    }
}

SweepConfig sweep_config_from_ini(const IniDocument& ini) {
    if (!ini.has_section("sweep"))
        throw config_error("config has no [sweep] section");
    SweepConfig sc;
    for (const std::string& axis_key : {"axis1", "axis2"}) {
        auto spec = ini.get("sweep", axis_key);
        if (!spec) continue;
        std::vector<std::string> parts = split_csv_line(*spec);
        if (parts.size() != 5)
            throw config_error(
                "sweep axis must be name,min,max,points,linear|log: " + *spec);
        SweepAxis ax;
        ax.name = parts[0];
        {
            ModelConfig probe = default_model_config();
            apply_parameter(probe, ax.name, 1.0);  // validates the name
        }
        ax.min = std::stod(parts[1]);
        ax.max = std::stod(parts[2]);
        ax.points = std::stoi(parts[3]);
        if (parts[4] == "log") ax.log_scale = true;
        else if (parts[4] != "linear")
            throw config_error("sweep axis scale must be linear or log");
        if (!(ax.min < ax.max))
            throw config_error("sweep axis bounds must satisfy min < max");
        if (ax.points < 2) throw config_error("sweep axis needs >= 2 points");
        if (ax.log_scale && !(ax.min > 0.0))
            throw config_error("log axis requires positive bounds");
        sc.axes.push_back(ax);
    }
    if (sc.axes.empty()) throw config_error("sweep needs at least one axis");

    std::string outputs = ini.get_string("sweep", "outputs", "r,g2max,eta,fwhm");
    for (const std::string& o : split_csv_line(outputs)) {
        if (o != "r" && o != "g2max" && o != "eta" && o != "fwhm" &&
            o != "waveform" && o != "tags")
            throw config_error("unknown sweep output '" + o +
                               "'; valid: r g2max eta fwhm waveform tags");
        sc.outputs.push_back(o);
    }
    sc.constant_r_target =
        1e3 * ini.get_double("sweep", "constant_r_kcps", 0.0);
    sc.seed = static_cast<std::uint64_t>(ini.get_double("sweep", "seed", 1.0));
    return sc;
}

double retuned_delta_c(const ModelConfig& cfg) {
    if (cfg.drive.omega_p == 0.0 || cfg.drive.omega_c == 0.0)
        return cfg.drive.delta_c;
    VelocityGrid grid = make_grid(cfg, 0.2);
    auto merit = [&](double shift) {
        DriveConfig d = cfg.drive;
        d.delta_c += shift;
        std::complex<double> bar{};
        for (std::size_t j = 0; j < grid.size(); ++j)
            bar += grid.weights[j] *
                   solve_three_level(grid.nodes[j], cfg.ensemble, d).rho41();
        return std::abs(bar);
    };
    const double half_span = two_pi * 4e6;
    double a = -half_span, b = half_span;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = merit(c1), f2 = merit(c2);
    for (int i = 0; i < 28; ++i) {
        if (f1 < f2) {
            a = c1; c1 = c2; f1 = f2;
            c2 = a + gr * (b - a); f2 = merit(c2);
        } else {
            b = c2; c2 = c1; f2 = f1;
            c1 = b - gr * (b - a); f1 = merit(c1);
        }
    }
    return cfg.drive.delta_c + 0.5 * (a + b);
}

SourceFigures evaluate_point(const ModelConfig& cfg, const Calibration& cal,
                             BiphotonWaveform* waveform_out) {
    ModelConfig c = cfg;
    c.ensemble.validate();
    c.drive.validate();
    if (c.retune_two_photon) c.drive.delta_c = retuned_delta_c(c);
    VelocityGrid vgrid = make_grid(c, 1.0);
    FrequencyGrid fgrid = FrequencyGrid::make(
        c.drive, two_pi * 1e9 * c.numerics.freq_span_ghz,
        c.numerics.freq_samples);
    BiphotonWaveform wf = biphoton_wavefunction(fgrid, c.ensemble, c.drive,
                                                vgrid, c.numerics.threads);
    SourceFigures fig = source_figures(wf, wf.params.p22, wf.params.p44,
                                       c.ensemble, cal, c.numerics.jitter_fwhm);
    if (waveform_out) *waveform_out = std::move(wf);
    return fig;
}

double solve_omega_p_for_rate(const ModelConfig& cfg, const Calibration& cal,
                              double target_rate, double tol_rel) {
    if (!(target_rate > 0.0))
        throw config_error("constant-R target must be > 0");
    auto rate_at = [&](double omega_p) {
        ModelConfig c = cfg;
        c.drive.omega_p = omega_p;
        return evaluate_point(c, cal).pair_rate;
    };
    double lo = two_pi * 0.02e6, hi = two_pi * 60e6;
    double r_lo = rate_at(lo);
    if (r_lo > target_rate) {
        std::ostringstream os;
        os << "constant-R: rate " << r_lo << " at the lower pump bound already "
           << "exceeds target " << target_rate;
        throw numeric_error(os.str());
    }
    double r_hi = rate_at(hi);
    if (r_hi < target_rate) {
        std::ostringstream os;
        os << "constant-R: target " << target_rate
           << " counts/s unreachable (ceiling " << r_hi << " at the pump bound)";
        throw numeric_error(os.str());
    }
    double mid = 0.0;
    for (int i = 0; i < 60; ++i) {
        mid = 0.5 * (lo + hi);
        double r = rate_at(mid);
        if (std::abs(r - target_rate) <= tol_rel * target_rate) return mid;
        if (r < target_rate) lo = mid;
        else hi = mid;
    }
    return mid;
}

SweepResult run_sweep(const ModelConfig& model, const SweepConfig& sweep,
                      const Calibration& cal) {
    if (sweep.axes.empty() || sweep.axes.size() > 2)
        throw config_error("sweep needs 1 or 2 axes");
    const bool constant_r = sweep.constant_r_target > 0.0;
    if (constant_r)
        for (const SweepAxis& ax : sweep.axes)
            if (ax.name == "omega_p_mhz")
                throw config_error(
                    "constant-R mode conflicts with an omega_p_mhz axis");

    auto has_output = [&](const std::string& o) {
        return std::find(sweep.outputs.begin(), sweep.outputs.end(), o) !=
               sweep.outputs.end();
    };
    const bool want_files = has_output("waveform") || has_output("tags");
    if (want_files && sweep.out_dir.empty())
        throw config_error("waveform/tags sweep outputs need an output dir");

    std::vector<std::vector<double>> axis_values;
    std::size_t total = 1;
    for (const SweepAxis& ax : sweep.axes) {
        axis_values.push_back(ax.values());
        total *= axis_values.back().size();
    }

    SweepResult res;
    for (const SweepAxis& ax : sweep.axes) res.columns.push_back(ax.name);
    if (has_output("r")) res.columns.push_back("r_cps");
    if (has_output("g2max")) res.columns.push_back("g2max");
    if (has_output("eta")) res.columns.push_back("eta");
    if (has_output("fwhm")) {
        res.columns.push_back("fwhm_pre_ns");
        res.columns.push_back("fwhm_post_ns");
    }
    if (constant_r) res.columns.push_back("omega_p_mhz_solved");
    res.columns.push_back("error");

    res.rows.assign(total, {});
    std::atomic<std::size_t> next{0};

    auto run_point = [&](std::size_t idx) {
        std::vector<double> coords(sweep.axes.size());
        std::size_t rem = idx;
        for (std::size_t a = sweep.axes.size(); a-- > 0;) {
            coords[a] = axis_values[a][rem % axis_values[a].size()];
            rem /= axis_values[a].size();
        }
        std::vector<std::string> row;
        for (double c : coords) row.push_back(fmt_g(c));
        std::string error;
        ModelConfig cfg = model;
        try {
            for (std::size_t a = 0; a < sweep.axes.size(); ++a)
                apply_parameter(cfg, sweep.axes[a].name, coords[a]);
            double solved_omega_p = 0.0;
            if (constant_r) {
                solved_omega_p =
                    solve_omega_p_for_rate(cfg, cal, sweep.constant_r_target);
                cfg.drive.omega_p = solved_omega_p;
            }
            BiphotonWaveform wf;
            SourceFigures fig = evaluate_point(cfg, cal, &wf);
            if (!fig.defined) throw numeric_error("figures undefined (no drive)");
            if (constant_r &&
                std::abs(fig.pair_rate - sweep.constant_r_target) >
                    0.01 * sweep.constant_r_target)
                throw numeric_error("constant-R misses target by >1%");
            if (has_output("r")) row.push_back(fmt_g(fig.pair_rate));
            if (has_output("g2max")) row.push_back(fmt_g(fig.g2si_max));
            if (has_output("eta")) row.push_back(fmt_g(fig.eta));
            if (has_output("fwhm")) {
                row.push_back(fmt_g(fig.duration_fwhm * 1e9));
                row.push_back(fmt_g(fig.duration_fwhm_jitter * 1e9));
            }
            if (constant_r)
                row.push_back(fmt_g(solved_omega_p / (two_pi * 1e6)));
            if (has_output("waveform")) {
                std::ofstream f(std::filesystem::path(sweep.out_dir) /
                                ("waveform_" + std::to_string(idx) + ".csv"));
                write_waveform_csv(f, wf);
            }
            if (has_output("tags")) {
                TagStream tags = generate_tags(
                    fig, wf, model.background, cfg.numerics.jitter_fwhm,
                    cfg.tags.duration, sweep.seed + idx, config_hash(cfg));
                std::ofstream f(std::filesystem::path(sweep.out_dir) /
                                ("tags_" + std::to_string(idx) + ".txt"));
                write_tag_stream(f, tags);
            }
        } catch (const std::exception& e) {
            error = e.what();
            std::replace(error.begin(), error.end(), ',', ';');
            std::replace(error.begin(), error.end(), '\n', ' ');
            row.resize(res.columns.size() - 1, "");
        }
        row.push_back(error);
        res.rows[idx] = std::move(row);
    };

    int nthreads = std::max(1, model.numerics.threads);
    if (nthreads == 1) {
        for (std::size_t i = 0; i < total; ++i) run_point(i);
    } else {
        // Workers pull indices; results land in preallocated slots, so the
        // output is independent of scheduling.
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < total;
                     i = next.fetch_add(1))
                    run_point(i);
            });
        for (auto& th : pool) th.join();
    }

    std::ostringstream csv;
    csv << "# fwm sweep v1\n";
    csv << "# config_hash " << std::hex << config_hash(model) << std::dec
        << "\n";
    csv << "# seed " << sweep.seed << "\n";
    if (constant_r)
        csv << "# constant_r_cps " << fmt_g(sweep.constant_r_target) << "\n";
    for (std::size_t i = 0; i < res.columns.size(); ++i)
        csv << res.columns[i] << (i + 1 < res.columns.size() ? ',' : '\n');
    for (const auto& row : res.rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            csv << row[i] << (i + 1 < row.size() ? ',' : '\n');
    res.csv = csv.str();
    return res;
}

void write_sweep_plots(const SweepResult& result, const SweepConfig& sweep,
                       const std::string& out_dir) {
    auto col_index = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < result.columns.size(); ++i)
            if (result.columns[i] == name) return static_cast<int>(i);
        return -1;
    };
    auto column = [&](int idx) {
        std::vector<double> v;
        for (const auto& row : result.rows)
            if (idx >= 0 && !row[idx].empty()) v.push_back(std::stod(row[idx]));
        return v;
    };
    std::filesystem::create_directories(out_dir);
    if (sweep.axes.size() == 1) {
        std::vector<double> x = column(0);
        for (const std::string& name :
             {"r_cps", "g2max", "eta", "fwhm_pre_ns", "fwhm_post_ns"}) {
            int idx = col_index(name);
            if (idx < 0) continue;
            std::vector<double> y = column(idx);
            if (y.size() != x.size() || y.empty()) continue;
            svg::Plot plot(name, sweep.axes[0].name, name);
            svg::Series s;
            s.x = x;
            s.y = y;
            s.markers = true;
            plot.add(std::move(s));
            plot.write((std::filesystem::path(out_dir) /
                        (std::string(name) + ".svg")).string());
        }
    } else {
        int ri = col_index("r_cps"), gi = col_index("g2max");
        if (ri < 0 || gi < 0) return;
        std::vector<double> r = column(ri), g = column(gi);
        if (r.empty() || r.size() != g.size()) return;
        svg::Plot plot("g2max vs rate", "r_cps", "g2max");
        plot.set_log_x(true);
        plot.set_log_y(true);
        svg::Series s;
        s.x = r;
        s.y = g;
        s.line = false;
        s.markers = true;
        plot.add(std::move(s));
        plot.write((std::filesystem::path(out_dir) / "g2max_vs_rate.svg")
                       .string());
    }
}

CalibrationReport calibrate(const ModelConfig& model,
                            const std::string& reference_csv, bool fit_g,
                            bool fit_r, bool fit_eta) {
    std::ifstream in(reference_csv);
    if (!in) throw config_error("cannot open reference CSV: " + reference_csv);
    std::string line;
    bool header_done = false;
    struct Row {
        std::string figure;
        double od, op, oc, value;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto parts = split_csv_line(line);
        if (!header_done) {
            if (parts != std::vector<std::string>{"figure", "od", "omega_p_mhz",
                                                  "omega_c_mhz", "value"})
                throw config_error(
                    "reference CSV header must be "
                    "figure,od,omega_p_mhz,omega_c_mhz,value");
            header_done = true;
            continue;
        }
        if (parts.size() != 5)
            throw config_error("bad reference CSV row: " + line);
        Row r;
        r.figure = parts[0];
        r.od = std::stod(parts[1]);
        r.op = std::stod(parts[2]);
        r.oc = std::stod(parts[3]);
        r.value = std::stod(parts[4]);
        if (r.figure != "r" && r.figure != "g2max" && r.figure != "eta")
            throw config_error("reference figure must be r, g2max or eta");
        if (!(r.value > 0.0))
            throw config_error("reference values must be > 0");
        rows.push_back(r);
    }
    if (rows.empty()) throw config_error("reference CSV has no data rows");

    CalibrationReport report;
    std::map<std::string, std::vector<double>> log_offsets;
    for (const Row& r : rows) {
        ModelConfig cfg = model;
        apply_parameter(cfg, "od", r.od);
        apply_parameter(cfg, "omega_p_mhz", r.op);
        apply_parameter(cfg, "omega_c_mhz", r.oc);
        SourceFigures fig = evaluate_point(cfg, Calibration{});
        double raw = 0.0;
        if (r.figure == "r") raw = fig.rate_raw;
        else if (r.figure == "g2max") raw = fig.g2_raw;
        else raw = fig.eta_raw;
        if (!(raw > 0.0))
            throw numeric_error("model value vanishes at a reference point");
        log_offsets[r.figure].push_back(std::log(r.value) - std::log(raw));
        std::ostringstream os;
        os << r.figure << " @ od=" << r.od << " omega_p=" << r.op
           << " omega_c=" << r.oc << ": measured " << r.value << " model "
           << raw;
        report.lines.push_back(os.str());
    }
    auto fit_one = [&](const std::string& figure, bool requested,
                       double& scalar) {
        if (!requested) return;
        auto it = log_offsets.find(figure);
        if (it == log_offsets.end()) {
            throw config_error("calibration underdetermined: no reference "
                               "rows for figure '" + figure + "'");
        }
        double mean = 0.0;
        for (double v : it->second) mean += v;
        mean /= static_cast<double>(it->second.size());
        scalar = std::exp(mean);
        double rss = 0.0;
        for (double v : it->second) rss += (v - mean) * (v - mean);
        std::ostringstream os;
        os << "fit " << figure << ": scalar " << scalar << " over "
           << it->second.size() << " rows, log-residual rms "
           << std::sqrt(rss / static_cast<double>(it->second.size()));
        report.lines.push_back(os.str());
    };
    fit_one("g2max", fit_g, report.calibration.c_g);
    fit_one("r", fit_r, report.calibration.c_r);
    fit_one("eta", fit_eta, report.calibration.c_eta);
    return report;
}

std::vector<SourceComparisonRecord> load_source_comparison(
    const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw config_error("cannot open dataset: " + csv_path);
    std::vector<SourceComparisonRecord> out;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto parts = split_csv_line(line);
        if (!header_done) {
            if (parts != std::vector<std::string>{"reference", "source",
                                                  "rate_kcps", "g2max",
                                                  "car_derived"})
                throw config_error("dataset header must be "
                                   "reference,source,rate_kcps,g2max,car_derived");
            header_done = true;
            continue;
        }
        if (parts.size() != 5)
            throw config_error("bad dataset row: " + line);
        SourceComparisonRecord r;
        r.reference = parts[0];
        r.source = parts[1];
        r.rate_kcps = std::stod(parts[2]);
        r.g2max = std::stod(parts[3]);
        r.car_derived = parts[4] == "true" || parts[4] == "1";
        if (!(r.rate_kcps > 0.0))
            throw config_error("dataset rates must be > 0");
        if (!(r.g2max >= 1.0))
            throw config_error("dataset cross-correlations must be >= 1");
        out.push_back(r);
    }
    return out;
}

void pareto_report(const std::vector<SourceComparisonRecord>& records,
                   const std::optional<SourceComparisonRecord>& model_point,
                   std::ostream& csv_out, const std::string& svg_path) {
    csv_out << "reference,source,rate_kcps,g2max,car_derived\n";
    auto write_row = [&](const SourceComparisonRecord& r) {
        csv_out << r.reference << ',' << r.source << ',' << fmt_g(r.rate_kcps)
                << ',' << fmt_g(r.g2max) << ','
                << (r.car_derived ? "true" : "false") << '\n';
    };
    for (const auto& r : records) write_row(r);
    if (model_point) write_row(*model_point);

    if (svg_path.empty()) return;
    svg::Plot plot("Heralded single-photon sources", "rate (kcps)",
                   "max cross-correlation");
    plot.set_log_x(true);
    plot.set_log_y(true);
    svg::Series direct, car, model;
    direct.color = "#1f6fb2"; direct.line = false; direct.markers = true;
    direct.label = "reported g2";
    car.color = "#d08020"; car.line = false; car.markers = true;
    car.label = "from CAR";
    model.color = "#c02030"; model.line = false; model.markers = true;
    model.label = "this model";
    for (const auto& r : records) {
        (r.car_derived ? car : direct).x.push_back(r.rate_kcps);
        (r.car_derived ? car : direct).y.push_back(r.g2max);
    }
    if (model_point) {
        model.x.push_back(model_point->rate_kcps);
        model.y.push_back(model_point->g2max);
    }
    plot.add(std::move(direct));
    plot.add(std::move(car));
    if (model_point) plot.add(std::move(model));
    plot.write(svg_path);
}

}  // namespace fwm
