#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fwm/biphoton.hpp"
#include "fwm/config.hpp"

namespace fwm {

struct SweepAxis {
    std::string name;  // od, omega_p_mhz, omega_c_mhz, delta_p_mhz, ...
    double min = 0.0;
    double max = 0.0;
    int points = 0;
    bool log_scale = false;

    std::vector<double> values() const;
};

struct SweepConfig {
    std::vector<SweepAxis> axes;         // 1 or 2
    std::vector<std::string> outputs;    // r, g2max, eta, fwhm, waveform, tags
    double constant_r_target = 0.0;      // counts/s; 0 disables the mode
    std::string out_dir;
    std::uint64_t seed = 1;
};

SweepConfig sweep_config_from_ini(const IniDocument& ini);

const std::vector<std::string>& valid_sweep_parameters();

// Apply a named sweep parameter to a model configuration.
void apply_parameter(ModelConfig& cfg, const std::string& name, double value);

// Control-detuning shift that keeps the light-shifted two-photon transition
// on resonance (maximizes |rho41| averaged over velocities).
double retuned_delta_c(const ModelConfig& cfg);

// One fully evaluated working point: builds the velocity and frequency
// grids, applies the two-photon retune when enabled, assembles the
// wavefunction and all figures of merit.
SourceFigures evaluate_point(const ModelConfig& cfg, const Calibration& cal,
                             BiphotonWaveform* waveform_out = nullptr);

// Pump Rabi frequency (rad/s) holding the calibrated pair rate at target;
// bisection on the monotone branch of R(omega_p) at fixed omega_c.
double solve_omega_p_for_rate(const ModelConfig& cfg, const Calibration& cal,
                              double target_rate, double tol_rel = 5e-3);

struct SweepResult {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::string csv;  // deterministic byte-for-byte rendering
};

SweepResult run_sweep(const ModelConfig& model, const SweepConfig& sweep,
                      const Calibration& cal);

// Render SVG plots for a finished sweep into out_dir (one per scalar output
// for 1-D sweeps, a log-log g2max-vs-rate scatter for 2-D sweeps).
void write_sweep_plots(const SweepResult& result, const SweepConfig& sweep,
                       const std::string& out_dir);

struct CalibrationReport {
    Calibration calibration;
    std::vector<std::string> lines;  // per-row residual report
};

// Least-squares fit of the requested scalars in log space against a
// reference CSV with columns figure,od,omega_p_mhz,omega_c_mhz,value.
CalibrationReport calibrate(const ModelConfig& model,
                            const std::string& reference_csv,
                            bool fit_g = true, bool fit_r = true,
                            bool fit_eta = true);

struct SourceComparisonRecord {
    std::string reference;
    std::string source;
    double rate_kcps = 0.0;
    double g2max = 0.0;
    bool car_derived = false;
};

std::vector<SourceComparisonRecord> load_source_comparison(
    const std::string& csv_path);

// Scatter of (rate, cross-correlation) with CAR-derived entries flagged,
// plus the configured model point when given.
void pareto_report(const std::vector<SourceComparisonRecord>& records,
                   const std::optional<SourceComparisonRecord>& model_point,
                   std::ostream& csv_out, const std::string& svg_path = "");

}  // namespace fwm
