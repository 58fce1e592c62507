#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fwm/atom.hpp"
#include "fwm/biphoton.hpp"
#include "fwm/photon_stats.hpp"

namespace fwm {

// Parsed INI-style document: [section] blocks of key = value lines, with
// '#' comments. Section and key names are case-sensitive.
class IniDocument {
public:
    static IniDocument parse_file(const std::string& path);
    static IniDocument parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> get(const std::string& section,
                                   const std::string& key) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    std::vector<std::string> keys(const std::string& section) const;
    bool has_section(const std::string& section) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct Numerics {
    int velocity_order = 0;         // 0 = automatic from kernel widths
    double velocity_span_vt = 8.0;  // half-span in thermal velocities
    int freq_samples = 1 << 18;
    double freq_span_ghz = 800.0;   // full span of the signal detuning grid
    double jitter_fwhm = 590e-12;   // s
    int threads = 1;
};

struct TagsConfig {
    double duration = 10.0;  // s
    std::uint64_t seed = 1;
};

struct ModelConfig {
    AtomEnsemble ensemble = AtomEnsemble::rb85();
    DriveConfig drive;
    Numerics numerics;
    BackgroundRates background;
    TagsConfig tags;
    // Mirror of the experimental procedure: the control detuning is
    // adjusted at each working point to keep the (light-shifted) two-photon
    // transition on resonance, maximizing the spin-wave amplitude.
    bool retune_two_photon = true;
};

ModelConfig default_model_config();
ModelConfig load_model_config(const std::string& path);
ModelConfig model_config_from_ini(const IniDocument& ini);

// Atomic-constants file: the [constants] section of an INI document with
// provenance comments. Unknown keys are rejected.
AtomEnsemble load_atomic_constants(const std::string& path,
                                   AtomEnsemble base = AtomEnsemble::rb85());

std::string serialize_config(const ModelConfig& cfg);
std::uint64_t config_hash(const ModelConfig& cfg);  // FNV-1a over the text

// Calibration file IO ([calibration] c_g / c_r / c_eta).
Calibration load_calibration(const std::string& path);
void save_calibration(const std::string& path, const Calibration& cal,
                      const std::string& comment = "");

// Signal-absorption overlap: fraction of the OD-measurement absorbance the
// heralded signal actually experiences (hyperfine substructure is not
// resolved by the four-level model). Stored on AtomEnsemble.
}  // namespace fwm
