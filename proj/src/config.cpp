#include "fwm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "fwm/errors.hpp"

namespace fwm {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& section, const std::string& key,
                    const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size())
            throw config_error("");
        return v;
    } catch (...) {
        throw config_error("config: [" + section + "] " + key +
                           " is not a number: '" + value + "'");
    }
}

void check_known_keys(const IniDocument& ini, const std::string& section,
                      const std::set<std::string>& known) {
    for (const std::string& k : ini.keys(section)) {
        if (!known.count(k)) {
            std::ostringstream os;
            os << "config: unknown key '" << k << "' in [" << section
               << "]; valid keys:";
            for (const auto& v : known) os << ' ' << v;
            throw config_error(os.str());
        }
    }
}
}  // namespace

IniDocument IniDocument::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

IniDocument IniDocument::parse_string(const std::string& text) {
    IniDocument doc;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config: bad section header at line " +
                                   std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            doc.sections_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: expected key = value at line " +
                               std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error("config: empty key at line " +
                               std::to_string(lineno));
        doc.sections_[section][key] = value;
    }
    return doc;
}

bool IniDocument::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::optional<std::string> IniDocument::get(const std::string& section,
                                            const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return std::nullopt;
    auto jt = it->second.find(key);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
}

double IniDocument::get_double(const std::string& section,
                               const std::string& key, double fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    return parse_double(section, key, *v);
}

std::string IniDocument::get_string(const std::string& section,
                                    const std::string& key,
                                    const std::string& fallback) const {
    auto v = get(section, key);
    return v ? *v : fallback;
}

std::vector<std::string> IniDocument::keys(const std::string& section) const {
    std::vector<std::string> out;
    auto it = sections_.find(section);
    if (it == sections_.end()) return out;
    for (const auto& [k, v] : it->second) out.push_back(k);
    return out;
}

bool IniDocument::has_section(const std::string& section) const {
    return sections_.count(section) > 0;
}

ModelConfig default_model_config() {
    ModelConfig cfg;
    cfg.drive.omega_p = two_pi * 4.6e6;
    cfg.drive.omega_c = two_pi * 11.5e6;
    cfg.drive.delta_p = two_pi * 1.0e9;
    cfg.drive.delta_c = -two_pi * 1.0e9;
    cfg.drive.lambda_p = cfg.ensemble.lambda_21;
    cfg.drive.lambda_c = cfg.ensemble.lambda_42;
    return cfg;
}

namespace {
const std::set<std::string> kEnsembleKeys = {
    "temperature_k", "length_mm", "od", "mass_kg",
    "gamma_e_hz", "gamma_d_hz",
    "dipole_21_cm", "dipole_31_cm", "dipole_42_cm", "dipole_43_cm",
    "lambda_21_nm", "lambda_42_nm",
    "signal_absorption_scale", "cascade_repump", "chi1_denominator"};
const std::set<std::string> kDriveKeys = {
    "omega_p_mhz", "omega_c_mhz", "delta_p_mhz", "delta_c_mhz",
    "retune_two_photon"};
const std::set<std::string> kNumericsKeys = {
    "velocity_order", "velocity_span_vt", "freq_samples_log2",
    "freq_span_ghz", "jitter_fwhm_ps", "threads"};
const std::set<std::string> kBackgroundKeys = {"idler_cps", "signal_cps"};
const std::set<std::string> kTagsKeys = {"duration_s", "seed"};

void apply_ensemble_section(const IniDocument& ini, const std::string& section,
                            AtomEnsemble& ens) {
    ens.temperature = ini.get_double(section, "temperature_k", ens.temperature);
    ens.length = ini.get_double(section, "length_mm", ens.length * 1e3) * 1e-3;
    ens.optical_depth = ini.get_double(section, "od", ens.optical_depth);
    ens.mass = ini.get_double(section, "mass_kg", ens.mass);
    ens.gamma_e =
        two_pi * ini.get_double(section, "gamma_e_hz", ens.gamma_e / two_pi);
    ens.gamma_d =
        two_pi * ini.get_double(section, "gamma_d_hz", ens.gamma_d / two_pi);
    ens.dipole_21 = ini.get_double(section, "dipole_21_cm", ens.dipole_21);
    ens.dipole_31 = ini.get_double(section, "dipole_31_cm", ens.dipole_31);
    ens.dipole_42 = ini.get_double(section, "dipole_42_cm", ens.dipole_42);
    ens.dipole_43 = ini.get_double(section, "dipole_43_cm", ens.dipole_43);
    ens.lambda_21 =
        ini.get_double(section, "lambda_21_nm", ens.lambda_21 * 1e9) * 1e-9;
    ens.lambda_42 =
        ini.get_double(section, "lambda_42_nm", ens.lambda_42 * 1e9) * 1e-9;
    ens.signal_absorption_scale = ini.get_double(
        section, "signal_absorption_scale", ens.signal_absorption_scale);
    std::string repump = ini.get_string(section, "cascade_repump", "ground");
    if (repump == "ground") ens.cascade_repump = CascadeRepump::ground;
    else if (repump == "p_level") ens.cascade_repump = CascadeRepump::p_level;
    else throw config_error("cascade_repump must be ground or p_level");
    std::string den = ini.get_string(section, "chi1_denominator", "gamma31");
    if (den == "gamma31") ens.chi1_denominator = Chi1Denominator::gamma31;
    else if (den == "gamma21") ens.chi1_denominator = Chi1Denominator::gamma21;
    else throw config_error("chi1_denominator must be gamma31 or gamma21");
}
}  // namespace

ModelConfig model_config_from_ini(const IniDocument& ini) {
    ModelConfig cfg = default_model_config();
    check_known_keys(ini, "ensemble", kEnsembleKeys);
    check_known_keys(ini, "drive", kDriveKeys);
    check_known_keys(ini, "numerics", kNumericsKeys);
    check_known_keys(ini, "background", kBackgroundKeys);
    check_known_keys(ini, "tags", kTagsKeys);

    apply_ensemble_section(ini, "ensemble", cfg.ensemble);
    cfg.drive.lambda_p = cfg.ensemble.lambda_21;
    cfg.drive.lambda_c = cfg.ensemble.lambda_42;

    cfg.drive.omega_p = two_pi * 1e6 * ini.get_double("drive", "omega_p_mhz",
                                                      cfg.drive.omega_p / (two_pi * 1e6));
    cfg.drive.omega_c = two_pi * 1e6 * ini.get_double("drive", "omega_c_mhz",
                                                      cfg.drive.omega_c / (two_pi * 1e6));
    cfg.drive.delta_p = two_pi * 1e6 * ini.get_double("drive", "delta_p_mhz",
                                                      cfg.drive.delta_p / (two_pi * 1e6));
    cfg.drive.delta_c = two_pi * 1e6 * ini.get_double("drive", "delta_c_mhz",
                                                      cfg.drive.delta_c / (two_pi * 1e6));
    std::string retune = ini.get_string("drive", "retune_two_photon",
                                        cfg.retune_two_photon ? "true" : "false");
    if (retune == "true") cfg.retune_two_photon = true;
    else if (retune == "false") cfg.retune_two_photon = false;
    else throw config_error("retune_two_photon must be true or false");

    cfg.numerics.velocity_order = static_cast<int>(
        ini.get_double("numerics", "velocity_order", cfg.numerics.velocity_order));
    cfg.numerics.velocity_span_vt =
        ini.get_double("numerics", "velocity_span_vt", cfg.numerics.velocity_span_vt);
    int log2n = static_cast<int>(ini.get_double("numerics", "freq_samples_log2", 17));
    if (log2n < 12 || log2n > 24)
        throw config_error("freq_samples_log2 must be in [12, 24]");
    cfg.numerics.freq_samples = 1 << log2n;
    cfg.numerics.freq_span_ghz =
        ini.get_double("numerics", "freq_span_ghz", cfg.numerics.freq_span_ghz);
    cfg.numerics.jitter_fwhm =
        ini.get_double("numerics", "jitter_fwhm_ps",
                       cfg.numerics.jitter_fwhm * 1e12) * 1e-12;
    cfg.numerics.threads = static_cast<int>(
        ini.get_double("numerics", "threads", cfg.numerics.threads));
    if (cfg.numerics.threads < 1)
        throw config_error("threads must be >= 1");

    cfg.background.idler = ini.get_double("background", "idler_cps", 0.0);
    cfg.background.signal = ini.get_double("background", "signal_cps", 0.0);
    cfg.tags.duration = ini.get_double("tags", "duration_s", cfg.tags.duration);
    cfg.tags.seed = static_cast<std::uint64_t>(
        ini.get_double("tags", "seed", static_cast<double>(cfg.tags.seed)));

    cfg.ensemble.validate();
    cfg.drive.validate();
    return cfg;
}

ModelConfig load_model_config(const std::string& path) {
    return model_config_from_ini(IniDocument::parse_file(path));
}

AtomEnsemble load_atomic_constants(const std::string& path, AtomEnsemble base) {
    IniDocument ini = IniDocument::parse_file(path);
    check_known_keys(ini, "constants", kEnsembleKeys);
    apply_ensemble_section(ini, "constants", base);
    base.validate();
    return base;
}

std::string serialize_config(const ModelConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    const AtomEnsemble& e = cfg.ensemble;
    const DriveConfig& d = cfg.drive;
    os << "[ensemble]\n"
       << "temperature_k = " << e.temperature << "\n"
       << "length_mm = " << e.length * 1e3 << "\n"
       << "od = " << e.optical_depth << "\n"
       << "mass_kg = " << e.mass << "\n"
       << "gamma_e_hz = " << e.gamma_e / two_pi << "\n"
       << "gamma_d_hz = " << e.gamma_d / two_pi << "\n"
       << "dipole_21_cm = " << e.dipole_21 << "\n"
       << "dipole_31_cm = " << e.dipole_31 << "\n"
       << "dipole_42_cm = " << e.dipole_42 << "\n"
       << "dipole_43_cm = " << e.dipole_43 << "\n"
       << "lambda_21_nm = " << e.lambda_21 * 1e9 << "\n"
       << "lambda_42_nm = " << e.lambda_42 * 1e9 << "\n"
       << "signal_absorption_scale = " << e.signal_absorption_scale << "\n"
       << "cascade_repump = "
       << (e.cascade_repump == CascadeRepump::ground ? "ground" : "p_level")
       << "\n"
       << "chi1_denominator = "
       << (e.chi1_denominator == Chi1Denominator::gamma31 ? "gamma31"
                                                          : "gamma21")
       << "\n[drive]\n"
       << "omega_p_mhz = " << d.omega_p / (two_pi * 1e6) << "\n"
       << "omega_c_mhz = " << d.omega_c / (two_pi * 1e6) << "\n"
       << "delta_p_mhz = " << d.delta_p / (two_pi * 1e6) << "\n"
       << "delta_c_mhz = " << d.delta_c / (two_pi * 1e6) << "\n"
       << "retune_two_photon = " << (cfg.retune_two_photon ? "true" : "false")
       << "\n[numerics]\n"
       << "velocity_order = " << cfg.numerics.velocity_order << "\n"
       << "velocity_span_vt = " << cfg.numerics.velocity_span_vt << "\n"
       << "freq_samples = " << cfg.numerics.freq_samples << "\n"
       << "freq_span_ghz = " << cfg.numerics.freq_span_ghz << "\n"
       << "jitter_fwhm_ps = " << cfg.numerics.jitter_fwhm * 1e12 << "\n"
       << "[background]\n"
       << "idler_cps = " << cfg.background.idler << "\n"
       << "signal_cps = " << cfg.background.signal << "\n"
       << "[tags]\n"
       << "duration_s = " << cfg.tags.duration << "\n"
       << "seed = " << cfg.tags.seed << "\n";
    return os.str();
}

std::uint64_t config_hash(const ModelConfig& cfg) {
    const std::string text = serialize_config(cfg);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Calibration load_calibration(const std::string& path) {
    IniDocument ini = IniDocument::parse_file(path);
    Calibration cal;
    cal.c_g = ini.get_double("calibration", "c_g", 1.0);
    cal.c_r = ini.get_double("calibration", "c_r", 1.0);
    cal.c_eta = ini.get_double("calibration", "c_eta", 1.0);
    if (!(cal.c_g > 0.0) || !(cal.c_r > 0.0) || !(cal.c_eta > 0.0))
        throw config_error("calibration scalars must be > 0");
    return cal;
}

void save_calibration(const std::string& path, const Calibration& cal,
                      const std::string& comment) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write calibration file: " + path);
    os.precision(17);
    if (!comment.empty()) os << "# " << comment << "\n";
    os << "[calibration]\n"
       << "c_g = " << cal.c_g << "\n"
       << "c_r = " << cal.c_r << "\n"
       << "c_eta = " << cal.c_eta << "\n";
}

}  // namespace fwm
