#include "fwm/atom.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "fwm/constants.hpp"
#include "fwm/errors.hpp"

namespace fwm {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

// Effective dipole from the channel decay rate: A = w^3 mu^2/(3 pi eps0
// hbar c^3), with a 1/sqrt(3) isotropic-polarization factor for the
// unpolarized ensemble.
double decay_matched_dipole(double channel_rate, double omega) {
    using namespace phys;
    double mu2 = 3.0 * std::numbers::pi * epsilon0 * hbar *
                 speed_of_light * speed_of_light * speed_of_light *
                 channel_rate / (omega * omega * omega);
    return std::sqrt(mu2 / 3.0);
}
}  // namespace

AtomEnsemble AtomEnsemble::rb85() {
    AtomEnsemble ens;
    ens.gamma_e = two_pi * 3.035e6;  // 2*Gamma = 2pi x 6.07 MHz (5P3/2)
    ens.gamma_d = two_pi * 0.33e6;   // 2*gamma = 2pi x 0.66 MHz (5D5/2)
    double w21 = ens.omega_21();
    double w42 = ens.omega_42();
    ens.dipole_21 = decay_matched_dipole(2.0 * ens.gamma_e, w21);
    ens.dipole_31 = ens.dipole_21;
    // |4> decays at 2*gamma_d split evenly between the two 5P levels, so
    // each channel carries gamma_d.
    ens.dipole_42 = decay_matched_dipole(ens.gamma_d, w42);
    ens.dipole_43 = ens.dipole_42;
    return ens;
}

void AtomEnsemble::validate() const {
    if (!(temperature > 0.0)) throw config_error("temperature must be > 0");
    if (!(length > 0.0)) throw config_error("length must be > 0");
    if (!(optical_depth >= 0.0)) throw config_error("optical_depth must be >= 0");
    if (!(mass > 0.0)) throw config_error("mass must be > 0");
    if (!(gamma_e > 0.0)) throw config_error("gamma_e must be > 0");
    if (!(gamma_d > 0.0)) throw config_error("gamma_d must be > 0");
    for (double mu : {dipole_21, dipole_31, dipole_42, dipole_43})
        if (!(mu >= 0.0) || !std::isfinite(mu))
            throw config_error("dipole moments must be real and >= 0");
    if (!(signal_absorption_scale > 0.0) || signal_absorption_scale > 1.0)
        throw config_error("signal_absorption_scale must be in (0, 1]");
    if (!(lambda_21 > 0.0) || !(lambda_42 > 0.0))
        throw config_error("transition wavelengths must be > 0");
}

double AtomEnsemble::omega_21() const {
    return two_pi * phys::speed_of_light / lambda_21;
}

double AtomEnsemble::omega_42() const {
    return two_pi * phys::speed_of_light / lambda_42;
}

void DriveConfig::validate() const {
    if (!(omega_p >= 0.0)) throw config_error("omega_p must be >= 0");
    if (!(omega_c >= 0.0)) throw config_error("omega_c must be >= 0");
    for (double x : {delta_p, delta_c, delta_s})
        if (!std::isfinite(x)) throw config_error("detunings must be finite");
    if (!(lambda_p > 0.0) || !(lambda_c > 0.0))
        throw config_error("wavelengths must be > 0");
}

double DriveConfig::omega_pump() const {
    return two_pi * phys::speed_of_light / lambda_p + delta_p;
}

double DriveConfig::omega_control() const {
    return two_pi * phys::speed_of_light / lambda_c + delta_c;
}

double DriveConfig::omega_s_central() const {
    // delta_s = 0 is the |1>->|3> resonance.
    return two_pi * phys::speed_of_light / lambda_p;
}

double DriveConfig::omega_i_central() const {
    return two_pi * phys::speed_of_light / lambda_c + two_photon_detuning();
}

double DriveConfig::k_pump() const { return omega_pump() / phys::speed_of_light; }
double DriveConfig::k_control() const { return omega_control() / phys::speed_of_light; }
double DriveConfig::k_s_central() const { return omega_s_central() / phys::speed_of_light; }
double DriveConfig::k_i_central() const { return omega_i_central() / phys::speed_of_light; }

double DriveConfig::field_p(const AtomEnsemble& ens) const {
    return phys::hbar * omega_p / (2.0 * ens.dipole_21);
}

double DriveConfig::field_c(const AtomEnsemble& ens) const {
    return phys::hbar * omega_c / (2.0 * ens.dipole_42);
}

double thermal_velocity(const AtomEnsemble& ens) {
    if (!(ens.temperature > 0.0))
        throw config_error("thermal_velocity: temperature must be > 0");
    return std::sqrt(phys::k_boltzmann * ens.temperature / ens.mass);
}

VelocityGrid build_velocity_grid(const AtomEnsemble& ens, int order) {
    if (order < 2) throw config_error("velocity grid order must be >= 2");
    // Golub-Welsch on the Hermite Jacobi matrix; then map x -> v = sqrt(2) vT x.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int i = 1; i < order; ++i) {
        double b = std::sqrt(i / 2.0);
        J(i - 1, i) = b;
        J(i, i - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    VelocityGrid g;
    g.v_thermal = thermal_velocity(ens);
    g.nodes.resize(order);
    g.weights.resize(order);
    double wsum = 0.0;
    for (int i = 0; i < order; ++i) {
        g.nodes[i] = std::sqrt(2.0) * g.v_thermal * es.eigenvalues()(i);
        double w = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        g.weights[i] = w;
        wsum += w;
    }
    for (double& w : g.weights) w /= wsum;
    // enforce exact symmetry about 0
    int n = order;
    for (int i = 0; i < n / 2; ++i) {
        double a = 0.5 * (g.weights[i] + g.weights[n - 1 - i]);
        g.weights[i] = a;
        g.weights[n - 1 - i] = a;
        double m = 0.5 * (g.nodes[n - 1 - i] - g.nodes[i]);
        g.nodes[i] = -m;
        g.nodes[n - 1 - i] = m;
    }
    if (n % 2 == 1) g.nodes[n / 2] = 0.0;
    return g;
}

VelocityGrid build_velocity_grid_dense(const AtomEnsemble& ens, int order,
                                       double span_vt) {
    if (order < 2) throw config_error("velocity grid order must be >= 2");
    if (!(span_vt > 0.0)) throw config_error("velocity span must be > 0");
    VelocityGrid g;
    g.v_thermal = thermal_velocity(ens);
    g.nodes.resize(order);
    g.weights.resize(order);
    double vmax = span_vt * g.v_thermal;
    double h = 2.0 * vmax / (order - 1);
    double wsum = 0.0;
    for (int i = 0; i < order; ++i) {
        double v = -vmax + i * h;
        g.nodes[i] = v;
        double w = std::exp(-v * v / (2.0 * g.v_thermal * g.v_thermal));
        g.weights[i] = w;
        wsum += w;
    }
    for (double& w : g.weights) w /= wsum;
    // symmetrize rounding
    int n = order;
    for (int i = 0; i < n / 2; ++i) {
        double a = 0.5 * (g.weights[i] + g.weights[n - 1 - i]);
        g.weights[i] = a;
        g.weights[n - 1 - i] = a;
        double m = 0.5 * (g.nodes[n - 1 - i] - g.nodes[i]);
        g.nodes[i] = -m;
        g.nodes[n - 1 - i] = m;
    }
    if (n % 2 == 1) g.nodes[n / 2] = 0.0;
    return g;
}

VelocityGrid default_velocity_grid(const AtomEnsemble& ens,
                                   const DriveConfig& drv,
                                   double order_scale) {
    double span_vt = 8.0;
    double v_t = thermal_velocity(ens);
    // narrowest velocity scale any kernel can have: natural half width over
    // the largest optical wavenumber, or the two-photon width over the
    // residual wavenumber difference
    double d1 = ens.gamma_e / std::max(drv.k_pump(), drv.k_s_central());
    double d2 = ens.gamma_d /
                std::max(std::abs(drv.k_pump() - drv.k_control()), 1e-12);
    double d = std::min(d1, d2);
    double h = d / 3.0;  // trapezoid tail error ~ exp(-2 pi d / h) ~ 7e-9
    int order = static_cast<int>(std::ceil(2.0 * span_vt * v_t / h * order_scale));
    order = std::clamp(order, 257, 20001);
    if (order % 2 == 0) ++order;  // keep v = 0 as a node
    return build_velocity_grid_dense(ens, order, span_vt);
}

ComplexRates complex_rates(double v, const AtomEnsemble& ens,
                           const DriveConfig& drv, double k_s, double k_i) {
    const std::complex<double> i1(0.0, 1.0);
    double G = ens.gamma_e;
    double g = ens.gamma_d;
    double kp = drv.k_pump();
    double kc = drv.k_control();
    double delta = drv.two_photon_detuning();
    ComplexRates r;
    r.g21 = G - i1 * (drv.delta_p - kp * v);
    r.g31 = G - i1 * (drv.delta_s - k_s * v);
    r.g42 = (G + g) - i1 * (drv.delta_c + kc * v);
    r.g43 = (G + g) + i1 * (drv.delta_i() + k_i * v);
    r.g41 = g - i1 * (delta - (kp - kc) * v);
    r.g32 = 2.0 * G - i1 * (drv.delta_c - drv.delta_i() + (kc - k_i) * v);
    return r;
}

double effective_cross_section(const AtomEnsemble& ens) {
    // Voigt peak of the |1>->|3> absorption profile:
    //   sigma = k_s mu31^2/(eps0 hbar) * Int f(v) Gamma/(Gamma^2+(k_s v)^2) dv
    double k_s = ens.omega_21() / phys::speed_of_light;
    double v_t = thermal_velocity(ens);
    double G = ens.gamma_e;
    // resolve the Lorentzian of half width G/k_s
    double d = G / k_s;
    int order = static_cast<int>(std::ceil(16.0 * v_t / (d / 3.0)));
    order = std::clamp(order, 2001, 60001) | 1;
    VelocityGrid g = build_velocity_grid_dense(ens, order, 8.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        double kv = k_s * g.nodes[j];
        acc += g.weights[j] * G / (G * G + kv * kv);
    }
    return k_s * ens.dipole_31 * ens.dipole_31 / (phys::epsilon0 * phys::hbar) * acc;
}

double density_from_od(const AtomEnsemble& ens) {
    if (!(ens.length > 0.0)) throw config_error("density_from_od: length must be > 0");
    if (!(ens.optical_depth >= 0.0))
        throw config_error("density_from_od: OD must be >= 0");
    return ens.optical_depth / (effective_cross_section(ens) * ens.length);
}

double od_from_density(const AtomEnsemble& ens, double density) {
    if (!(ens.length > 0.0)) throw config_error("od_from_density: length must be > 0");
    return density * effective_cross_section(ens) * ens.length;
}

}  // namespace fwm
