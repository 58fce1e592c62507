#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "fwm/atom.hpp"

namespace fwm {

// Steady-state density matrix for one velocity class, indexed by levels
// |1>..|4| (row/column of level |3> stay zero in the three-level reduction).
struct DensityMatrix {
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    double velocity = 0.0;

    std::complex<double> rho41() const { return rho(3, 0); }
    std::complex<double> rho21() const { return rho(1, 0); }
    double p11() const { return rho(0, 0).real(); }
    double p22() const { return rho(1, 1).real(); }
    double p33() const { return rho(2, 2).real(); }
    double p44() const { return rho(3, 3).real(); }

    // Hermiticity/trace to 1e-12, positive semidefinite to 1e-10.
    void validate(double herm_tol = 1e-12, double psd_tol = 1e-10) const;
};

struct VelocitySlice {
    double velocity = 0.0;
    double weight = 0.0;
    DensityMatrix dm;
};

struct VelocityResolvedState {
    std::vector<VelocitySlice> slices;
    double p22 = 0.0;
    double p44 = 0.0;
    std::complex<double> rho41_bar{0.0, 0.0};
};

// Flat per-node arrays, the workhorse for the susceptibility integrals.
struct VelocitySolution {
    std::vector<double> v;
    std::vector<double> w;
    std::vector<double> rho11;
    std::vector<std::complex<double>> rho41;
    double p22 = 0.0;
    double p44 = 0.0;
    std::complex<double> rho41_bar{0.0, 0.0};
};

// Fast steady state of the {|1>,|2>,|4>} ladder (signal/idler couplings
// off): the coherence block is eliminated against the populations, then the
// 2x2 population balance is solved directly.
DensityMatrix solve_three_level(double v, const AtomEnsemble& ens,
                                const DriveConfig& drv);

// rho41 to lowest order in the pump coupling.
std::complex<double> weak_pump_rho41(double v, const AtomEnsemble& ens,
                                     const DriveConfig& drv);

// rho31 to first order in the signal/idler couplings (weak pump).
std::complex<double> weak_pump_rho31(double delta_s, double v,
                                     const AtomEnsemble& ens,
                                     const DriveConfig& drv,
                                     std::complex<double> omega_s,
                                     std::complex<double> omega_i);

// Brute-force oracle: assemble the N^2 x N^2 generator of the master
// equation and extract its kernel by SVD. levels must be 3 or 4; for
// levels == 4 small signal/idler couplings may be switched on.
DensityMatrix liouvillian_null_space(double v, const AtomEnsemble& ens,
                                     const DriveConfig& drv, int levels,
                                     std::complex<double> omega_s = 0.0,
                                     std::complex<double> omega_i = 0.0);

// Kernel extraction for an explicit Hamiltonian and jump-operator set;
// throws degeneracy_error when the kernel dimension is not 1.
Eigen::MatrixXcd steady_state_kernel(const Eigen::MatrixXcd& hamiltonian,
                                     const std::vector<Eigen::MatrixXcd>& jumps);

VelocitySolution solve_over_grid(const VelocityGrid& grid,
                                 const AtomEnsemble& ens,
                                 const DriveConfig& drv);

VelocityResolvedState velocity_average(const VelocityGrid& grid,
                                       const AtomEnsemble& ens,
                                       const DriveConfig& drv);

}  // namespace fwm
