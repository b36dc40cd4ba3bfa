#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "qbm/qbm_green.hpp"

namespace qbm {

/// N-oscillator discretization of both reservoirs plus the driven system.
/// Uniform grid w_n = n * dw, n = 1..N, on (0, omega_max]; couplings from
/// I(w) dw ~ lambda^2 / (m_env w). The renormalization counterterm is added
/// to the bare potential so the effective static coefficient is omega_r^2.
struct DiscreteModelParams {
    int modes_per_side = 400;
    double omega_max = 125.0;
    double gamma0 = 1.0;
    double Lambda = 100.0;
    double omega_r = 50.0;
    double omega_d = 15.0;
    double drive_amplitude = 312.5;  // V in V(t) = w_r^2 + V cos(w_d t)
    double T_R = 0.0;
    double T_L = 0.0;
    double mass_system = 10.0;
    double mass_env = 1.0;
};

struct DiscreteModel {
    DiscreteModelParams params;
    double delta_omega = 0.0;
    std::vector<double> omega;     // grid frequencies, shared by both sides
    std::vector<double> coupling;  // g_n in scaled quadratures
    double counterterm = 0.0;          // discrete sum, frequency^2 units
    double counterterm_integral = 0.0;  // continuum integral over (0, omega_max]
    double counterterm_capture = 0.0;   // fraction of the full gamma0*Lambda

    int dim() const { return 2 * (2 * params.modes_per_side + 1); }
    /// Decay rate of covariance transients: both reservoirs damp the system,
    /// 2 gamma0 Lambda^2/(w_r^2 + Lambda^2).
    double transient_rate() const;
};

/// Builds the grid and couplings; throws std::invalid_argument when the grid
/// is too coarse (counterterm mismatch above 2%) with a suggested N.
DiscreteModel build_discrete_model(const DiscreteModelParams& params);

/// Tracked band pair: 1-based grid indices (w = n * dw), one mode per side.
struct TrackedPair {
    int index_R = 0;
    int index_L = 0;
};

/// Streamed reduced blocks for the tracked pairs. Per sample and pair, the
/// upper triangle of the 4x4 covariance of (Q_i, P_i, Q_j, P_j) in row-major
/// order: (QQ_i, QP_i, Qq_ij, Qp_ij, PP_i, Pq_ij, Pp_ij, qq_j, qp_j, pp_j).
struct CovarianceTrajectory {
    std::vector<double> times;
    std::vector<TrackedPair> pairs;
    std::vector<std::vector<std::array<double, 10>>> pair_blocks;  // [pair][sample]
    double symplectic_drift = 0.0;  // max relative |nu(t) - nu(0)| over checkpoints
    std::vector<double> checkpoint_times;
    std::vector<double> checkpoint_energies;  // total <H> at the checkpoints
    double dt = 0.0;
    int steps_per_cycle = 0;
    int samples_per_cycle = 0;
    double cycle_period = 0.0;
    int cycles = 0;
};

/// Propagates the full quadratic dynamics with a fixed-step 4th-order
/// symplectic composition of exact sub-flows (free rotations + position
/// kicks), sampling the tracked reduced blocks uniformly within each driving
/// cycle. Throws when dt exceeds 0.05/omega_max or the symplectic spectrum
/// drifts beyond 1e-6 ("reduce dt").
CovarianceTrajectory evolve_covariance(const DiscreteModel& model, double t_final, double dt,
                                       std::span<const TrackedPair> pairs,
                                       int samples_per_cycle = 96);

struct FittedRates {
    double gamma_fit = 0.0;  // 4 x quadratic coefficient of det(gamma_avg)
    double qdot_i = 0.0, qdot_j = 0.0;
    double purity_slope_i = 0.0, purity_slope_j = 0.0;  // d(2 sqrt det)/dt
    double r_squared_min = 1.0;
    double diag_quadratic_rel = 0.0;  // quadratic leakage of diagonal fits
    int windows = 0;
};

/// Cycle-averaged sliding-window fits: linear for diagonal growth, quadratic
/// for the cross-block determinant. The transient window is excluded; fits
/// with R^2 below 0.9 throw ("transient not decayed or regime invalid").
FittedRates extract_band_rates(const CovarianceTrajectory& traj, int pair_index,
                               const DiscreteModel& model, double transient_cut);

/// Writes the trajectory as delimited text: time column, then the ten
/// upper-triangle entries per tracked pair.
void dump_trajectory(const CovarianceTrajectory& traj, const std::string& path);

}  // namespace qbm
