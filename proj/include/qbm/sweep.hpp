#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qbm/band_correlations.hpp"
#include "qbm/discrete_oracle.hpp"

namespace qbm {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key-value configuration; keys match the field names below. Defaults
/// reproduce the reference nonresonant scenario (omega_d = omega_r/sqrt(11),
/// V = omega_r^2/32, Lambda = 10 omega_r, T = 0, t = 20, k = 1). All values
/// are in units of gamma0 with k_B = hbar = 1 and time in 1/gamma0.
struct SweepConfig {
    double omega_r = 800.0;
    double omega_d = 0.0;           // default omega_r/sqrt(11)
    double V = 0.0;                 // drive amplitude; default omega_r^2/32
    double gamma0 = 1.0;
    double Lambda = 0.0;            // default 10*omega_r
    double m = 10.0;                // system mass
    double m_i = 1.0;               // environmental mode mass
    double delta_omega = 0.2;
    double T_R = 0.0;
    double T_L = 0.0;
    double t = 20.0;
    PairRelation relation = PairRelation::Nonresonant;
    int harmonic = 1;
    int order = 2;                  // 0 selects the auto-raised order
    double omega_i_min = 0.0;       // default 0.05 * harmonic * omega_d
    double omega_i_max = 0.0;       // default 0.95 * harmonic * omega_d
    int omega_i_count = 81;
    std::string out = "sweep.csv";
    bool oracle = false;

    // Discrete-oracle run knobs (reduced scale separation).
    int oracle_modes = 400;
    double oracle_omega_r = 50.0;
    double oracle_omega_max = 0.0;  // default 2.5 * oracle_omega_r
    double oracle_lambda = 0.0;     // default 2 * oracle_omega_r
    double oracle_V = 0.0;          // default oracle_omega_r^2/8
    double oracle_T_R = 10.0;
    double oracle_T_L = 0.0;
    int oracle_cycles = 20;         // driving cycles past the transient
};

SweepConfig parse_config(const std::string& text);
SweepConfig load_config_file(const std::string& path);

SpectralDensity spectral_for(const SweepConfig& cfg);
DrivingSpec driving_for(const SweepConfig& cfg);
GreenCoefficients green_for(const SweepConfig& cfg);
ThermalEnvironment environment_for(const SweepConfig& cfg);
std::vector<double> sweep_grid(const SweepConfig& cfg);
BandPair pair_at(const SweepConfig& cfg, double omega_i);

/// Reference figure scenarios: fig2 ('a'..'d') nonresonant k=1 with
/// temperatures {0,0},{7.5,0},{0,7.5},{7.5,7.5}; fig3 ('a'..'c') resonant k=1
/// with {1500,0},{0,1500},{7500,7500}.
SweepConfig fig2_scenario(char variant);
SweepConfig fig3_scenario(char variant);

struct SweepResult {
    std::string csv;
    std::vector<CorrelationReport> rows;
    std::vector<bool> row_valid;
    std::vector<std::pair<std::string, std::string>> summary;
    int flagged = 0;
    int exit_code = 0;  // 0 ok, 3 when most grid points fell outside validity
};

SweepResult run_sweep(const SweepConfig& cfg);
std::string summary_text(const SweepResult& result);
void write_text(const std::string& path, const std::string& bytes);

struct InvariantResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<InvariantResult> invariants;
    bool all_pass = true;
    std::string first_failure;
};

/// Machine-readable invariant battery; `seed` feeds the randomized suites.
/// Includes the discrete-oracle comparison when cfg.oracle is set.
ValidationReport run_validation(const SweepConfig& cfg, std::uint64_t seed);
std::string validation_to_json(const ValidationReport& report);

struct OracleQuantity {
    std::string name;
    double predicted = 0.0;
    double fitted = 0.0;
    double rel_err = 0.0;
};

struct OracleComparison {
    std::vector<OracleQuantity> quantities;
    double symplectic_drift = 0.0;
    double fit_r_squared_min = 1.0;
    double max_rel_err = 0.0;
    double counterterm_capture = 0.0;
    bool pass = false;  // every quantity within 15% and drift below 1e-6
    CovarianceTrajectory trajectory;
};

/// Full brute-force run at reduced scale separation: both band-pair types
/// tracked in one propagation, fitted rates compared against the analytic
/// predictions of the band machinery.
OracleComparison run_oracle_comparison(const SweepConfig& cfg);

/// Short zero-temperature run: transport generator vanishes while the pair
/// generator stays finite and heating is positive.
struct OracleT0Check {
    double gamma_minus_fit = 0.0;
    double gamma_plus_fit = 0.0;
    double gamma_plus_pred = 0.0;
    double qdot_sum = 0.0;
    bool pass = false;
};
OracleT0Check run_oracle_t0_check(const SweepConfig& cfg);

}  // namespace qbm
