#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qbm/gaussian_toolbox.hpp"
#include "qbm/qbm_green.hpp"

namespace qbm {

/// Two reservoirs prepared in thermal states; each side carries its own
/// spectral density (identical Lorentz-Drude functions by default).
struct ThermalEnvironment {
    double T_R = 0.0;
    double T_L = 0.0;
    SpectralDensity density_R;
    SpectralDensity density_L;

    static ThermalEnvironment uniform(double T_R, double T_L, const SpectralDensity& sd);
    double temperature(Side side) const { return side == Side::R ? T_R : T_L; }
    const SpectralDensity& density(Side side) const {
        return side == Side::R ? density_R : density_L;
    }
};

/// Mean thermal occupation 1/(exp(w/T) - 1); zero at T = 0. Throws for w <= 0.
double planck_occupation(double omega, double T);

/// A narrow group of environmental modes treated as one effective mode.
struct BandSpec {
    double omega_center = 1.0;
    double delta_omega = 0.1;
    Side side = Side::R;

    std::vector<std::string> validate() const;
};

enum class PairRelation { Nonresonant, Resonant, Uncorrelated };

/// Band i lives in E_R, band j in E_L. Nonresonant: w_i + w_j = k w_d (pair
/// creation); resonant: w_j = w_i + k w_d (transport); anything else is
/// uncorrelated in the long-time cycle average.
struct BandPair {
    BandSpec band_i;  // side R
    BandSpec band_j;  // side L
    PairRelation relation = PairRelation::Uncorrelated;
    int harmonic = 0;

    static BandPair make_nonresonant(double omega_i, double delta_omega, int k, double omega_d);
    static BandPair make_resonant(double omega_i, double delta_omega, int k, double omega_d);
    /// Classify from the resonance conditions with tolerance delta_omega/2.
    static BandPair classify(const BandSpec& band_i, const BandSpec& band_j, double omega_d,
                             int k_window);
};

/// w_{i,k} = w - k w_d and the interaction probability
/// p^(k)_{side,alpha}(w) = pi I_side(w) I_alpha(|w_{i,k}|) |A~_k(i w_{i,k})|^2 / (2 m^2).
double interaction_probability(const GreenCoefficients& gc, const ThermalEnvironment& env,
                               Side band_side, int k, double omega, Side alpha);

/// Linear drift pieces of 2 sqrt(det) of a band's marginal block:
/// transport (can cool or heat) and pair creation (always heats).
struct BandRates {
    double transport = 0.0;
    double pair = 0.0;
    double tail_bound = 0.0;  // largest |k| = k_max contribution, truncation gauge
    double total() const { return transport + pair; }
};
BandRates band_rates(const BandSpec& band, const ThermalEnvironment& env,
                     const GreenCoefficients& gc);

struct HeatCurrent {
    double per_delta_omega = 0.0;  // Qdot / delta_omega
    double transport_part = 0.0;
    double pair_part = 0.0;  // >= 0 always
};
HeatCurrent heat_current(const BandSpec& band, const ThermalEnvironment& env,
                         const GreenCoefficients& gc);

/// Band purity mu(t) = 1/(2 sqrt(det)) under the linear-in-t drift.
/// Throws if the linearized expression turns non-positive.
double band_purity(const BandSpec& band, const ThermalEnvironment& env,
                   const GreenCoefficients& gc, double t);

/// Cross-correlation generators (Gamma(t) = Gamma * t^2 = 4 det gamma).
/// Nonresonant: Gamma_plus <= 0. Resonant: Gamma_minus >= 0.
double gamma_plus(const BandPair& pair, const ThermalEnvironment& env,
                  const GreenCoefficients& gc);
double gamma_minus(const BandPair& pair, const ThermalEnvironment& env,
                   const GreenCoefficients& gc);

struct validity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct degenerate_purity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Cycle-averaged long-time covariance, assembled directly in standard form:
/// thermal marginals with linear drift plus the cross block from Gamma±.
/// Throws validity_error once the linearized state stops being physical or
/// the purities have drifted too far from their initial values.
TwoModeCovariance assemble_sigma_av(const BandPair& pair, const ThermalEnvironment& env,
                                    const GreenCoefficients& gc, double t);

/// I± = f±(mu_i, mu_j) |Gamma±(t)| with
/// f± = mu_i mu_j [atanh(mu_i) ± atanh(mu_j)] / (mu_i ± mu_j).
/// Resonant inputs with |mu_i - mu_j| < 1e-6 throw degenerate_purity_error;
/// callers fall back to the exact toolbox value.
double mutual_information_closed(double mu_i, double mu_j, double gamma_abs_t2,
                                 PairRelation relation);

/// D±/I± = 1 - g±(mu_i, mu_j), clamped to [0, 1].
double discord_ratio_closed(double mu_i, double mu_j, PairRelation relation);

enum class DiscordRegime { SimilarTemperatures, ColdL, ColdR };

/// Published approximate ratios in their regimes of validity; throws
/// std::invalid_argument naming the violated bound when the regime
/// precondition fails.
double discord_regime_limit(double mu_i, double mu_j, PairRelation relation,
                            DiscordRegime regime);

struct NegativityClosed {
    double E_N = 0.0;
    double S_ij = 0.0;     // phase-space entropy threshold
    double Gamma_N = 0.0;  // generation rate
    double t_ent = 0.0;    // latency time S_ij / Gamma_N
    bool resonant_zero = false;
};
NegativityClosed negativity_closed(double mu_i, double mu_j, double gamma_plus_rate, double t,
                                   PairRelation relation = PairRelation::Nonresonant);

/// Kullback-Leibler phase-space distinguishability proxy mu_i mu_j |Gamma(t)|.
double kl_divergence_proxy(double mu_i, double mu_j, double gamma_abs_t2);

/// | |G+| t^2 - (|G+|/Gamma_N^2)(E_N + S_ij)^2 |; an algebraic identity of the
/// closed forms, expected at rounding level for t > t_ent.
double generator_negativity_identity(double E_N, double S_ij, double Gamma_N,
                                     double gamma_plus_rate, double t);

/// |Gamma-(t)| <= (1 - mu_i)(1 - mu_j)/(mu_i mu_j); the transport bound behind
/// I- <= 1.
bool bound_check_ineq(double mu_i, double mu_j, double gamma_minus_rate, double t);

/// Everything the sweep needs for one band pair at one time.
struct CorrelationReport {
    double t = 0.0;
    double omega_i = 0.0, omega_j = 0.0;
    double mu_i = 0.0, mu_j = 0.0;
    double gamma_t2 = 0.0;  // signed Gamma±(t) = Gamma± * t^2
    double I = 0.0;         // closed form (exact fallback when flagged)
    double D = 0.0;
    double D_over_I = 0.0;
    double E_N = 0.0;
    double S_ij = 0.0;
    double Gamma_N = 0.0;
    double t_ent = 0.0;
    double Q_dot_i = 0.0, Q_dot_j = 0.0;
    double E0 = 0.0;  // gamma0 dw V t / w_r^3
    double I_exact = 0.0, D_exact = 0.0, E_N_exact = 0.0;
    std::vector<std::string> flags;
};

CorrelationReport build_report(const BandPair& pair, const ThermalEnvironment& env,
                               const GreenCoefficients& gc, double t);

}  // namespace qbm
