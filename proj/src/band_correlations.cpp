#include "qbm/band_correlations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qbm {

namespace {
constexpr double kPi = std::numbers::pi_v<double>;
constexpr double kDegeneratePurityTol = 1e-6;
constexpr double kPurityDriftLimit = 0.5;  // relative drift accepted by the linearization
}  // namespace

ThermalEnvironment ThermalEnvironment::uniform(double T_R, double T_L, const SpectralDensity& sd) {
    ThermalEnvironment env;
    env.T_R = T_R;
    env.T_L = T_L;
    env.density_R = sd;
    env.density_R.side = Side::R;
    env.density_L = sd;
    env.density_L.side = Side::L;
    return env;
}

double planck_occupation(double omega, double T) {
    if (!(omega > 0.0)) throw std::invalid_argument("Planck occupation needs omega > 0");
    if (T < 0.0) throw std::invalid_argument("temperature must be >= 0");
    if (T == 0.0) return 0.0;
    const double x = omega / T;
    if (x > 700.0) return 0.0;
    return 1.0 / std::expm1(x);
}

std::vector<std::string> BandSpec::validate() const {
    if (!(omega_center > 0.0)) throw std::invalid_argument("band center frequency must be > 0");
    if (!(delta_omega > 0.0)) throw std::invalid_argument("band width must be > 0");
    std::vector<std::string> warnings;
    if (delta_omega > 0.1 * omega_center)
        warnings.push_back("band width above 10% of the center frequency");
    return warnings;
}

BandPair BandPair::make_nonresonant(double omega_i, double delta_omega, int k, double omega_d) {
    const double omega_j = k * omega_d - omega_i;
    if (!(omega_j > 0.0))
        throw std::invalid_argument("nonresonant pair requires omega_i < k*omega_d");
    BandPair p;
    p.band_i = {omega_i, delta_omega, Side::R};
    p.band_j = {omega_j, delta_omega, Side::L};
    p.relation = PairRelation::Nonresonant;
    p.harmonic = k;
    return p;
}

BandPair BandPair::make_resonant(double omega_i, double delta_omega, int k, double omega_d) {
    BandPair p;
    p.band_i = {omega_i, delta_omega, Side::R};
    p.band_j = {omega_i + k * omega_d, delta_omega, Side::L};
    p.relation = PairRelation::Resonant;
    p.harmonic = k;
    return p;
}

BandPair BandPair::classify(const BandSpec& band_i, const BandSpec& band_j, double omega_d,
                            int k_window) {
    BandPair p;
    p.band_i = band_i;
    p.band_j = band_j;
    p.relation = PairRelation::Uncorrelated;
    const double tol = 0.5 * std::min(band_i.delta_omega, band_j.delta_omega);
    for (int k = -k_window; k <= k_window; ++k) {
        if (std::abs(band_i.omega_center + band_j.omega_center - k * omega_d) < tol) {
            p.relation = PairRelation::Nonresonant;
            p.harmonic = k;
            return p;
        }
    }
    for (int k = -k_window; k <= k_window; ++k) {
        if (std::abs(band_j.omega_center - band_i.omega_center - k * omega_d) < tol) {
            p.relation = PairRelation::Resonant;
            p.harmonic = k;
            return p;
        }
    }
    return p;
}

double interaction_probability(const GreenCoefficients& gc, const ThermalEnvironment& env,
                               Side band_side, int k, double omega, Side alpha) {
    const double w_ik = omega - k * gc.driving().omega_d;
    if (w_ik == 0.0) return 0.0;  // density vanishes at zero frequency
    const double i_band = env.density(band_side).value(omega);
    const double i_alpha = env.density(alpha).value(std::abs(w_ik));
    if (i_band == 0.0 || i_alpha == 0.0) return 0.0;
    const double m = env.density(band_side).mass_system;
    const double amp = std::norm(gc.evaluate_Ak(k, w_ik));
    return kPi * i_band * i_alpha * amp / (2.0 * m * m);
}

BandRates band_rates(const BandSpec& band, const ThermalEnvironment& env,
                     const GreenCoefficients& gc) {
    const double w = band.omega_center;
    const double wd = gc.driving().omega_d;
    const double n_band = planck_occupation(w, env.temperature(band.side));
    BandRates rates;
    for (int k = -gc.k_max(); k <= gc.k_max(); ++k) {
        const double w_ik = w - k * wd;
        if (w_ik == 0.0) continue;
        double term_k = 0.0;
        for (Side alpha : {Side::R, Side::L}) {
            const double p = interaction_probability(gc, env, band.side, k, w, alpha);
            if (p == 0.0) continue;
            const double n_alpha = planck_occupation(std::abs(w_ik), env.temperature(alpha));
            if (w_ik > 0.0) {
                const double c = 2.0 * band.delta_omega * p * (n_alpha - n_band);
                rates.transport += c;
                term_k += std::abs(c);
            } else {
                const double c = 2.0 * band.delta_omega * p * (n_alpha + n_band + 1.0);
                rates.pair += c;
                term_k += c;
            }
        }
        if (std::abs(k) == gc.k_max()) rates.tail_bound = std::max(rates.tail_bound, term_k);
    }
    return rates;
}

HeatCurrent heat_current(const BandSpec& band, const ThermalEnvironment& env,
                         const GreenCoefficients& gc) {
    // Qdot_i = w_i * dw * (transport + pair) / 2 with the same sums as the
    // purity drift: E_i = w_i * (2 sqrt(det alpha)) / 2.
    const BandRates rates = band_rates(band, env, gc);
    HeatCurrent q;
    q.transport_part = 0.5 * band.omega_center * rates.transport / band.delta_omega;
    q.pair_part = 0.5 * band.omega_center * rates.pair / band.delta_omega;
    q.per_delta_omega = q.transport_part + q.pair_part;
    return q;
}

namespace {

// 2 sqrt(det) of the band's marginal block under the linear drift.
double twice_root_det(const BandSpec& band, const ThermalEnvironment& env,
                      const GreenCoefficients& gc, double t) {
    const double n0 = planck_occupation(band.omega_center, env.temperature(band.side));
    return 1.0 + 2.0 * n0 + band_rates(band, env, gc).total() * t;
}

}  // namespace

double band_purity(const BandSpec& band, const ThermalEnvironment& env,
                   const GreenCoefficients& gc, double t) {
    if (t < 0.0) throw std::invalid_argument("time must be >= 0");
    const double d = twice_root_det(band, env, gc, t);
    if (!(d > 0.0)) throw validity_error("linearized purity invalid; reduce t");
    return 1.0 / d;
}

double gamma_plus(const BandPair& pair, const ThermalEnvironment& env,
                  const GreenCoefficients& gc) {
    if (pair.relation != PairRelation::Nonresonant)
        throw std::invalid_argument("gamma_plus requires a nonresonant pair");
    const double wi = pair.band_i.omega_center;
    const double wj = pair.band_j.omega_center;
    const double dw = pair.band_i.delta_omega;
    const double m = env.density_R.mass_system;
    const double n_i = planck_occupation(wi, env.T_R);
    const double n_j = planck_occupation(wj, env.T_L);
    const Complex amp = (2.0 * n_i + 1.0) * std::conj(gc.evaluate_Ak(-pair.harmonic, wi)) +
                        (2.0 * n_j + 1.0) * std::conj(gc.evaluate_Ak(-pair.harmonic, wj));
    return -dw * dw * env.density_R.value(wi) * env.density_L.value(wj) * std::norm(amp) /
           (4.0 * m * m);
}

double gamma_minus(const BandPair& pair, const ThermalEnvironment& env,
                   const GreenCoefficients& gc) {
    if (pair.relation != PairRelation::Resonant)
        throw std::invalid_argument("gamma_minus requires a resonant pair");
    const double wi = pair.band_i.omega_center;
    const double wj = pair.band_j.omega_center;
    const double dw = pair.band_i.delta_omega;
    const double m = env.density_R.mass_system;
    const double n_i = planck_occupation(wi, env.T_R);
    const double n_j = planck_occupation(wj, env.T_L);
    const Complex amp = n_i * gc.evaluate_Ak(pair.harmonic, wi) -
                        n_j * std::conj(gc.evaluate_Ak(-pair.harmonic, wj));
    return dw * dw * env.density_R.value(wi) * env.density_L.value(wj) * std::norm(amp) /
           (m * m);
}

TwoModeCovariance assemble_sigma_av(const BandPair& pair, const ThermalEnvironment& env,
                                    const GreenCoefficients& gc, double t) {
    if (t < 0.0) throw std::invalid_argument("time must be >= 0");
    const double di = twice_root_det(pair.band_i, env, gc, t);
    const double dj = twice_root_det(pair.band_j, env, gc, t);
    if (!(di > 0.0) || !(dj > 0.0)) throw validity_error("validity horizon exceeded");

    const double di0 = twice_root_det(pair.band_i, env, gc, 0.0);
    const double dj0 = twice_root_det(pair.band_j, env, gc, 0.0);
    if (std::abs(di - di0) > kPurityDriftLimit * di0 ||
        std::abs(dj - dj0) > kPurityDriftLimit * dj0)
        throw validity_error("validity horizon exceeded");

    double c1 = 0.0, c2 = 0.0;
    if (pair.relation == PairRelation::Nonresonant) {
        c1 = 0.5 * std::sqrt(std::abs(gamma_plus(pair, env, gc))) * t;
        c2 = -c1;
    } else if (pair.relation == PairRelation::Resonant) {
        c1 = 0.5 * std::sqrt(std::max(0.0, gamma_minus(pair, env, gc))) * t;
        c2 = c1;
    }
    const TwoModeCovariance sigma =
        TwoModeCovariance::standard(0.5 * di, 0.5 * dj, c1, c2);
    if (!is_physical(sigma)) throw validity_error("validity horizon exceeded");
    return sigma;
}

namespace {

void check_closed_form_inputs(double mu_i, double mu_j, PairRelation relation) {
    if (!(mu_i > 0.0) || !(mu_j > 0.0) || mu_i > 1.0 || mu_j > 1.0)
        throw std::invalid_argument("purities must lie in (0, 1]");
    if (relation == PairRelation::Resonant && std::abs(mu_i - mu_j) < kDegeneratePurityTol)
        throw degenerate_purity_error("degenerate-purity branch");
}

}  // namespace

double mutual_information_closed(double mu_i, double mu_j, double gamma_abs_t2,
                                 PairRelation relation) {
    if (relation == PairRelation::Uncorrelated || gamma_abs_t2 == 0.0) return 0.0;
    check_closed_form_inputs(mu_i, mu_j, relation);
    const double sign = relation == PairRelation::Nonresonant ? 1.0 : -1.0;
    const double f = mu_i * mu_j * (std::atanh(mu_i) + sign * std::atanh(mu_j)) /
                     (mu_i + sign * mu_j);
    return f * std::abs(gamma_abs_t2);
}

double discord_ratio_closed(double mu_i, double mu_j, PairRelation relation) {
    if (relation == PairRelation::Uncorrelated) return 0.0;
    check_closed_form_inputs(mu_i, mu_j, relation);
    const double sign = relation == PairRelation::Nonresonant ? 1.0 : -1.0;
    const double g = (1.0 / (1.0 + mu_j)) * (1.0 + sign * mu_j / mu_i) /
                     (1.0 + sign * std::atanh(mu_j) / std::atanh(mu_i));
    return std::clamp(1.0 - g, 0.0, 1.0);
}

double discord_regime_limit(double mu_i, double mu_j, PairRelation relation,
                            DiscordRegime regime) {
    if (!(mu_i > 0.0) || !(mu_j > 0.0) || mu_i > 1.0 || mu_j > 1.0)
        throw std::invalid_argument("purities must lie in (0, 1]");
    const double mu_bar = 0.5 * (mu_i + mu_j);
    switch (regime) {
        case DiscordRegime::SimilarTemperatures: {
            if (std::abs(mu_i - mu_j) >= 0.1 * (mu_i + mu_j))
                throw std::invalid_argument(
                    "similar-temperature regime violated: |mu_i - mu_j|/mu_bar >= 0.1");
            if (relation == PairRelation::Nonresonant) return mu_bar / (1.0 + mu_bar);
            return 1.0 - (1.0 - mu_bar) * std::atanh(mu_bar) / mu_bar;
        }
        case DiscordRegime::ColdL: {
            if (!(mu_j > 0.99))
                throw std::invalid_argument("cold-L regime violated: mu_j <= 0.99");
            if (relation != PairRelation::Resonant)
                throw std::invalid_argument("cold-side limits are published for the resonant case");
            return 1.0 - mu_j / (2.0 * std::atanh(mu_j));
        }
        case DiscordRegime::ColdR: {
            if (!(mu_i > 0.99))
                throw std::invalid_argument("cold-R regime violated: mu_i <= 0.99");
            if (relation != PairRelation::Resonant)
                throw std::invalid_argument("cold-side limits are published for the resonant case");
            return 2.0 * mu_j / mu_i;
        }
    }
    throw std::invalid_argument("unknown regime");
}

NegativityClosed negativity_closed(double mu_i, double mu_j, double gamma_plus_rate, double t,
                                   PairRelation relation) {
    NegativityClosed out;
    if (relation == PairRelation::Resonant) {
        out.resonant_zero = true;
        return out;
    }
    if (!(mu_i > 0.0) || !(mu_j > 0.0) || mu_i > 1.0 || mu_j > 1.0)
        throw std::invalid_argument("purities must lie in (0, 1]");
    out.S_ij = std::max(
        0.0, 0.5 * std::log((mu_i * mu_i + mu_j * mu_j) / (2.0 * mu_i * mu_i * mu_j * mu_j)));
    const double root = std::sqrt(std::abs(gamma_plus_rate));
    out.Gamma_N = (mu_i + mu_j) * std::exp(-2.0 * out.S_ij) * root / (2.0 * mu_i * mu_j);
    out.t_ent = out.Gamma_N > 0.0 ? out.S_ij / out.Gamma_N
                                  : std::numeric_limits<double>::infinity();
    out.E_N = std::max(0.0, -out.S_ij + out.Gamma_N * t);
    return out;
}

double kl_divergence_proxy(double mu_i, double mu_j, double gamma_abs_t2) {
    return mu_i * mu_j * std::abs(gamma_abs_t2);
}

double generator_negativity_identity(double E_N, double S_ij, double Gamma_N,
                                     double gamma_plus_rate, double t) {
    if (!(Gamma_N > 0.0)) throw std::invalid_argument("Gamma_N must be positive");
    if (!(t > S_ij / Gamma_N)) throw std::invalid_argument("identity requires t > t_ent");
    const double abs_rate = std::abs(gamma_plus_rate);
    const double lhs = abs_rate * t * t;
    const double rhs = abs_rate / (Gamma_N * Gamma_N) * (E_N + S_ij) * (E_N + S_ij);
    return std::abs(lhs - rhs);
}

bool bound_check_ineq(double mu_i, double mu_j, double gamma_minus_rate, double t) {
    const double lhs = std::abs(gamma_minus_rate) * t * t;
    const double rhs = (1.0 - mu_i) * (1.0 - mu_j) / (mu_i * mu_j);
    return lhs <= rhs;
}

CorrelationReport build_report(const BandPair& pair, const ThermalEnvironment& env,
                               const GreenCoefficients& gc, double t) {
    CorrelationReport r;
    r.t = t;
    r.omega_i = pair.band_i.omega_center;
    r.omega_j = pair.band_j.omega_center;
    for (const auto& w : pair.band_i.validate()) r.flags.push_back("band_i: " + w);
    for (const auto& w : pair.band_j.validate()) r.flags.push_back("band_j: " + w);

    const TwoModeCovariance sigma = assemble_sigma_av(pair, env, gc, t);
    r.mu_i = band_purity(pair.band_i, env, gc, t);
    r.mu_j = band_purity(pair.band_j, env, gc, t);

    double rate = 0.0;
    if (pair.relation == PairRelation::Nonresonant) rate = gamma_plus(pair, env, gc);
    if (pair.relation == PairRelation::Resonant) rate = gamma_minus(pair, env, gc);
    r.gamma_t2 = rate * t * t;

    r.I_exact = mutual_information_exact(sigma);
    r.D_exact = gaussian_discord_exact(sigma, MeasuredSide::ModeJ);
    r.E_N_exact = log_negativity_exact(sigma);

    try {
        r.I = mutual_information_closed(r.mu_i, r.mu_j, std::abs(r.gamma_t2), pair.relation);
        r.D_over_I = discord_ratio_closed(r.mu_i, r.mu_j, pair.relation);
        r.D = r.D_over_I * r.I;
    } catch (const degenerate_purity_error&) {
        r.flags.push_back("degenerate_purity");
        r.I = r.I_exact;
        r.D = r.D_exact;
        r.D_over_I = r.I > 0.0 ? r.D / r.I : 0.0;
    }

    const NegativityClosed neg =
        negativity_closed(r.mu_i, r.mu_j, pair.relation == PairRelation::Nonresonant ? rate : 0.0,
                          t, pair.relation);
    r.E_N = neg.E_N;
    r.S_ij = neg.S_ij;
    r.Gamma_N = neg.Gamma_N;
    r.t_ent = neg.t_ent;
    if (neg.resonant_zero) r.flags.push_back("resonant_no_entanglement");

    r.Q_dot_i = heat_current(pair.band_i, env, gc).per_delta_omega * pair.band_i.delta_omega;
    r.Q_dot_j = heat_current(pair.band_j, env, gc).per_delta_omega * pair.band_j.delta_omega;

    const double wr = gc.driving().omega_r;
    r.E0 = env.density_R.gamma0 * pair.band_i.delta_omega * gc.driving().cosine_amplitude() * t /
           (wr * wr * wr);

    const BandRates rates_i = band_rates(pair.band_i, env, gc);
    const BandRates rates_j = band_rates(pair.band_j, env, gc);
    const double tail = std::max(rates_i.tail_bound, rates_j.tail_bound);
    const double scale = std::max(std::abs(rates_i.total()), std::abs(rates_j.total()));
    if (tail > 1e-6 * scale && scale > 0.0) r.flags.push_back("harmonic_window_truncation");

    return r;
}

}  // namespace qbm
