#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qbm/band_correlations.hpp"
#include "qbm/sweep.hpp"

using namespace qbm;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Reference {
    SpectralDensity sd;
    DrivingSpec driving;
    ThermalEnvironment env;
    GreenCoefficients gc;
};

Reference make_reference(double T_R, double T_L) {
    SpectralDensity sd;
    sd.gamma0 = 1.0;
    sd.Lambda = 8000.0;
    sd.mass_system = 10.0;
    sd.mass_env = 1.0;
    const double omega_r = 800.0;
    DrivingSpec driving =
        DrivingSpec::single_cosine(omega_r, omega_r / std::sqrt(11.0), omega_r * omega_r / 32.0);
    return Reference{sd, driving, ThermalEnvironment::uniform(T_R, T_L, sd),
                     GreenCoefficients(sd, driving, 2)};
}

}  // namespace

TEST_CASE("planck occupation") {
    CHECK(planck_occupation(1.0, 0.0) == 0.0);
    CHECK(planck_occupation(2.5, 2.5) ==
          doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-13));
    CHECK_THROWS_AS(planck_occupation(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(planck_occupation(-1.0, 1.0), std::invalid_argument);
    // High-temperature series n ~ T/w - 1/2 within 1% for T/w >= 10.
    for (double ratio : {10.0, 40.0, 300.0}) {
        const double n = planck_occupation(1.0, ratio);
        CHECK(n == doctest::Approx(ratio - 0.5).epsilon(0.01));
    }
}

TEST_CASE("band pair classification") {
    const double wd = 241.0;
    const BandPair nr = BandPair::make_nonresonant(100.0, 0.2, 1, wd);
    CHECK(nr.band_j.omega_center == doctest::Approx(141.0));
    CHECK(nr.relation == PairRelation::Nonresonant);
    CHECK_THROWS_AS(BandPair::make_nonresonant(300.0, 0.2, 1, wd), std::invalid_argument);

    const BandPair r = BandPair::make_resonant(100.0, 0.2, 1, wd);
    CHECK(r.band_j.omega_center == doctest::Approx(341.0));

    const BandPair c1 = BandPair::classify({100.0, 0.2, Side::R}, {141.05, 0.2, Side::L}, wd, 3);
    CHECK(c1.relation == PairRelation::Nonresonant);
    CHECK(c1.harmonic == 1);
    const BandPair c2 = BandPair::classify({100.0, 0.2, Side::R}, {341.02, 0.2, Side::L}, wd, 3);
    CHECK(c2.relation == PairRelation::Resonant);
    const BandPair c3 = BandPair::classify({100.0, 0.2, Side::R}, {170.0, 0.2, Side::L}, wd, 3);
    CHECK(c3.relation == PairRelation::Uncorrelated);
}

TEST_CASE("interaction probability") {
    const Reference ref = make_reference(0.0, 0.0);

    // Without driving only the elastic channel survives.
    DrivingSpec still = ref.driving;
    still.fourier.clear();
    const GreenCoefficients gc0(ref.sd, still, 2);
    CHECK(interaction_probability(gc0, ref.env, Side::R, 1, 120.0, Side::L) == 0.0);
    CHECK(interaction_probability(gc0, ref.env, Side::R, 0, 120.0, Side::L) > 0.0);

    // Independent extended-precision evaluation of the k = 1 channel at
    // w_i = w_d/2 (first-order coefficient, explicit algebra).
    const double w = 0.5 * ref.driving.omega_d;
    const long double wr2 = (long double)ref.driving.omega_r * ref.driving.omega_r;
    const long double lam = ref.sd.Lambda;
    const long double amp = ref.driving.cosine_amplitude();
    const long double w_shift = w - ref.driving.omega_d;  // = -w_d/2
    auto g_tilde = [&](long double omega) {
        const std::complex<long double> s(0.0L, omega);
        const std::complex<long double> gamma_l =
            (long double)ref.sd.gamma0 * lam / (s + lam);
        return 1.0L / (s * s + wr2 + s * gamma_l);
    };
    const std::complex<long double> a1 = -(amp / 2.0L) * g_tilde(w) * g_tilde(w_shift);
    auto density_ld = [&](long double omega) {
        return 2.0L * (long double)ref.sd.mass_system * ref.sd.gamma0 * omega * lam * lam /
               ((long double)kPi * (omega * omega + lam * lam));
    };
    const long double m = ref.sd.mass_system;
    const long double expected = (long double)kPi * density_ld(w) * density_ld(std::abs(w_shift)) *
                                 std::norm(a1) / (2.0L * m * m);
    const double got = interaction_probability(ref.gc, ref.env, Side::R, 1, w, Side::L);
    CHECK(got == doctest::Approx((double)expected).epsilon(1e-10));
    CHECK(got > 0.0);
}

TEST_CASE("heat current") {
    const Reference cold = make_reference(0.0, 0.0);
    const BandSpec band{0.5 * cold.driving.omega_d, 0.2, Side::R};

    const HeatCurrent q = heat_current(band, cold.env, cold.gc);
    CHECK(q.transport_part == 0.0);
    CHECK(q.pair_part >= 0.0);
    CHECK(q.per_delta_omega >= 0.0);
    CHECK(q.per_delta_omega == doctest::Approx(q.pair_part));

    // Undriven equilibrium: every channel balances.
    DrivingSpec still = cold.driving;
    still.fourier.clear();
    const Reference warm = make_reference(4.0, 4.0);
    const GreenCoefficients gc0(warm.sd, still, 2);
    const HeatCurrent q_eq = heat_current(band, warm.env, gc0);
    CHECK(q_eq.per_delta_omega == doctest::Approx(0.0).scale(1e-12));

    // Pair-creation part never cools, at any temperature combination.
    const Reference hot = make_reference(1500.0, 7.5);
    for (double w : {30.0, 120.0, 210.0})
        CHECK(heat_current({w, 0.2, Side::R}, hot.env, hot.gc).pair_part >= 0.0);
}

TEST_CASE("band purity") {
    const Reference cold = make_reference(0.0, 0.0);
    const BandSpec band{0.5 * cold.driving.omega_d, 0.2, Side::R};
    CHECK(band_purity(band, cold.env, cold.gc, 0.0) == doctest::Approx(1.0));

    // Thermal start: n = 1 gives mu = 1/3.
    const double w = 0.5 * cold.driving.omega_d;
    const double T_for_n1 = w / std::log(2.0);
    const Reference warm = make_reference(T_for_n1, 0.0);
    CHECK(band_purity(band, warm.env, warm.gc, 0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

    // Pair creation alone degrades the purity at T = 0.
    const double mu_late = band_purity(band, cold.env, cold.gc, 20.0);
    CHECK(mu_late < 1.0);
    CHECK(mu_late > 0.999);

    // Transport cooling can drive the linearized expression negative; that is
    // the breakdown guard.
    const Reference skew = make_reference(5000.0, 0.0);
    CHECK_THROWS_AS(band_purity({30.0, 0.2, Side::R}, skew.env, skew.gc, 1e10), validity_error);
}

TEST_CASE("cross-correlation generators") {
    const Reference cold = make_reference(0.0, 0.0);
    const double wd = cold.driving.omega_d;
    const BandPair nr = BandPair::make_nonresonant(0.5 * wd, 0.2, 1, wd);
    const BandPair res = BandPair::make_resonant(0.5 * wd, 0.2, 1, wd);

    CHECK_THROWS_AS(gamma_plus(res, cold.env, cold.gc), std::invalid_argument);
    CHECK_THROWS_AS(gamma_minus(nr, cold.env, cold.gc), std::invalid_argument);

    // No driving: no cross correlations of either kind.
    DrivingSpec still = cold.driving;
    still.fourier.clear();
    const GreenCoefficients gc0(cold.sd, still, 2);
    CHECK(gamma_plus(nr, cold.env, gc0) == doctest::Approx(0.0).scale(1e-30));
    CHECK(gamma_minus(res, cold.env, gc0) == doctest::Approx(0.0).scale(1e-30));

    // Signs and the zero-temperature limits.
    CHECK(gamma_plus(nr, cold.env, cold.gc) < 0.0);
    CHECK(gamma_minus(res, cold.env, cold.gc) == 0.0);

    // T = 0 pair generator matches the explicit amplitude combination.
    {
        const double wi = nr.band_i.omega_center, wj = nr.band_j.omega_center;
        const double dw = nr.band_i.delta_omega;
        const double m = cold.sd.mass_system;
        const Complex amp = std::conj(cold.gc.evaluate_Ak(-1, wi)) +
                            std::conj(cold.gc.evaluate_Ak(-1, wj));
        const double expected = -dw * dw * cold.sd.value(wi) * cold.sd.value(wj) *
                                std::norm(amp) / (4.0 * m * m);
        CHECK(gamma_plus(nr, cold.env, cold.gc) == doctest::Approx(expected).epsilon(1e-13));
    }

    // Hot-right resonant generator reduces to the single-amplitude form.
    {
        const Reference hot = make_reference(1500.0, 0.0);
        const double wi = res.band_i.omega_center, wj = res.band_j.omega_center;
        const double dw = res.band_i.delta_omega;
        const double m = hot.sd.mass_system;
        const double n_r = planck_occupation(wi, 1500.0);
        const double expected = dw * dw * hot.sd.value(wi) * hot.sd.value(wj) * n_r * n_r *
                                std::norm(hot.gc.evaluate_Ak(1, wi)) / (m * m);
        CHECK(gamma_minus(res, hot.env, hot.gc) == doctest::Approx(expected).epsilon(1e-12));
    }

    // Equal occupations suppress the transport generator (interference).
    {
        const double wi = 0.4 * wd;
        const BandPair pair = BandPair::make_resonant(wi, 0.2, 1, wd);
        const double wj = pair.band_j.omega_center;
        // Choose temperatures so n_R(w_i) = n_L(w_j).
        const double T_R = 900.0;
        const double n_target = planck_occupation(wi, T_R);
        const double T_L = wj / std::log(1.0 / n_target + 1.0);
        const ThermalEnvironment env = ThermalEnvironment::uniform(T_R, T_L, cold.sd);
        const double suppressed = gamma_minus(pair, env, cold.gc);
        const ThermalEnvironment env_skew = ThermalEnvironment::uniform(T_R, 0.0, cold.sd);
        CHECK(suppressed < 0.05 * gamma_minus(pair, env_skew, cold.gc));
    }

    // |Gamma_plus| peaks where the band densities and responses peak; at the
    // reference parameters the dressed resonance sits outside the sweep and
    // the maximum lands at the center of the window.
    {
        double best_w = 0.0, best = 0.0;
        for (int i = 1; i < 40; ++i) {
            const double w = wd * i / 40.0;
            const BandPair p = BandPair::make_nonresonant(w, 0.2, 1, wd);
            const double g = std::abs(gamma_plus(p, cold.env, cold.gc));
            if (g > best) {
                best = g;
                best_w = w;
            }
        }
        CHECK(best_w == doctest::Approx(0.5 * wd).epsilon(0.03));
    }
}

TEST_CASE("assembled cycle-averaged covariance") {
    const Reference cold = make_reference(0.0, 0.0);
    const double wd = cold.driving.omega_d;
    const BandPair nr = BandPair::make_nonresonant(0.5 * wd, 0.2, 1, wd);
    const BandPair res = BandPair::make_resonant(0.5 * wd, 0.2, 1, wd);

    // t = 0: thermal product.
    const TwoModeCovariance init = assemble_sigma_av(nr, cold.env, cold.gc, 0.0);
    CHECK(init.gamma().cwiseAbs().maxCoeff() == 0.0);
    CHECK(init.alpha()(0, 0) == doctest::Approx(0.5));

    // Resonant pairs at T = 0 stay product states for all times.
    const TwoModeCovariance res_state = assemble_sigma_av(res, cold.env, cold.gc, 15.0);
    CHECK(res_state.gamma().cwiseAbs().maxCoeff() == 0.0);

    // Nonresonant pairs develop the squeezed cross block and stay physical
    // within the horizon.
    const TwoModeCovariance sigma = assemble_sigma_av(nr, cold.env, cold.gc, 20.0);
    CHECK(sigma.gamma()(0, 0) > 0.0);
    CHECK(sigma.gamma()(1, 1) == doctest::Approx(-sigma.gamma()(0, 0)));
    CHECK(is_physical(sigma));

    // Far beyond the horizon the linearized state stops being physical.
    CHECK_THROWS_AS(assemble_sigma_av(nr, cold.env, cold.gc, 2000.0), validity_error);
}

TEST_CASE("closed forms against the exact toolbox") {
    for (auto temps : {std::pair{0.0, 0.0}, std::pair{7.5, 0.0}, std::pair{7.5, 7.5}}) {
        const Reference ref = make_reference(temps.first, temps.second);
        const double wd = ref.driving.omega_d;
        for (int i = 2; i <= 14; ++i) {
            const BandPair pair = BandPair::make_nonresonant(wd * i / 16.0, 0.2, 1, wd);
            const CorrelationReport r = build_report(pair, ref.env, ref.gc, 20.0);
            const double tol = std::max(0.05, 10.0 * ref.sd.gamma0 / ref.driving.omega_r);
            CHECK(r.I == doctest::Approx(r.I_exact).epsilon(tol));
            CHECK(r.D == doctest::Approx(r.D_exact).epsilon(tol));
            if (r.E_N_exact > 0.05) CHECK(r.E_N == doctest::Approx(r.E_N_exact).epsilon(0.05));
        }
    }
}

TEST_CASE("closed mutual information") {
    CHECK(mutual_information_closed(0.8, 0.6, 0.0, PairRelation::Nonresonant) == 0.0);
    // Equal purities: f_+ = mu atanh(mu).
    const double mu = 0.7, g = 3e-3;
    CHECK(mutual_information_closed(mu, mu, g, PairRelation::Nonresonant) ==
          doctest::Approx(mu * std::atanh(mu) * g).epsilon(1e-12));
    // Exact quadratic growth at frozen purities.
    CHECK(mutual_information_closed(0.8, 0.6, 4.0 * g, PairRelation::Nonresonant) ==
          doctest::Approx(4.0 * mutual_information_closed(0.8, 0.6, g,
                                                          PairRelation::Nonresonant))
              .epsilon(1e-14));
    CHECK_THROWS_AS(mutual_information_closed(0.7, 0.7 + 1e-9, 1e-3, PairRelation::Resonant),
                    degenerate_purity_error);
    CHECK_THROWS_AS(mutual_information_closed(1.2, 0.5, 1e-3, PairRelation::Nonresonant),
                    std::invalid_argument);
}

TEST_CASE("resonant mutual information is bounded by one") {
    // Saturating the transport inequality still keeps I- <= 1.
    for (double mu_i : {0.05, 0.3, 0.6, 0.9})
        for (double mu_j : {0.1, 0.45, 0.8}) {
            if (std::abs(mu_i - mu_j) < 1e-6) continue;
            const double gmax = (1.0 - mu_i) * (1.0 - mu_j) / (mu_i * mu_j);
            for (double frac : {0.1, 0.5, 1.0}) {
                const double value =
                    mutual_information_closed(mu_i, mu_j, frac * gmax, PairRelation::Resonant);
                CHECK(value <= 1.0 + 1e-9);
            }
        }
}

TEST_CASE("closed discord ratio") {
    // mu -> 1: half the correlations are quantum for pair creation, all of
    // them for transport. The 1/2 limit needs the purities to agree at the
    // atanh level, which the zero-temperature sweep provides structurally.
    CHECK(discord_ratio_closed(0.999999, 0.999999, PairRelation::Nonresonant) ==
          doctest::Approx(0.5).epsilon(1e-6));
    CHECK(discord_ratio_closed(0.999999, 0.999998, PairRelation::Nonresonant) ==
          doctest::Approx(0.5).epsilon(0.05));
    CHECK(discord_ratio_closed(0.9995, 0.999, PairRelation::Resonant) ==
          doctest::Approx(1.0).epsilon(5e-3));
    // mu -> 0: correlations turn classical.
    CHECK(discord_ratio_closed(1e-3, 2e-3, PairRelation::Nonresonant) < 0.02);
    CHECK(discord_ratio_closed(1e-3, 2e-3, PairRelation::Resonant) < 0.02);
    // Nonresonant share is always below the resonant one.
    for (double mu_i : {0.15, 0.4, 0.75, 0.93})
        for (double mu_j : {0.2, 0.55, 0.85})
            CHECK(discord_ratio_closed(mu_i, mu_j, PairRelation::Nonresonant) <
                  discord_ratio_closed(mu_i, mu_j, PairRelation::Resonant));
}

TEST_CASE("discord regime limits") {
    // Similar temperatures, nonresonant: mu_bar/(1 + mu_bar).
    CHECK(discord_regime_limit(0.5, 0.5, PairRelation::Nonresonant,
                               DiscordRegime::SimilarTemperatures) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    // Cold measured side: the atanh divergence pushes the ratio to one.
    CHECK(discord_regime_limit(0.3, 0.999999999, PairRelation::Resonant, DiscordRegime::ColdL) ==
          doctest::Approx(1.0).epsilon(1e-1));
    CHECK(discord_regime_limit(0.3, 1.0 - 1e-14, PairRelation::Resonant, DiscordRegime::ColdL) >
          0.95);

    CHECK_THROWS_AS(discord_regime_limit(0.9, 0.3, PairRelation::Resonant, DiscordRegime::ColdL),
                    std::invalid_argument);
    CHECK_THROWS_AS(discord_regime_limit(0.5, 0.9, PairRelation::Nonresonant,
                                         DiscordRegime::SimilarTemperatures),
                    std::invalid_argument);

    // Each published limit tracks the closed ratio inside its regime.
    for (double mu : {0.15, 0.45, 0.7, 0.9}) {
        const double exact_nr = discord_ratio_closed(1.02 * mu, 0.98 * mu,
                                                     PairRelation::Nonresonant);
        CHECK(discord_regime_limit(1.02 * mu, 0.98 * mu, PairRelation::Nonresonant,
                                   DiscordRegime::SimilarTemperatures) ==
              doctest::Approx(exact_nr).epsilon(0.1));
        const double exact_r =
            discord_ratio_closed(1.02 * mu, 0.98 * mu, PairRelation::Resonant);
        CHECK(discord_regime_limit(1.02 * mu, 0.98 * mu, PairRelation::Resonant,
                                   DiscordRegime::SimilarTemperatures) ==
              doctest::Approx(exact_r).epsilon(0.1));
    }
    for (double mu_hot : {0.02, 0.06}) {
        CHECK(discord_regime_limit(mu_hot, 0.9999, PairRelation::Resonant, DiscordRegime::ColdL) ==
              doctest::Approx(discord_ratio_closed(mu_hot, 0.9999, PairRelation::Resonant))
                  .epsilon(0.1));
        CHECK(discord_regime_limit(0.9999, mu_hot, PairRelation::Resonant, DiscordRegime::ColdR) ==
              doctest::Approx(discord_ratio_closed(0.9999, mu_hot, PairRelation::Resonant))
                  .epsilon(0.1));
    }
}

TEST_CASE("closed negativity") {
    // Pure marginals: no threshold, full generation rate.
    const NegativityClosed pure = negativity_closed(1.0, 1.0, -4e-6, 10.0);
    CHECK(pure.S_ij == doctest::Approx(0.0));
    CHECK(pure.Gamma_N == doctest::Approx(2e-3).epsilon(1e-12));
    CHECK(pure.t_ent == doctest::Approx(0.0));
    CHECK(pure.E_N == doctest::Approx(2e-2).epsilon(1e-12));

    // Thermal marginals always slow the generation down.
    for (double mu_i : {0.2, 0.6, 0.95})
        for (double mu_j : {0.3, 0.8}) {
            const NegativityClosed neg = negativity_closed(mu_i, mu_j, -4e-6, 10.0);
            CHECK(neg.Gamma_N <= std::sqrt(4e-6) + 1e-15);
            CHECK(neg.S_ij >= 0.0);
        }

    const NegativityClosed res = negativity_closed(0.7, 0.6, 0.0, 10.0, PairRelation::Resonant);
    CHECK(res.resonant_zero);
    CHECK(res.E_N == 0.0);
}

TEST_CASE("negativity and generator peaks coincide along the sweep") {
    const Reference cold = make_reference(0.0, 0.0);
    const double wd = cold.driving.omega_d;
    int argmax_en = 0, argmax_g = 0;
    double best_en = -1.0, best_g = -1.0;
    for (int i = 2; i <= 25; ++i) {
        const BandPair pair = BandPair::make_nonresonant(wd * i / 27.0, 0.2, 1, wd);
        const CorrelationReport r = build_report(pair, cold.env, cold.gc, 20.0);
        if (r.E_N / r.E0 > best_en) {
            best_en = r.E_N / r.E0;
            argmax_en = i;
        }
        if (std::abs(r.gamma_t2) > best_g) {
            best_g = std::abs(r.gamma_t2);
            argmax_g = i;
        }
    }
    CHECK(std::abs(argmax_en - argmax_g) <= 1);
}

TEST_CASE("kl divergence proxy") {
    CHECK(kl_divergence_proxy(0.7, 0.6, 0.0) == 0.0);
    CHECK(kl_divergence_proxy(1.0, 1.0, 3e-4) == doctest::Approx(3e-4));
    // Quadratic growth: Gamma(t) = Gamma t^2.
    const double rate = 2.5e-7;
    const double t = 8.0;
    CHECK(kl_divergence_proxy(0.8, 0.7, rate * (2 * t) * (2 * t)) ==
          doctest::Approx(4.0 * kl_divergence_proxy(0.8, 0.7, rate * t * t)).epsilon(1e-14));
}

TEST_CASE("generator-negativity identity") {
    const double rate = -3e-4;
    const NegativityClosed at_t = negativity_closed(0.8, 0.65, rate, 40.0);
    CHECK(at_t.E_N > 0.0);
    const double resid =
        generator_negativity_identity(at_t.E_N, at_t.S_ij, at_t.Gamma_N, rate, 40.0);
    CHECK(resid <= 1e-10 * std::abs(rate) * 40.0 * 40.0);

    // Pure case reduces to E_N^2 = |Gamma| t^2.
    const NegativityClosed pure = negativity_closed(1.0, 1.0, rate, 7.0);
    CHECK(pure.E_N * pure.E_N == doctest::Approx(std::abs(rate) * 49.0).epsilon(1e-12));

    CHECK_THROWS_AS(generator_negativity_identity(0.0, at_t.S_ij, at_t.Gamma_N, rate,
                                                  0.5 * at_t.t_ent),
                    std::invalid_argument);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double mu_i = 0.05 + 0.95 * uni(rng);
        const double mu_j = 0.05 + 0.95 * uni(rng);
        const double r = -std::pow(10.0, -8.0 + 6.0 * uni(rng));
        const NegativityClosed base = negativity_closed(mu_i, mu_j, r, 0.0);
        const double t = base.t_ent * (1.01 + 3.0 * uni(rng));
        const NegativityClosed neg = negativity_closed(mu_i, mu_j, r, t);
        worst = std::max(worst, generator_negativity_identity(neg.E_N, neg.S_ij, neg.Gamma_N,
                                                              r, t) /
                                    (std::abs(r) * t * t));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("transport bound") {
    CHECK(bound_check_ineq(0.9, 0.8, 0.0, 25.0));

    // Across the hot resonant scenarios the assembled states satisfy it and
    // sit well inside in the weak-coupling sense.
    const Reference hot = make_reference(1500.0, 0.0);
    const double wd = hot.driving.omega_d;
    for (int i = 2; i <= 14; ++i) {
        const BandPair pair = BandPair::make_resonant(wd * i / 16.0, 0.2, 1, wd);
        const CorrelationReport r = build_report(pair, hot.env, hot.gc, 20.0);
        const double rate = r.gamma_t2 / (20.0 * 20.0);
        CHECK(bound_check_ineq(r.mu_i, r.mu_j, rate, 20.0));
        const double rhs = (1.0 - r.mu_i) * (1.0 - r.mu_j) / (r.mu_i * r.mu_j);
        CHECK(std::abs(r.gamma_t2) < 0.9 * rhs);
    }
}

TEST_CASE("report assembly, flags and normalization") {
    const Reference cold = make_reference(0.0, 0.0);
    const double wd = cold.driving.omega_d;
    const BandPair nr = BandPair::make_nonresonant(0.5 * wd, 0.2, 1, wd);
    const CorrelationReport r = build_report(nr, cold.env, cold.gc, 20.0);

    CHECK(r.E0 == doctest::Approx(0.2 * cold.driving.cosine_amplitude() * 20.0 /
                                  std::pow(cold.driving.omega_r, 3))
                      .epsilon(1e-12));
    CHECK(r.D_over_I == doctest::Approx(0.5).epsilon(0.01));
    CHECK(r.gamma_t2 < 0.0);
    CHECK(r.I > 0.0);
    CHECK(r.E_N > 0.0);
    CHECK(r.t_ent < 20.0);
    CHECK(r.Q_dot_i > 0.0);

    // Resonant pair at T = 0: degenerate purities fall back to the exact
    // values with the flag raised, and entanglement stays off.
    const BandPair res = BandPair::make_resonant(0.5 * wd, 0.2, 1, wd);
    const CorrelationReport rr = build_report(res, cold.env, cold.gc, 20.0);
    bool degenerate = false, no_ent = false;
    for (const auto& f : rr.flags) {
        degenerate |= f == "degenerate_purity";
        no_ent |= f == "resonant_no_entanglement";
    }
    CHECK(degenerate);
    CHECK(no_ent);
    CHECK(rr.E_N == 0.0);
    CHECK(rr.I == doctest::Approx(0.0).scale(1e-15));

    // Live purities make the quadratic growth slightly subquadratic.
    const Reference hot = make_reference(1500.0, 0.0);
    const BandPair nr_hot = BandPair::make_nonresonant(0.5 * wd, 0.2, 1, wd);
    const CorrelationReport r1 = build_report(nr_hot, hot.env, hot.gc, 10.0);
    const CorrelationReport r2 = build_report(nr_hot, hot.env, hot.gc, 20.0);
    CHECK(r2.I / r1.I < 4.0);
    CHECK(r2.I / r1.I > 3.5);
}

TEST_CASE("measurement-side asymmetry follows the hot side") {
    // Nonresonant pair with one hot environment: heating the measured side
    // turns the correlations classical, heating the unmeasured side leaves
    // them mostly quantum.
    const Reference hot_r = make_reference(7.5, 0.0);
    const Reference hot_l = make_reference(0.0, 7.5);
    const double wd = hot_r.driving.omega_d;
    const BandPair low = BandPair::make_nonresonant(0.12 * wd, 0.2, 1, wd);

    const CorrelationReport hot_unmeasured = build_report(low, hot_r.env, hot_r.gc, 20.0);
    const CorrelationReport hot_measured = build_report(
        BandPair::make_nonresonant(0.88 * wd, 0.2, 1, wd), hot_l.env, hot_l.gc, 20.0);
    CHECK(hot_unmeasured.D_over_I > hot_measured.D_over_I);
}

TEST_CASE("delta-omega scaling of the two measures") {
    // At a thermally dominated point the purities barely depend on the band
    // width, exposing the clean scaling: the time-extensive negativity term
    // goes with the number of pairs, the mutual information with its square.
    const Reference warm = make_reference(100.0, 100.0);
    const double wd = warm.driving.omega_d;
    // Both bands thermally occupied (a cold band would add log(delta_omega)
    // corrections through atanh of its near-unit purity).
    const BandPair narrow = BandPair::make_nonresonant(0.5 * wd, 0.1, 1, wd);
    const BandPair wide = BandPair::make_nonresonant(0.5 * wd, 0.2, 1, wd);
    const CorrelationReport rn = build_report(narrow, warm.env, warm.gc, 10.0);
    const CorrelationReport rw = build_report(wide, warm.env, warm.gc, 10.0);
    CHECK(rw.Gamma_N / rn.Gamma_N == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(rw.I / rn.I == doctest::Approx(4.0).epsilon(1e-4));
}
