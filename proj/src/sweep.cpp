#include "qbm/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

namespace qbm {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw config_error("invalid numeric value for key \"" + key + "\"");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw config_error("invalid integer value for key \"" + key + "\"");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw config_error("invalid boolean value for key \"" + key + "\"");
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void require_positive(double v, const char* key) {
    if (!(v > 0.0)) throw config_error(std::string("key \"") + key + "\" out of range: must be > 0");
}

}  // namespace

SweepConfig parse_config(const std::string& text) {
    SweepConfig cfg;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("line " + std::to_string(lineno) + ": empty key or value");
        if (kv.count(key)) throw config_error("duplicate key \"" + key + "\"");
        kv[key] = value;
    }

    auto take = [&kv](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto num = [&](const char* key, double& field) {
        if (const std::string* v = take(key)) field = parse_double(key, *v);
    };
    auto integer = [&](const char* key, int& field) {
        if (const std::string* v = take(key)) field = parse_int(key, *v);
    };

    num("omega_r", cfg.omega_r);
    num("omega_d", cfg.omega_d);
    num("V", cfg.V);
    num("gamma0", cfg.gamma0);
    num("Lambda", cfg.Lambda);
    num("m", cfg.m);
    num("m_i", cfg.m_i);
    num("delta_omega", cfg.delta_omega);
    num("T_R", cfg.T_R);
    num("T_L", cfg.T_L);
    num("t", cfg.t);
    integer("harmonic", cfg.harmonic);
    integer("order", cfg.order);
    num("omega_i_min", cfg.omega_i_min);
    num("omega_i_max", cfg.omega_i_max);
    integer("omega_i_count", cfg.omega_i_count);
    integer("oracle_modes", cfg.oracle_modes);
    num("oracle_omega_r", cfg.oracle_omega_r);
    num("oracle_omega_max", cfg.oracle_omega_max);
    num("oracle_lambda", cfg.oracle_lambda);
    num("oracle_V", cfg.oracle_V);
    num("oracle_T_R", cfg.oracle_T_R);
    num("oracle_T_L", cfg.oracle_T_L);
    integer("oracle_cycles", cfg.oracle_cycles);
    if (const std::string* v = take("relation")) {
        if (*v == "nonresonant")
            cfg.relation = PairRelation::Nonresonant;
        else if (*v == "resonant")
            cfg.relation = PairRelation::Resonant;
        else
            throw config_error("invalid value for key \"relation\" (nonresonant|resonant)");
    }
    if (const std::string* v = take("out")) cfg.out = *v;
    if (const std::string* v = take("oracle")) cfg.oracle = parse_bool("oracle", *v);

    static const char* known[] = {
        "omega_r", "omega_d", "V", "gamma0", "Lambda", "m", "m_i", "delta_omega", "T_R",
        "T_L", "t", "relation", "harmonic", "order", "omega_i_min", "omega_i_max",
        "omega_i_count", "out", "oracle", "oracle_modes", "oracle_omega_r", "oracle_omega_max",
        "oracle_lambda", "oracle_V", "oracle_T_R", "oracle_T_L", "oracle_cycles"};
    for (const auto& [key, value] : kv) {
        (void)value;
        if (std::find_if(std::begin(known), std::end(known),
                         [&key](const char* k) { return key == k; }) == std::end(known))
            throw config_error("unknown key \"" + key + "\"");
    }

    // Dependent defaults (reference figure values).
    if (cfg.omega_d == 0.0) cfg.omega_d = cfg.omega_r / std::sqrt(11.0);
    if (cfg.V == 0.0) cfg.V = cfg.omega_r * cfg.omega_r / 32.0;
    if (cfg.Lambda == 0.0) cfg.Lambda = 10.0 * cfg.omega_r;
    if (cfg.omega_i_min == 0.0) cfg.omega_i_min = 0.05 * cfg.harmonic * cfg.omega_d;
    if (cfg.omega_i_max == 0.0) cfg.omega_i_max = 0.95 * cfg.harmonic * cfg.omega_d;
    if (cfg.oracle_omega_max == 0.0) cfg.oracle_omega_max = 2.5 * cfg.oracle_omega_r;
    if (cfg.oracle_lambda == 0.0) cfg.oracle_lambda = 2.0 * cfg.oracle_omega_r;
    if (cfg.oracle_V == 0.0) cfg.oracle_V = cfg.oracle_omega_r * cfg.oracle_omega_r / 8.0;

    require_positive(cfg.omega_r, "omega_r");
    require_positive(cfg.omega_d, "omega_d");
    require_positive(cfg.V, "V");
    require_positive(cfg.gamma0, "gamma0");
    require_positive(cfg.Lambda, "Lambda");
    require_positive(cfg.m, "m");
    require_positive(cfg.m_i, "m_i");
    require_positive(cfg.delta_omega, "delta_omega");
    if (cfg.T_R < 0.0) throw config_error("key \"T_R\" out of range: must be >= 0");
    if (cfg.T_L < 0.0) throw config_error("key \"T_L\" out of range: must be >= 0");
    if (cfg.t < 0.0) throw config_error("key \"t\" out of range: must be >= 0");
    if (cfg.harmonic < 1) throw config_error("key \"harmonic\" out of range: must be >= 1");
    if (cfg.order < 0) throw config_error("key \"order\" out of range: must be >= 0");
    if (cfg.omega_i_count < 2) throw config_error("key \"omega_i_count\" out of range: must be >= 2");
    if (!(cfg.omega_i_min > 0.0)) throw config_error("key \"omega_i_min\" out of range: must be > 0");
    if (!(cfg.omega_i_max > cfg.omega_i_min))
        throw config_error("key \"omega_i_max\" out of range: grid must be strictly increasing");
    if (cfg.relation == PairRelation::Nonresonant &&
        cfg.omega_i_max >= cfg.harmonic * cfg.omega_d)
        throw config_error(
            "key \"omega_i_max\" out of range: nonresonant sweeps need omega_i < k*omega_d");
    if (cfg.oracle_modes < 100)
        throw config_error("key \"oracle_modes\" out of range: must be >= 100");
    return cfg;
}

SweepConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

SpectralDensity spectral_for(const SweepConfig& cfg) {
    SpectralDensity sd;
    sd.gamma0 = cfg.gamma0;
    sd.Lambda = cfg.Lambda;
    sd.mass_system = cfg.m;
    sd.mass_env = cfg.m_i;
    return sd;
}

DrivingSpec driving_for(const SweepConfig& cfg) {
    return DrivingSpec::single_cosine(cfg.omega_r, cfg.omega_d, cfg.V);
}

GreenCoefficients green_for(const SweepConfig& cfg) {
    if (cfg.order == 0) return solve_green_coefficients_auto(spectral_for(cfg), driving_for(cfg));
    return solve_green_coefficients(spectral_for(cfg), driving_for(cfg), cfg.order);
}

ThermalEnvironment environment_for(const SweepConfig& cfg) {
    return ThermalEnvironment::uniform(cfg.T_R, cfg.T_L, spectral_for(cfg));
}

std::vector<double> sweep_grid(const SweepConfig& cfg) {
    std::vector<double> grid(cfg.omega_i_count);
    for (int i = 0; i < cfg.omega_i_count; ++i)
        grid[i] = cfg.omega_i_min +
                  (cfg.omega_i_max - cfg.omega_i_min) * i / double(cfg.omega_i_count - 1);
    return grid;
}

BandPair pair_at(const SweepConfig& cfg, double omega_i) {
    if (cfg.relation == PairRelation::Nonresonant)
        return BandPair::make_nonresonant(omega_i, cfg.delta_omega, cfg.harmonic, cfg.omega_d);
    return BandPair::make_resonant(omega_i, cfg.delta_omega, cfg.harmonic, cfg.omega_d);
}

SweepConfig fig2_scenario(char variant) {
    SweepConfig cfg = parse_config("");
    cfg.relation = PairRelation::Nonresonant;
    switch (variant) {
        case 'a': cfg.T_R = 0.0; cfg.T_L = 0.0; break;
        case 'b': cfg.T_R = 7.5; cfg.T_L = 0.0; break;
        case 'c': cfg.T_R = 0.0; cfg.T_L = 7.5; break;
        case 'd': cfg.T_R = 7.5; cfg.T_L = 7.5; break;
        default: throw std::invalid_argument("fig2 variant must be a..d");
    }
    return cfg;
}

SweepConfig fig3_scenario(char variant) {
    SweepConfig cfg = parse_config("relation = resonant");
    switch (variant) {
        case 'a': cfg.T_R = 1500.0; cfg.T_L = 0.0; break;
        case 'b': cfg.T_R = 0.0; cfg.T_L = 1500.0; break;
        case 'c': cfg.T_R = 7500.0; cfg.T_L = 7500.0; break;
        default: throw std::invalid_argument("fig3 variant must be a..c");
    }
    return cfg;
}

namespace {

const char* kCsvHeader =
    "omega_i,omega_j,mu_i,mu_j,Gamma_t2,I_over_E0sq,D_over_E0sq,D_over_I,EN_over_E0,"
    "S_ij,t_ent,Qdot_i,I_raw,D_raw,EN_raw,flags";

std::string flags_cell(const std::vector<std::string>& flags) {
    std::string joined;
    for (const auto& f : flags) {
        if (!joined.empty()) joined += ';';
        std::string token = f;
        std::replace(token.begin(), token.end(), ',', ';');
        std::replace(token.begin(), token.end(), ' ', '_');
        joined += token;
    }
    return joined;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
    const GreenCoefficients gc = green_for(cfg);
    const ThermalEnvironment env = environment_for(cfg);
    const std::vector<double> grid = sweep_grid(cfg);

    SweepResult result;
    result.rows.reserve(grid.size());
    result.row_valid.reserve(grid.size());

    std::ostringstream csv;
    csv << kCsvHeader << "\n";

    const double nan = std::numeric_limits<double>::quiet_NaN();
    double max_i_norm = -1.0, max_en_norm = -1.0;
    double peak_i_omega = nan, peak_en_omega = nan;
    int bound_pass = 0, bound_total = 0;
    double dev_i = 0.0, dev_d = 0.0, dev_en = 0.0;
    int en_compared = 0;

    for (const double omega_i : grid) {
        const BandPair pair = pair_at(cfg, omega_i);
        CorrelationReport row;
        bool valid = true;
        try {
            row = build_report(pair, env, gc, cfg.t);
        } catch (const validity_error&) {
            valid = false;
            row = CorrelationReport{};
            row.omega_i = pair.band_i.omega_center;
            row.omega_j = pair.band_j.omega_center;
            row.flags = {"unphysical"};
        }
        result.rows.push_back(row);
        result.row_valid.push_back(valid);
        if (!valid) ++result.flagged;

        const double e0 = row.E0;
        const double i_norm = valid && e0 > 0.0 ? row.I / (e0 * e0) : nan;
        const double d_norm = valid && e0 > 0.0 ? row.D / (e0 * e0) : nan;
        const double en_norm = valid && e0 > 0.0 ? row.E_N / e0 : nan;

        if (valid) {
            if (i_norm > max_i_norm) { max_i_norm = i_norm; peak_i_omega = row.omega_i; }
            if (en_norm > max_en_norm) { max_en_norm = en_norm; peak_en_omega = row.omega_i; }
            if (pair.relation == PairRelation::Resonant) {
                ++bound_total;
                const double rate = cfg.t > 0.0 ? row.gamma_t2 / (cfg.t * cfg.t) : 0.0;
                if (bound_check_ineq(row.mu_i, row.mu_j, rate, cfg.t)) ++bound_pass;
            }
            const bool degenerate =
                std::find(row.flags.begin(), row.flags.end(), "degenerate_purity") !=
                row.flags.end();
            if (!degenerate) {
                if (row.I_exact > 0.0)
                    dev_i = std::max(dev_i, std::abs(row.I - row.I_exact) / row.I_exact);
                if (row.D_exact > 0.0)
                    dev_d = std::max(dev_d, std::abs(row.D - row.D_exact) / row.D_exact);
                if (row.E_N_exact > 0.05) {
                    ++en_compared;
                    dev_en = std::max(dev_en,
                                      std::abs(row.E_N - row.E_N_exact) / row.E_N_exact);
                }
            }
        }

        const double cells[] = {row.omega_i, row.omega_j,
                                valid ? row.mu_i : nan, valid ? row.mu_j : nan,
                                valid ? row.gamma_t2 : nan, i_norm, d_norm,
                                valid ? row.D_over_I : nan, en_norm,
                                valid ? row.S_ij : nan, valid ? row.t_ent : nan,
                                valid ? row.Q_dot_i : nan, valid ? row.I : nan,
                                valid ? row.D : nan, valid ? row.E_N : nan};
        bool first = true;
        for (const double c : cells) {
            if (!first) csv << ",";
            csv << format_number(c);
            first = false;
        }
        csv << "," << flags_cell(row.flags) << "\n";
    }

    result.csv = csv.str();

    // Cutoff sensitivity of the peak mutual information (the cutoff is not
    // pinned by the reference scenarios, so reproduction runs report it).
    auto max_i_at_lambda = [&cfg](double lambda_factor) {
        SweepConfig alt = cfg;
        alt.Lambda = cfg.Lambda * lambda_factor;
        const GreenCoefficients gc2 = green_for(alt);
        const ThermalEnvironment env2 = environment_for(alt);
        double best = 0.0;
        for (const double w : sweep_grid(alt)) {
            try {
                const CorrelationReport r = build_report(pair_at(alt, w), env2, gc2, alt.t);
                best = std::max(best, r.I);
            } catch (const validity_error&) {
            }
        }
        return best;
    };
    const double base_max_i = [&] {
        double best = 0.0;
        for (size_t i = 0; i < result.rows.size(); ++i)
            if (result.row_valid[i]) best = std::max(best, result.rows[i].I);
        return best;
    }();

    result.summary.emplace_back("grid_points", std::to_string(grid.size()));
    result.summary.emplace_back("flagged_rows", std::to_string(result.flagged));
    result.summary.emplace_back("peak_I_omega_i", format_number(peak_i_omega));
    result.summary.emplace_back("max_I_over_E0sq", format_number(max_i_norm));
    result.summary.emplace_back("peak_EN_omega_i", format_number(peak_en_omega));
    result.summary.emplace_back("max_EN_over_E0", format_number(max_en_norm));
    result.summary.emplace_back("bound_checks_passed", std::to_string(bound_pass));
    result.summary.emplace_back("bound_checks_total", std::to_string(bound_total));
    result.summary.emplace_back("closed_vs_exact_max_rel_I", format_number(dev_i));
    result.summary.emplace_back("closed_vs_exact_max_rel_D", format_number(dev_d));
    result.summary.emplace_back("closed_vs_exact_max_rel_EN", format_number(dev_en));
    result.summary.emplace_back("EN_points_compared", std::to_string(en_compared));
    if (base_max_i > 0.0) {
        result.summary.emplace_back(
            "lambda_x2_max_I_rel_change",
            format_number(std::abs(max_i_at_lambda(2.0) - base_max_i) / base_max_i));
        result.summary.emplace_back(
            "lambda_half_max_I_rel_change",
            format_number(std::abs(max_i_at_lambda(0.5) - base_max_i) / base_max_i));
    }
    for (const auto& w : gc.warnings()) result.summary.emplace_back("warning", w);

    if (result.flagged * 2 > static_cast<int>(grid.size())) result.exit_code = 3;
    return result;
}

std::string summary_text(const SweepResult& result) {
    std::ostringstream out;
    for (const auto& [k, v] : result.summary) out << k << " = " << v << "\n";
    return out.str();
}

void write_text(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output path: " + path);
    out << bytes;
}

// ---------------------------------------------------------------------------
// Discrete-oracle comparison
// ---------------------------------------------------------------------------

namespace {

struct OracleSetup {
    DiscreteModel model;
    GreenCoefficients gc;
    ThermalEnvironment env;
    TrackedPair nonres, res;
    BandPair pair_nonres, pair_res;
    double dt;
    double transient_cut;
    double t_final;
};

OracleSetup make_oracle_setup(const SweepConfig& cfg, double T_R, double T_L, int cycles) {
    DiscreteModelParams params;
    params.modes_per_side = cfg.oracle_modes;
    params.omega_max = cfg.oracle_omega_max;
    params.gamma0 = cfg.gamma0;
    params.Lambda = cfg.oracle_lambda;
    params.omega_r = cfg.oracle_omega_r;
    params.drive_amplitude = cfg.oracle_V;
    params.T_R = T_R;
    params.T_L = T_L;
    params.mass_system = cfg.m;
    params.mass_env = cfg.m_i;

    // Put the driving frequency on the grid with omega_d/4 also on-grid, so
    // every tracked-band beat is killed exactly by the 4-cycle averages.
    const double delta = params.omega_max / params.modes_per_side;
    int quarter = static_cast<int>(std::lround(cfg.oracle_omega_r / std::sqrt(11.0) / (4.0 * delta)));
    quarter = std::max(1, quarter);
    params.omega_d = 4.0 * quarter * delta;

    DiscreteModel model = build_discrete_model(params);

    SpectralDensity sd;
    sd.gamma0 = params.gamma0;
    sd.Lambda = params.Lambda;
    sd.mass_system = params.mass_system;
    sd.mass_env = params.mass_env;
    DrivingSpec driving =
        DrivingSpec::single_cosine(params.omega_r, params.omega_d, params.drive_amplitude);

    OracleSetup setup{std::move(model),
                      solve_green_coefficients(sd, driving, 2),
                      ThermalEnvironment::uniform(T_R, T_L, sd),
                      TrackedPair{quarter, 3 * quarter},
                      TrackedPair{quarter, 5 * quarter},
                      BandPair{},
                      BandPair{},
                      0.0,
                      0.0,
                      0.0};
    setup.pair_nonres =
        BandPair::make_nonresonant(quarter * delta, delta, 1, params.omega_d);
    setup.pair_res = BandPair::make_resonant(quarter * delta, delta, 1, params.omega_d);
    setup.dt = 0.05 / params.omega_max;
    setup.transient_cut = 5.0 / setup.model.transient_rate();
    const double period = 2.0 * std::numbers::pi_v<double> / params.omega_d;
    setup.t_final = setup.transient_cut + cycles * period;
    return setup;
}

double rel_err(double fitted, double predicted, double floor) {
    const double scale = std::max(std::abs(predicted), floor);
    return std::abs(fitted - predicted) / scale;
}

}  // namespace

OracleComparison run_oracle_comparison(const SweepConfig& cfg) {
    OracleSetup setup = make_oracle_setup(cfg, cfg.oracle_T_R, cfg.oracle_T_L, cfg.oracle_cycles);
    const TrackedPair pairs[] = {setup.nonres, setup.res};
    OracleComparison cmp;
    cmp.trajectory = evolve_covariance(setup.model, setup.t_final, setup.dt, pairs);
    cmp.symplectic_drift = cmp.trajectory.symplectic_drift;
    cmp.counterterm_capture = setup.model.counterterm_capture;

    const FittedRates fit_nr =
        extract_band_rates(cmp.trajectory, 0, setup.model, setup.transient_cut);
    const FittedRates fit_r =
        extract_band_rates(cmp.trajectory, 1, setup.model, setup.transient_cut);
    cmp.fit_r_squared_min = std::min(fit_nr.r_squared_min, fit_r.r_squared_min);

    const double delta = setup.model.delta_omega;
    auto predict = [&](const BandPair& pair) {
        struct {
            double gamma, qdot_i, qdot_j, slope_i, slope_j;
        } p{};
        p.gamma = pair.relation == PairRelation::Nonresonant
                      ? gamma_plus(pair, setup.env, setup.gc)
                      : gamma_minus(pair, setup.env, setup.gc);
        p.qdot_i = heat_current(pair.band_i, setup.env, setup.gc).per_delta_omega * delta;
        p.qdot_j = heat_current(pair.band_j, setup.env, setup.gc).per_delta_omega * delta;
        p.slope_i = band_rates(pair.band_i, setup.env, setup.gc).total();
        p.slope_j = band_rates(pair.band_j, setup.env, setup.gc).total();
        return p;
    };
    const auto pred_nr = predict(setup.pair_nonres);
    const auto pred_r = predict(setup.pair_res);

    const double gamma_floor = 1e-3 * std::abs(pred_nr.gamma);
    const double qdot_floor =
        1e-3 * std::max({std::abs(pred_nr.qdot_i), std::abs(pred_nr.qdot_j),
                         std::abs(pred_r.qdot_i), std::abs(pred_r.qdot_j)});
    const double slope_floor =
        1e-3 * std::max({std::abs(pred_nr.slope_i), std::abs(pred_nr.slope_j),
                         std::abs(pred_r.slope_i), std::abs(pred_r.slope_j)});

    auto push = [&cmp](const std::string& name, double pred, double fit, double floor) {
        cmp.quantities.push_back({name, pred, fit, rel_err(fit, pred, floor)});
    };
    push("nonresonant Gamma_plus", pred_nr.gamma, fit_nr.gamma_fit, gamma_floor);
    push("nonresonant Qdot_i", pred_nr.qdot_i, fit_nr.qdot_i, qdot_floor);
    push("nonresonant Qdot_j", pred_nr.qdot_j, fit_nr.qdot_j, qdot_floor);
    push("nonresonant purity slope i", pred_nr.slope_i, fit_nr.purity_slope_i, slope_floor);
    push("nonresonant purity slope j", pred_nr.slope_j, fit_nr.purity_slope_j, slope_floor);
    push("resonant Gamma_minus", pred_r.gamma, fit_r.gamma_fit, gamma_floor);
    push("resonant Qdot_i", pred_r.qdot_i, fit_r.qdot_i, qdot_floor);
    push("resonant Qdot_j", pred_r.qdot_j, fit_r.qdot_j, qdot_floor);
    push("resonant purity slope i", pred_r.slope_i, fit_r.purity_slope_i, slope_floor);
    push("resonant purity slope j", pred_r.slope_j, fit_r.purity_slope_j, slope_floor);

    for (const auto& q : cmp.quantities) cmp.max_rel_err = std::max(cmp.max_rel_err, q.rel_err);
    cmp.pass = cmp.max_rel_err <= 0.15 && cmp.symplectic_drift < 1e-6;
    return cmp;
}

OracleT0Check run_oracle_t0_check(const SweepConfig& cfg) {
    SweepConfig small = cfg;
    small.oracle_modes = std::max(100, cfg.oracle_modes / 2);
    OracleSetup setup = make_oracle_setup(small, 0.0, 0.0, 16);
    const double recurrence = 2.0 * std::numbers::pi_v<double> / setup.model.delta_omega;
    while (setup.t_final >= 0.95 * recurrence)
        setup.t_final -= 2.0 * std::numbers::pi_v<double> / setup.model.params.omega_d;

    const TrackedPair pairs[] = {setup.nonres, setup.res};
    const CovarianceTrajectory traj =
        evolve_covariance(setup.model, setup.t_final, setup.dt, pairs);
    const FittedRates fit_nr = extract_band_rates(traj, 0, setup.model, setup.transient_cut);
    const FittedRates fit_r = extract_band_rates(traj, 1, setup.model, setup.transient_cut);

    OracleT0Check check;
    check.gamma_minus_fit = fit_r.gamma_fit;
    check.gamma_plus_fit = fit_nr.gamma_fit;
    check.gamma_plus_pred = gamma_plus(setup.pair_nonres, setup.env, setup.gc);
    check.qdot_sum = fit_nr.qdot_i + fit_nr.qdot_j;
    check.pass = check.gamma_plus_fit < 0.0 &&
                 std::abs(check.gamma_minus_fit) < 0.05 * std::abs(check.gamma_plus_fit) &&
                 check.qdot_sum > 0.0 &&
                 rel_err(check.gamma_plus_fit, check.gamma_plus_pred,
                         1e-3 * std::abs(check.gamma_plus_pred)) < 0.2;
    return check;
}

// ---------------------------------------------------------------------------
// Validation battery
// ---------------------------------------------------------------------------

namespace {

using CheckFn = std::function<std::pair<bool, std::string>()>;

void run_check(ValidationReport& report, const std::string& name, const CheckFn& fn) {
    InvariantResult r;
    r.name = name;
    try {
        auto [pass, detail] = fn();
        r.pass = pass;
        r.detail = detail;
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    if (!r.pass && report.all_pass) {
        report.all_pass = false;
        report.first_failure = name;
    }
    report.invariants.push_back(r);
}

TwoModeCovariance random_physical_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (;;) {
        const double a = 0.5 + 2.0 * uni(rng);
        const double b = 0.5 + 2.0 * uni(rng);
        const double cmax = std::sqrt((a - 0.5) * (b - 0.5));
        const double c1 = (2.0 * uni(rng) - 1.0) * 1.5 * cmax;
        const double c2 = (2.0 * uni(rng) - 1.0) * 1.5 * cmax;
        const TwoModeCovariance sigma = TwoModeCovariance::standard(a, b, c1, c2);
        if (is_physical(sigma)) return sigma;
    }
}

TwoModeCovariance random_local_conjugation(const TwoModeCovariance& sigma,
                                           std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto local = [&rng, &uni]() {
        return single_mode_rotation(2.0 * std::numbers::pi_v<double> * uni(rng)) *
               single_mode_squeeze(0.8 * (2.0 * uni(rng) - 1.0)) *
               single_mode_rotation(2.0 * std::numbers::pi_v<double> * uni(rng));
    };
    return conjugate_local(sigma, local(), local());
}

}  // namespace

ValidationReport run_validation(const SweepConfig& cfg, std::uint64_t seed) {
    ValidationReport report;

    run_check(report, "toolbox_physicality_and_local_invariance", [&] {
        std::mt19937_64 rng(seed);
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const TwoModeCovariance sigma = random_physical_state(rng);
            const TwoModeCovariance rotated = random_local_conjugation(sigma, rng);
            if (!is_physical(rotated, 1e-7)) return std::pair(false, std::string("conjugated state unphysical"));
            worst = std::max(worst, std::abs(mutual_information_exact(sigma) -
                                             mutual_information_exact(rotated)));
            worst = std::max(worst, std::abs(gaussian_discord_exact(sigma) -
                                             gaussian_discord_exact(rotated)));
            worst = std::max(worst, std::abs(log_negativity_exact(sigma) -
                                             log_negativity_exact(rotated)));
        }
        return std::pair(worst < 1e-9, "max deviation " + format_number(worst));
    });

    run_check(report, "toolbox_ppt_separability_and_bounds", [&] {
        std::mt19937_64 rng(seed + 1);
        for (int k = 0; k < 300; ++k) {
            const TwoModeCovariance sigma = random_physical_state(rng);
            const SymplecticInvariants inv = symplectic_invariants(sigma);
            const double en = log_negativity_exact(sigma);
            const double ppt = ppt_eigenvalue(inv);
            if ((en > 0.0) != (ppt < 0.5))
                return std::pair(false, std::string("PPT criterion mismatch"));
            const double i_exact = mutual_information_exact(sigma);
            const double d = gaussian_discord_exact(sigma);
            const double cap = 2.0 * std::min(entropy_f(std::sqrt(inv.A)),
                                              entropy_f(std::sqrt(inv.B)));
            if (i_exact > cap + 1e-9) return std::pair(false, std::string("Araki-Lieb violated"));
            if (d < -1e-12 || d > i_exact + 1e-9)
                return std::pair(false, std::string("discord outside [0, I]"));
        }
        return std::pair(true, std::string("300 random states"));
    });

    run_check(report, "green_reality_symmetry", [&] {
        const GreenCoefficients gc = green_for(cfg);
        double worst = 0.0;
        for (double w : {0.1 * cfg.omega_r, 0.45 * cfg.omega_r, 1.3 * cfg.omega_r})
            for (int k = -gc.k_max(); k <= gc.k_max(); ++k)
                worst = std::max(worst, std::abs(gc.evaluate_Ak(k, w) -
                                                 std::conj(gc.evaluate_Ak(-k, -w))));
        return std::pair(worst < 1e-12, "max asymmetry " + format_number(worst));
    });

    run_check(report, "green_residual_monotone", [&] {
        std::vector<double> residuals;
        const Complex s(0.0, 0.9 * cfg.omega_r);
        const double scale = std::abs(static_green(spectral_for(cfg), driving_for(cfg), s));
        for (int m = 0; m <= 6; ++m) {
            const GreenCoefficients gc =
                solve_green_coefficients(spectral_for(cfg), driving_for(cfg), m);
            residuals.push_back(gc.residual_check(s));
        }
        for (size_t i = 1; i < residuals.size(); ++i)
            if (residuals[i] > residuals[i - 1] * (1.0 + 1e-9) && residuals[i] > 1e-13 * scale)
                return std::pair(false, std::string("residual grew at order ") + std::to_string(i));
        return std::pair(true, std::string("orders 0..6"));
    });

    run_check(report, "bands_closed_vs_exact", [&] {
        const SweepResult res = run_sweep(cfg);
        double dev = 0.0;
        for (const auto& [k, v] : res.summary)
            if (k.rfind("closed_vs_exact", 0) == 0) dev = std::max(dev, std::stod(v));
        const double tol = std::max(0.05, 10.0 * cfg.gamma0 / cfg.omega_r);
        return std::pair(dev <= tol, "max relative deviation " + format_number(dev));
    });

    run_check(report, "bands_resonant_bounds_and_separability", [&] {
        for (char v : {'a', 'b', 'c'}) {
            const SweepConfig sc = fig3_scenario(v);
            const GreenCoefficients gc = green_for(sc);
            const ThermalEnvironment env = environment_for(sc);
            for (const double w : sweep_grid(sc)) {
                const BandPair pair = pair_at(sc, w);
                const CorrelationReport r = build_report(pair, env, gc, sc.t);
                if (r.I > 1.0 + 1e-9 || r.D > 1.0 + 1e-9)
                    return std::pair(false, std::string("resonant bound violated"));
                const double rate = r.gamma_t2 / (sc.t * sc.t);
                if (!bound_check_ineq(r.mu_i, r.mu_j, rate, sc.t))
                    return std::pair(false, std::string("transport inequality violated"));
                if (r.E_N_exact != 0.0)
                    return std::pair(false, std::string("resonant log-negativity nonzero"));
            }
        }
        return std::pair(true, std::string("3 resonant scenarios x grid"));
    });

    run_check(report, "bands_heating_sign", [&] {
        const GreenCoefficients gc = green_for(cfg);
        const ThermalEnvironment env = environment_for(cfg);
        for (const double w : sweep_grid(cfg)) {
            const BandPair pair = pair_at(cfg, w);
            if (heat_current(pair.band_i, env, gc).pair_part < 0.0 ||
                heat_current(pair.band_j, env, gc).pair_part < 0.0)
                return std::pair(false, std::string("pair-creation heating negative"));
        }
        return std::pair(true, std::string("pair term >= 0 across grid"));
    });

    run_check(report, "bands_discord_ratio_ordering", [&] {
        for (double mu_i : {0.15, 0.35, 0.55, 0.75, 0.92})
            for (double mu_j : {0.2, 0.4, 0.6, 0.85}) {
                const double nr = discord_ratio_closed(mu_i, mu_j, PairRelation::Nonresonant);
                const double r = discord_ratio_closed(mu_i, mu_j, PairRelation::Resonant);
                if (!(nr < r)) return std::pair(false, std::string("ordering violated"));
            }
        return std::pair(true, std::string("D+/I+ < D-/I- on purity grid"));
    });

    run_check(report, "identity_fuzz", [&] {
        std::mt19937_64 rng(seed + 2);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double mu_i = 0.05 + 0.95 * uni(rng);
            const double mu_j = 0.05 + 0.95 * uni(rng);
            const double rate = -std::pow(10.0, -8.0 + 6.0 * uni(rng));
            const NegativityClosed neg = negativity_closed(mu_i, mu_j, rate, 0.0);
            if (!(neg.Gamma_N > 0.0)) continue;
            const double t = neg.t_ent * (1.01 + 3.0 * uni(rng));
            const NegativityClosed at_t = negativity_closed(mu_i, mu_j, rate, t);
            const double resid = generator_negativity_identity(at_t.E_N, at_t.S_ij,
                                                               at_t.Gamma_N, rate, t);
            worst = std::max(worst, resid / (std::abs(rate) * t * t));
        }
        return std::pair(worst < 1e-10, "max relative residual " + format_number(worst));
    });

    run_check(report, "sweep_determinism", [&] {
        SweepConfig small = cfg;
        small.omega_i_count = 11;
        const SweepResult a = run_sweep(small);
        const SweepResult b = run_sweep(small);
        return std::pair(a.csv == b.csv, std::string("csv bytes ") +
                                             (a.csv == b.csv ? "identical" : "differ"));
    });

    if (cfg.oracle) {
        run_check(report, "oracle_agreement", [&] {
            const OracleComparison cmp = run_oracle_comparison(cfg);
            std::string detail = "max rel err " + format_number(cmp.max_rel_err) +
                                 ", symplectic drift " + format_number(cmp.symplectic_drift);
            return std::pair(cmp.pass, detail);
        });
    }

    return report;
}

std::string validation_to_json(const ValidationReport& report) {
    nlohmann::json j;
    j["all_pass"] = report.all_pass;
    j["first_failure"] = report.first_failure;
    j["invariants"] = nlohmann::json::array();
    for (const auto& inv : report.invariants)
        j["invariants"].push_back(
            {{"name", inv.name}, {"pass", inv.pass}, {"detail", inv.detail}});
    return j.dump(2);
}

}  // namespace qbm
