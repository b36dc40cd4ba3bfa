#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qbm/sweep.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out;
    std::string relation;
    int harmonic = 0;
    int order = -1;
    std::uint64_t seed = 20240915;
};

qbm::SweepConfig resolve_config(const CommonOptions& opt) {
    qbm::SweepConfig cfg =
        opt.config_path.empty() ? qbm::parse_config("") : qbm::load_config_file(opt.config_path);
    if (!opt.out.empty()) cfg.out = opt.out;
    if (!opt.relation.empty()) {
        if (opt.relation == "nonresonant")
            cfg.relation = qbm::PairRelation::Nonresonant;
        else if (opt.relation == "resonant")
            cfg.relation = qbm::PairRelation::Resonant;
        else
            throw qbm::config_error("invalid --relation (nonresonant|resonant)");
    }
    if (opt.harmonic > 0) cfg.harmonic = opt.harmonic;
    if (opt.order >= 0) cfg.order = opt.order;
    return cfg;
}

void add_common(CLI::App* app, CommonOptions& opt) {
    app->add_option("--config", opt.config_path, "flat key-value config file");
    app->add_option("--out", opt.out, "output path override");
    app->add_option("--relation", opt.relation, "nonresonant | resonant");
    app->add_option("--harmonic", opt.harmonic, "resonance harmonic k");
    app->add_option("--order", opt.order, "perturbative order (0 = auto)");
    app->add_option("--seed", opt.seed, "seed for randomized validation suites");
}

int cmd_sweep(const CommonOptions& opt) {
    const qbm::SweepConfig cfg = resolve_config(opt);
    const qbm::SweepResult result = qbm::run_sweep(cfg);
    qbm::write_text(cfg.out, result.csv);
    std::cout << qbm::summary_text(result);
    std::cout << "csv = " << cfg.out << "\n";
    return result.exit_code;
}

int cmd_validate(const CommonOptions& opt) {
    const qbm::SweepConfig cfg = resolve_config(opt);
    const qbm::ValidationReport report = qbm::run_validation(cfg, opt.seed);
    const std::string json = qbm::validation_to_json(report);
    if (!opt.out.empty() && opt.out != cfg.out) qbm::write_text(opt.out, json);
    std::cout << json << "\n";
    if (!report.all_pass) {
        std::cerr << "first failing invariant: " << report.first_failure << "\n";
        return 4;
    }
    return 0;
}

int cmd_oracle(const CommonOptions& opt) {
    const qbm::SweepConfig cfg = resolve_config(opt);
    const qbm::OracleComparison cmp = qbm::run_oracle_comparison(cfg);
    std::printf("%-28s %14s %14s %10s\n", "quantity", "predicted", "fitted", "rel_err");
    for (const auto& q : cmp.quantities)
        std::printf("%-28s %14.6g %14.6g %9.2f%%\n", q.name.c_str(), q.predicted, q.fitted,
                    100.0 * q.rel_err);
    std::printf("symplectic_drift = %.3g\n", cmp.symplectic_drift);
    std::printf("fit_r_squared_min = %.6f\n", cmp.fit_r_squared_min);
    std::printf("counterterm_capture = %.4f\n", cmp.counterterm_capture);
    std::printf("max_rel_err = %.2f%%\n", 100.0 * cmp.max_rel_err);
    if (!opt.out.empty()) {
        qbm::dump_trajectory(cmp.trajectory, opt.out);
        std::printf("trajectory = %s\n", opt.out.c_str());
    }
    if (!cmp.pass) {
        std::cerr << "oracle comparison outside the 15% agreement window\n";
        return 4;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intraenvironmental band correlations of a driven open quantum system"};
    app.require_subcommand(1);

    CommonOptions opt;
    CLI::App* sweep = app.add_subcommand("sweep", "run a frequency sweep and write CSV");
    CLI::App* validate = app.add_subcommand("validate", "run the invariant battery");
    CLI::App* oracle = app.add_subcommand("oracle", "run the discrete brute-force comparison");
    add_common(sweep, opt);
    add_common(validate, opt);
    add_common(oracle, opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return cmd_sweep(opt);
        if (validate->parsed()) return cmd_validate(opt);
        if (oracle->parsed()) return cmd_oracle(opt);
    } catch (const qbm::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
