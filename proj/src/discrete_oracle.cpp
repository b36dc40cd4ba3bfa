#include "qbm/discrete_oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "qbm/band_correlations.hpp"

namespace qbm {

namespace {
constexpr double kPi = std::numbers::pi_v<double>;
constexpr double kCountertermTol = 0.02;
constexpr double kSpectrumDriftTol = 1e-6;
}  // namespace

double DiscreteModel::transient_rate() const {
    const double l2 = params.Lambda * params.Lambda;
    return 2.0 * params.gamma0 * l2 / (params.omega_r * params.omega_r + l2);
}

DiscreteModel build_discrete_model(const DiscreteModelParams& params) {
    if (params.modes_per_side < 100)
        throw std::invalid_argument("discrete model needs at least 100 modes per side");
    if (params.omega_max < std::max(2.0 * params.omega_r, 2.0 * params.omega_d + params.omega_r))
        throw std::invalid_argument("omega_max must cover 2*omega_r and the driven sidebands");

    DiscreteModel model;
    model.params = params;
    const int n = params.modes_per_side;
    model.delta_omega = params.omega_max / n;

    SpectralDensity sd;
    sd.gamma0 = params.gamma0;
    sd.Lambda = params.Lambda;
    sd.mass_system = params.mass_system;
    sd.mass_env = params.mass_env;

    model.omega.resize(n);
    model.coupling.resize(n);
    model.counterterm = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = (i + 1) * model.delta_omega;
        model.omega[i] = w;
        const double i_over_m = sd.over_mass(w);
        // lambda_n^2 = m_n w_n I(w_n) dw; in scaled quadratures the coupling
        // is g_n = sqrt(I(w_n) dw / (m w_r)).
        model.coupling[i] = std::sqrt(i_over_m * model.delta_omega / params.omega_r);
        model.counterterm += i_over_m * model.delta_omega / w;
    }
    // Both reservoirs couple to the system, so the counterterm sums over all
    // 2N modes.
    model.counterterm *= 2.0;

    model.counterterm_integral = 2.0 * (2.0 * params.gamma0 * params.Lambda / kPi) *
                                 std::atan(params.omega_max / params.Lambda);
    model.counterterm_capture =
        model.counterterm / (2.0 * params.gamma0 * params.Lambda);

    if (model.counterterm_integral > 0.0) {
        const double mismatch = std::abs(model.counterterm - model.counterterm_integral) /
                                model.counterterm_integral;
        if (mismatch > kCountertermTol) {
            const int suggested = static_cast<int>(std::ceil(n * mismatch / kCountertermTol));
            throw std::invalid_argument("grid too coarse: counterterm mismatch " +
                                        std::to_string(mismatch) + "; suggest N >= " +
                                        std::to_string(suggested));
        }
    }
    return model;
}

namespace {

struct RotationTable {
    std::vector<double> c, sq, sp;  // Q' = c Q + sq P ; P' = c P - sp Q
};

RotationTable make_rotation(const DiscreteModel& model, double tau) {
    const int half = model.dim() / 2;
    RotationTable table;
    table.c.resize(half);
    table.sq.resize(half);
    table.sp.resize(half);
    const double bare = model.params.omega_r * model.params.omega_r + model.counterterm;
    const double omega_s = std::sqrt(bare);
    const double wr = model.params.omega_r;
    table.c[0] = std::cos(omega_s * tau);
    table.sq[0] = (wr / omega_s) * std::sin(omega_s * tau);
    table.sp[0] = (omega_s / wr) * std::sin(omega_s * tau);
    const int n = model.params.modes_per_side;
    for (int m = 0; m < 2 * n; ++m) {
        const double w = model.omega[m % n];
        table.c[1 + m] = std::cos(w * tau);
        table.sq[1 + m] = std::sin(w * tau);
        table.sp[1 + m] = table.sq[1 + m];
    }
    return table;
}

inline void apply_rotation(const RotationTable& t, double* __restrict q, double* __restrict p,
                           int half) {
    const double* __restrict c = t.c.data();
    const double* __restrict sq = t.sq.data();
    const double* __restrict sp = t.sp.data();
    for (int i = 0; i < half; ++i) {
        const double qi = q[i];
        const double pi = p[i];
        q[i] = c[i] * qi + sq[i] * pi;
        p[i] = c[i] * pi - sp[i] * qi;
    }
}

// Exact flow of the position-only Hamiltonian pieces over duration b:
// P -= b [V_osc(t)/w_r X + sum g Q],  P_n -= b g_n X. `g2` duplicates the
// coupling vector over both reservoirs so the loops stay contiguous.
inline void apply_kick(const double* __restrict g2, int modes, double vosc_over_wr, double b,
                       double* __restrict q, double* __restrict p) {
    const double x = q[0];
    const double bx = b * x;
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    int m = 0;
    for (; m + 4 <= modes; m += 4) {
        acc0 += g2[m] * q[1 + m];
        acc1 += g2[m + 1] * q[2 + m];
        acc2 += g2[m + 2] * q[3 + m];
        acc3 += g2[m + 3] * q[4 + m];
        p[1 + m] -= bx * g2[m];
        p[2 + m] -= bx * g2[m + 1];
        p[3 + m] -= bx * g2[m + 2];
        p[4 + m] -= bx * g2[m + 3];
    }
    for (; m < modes; ++m) {
        acc0 += g2[m] * q[1 + m];
        p[1 + m] -= bx * g2[m];
    }
    p[0] -= b * (vosc_over_wr * x + ((acc0 + acc1) + (acc2 + acc3)));
}

std::vector<double> initial_diagonal(const DiscreteModel& model) {
    const int half = model.dim() / 2;
    std::vector<double> diag(2 * half);
    diag[0] = 0.5;
    diag[half] = 0.5;
    const int n = model.params.modes_per_side;
    for (int m = 0; m < 2 * n; ++m) {
        const double w = model.omega[m % n];
        const double T = m < n ? model.params.T_R : model.params.T_L;
        const double nu = (T > 0.0 ? planck_occupation(w, T) : 0.0) + 0.5;
        diag[1 + m] = nu;
        diag[half + 1 + m] = nu;
    }
    return diag;
}

// Williamson spectrum of a positive-definite covariance in the split
// (Q-block, P-block) layout, via eigenvalues of -(L^T Omega L)^2.
std::vector<double> symplectic_spectrum(const Eigen::MatrixXd& sigma) {
    const int d = static_cast<int>(sigma.rows());
    const int half = d / 2;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("covariance not positive definite at checkpoint");
    Eigen::MatrixXd l = llt.matrixL();
    Eigen::MatrixXd omega_l(d, d);
    omega_l.topRows(half) = l.bottomRows(half);
    omega_l.bottomRows(half) = -l.topRows(half);
    Eigen::MatrixXd b = l.transpose() * omega_l;
    Eigen::MatrixXd c = -b * b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
    std::vector<double> nu(d);
    for (int i = 0; i < d; ++i) nu[i] = std::sqrt(std::max(0.0, es.eigenvalues()[i]));
    std::sort(nu.begin(), nu.end());
    return nu;
}

}  // namespace

CovarianceTrajectory evolve_covariance(const DiscreteModel& model, double t_final, double dt,
                                       std::span<const TrackedPair> pairs,
                                       int samples_per_cycle) {
    const double omega_max = model.params.omega_max;
    if (dt > 0.05 / omega_max) throw std::invalid_argument("reduce dt: dt must be <= 0.05/omega_max");
    const double recurrence = 2.0 * kPi / model.delta_omega;
    if (t_final >= recurrence)
        throw std::invalid_argument("t_final reaches the discretization recurrence horizon");

    const double period = 2.0 * kPi / model.params.omega_d;
    int steps_per_cycle = static_cast<int>(std::ceil(period / dt));
    steps_per_cycle =
        samples_per_cycle * ((steps_per_cycle + samples_per_cycle - 1) / samples_per_cycle);
    const double h = period / steps_per_cycle;
    const int stride = steps_per_cycle / samples_per_cycle;
    const int cycles = static_cast<int>(std::ceil(t_final / period));
    const long total_steps = static_cast<long>(cycles) * steps_per_cycle;
    const long n_samples = total_steps / stride + 1;

    const int d = model.dim();
    const int half = d / 2;
    const int n = model.params.modes_per_side;

    // Yoshida triple-jump composition of Strang splittings.
    const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
    const double w0 = 1.0 - 2.0 * w1;
    const RotationTable rot_a = make_rotation(model, 0.5 * w1 * h);
    const RotationTable rot_b = make_rotation(model, 0.5 * (w1 + w0) * h);
    const double kick_len[3] = {w1 * h, w0 * h, w1 * h};
    const double kick_off[3] = {0.5 * w1, w1 + 0.5 * w0, 1.5 * w1 + w0};

    // Oscillating part of the drive at each kick time (static part lives in
    // the system rotation).
    std::vector<double> kick_vosc(3 * total_steps);
    const double v_over_wr = model.params.drive_amplitude / model.params.omega_r;
    for (long step = 0; step < total_steps; ++step)
        for (int j = 0; j < 3; ++j)
            kick_vosc[3 * step + j] =
                v_over_wr * std::cos(model.params.omega_d * h * (step + kick_off[j]));

    // Tracked rows (split layout: Q at r, P at half + r).
    std::vector<int> rows;
    for (const TrackedPair& pr : pairs) {
        if (pr.index_R < 1 || pr.index_R > n || pr.index_L < 1 || pr.index_L > n)
            throw std::invalid_argument("tracked mode index outside the grid");
        rows.push_back(pr.index_R);          // R-side mode q-row
        rows.push_back(n + pr.index_L);      // L-side mode q-row
    }

    const std::vector<double> diag = initial_diagonal(model);
    std::vector<double> coupling2(2 * n);
    for (int m = 0; m < 2 * n; ++m) coupling2[m] = model.coupling[m % n];

    // Accumulators: per pair, per sample, upper triangle of the 4x4 block.
    CovarianceTrajectory traj;
    traj.dt = h;
    traj.steps_per_cycle = steps_per_cycle;
    traj.samples_per_cycle = samples_per_cycle;
    traj.cycle_period = period;
    traj.cycles = cycles;
    traj.pairs.assign(pairs.begin(), pairs.end());
    traj.times.resize(n_samples);
    for (long s = 0; s < n_samples; ++s) traj.times[s] = s * stride * h;
    traj.pair_blocks.assign(pairs.size(),
                            std::vector<std::array<double, 10>>(n_samples, {0.0}));

    const long chk_mid = (total_steps / (2 * stride)) * stride;
    Eigen::MatrixXd sigma_mid = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd sigma_end = Eigen::MatrixXd::Zero(d, d);

    // Column-at-a-time propagation of the fundamental matrix: each column of
    // Z evolves independently, and sigma(t) = Z diag Z^T accumulates over
    // columns. Keeps the whole state in cache for the entire run.
    std::vector<double> state(d);
    const size_t n_rows = 4 * pairs.size();
    std::vector<double> recorded(n_rows * n_samples);
    Eigen::VectorXd col(d);

    for (int c = 0; c < d; ++c) {
        std::fill(state.begin(), state.end(), 0.0);
        state[c] = 1.0;
        double* q = state.data();
        double* p = state.data() + half;

        long sample = 0;
        for (long step = 0;; ++step) {
            if (step % stride == 0) {
                double* rec = recorded.data() + sample;
                for (size_t pi = 0; pi < pairs.size(); ++pi) {
                    const int qi = rows[2 * pi];
                    const int qj = rows[2 * pi + 1];
                    rec[(4 * pi + 0) * n_samples] = q[qi];
                    rec[(4 * pi + 1) * n_samples] = p[qi];
                    rec[(4 * pi + 2) * n_samples] = q[qj];
                    rec[(4 * pi + 3) * n_samples] = p[qj];
                }
                if (step == chk_mid || step == total_steps) {
                    Eigen::Map<Eigen::VectorXd> v(state.data(), d);
                    col = v;
                    (step == total_steps ? sigma_end : sigma_mid)
                        .selfadjointView<Eigen::Lower>()
                        .rankUpdate(col, diag[c]);
                }
                ++sample;
            }
            if (step == total_steps) break;
            const double* g2 = coupling2.data();
            apply_rotation(rot_a, q, p, half);
            apply_kick(g2, 2 * n, kick_vosc[3 * step + 0], kick_len[0], q, p);
            apply_rotation(rot_b, q, p, half);
            apply_kick(g2, 2 * n, kick_vosc[3 * step + 1], kick_len[1], q, p);
            apply_rotation(rot_b, q, p, half);
            apply_kick(g2, 2 * n, kick_vosc[3 * step + 2], kick_len[2], q, p);
            apply_rotation(rot_a, q, p, half);
        }

        // Fold this column's contribution into the tracked blocks.
        const double weight = diag[c];
        for (size_t pi = 0; pi < pairs.size(); ++pi) {
            const double* ra = recorded.data() + (4 * pi + 0) * n_samples;
            const double* rb = recorded.data() + (4 * pi + 1) * n_samples;
            const double* rc = recorded.data() + (4 * pi + 2) * n_samples;
            const double* rd = recorded.data() + (4 * pi + 3) * n_samples;
            auto& blocks = traj.pair_blocks[pi];
            for (long s = 0; s < n_samples; ++s) {
                const double a = ra[s], b2 = rb[s], cc = rc[s], dd = rd[s];
                auto& e = blocks[s];
                e[0] += weight * a * a;
                e[1] += weight * a * b2;
                e[2] += weight * a * cc;
                e[3] += weight * a * dd;
                e[4] += weight * b2 * b2;
                e[5] += weight * b2 * cc;
                e[6] += weight * b2 * dd;
                e[7] += weight * cc * cc;
                e[8] += weight * cc * dd;
                e[9] += weight * dd * dd;
            }
        }
    }

    // Symplectic-spectrum conservation check against the exact initial values
    // (thermal product: each Williamson eigenvalue appears twice).
    std::vector<double> nu0(d);
    for (int i = 0; i < half; ++i) {
        nu0[2 * i] = diag[i];
        nu0[2 * i + 1] = diag[i];
    }
    std::sort(nu0.begin(), nu0.end());
    double drift = 0.0;
    const double chk_times[] = {chk_mid * h, total_steps * h};
    const double bare = model.params.omega_r * model.params.omega_r + model.counterterm;
    int which = 0;
    for (const Eigen::MatrixXd* chk : {&sigma_mid, &sigma_end}) {
        Eigen::MatrixXd full = chk->selfadjointView<Eigen::Lower>();
        const std::vector<double> nu = symplectic_spectrum(full);
        for (int i = 0; i < d; ++i)
            drift = std::max(drift, std::abs(nu[i] - nu0[i]) / nu0[i]);

        // Total energy <H> at the checkpoint (drive phase included).
        const double t_chk = chk_times[which];
        const double v_t = bare + model.params.drive_amplitude *
                                      std::cos(model.params.omega_d * t_chk);
        const double wr = model.params.omega_r;
        double energy = 0.5 * (v_t / wr) * full(0, 0) + 0.5 * wr * full(half, half);
        for (int m = 0; m < 2 * n; ++m) {
            const double w = model.omega[m % n];
            energy += 0.5 * w * (full(1 + m, 1 + m) + full(half + 1 + m, half + 1 + m));
            energy += coupling2[m] * full(0, 1 + m);
        }
        traj.checkpoint_times.push_back(t_chk);
        traj.checkpoint_energies.push_back(energy);
        ++which;
    }
    traj.symplectic_drift = drift;
    if (drift > kSpectrumDriftTol)
        throw std::runtime_error("reduce dt: symplectic spectrum drift " + std::to_string(drift));

    return traj;
}

namespace {

struct FitResult {
    Eigen::VectorXd coeffs;
    double r_squared;
};

FitResult least_squares(const std::vector<double>& t, const std::vector<double>& y,
                        bool quadratic, double decay_rate, double t_ref) {
    const int nrows = static_cast<int>(t.size());
    const int ncols = quadratic ? 4 : 3;
    Eigen::MatrixXd a(nrows, ncols);
    Eigen::VectorXd b(nrows);
    for (int i = 0; i < nrows; ++i) {
        const double tt = t[i] - t_ref;
        a(i, 0) = 1.0;
        a(i, 1) = tt;
        a(i, 2) = quadratic ? tt * tt : std::exp(-decay_rate * tt);
        if (quadratic) a(i, 3) = std::exp(-decay_rate * tt);
        b(i) = y[i];
    }
    FitResult out;
    out.coeffs = a.colPivHouseholderQr().solve(b);
    const Eigen::VectorXd resid = b - a * out.coeffs;
    const double mean = b.mean();
    const double ss_tot = (b.array() - mean).square().sum();
    const double ss_res = resid.squaredNorm();
    // Series without meaningful variation (for example a transport generator
    // at zero temperature) are flat up to rounding; a fit of a constant is
    // fine and reports R^2 = 1.
    const double range = b.maxCoeff() - b.minCoeff();
    const bool flat = range <= 1e-8 * (1.0 + std::abs(mean));
    out.r_squared = (flat || ss_tot <= 0.0) ? 1.0 : 1.0 - ss_res / ss_tot;
    return out;
}

}  // namespace

FittedRates extract_band_rates(const CovarianceTrajectory& traj, int pair_index,
                               const DiscreteModel& model, double transient_cut) {
    const auto& blocks = traj.pair_blocks.at(pair_index);
    const int spc = traj.samples_per_cycle;
    const int cycles = traj.cycles;
    if ((cycles - static_cast<int>(std::ceil(transient_cut / traj.cycle_period))) < 12)
        throw std::invalid_argument("trajectory too short past the transient window");

    // Flat per-cycle means: the uniform sample phases annihilate every
    // driving harmonic and (with the tracked bands on the omega_d/4 lattice)
    // all band beats across 4-cycle windows. The cross block rotates at the
    // driving frequency with a growing envelope, so its determinant -- a
    // rotation invariant -- is averaged per sample rather than entry-wise.
    std::vector<std::array<double, 10>> cycle_mean(cycles, {0.0});
    std::vector<double> cycle_det_gamma(cycles, 0.0);
    for (int c = 0; c < cycles; ++c) {
        for (int s = 0; s < spc; ++s) {
            const auto& e = blocks[static_cast<size_t>(c) * spc + s];
            for (int k = 0; k < 10; ++k) cycle_mean[c][k] += e[k];
            cycle_det_gamma[c] += e[2] * e[6] - e[3] * e[5];
        }
        for (int k = 0; k < 10; ++k) cycle_mean[c][k] /= spc;
        cycle_det_gamma[c] /= spc;
    }

    std::vector<double> t_w;
    std::vector<std::array<double, 10>> window;
    std::vector<double> det_gamma;
    for (int c = 0; c + 4 <= cycles; ++c) {
        const double center = (c + 2.0) * traj.cycle_period;
        if (center < transient_cut) continue;
        std::array<double, 10> m{};
        for (int k = 0; k < 10; ++k)
            m[k] = 0.25 * (cycle_mean[c][k] + cycle_mean[c + 1][k] + cycle_mean[c + 2][k] +
                           cycle_mean[c + 3][k]);
        window.push_back(m);
        det_gamma.push_back(0.25 * (cycle_det_gamma[c] + cycle_det_gamma[c + 1] +
                                    cycle_det_gamma[c + 2] + cycle_det_gamma[c + 3]));
        t_w.push_back(center);
    }
    if (t_w.size() < 6) throw std::invalid_argument("too few windows past the transient");

    const double rate = model.transient_rate();
    const double t_ref = t_w.front();
    const double omega_i = traj.pairs.at(pair_index).index_R * model.delta_omega;
    const double omega_j = traj.pairs.at(pair_index).index_L * model.delta_omega;

    std::vector<double> e_i, e_j, root_i, root_j;
    for (const auto& m : window) {
        const double det_a = m[0] * m[4] - m[1] * m[1];
        const double det_b = m[7] * m[9] - m[8] * m[8];
        root_i.push_back(2.0 * std::sqrt(std::max(0.0, det_a)));
        root_j.push_back(2.0 * std::sqrt(std::max(0.0, det_b)));
        e_i.push_back(0.5 * omega_i * (m[0] + m[4]));
        e_j.push_back(0.5 * omega_j * (m[7] + m[9]));
    }

    FittedRates out;
    out.windows = static_cast<int>(t_w.size());
    const FitResult fit_ei = least_squares(t_w, e_i, false, rate, t_ref);
    const FitResult fit_ej = least_squares(t_w, e_j, false, rate, t_ref);
    const FitResult fit_ri = least_squares(t_w, root_i, false, rate, t_ref);
    const FitResult fit_rj = least_squares(t_w, root_j, false, rate, t_ref);
    const FitResult fit_g = least_squares(t_w, det_gamma, true, rate, t_ref);

    out.r_squared_min = std::min({fit_ei.r_squared, fit_ej.r_squared, fit_ri.r_squared,
                                  fit_rj.r_squared, fit_g.r_squared});
    if (out.r_squared_min < 0.9)
        throw std::runtime_error("transient not decayed or regime invalid (fit R^2 < 0.9)");

    out.qdot_i = fit_ei.coeffs(1);
    out.qdot_j = fit_ej.coeffs(1);
    out.purity_slope_i = fit_ri.coeffs(1);
    out.purity_slope_j = fit_rj.coeffs(1);
    out.gamma_fit = 4.0 * fit_g.coeffs(2);

    const FitResult diag_quad = least_squares(t_w, e_i, true, rate, t_ref);
    const double span = t_w.back() - t_w.front();
    const double lin = std::abs(diag_quad.coeffs(1)) * span;
    const double quad = std::abs(diag_quad.coeffs(2)) * span * span;
    out.diag_quadratic_rel = lin > 0.0 ? quad / lin : 0.0;
    return out;
}

void dump_trajectory(const CovarianceTrajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trajectory dump path: " + path);
    out << "t";
    for (size_t p = 0; p < traj.pair_blocks.size(); ++p)
        for (const char* name :
             {"QQi", "QPi", "Qqj", "Qpj", "PPi", "Pqj", "Ppj", "qqj", "qpj", "ppj"})
            out << ",pair" << p << "_" << name;
    out << "\n";
    char buf[32];
    for (size_t s = 0; s < traj.times.size(); ++s) {
        std::snprintf(buf, sizeof(buf), "%.12g", traj.times[s]);
        out << buf;
        for (const auto& blocks : traj.pair_blocks) {
            for (int k = 0; k < 10; ++k) {
                std::snprintf(buf, sizeof(buf), "%.12g", blocks[s][k]);
                out << "," << buf;
            }
        }
        out << "\n";
    }
}

}  // namespace qbm
