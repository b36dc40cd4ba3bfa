#include "qbm/gaussian_toolbox.hpp"

#include <cmath>
#include <stdexcept>

namespace qbm {

namespace {

constexpr double kDiscriminantClamp = 1e-10;

Eigen::Matrix2d symmetrize(const Eigen::Matrix2d& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

void TwoModeCovariance::detect_standard_form() {
    has_sf_ = alpha_(0, 1) == 0.0 && alpha_(0, 0) == alpha_(1, 1) && beta_(0, 1) == 0.0 &&
              beta_(0, 0) == beta_(1, 1) && gamma_(0, 1) == 0.0 && gamma_(1, 0) == 0.0;
    if (has_sf_) {
        sf_[0] = alpha_(0, 0);
        sf_[1] = beta_(0, 0);
        sf_[2] = gamma_(0, 0);
        sf_[3] = gamma_(1, 1);
    }
}

TwoModeCovariance::TwoModeCovariance()
    : alpha_(Eigen::Matrix2d::Identity() * kVacuumVariance),
      beta_(Eigen::Matrix2d::Identity() * kVacuumVariance),
      gamma_(Eigen::Matrix2d::Zero()) {
    detect_standard_form();
}

TwoModeCovariance::TwoModeCovariance(const Eigen::Matrix2d& alpha, const Eigen::Matrix2d& beta,
                                     const Eigen::Matrix2d& gamma)
    : alpha_(symmetrize(alpha)), beta_(symmetrize(beta)), gamma_(gamma) {
    if ((alpha - alpha.transpose()).cwiseAbs().maxCoeff() > 1e-9 ||
        (beta - beta.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("covariance blocks alpha/beta must be symmetric");
    }
    detect_standard_form();
}

TwoModeCovariance TwoModeCovariance::from_matrix(const Eigen::Matrix4d& sigma) {
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + sigma.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("covariance matrix must be symmetric");
    }
    return TwoModeCovariance(sigma.block<2, 2>(0, 0), sigma.block<2, 2>(2, 2),
                             sigma.block<2, 2>(0, 2));
}

TwoModeCovariance TwoModeCovariance::standard(double a, double b, double c1, double c2) {
    Eigen::Matrix2d alpha = a * Eigen::Matrix2d::Identity();
    Eigen::Matrix2d beta = b * Eigen::Matrix2d::Identity();
    Eigen::Matrix2d gamma = Eigen::Matrix2d::Zero();
    gamma(0, 0) = c1;
    gamma(1, 1) = c2;
    return TwoModeCovariance(alpha, beta, gamma);
}

TwoModeCovariance TwoModeCovariance::vacuum() { return TwoModeCovariance(); }

TwoModeCovariance TwoModeCovariance::thermal(double nu_i, double nu_j) {
    return standard(nu_i, nu_j, 0.0, 0.0);
}

TwoModeCovariance TwoModeCovariance::two_mode_squeezed(double r) {
    const double a = 0.5 * std::cosh(2.0 * r);
    const double c = 0.5 * std::sinh(2.0 * r);
    return standard(a, a, c, -c);
}

Eigen::Matrix4d TwoModeCovariance::matrix() const {
    Eigen::Matrix4d m;
    m.block<2, 2>(0, 0) = alpha_;
    m.block<2, 2>(2, 2) = beta_;
    m.block<2, 2>(0, 2) = gamma_;
    m.block<2, 2>(2, 0) = gamma_.transpose();
    return m;
}

SymplecticInvariants symplectic_invariants(const TwoModeCovariance& sigma) {
    SymplecticInvariants inv;
    inv.A = sigma.alpha().determinant();
    inv.B = sigma.beta().determinant();
    inv.C = sigma.gamma().determinant();
    inv.D = sigma.matrix().determinant();
    inv.Delta = inv.A + inv.B + 2.0 * inv.C;
    inv.DeltaTilde = inv.A + inv.B - 2.0 * inv.C;
    return inv;
}

namespace {

// (Delta - sqrt(Delta^2 - 4D))/2 with the boundary clamp shared by the
// ordinary and partially transposed spectra.
double lower_eigenvalue_squared(double delta, double d) {
    double disc = delta * delta - 4.0 * d;
    if (disc < 0.0) {
        if (disc < -kDiscriminantClamp) throw std::domain_error("invariant inconsistency");
        disc = 0.0;
    }
    double lam2 = 0.5 * (delta - std::sqrt(disc));
    if (lam2 < 0.0) {
        if (lam2 < -kDiscriminantClamp) throw std::domain_error("invariant inconsistency");
        lam2 = 0.0;
    }
    return lam2;
}

struct Spectrum {
    double lam1, lam2, lam_tilde;
};

// f(y + d) - f(y) with ym = y - 1/2 >= 0, exact for any d > -ym via log1p;
// avoids the cancellation of O(1) entropy values that swamps the tiny
// mutual-information scales of weakly correlated states. Arguments at or
// below the vacuum boundary clamp to the pure-mode value f = 0.
double entropy_f_difference(double ym, double d) {
    if (d == 0.0) return 0.0;
    const double ym_d = ym + d;
    if (ym <= 0.0) {
        if (ym_d <= 0.0) return 0.0;
        return (1.0 + ym_d) * std::log1p(ym_d) - ym_d * std::log(ym_d);
    }
    if (ym_d <= 0.0) return -((1.0 + ym) * std::log1p(ym) - ym * std::log(ym));
    return d * (std::log1p(ym) - std::log(ym)) + (ym_d + 1.0) * std::log1p(d / (ym + 1.0)) -
           ym_d * std::log1p(d / ym);
}

// lam1^2 - max(A,B) and lam2^2 - min(A,B) for standard-form states, computed
// from the factored discriminant so the boundary structure survives in
// doubles.
struct SpectrumShifts {
    double x_hi, x_lo;  // max/min of (a, b)
    double s1, s2;      // lam^2 offsets from x_hi^2, x_lo^2
    double lam1, lam2;
    double d1, d2;  // lam - x offsets
};

SpectrumShifts spectrum_shifts(double a, double b, double c1, double c2) {
    SpectrumShifts out;
    out.x_hi = std::max(a, b);
    out.x_lo = std::min(a, b);
    const double big = out.x_hi * out.x_hi;
    const double small = out.x_lo * out.x_lo;
    const double c_det = c1 * c2;
    const double diff = (out.x_hi - out.x_lo) * (out.x_hi + out.x_lo);
    const double rest = 4.0 * c_det * (big + small) + 4.0 * a * b * (c1 * c1 + c2 * c2);
    const double disc = std::max(0.0, diff * diff + rest);
    const double w = std::sqrt(disc);
    const double correction = (w + diff) > 0.0 ? rest / (w + diff) : 0.0;
    out.s1 = c_det + 0.5 * correction;
    out.s2 = c_det - 0.5 * correction;
    out.lam1 = std::sqrt(std::max(0.0, big + out.s1));
    out.lam2 = std::sqrt(std::max(0.0, small + out.s2));
    out.d1 = out.s1 / (out.lam1 + out.x_hi);
    out.d2 = out.s2 / (out.lam2 + out.x_lo);
    return out;
}

// Symplectic spectra. For standard-form states the discriminant is computed
// in the factored form
//   Delta^2 - 4D = (A - B)^2 + 4 c1 c2 (A + B) + 4 a b (c1^2 + c2^2),
// which stays accurate on the physicality boundary where the determinant
// route cancels to rounding noise.
Spectrum spectrum_of(const TwoModeCovariance& sigma) {
    const SymplecticInvariants inv = symplectic_invariants(sigma);
    Spectrum s;
    if (sigma.is_standard_form()) {
        const double a = sigma.sf_a(), b = sigma.sf_b();
        const double c1 = sigma.sf_c1(), c2 = sigma.sf_c2();
        const double diff2 = (a - b) * (a - b) * (a + b) * (a + b);
        const double cross = 4.0 * a * b * (c1 * c1 + c2 * c2);
        const double disc = std::max(0.0, diff2 + 4.0 * c1 * c2 * (inv.A + inv.B) + cross);
        const double disc_t = std::max(0.0, diff2 - 4.0 * c1 * c2 * (inv.A + inv.B) + cross);
        s.lam1 = std::sqrt(std::max(0.0, 0.5 * (inv.Delta + std::sqrt(disc))));
        s.lam2 = std::sqrt(std::max(0.0, 0.5 * (inv.Delta - std::sqrt(disc))));
        s.lam_tilde = std::sqrt(std::max(0.0, 0.5 * (inv.DeltaTilde - std::sqrt(disc_t))));
        return s;
    }
    const auto [lam1, lam2] = symplectic_eigenvalues(inv);
    s.lam1 = lam1;
    s.lam2 = lam2;
    s.lam_tilde = ppt_eigenvalue(inv);
    return s;
}

}  // namespace

std::pair<double, double> symplectic_eigenvalues(const SymplecticInvariants& inv) {
    double disc = inv.Delta * inv.Delta - 4.0 * inv.D;
    if (disc < 0.0) {
        if (disc < -kDiscriminantClamp) throw std::domain_error("invariant inconsistency");
        disc = 0.0;
    }
    const double root = std::sqrt(disc);
    const double lam1 = std::sqrt(0.5 * (inv.Delta + root));
    const double lam2 = std::sqrt(lower_eigenvalue_squared(inv.Delta, inv.D));
    return {lam1, lam2};
}

double ppt_eigenvalue(const SymplecticInvariants& inv) {
    return std::sqrt(lower_eigenvalue_squared(inv.DeltaTilde, inv.D));
}

bool is_physical(const TwoModeCovariance& sigma, double tol) {
    const SymplecticInvariants inv = symplectic_invariants(sigma);
    if (!(inv.A > 0.0) || !(inv.B > 0.0)) return false;
    try {
        return spectrum_of(sigma).lam2 >= kVacuumVariance - tol;
    } catch (const std::domain_error&) {
        return false;
    }
}

StandardForm to_standard_form(const TwoModeCovariance& sigma) {
    if (!is_physical(sigma)) throw std::domain_error("unphysical covariance");
    const SymplecticInvariants inv = symplectic_invariants(sigma);
    StandardForm sf;
    sf.a = std::sqrt(inv.A);
    sf.b = std::sqrt(inv.B);
    // c1^2 + c2^2 follows from det sigma of the standard form:
    // D = (ab - c1^2)(ab - c2^2)  =>  c1^2 + c2^2 = (AB + C^2 - D)/(ab).
    const double ab = sf.a * sf.b;
    double s = (inv.A * inv.B + inv.C * inv.C - inv.D) / ab;
    const double two_abs_c = 2.0 * std::abs(inv.C);
    if (s < two_abs_c) s = two_abs_c;  // AM-GM floor, guards rounding
    double disc = s * s - 4.0 * inv.C * inv.C;
    if (disc < 0.0) disc = 0.0;
    const double root = std::sqrt(disc);
    sf.c1 = std::sqrt(0.5 * (s + root));
    const double c2_mag = std::sqrt(std::max(0.0, 0.5 * (s - root)));
    sf.gamma_det_sign = (inv.C > 0.0) - (inv.C < 0.0);
    sf.c2 = sf.gamma_det_sign == 0 ? 0.0 : sf.gamma_det_sign * c2_mag;
    return sf;
}

double entropy_f(double x) {
    constexpr double tol = 1e-9;
    if (x < kVacuumVariance - tol) throw std::domain_error("entropy argument below vacuum");
    if (x <= kVacuumVariance) return 0.0;
    const double p = x + 0.5;
    const double m = x - 0.5;
    return p * std::log(p) - m * std::log(m);
}

double mutual_information_exact(const TwoModeCovariance& sigma) {
    if (!is_physical(sigma)) throw std::domain_error("unphysical covariance");
    if (sigma.is_standard_form()) {
        const SpectrumShifts s =
            spectrum_shifts(sigma.sf_a(), sigma.sf_b(), sigma.sf_c1(), sigma.sf_c2());
        const double value = -entropy_f_difference(s.x_hi - 0.5, s.d1) -
                             entropy_f_difference(s.x_lo - 0.5, s.d2);
        return std::max(0.0, value);
    }
    const SymplecticInvariants inv = symplectic_invariants(sigma);
    const Spectrum s = spectrum_of(sigma);
    const double value = entropy_f(std::sqrt(inv.A)) + entropy_f(std::sqrt(inv.B)) -
                         entropy_f(std::max(s.lam1, kVacuumVariance)) -
                         entropy_f(std::max(s.lam2, kVacuumVariance));
    return std::max(0.0, value);
}

namespace {

// Minimized conditional determinant for a Gaussian measurement on the mode
// whose marginal determinant is B. Quotient branch and its complement per
// the measurement-family optimum; on the sigma_av determinant manifold
// D = (sqrt(AB) - |C|)^2 the quotient reduces algebraically to
// (sqrt(A) - |C|/(1/2 + sqrt(B)))^2, which is also the numerically usable
// form when the measured marginal sits near purity.
double discord_e_min(double A, double B, double C, double D, bool* degenerate_branch) {
    const double abs_c = std::abs(C);
    const double denom = 0.25 - B;
    const auto simplified = [&] {
        const double e = std::sqrt(A) - abs_c / (0.5 + std::sqrt(B));
        return e * e;
    };

    if (std::abs(denom) < 1e-12) {
        // Measured marginal is (numerically) pure; the quotient form is 0/0.
        if (degenerate_branch) *degenerate_branch = true;
        return simplified();
    }

    const double root_ab = std::sqrt(A * B);
    const double manifold = D - (root_ab - abs_c) * (root_ab - abs_c);
    if (std::abs(manifold) <= 1e-8 * std::max({std::abs(D), A * B, 1.0})) return simplified();

    const double lhs = 4.0 * (D - A * B) * (D - A * B);
    const double rhs = C * C * (1.0 + 4.0 * B) * (A + 4.0 * D);
    if (lhs <= rhs * (1.0 + 1e-12)) {
        const double inner = std::max(0.0, C * C + denom * (A - 4.0 * D));
        const double num = 2.0 * C * C + denom * (A - 4.0 * D) + 2.0 * abs_c * std::sqrt(inner);
        return num / (4.0 * denom * denom);
    }
    const double inner =
        std::max(0.0, C * C * C * C + (D - A * B) * (D - A * B) - 2.0 * C * C * (A * B + D));
    return (A * B - C * C + D - std::sqrt(inner)) / (2.0 * B);
}

}  // namespace

double gaussian_discord_exact(const TwoModeCovariance& sigma, MeasuredSide side,
                              bool* degenerate_branch) {
    if (degenerate_branch) *degenerate_branch = false;
    if (!is_physical(sigma)) throw std::domain_error("unphysical covariance");

    if (sigma.is_standard_form()) {
        const double c1 = sigma.sf_c1(), c2 = sigma.sf_c2();
        const bool on_manifold =
            std::abs(std::abs(c1) - std::abs(c2)) <= 1e-9 * (std::abs(c1) + std::abs(c2)) ||
            (c1 == 0.0 && c2 == 0.0);
        if (on_manifold) {
            // D = I + f(sqrt(E_min)) - f(sqrt(A_unmeasured)) with the on-manifold
            // simplification of the conditional minimum; both pieces are stable
            // paired differences.
            const double meas_root = side == MeasuredSide::ModeJ ? sigma.sf_b() : sigma.sf_a();
            const double other_root = side == MeasuredSide::ModeJ ? sigma.sf_a() : sigma.sf_b();
            if (degenerate_branch && std::abs(meas_root - 0.5) < 1e-12)
                *degenerate_branch = true;
            const double delta_e = std::abs(c1 * c2) / (0.5 + meas_root);
            const double value = mutual_information_exact(sigma) +
                                 entropy_f_difference(other_root - 0.5, -delta_e);
            return std::max(0.0, value);
        }
    }

    const SymplecticInvariants inv = symplectic_invariants(sigma);
    const Spectrum s = spectrum_of(sigma);

    // Roles: the measured mode plays "B" in the conditional formula.
    const double meas = side == MeasuredSide::ModeJ ? inv.B : inv.A;
    const double other = side == MeasuredSide::ModeJ ? inv.A : inv.B;

    double e_min = discord_e_min(other, meas, inv.C, inv.D, degenerate_branch);
    if (e_min < 0.25) e_min = 0.25;  // conditional state must stay physical

    const double value = entropy_f(std::sqrt(meas)) -
                         entropy_f(std::max(s.lam1, kVacuumVariance)) -
                         entropy_f(std::max(s.lam2, kVacuumVariance)) +
                         entropy_f(std::sqrt(e_min));
    return std::max(0.0, value);
}

double log_negativity_exact(const TwoModeCovariance& sigma) {
    if (!is_physical(sigma)) throw std::domain_error("unphysical covariance");
    const double lam = spectrum_of(sigma).lam_tilde;
    if (lam <= 0.0) throw std::domain_error("singular partial transpose spectrum");
    return std::max(0.0, -std::log(2.0 * lam));
}

double renyi2_entropy(const Eigen::Matrix2d& block) {
    const double det = block.determinant();
    if (det <= 0.0) throw std::domain_error("block determinant must be positive");
    return std::log(2.0 * std::sqrt(det));
}

Eigen::Matrix2d single_mode_rotation(double theta) {
    Eigen::Matrix2d r;
    r << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    return r;
}

Eigen::Matrix2d single_mode_squeeze(double r) {
    Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
    s(0, 0) = std::exp(r);
    s(1, 1) = std::exp(-r);
    return s;
}

TwoModeCovariance conjugate_local(const TwoModeCovariance& sigma, const Eigen::Matrix2d& s_i,
                                  const Eigen::Matrix2d& s_j) {
    return TwoModeCovariance(s_i * sigma.alpha() * s_i.transpose(),
                             s_j * sigma.beta() * s_j.transpose(),
                             s_i * sigma.gamma() * s_j.transpose());
}

}  // namespace qbm
