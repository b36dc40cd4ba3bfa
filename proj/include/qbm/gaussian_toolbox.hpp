#pragma once

#include <Eigen/Dense>
#include <utility>

namespace qbm {

/// Dimensionless convention used throughout: hbar = 1, vacuum variance 1/2,
/// natural logarithms. A physical two-mode state has both symplectic
/// eigenvalues >= 1/2.
inline constexpr double kVacuumVariance = 0.5;

/// Two-mode covariance matrix in block form
///   [ alpha   gamma ]
///   [ gamma^T beta  ]
/// alpha/beta are the 2x2 marginal blocks of modes i and j, gamma the cross
/// block. alpha and beta are symmetrized on construction; a full 4x4 input
/// must be symmetric.
class TwoModeCovariance {
  public:
    TwoModeCovariance();
    TwoModeCovariance(const Eigen::Matrix2d& alpha, const Eigen::Matrix2d& beta,
                      const Eigen::Matrix2d& gamma);

    static TwoModeCovariance from_matrix(const Eigen::Matrix4d& sigma);
    /// Standard form diag blocks a*I, b*I and cross diag(c1, c2).
    static TwoModeCovariance standard(double a, double b, double c1, double c2);
    static TwoModeCovariance vacuum();
    /// Thermal product with mode variances nu_i, nu_j (nu = n + 1/2).
    static TwoModeCovariance thermal(double nu_i, double nu_j);
    /// Two-mode squeezed vacuum with squeezing parameter r.
    static TwoModeCovariance two_mode_squeezed(double r);

    const Eigen::Matrix2d& alpha() const { return alpha_; }
    const Eigen::Matrix2d& beta() const { return beta_; }
    const Eigen::Matrix2d& gamma() const { return gamma_; }
    Eigen::Matrix4d matrix() const;

    /// True when the blocks are exactly a*I, b*I, diag(c1, c2). States built
    /// that way keep their primitives so spectra can be computed in factored
    /// form; the cycle-averaged band states live on the physicality boundary
    /// where the determinant route loses all significant digits.
    bool is_standard_form() const { return has_sf_; }
    double sf_a() const { return sf_[0]; }
    double sf_b() const { return sf_[1]; }
    double sf_c1() const { return sf_[2]; }
    double sf_c2() const { return sf_[3]; }

  private:
    void detect_standard_form();

    Eigen::Matrix2d alpha_, beta_, gamma_;
    bool has_sf_ = false;
    double sf_[4] = {0.0, 0.0, 0.0, 0.0};
};

/// Determinant invariants A = det alpha, B = det beta, C = det gamma,
/// D = det sigma, with the seralian combinations Delta = A + B + 2C and
/// DeltaTilde = A + B - 2C (partial transpose flips the sign of C).
struct SymplecticInvariants {
    double A, B, C, D;
    double Delta, DeltaTilde;
};

struct StandardForm {
    double a, b, c1, c2;
    int gamma_det_sign;  // sign of det(gamma): -1, 0 or +1
};

SymplecticInvariants symplectic_invariants(const TwoModeCovariance& sigma);

/// Symplectic spectrum {lambda1 >= lambda2}, lambda^2 = (Delta +- sqrt(Delta^2 - 4D))/2.
/// Discriminants in [-1e-10, 0) are clamped to zero; below that the
/// invariants are inconsistent and a std::domain_error is thrown.
std::pair<double, double> symplectic_eigenvalues(const SymplecticInvariants& inv);

/// Lowest symplectic eigenvalue of the partially transposed state,
/// lambda~2^2 = (DeltaTilde - sqrt(DeltaTilde^2 - 4D))/2.
double ppt_eigenvalue(const SymplecticInvariants& inv);

bool is_physical(const TwoModeCovariance& sigma, double tol = 1e-9);

/// Reduce to standard form (a, b, c1, c2). Tie-break: |c1| >= |c2| and
/// c1 >= 0; the sign of det gamma is reported separately. Throws
/// std::domain_error("unphysical covariance") for non-physical input.
StandardForm to_standard_form(const TwoModeCovariance& sigma);

/// Entropy kernel f(x) = (x + 1/2) ln(x + 1/2) - (x - 1/2) ln(x - 1/2).
/// x in [1/2 - tol, 1/2] clamps to the pure-mode value 0.
double entropy_f(double x);

double mutual_information_exact(const TwoModeCovariance& sigma);

enum class MeasuredSide { ModeI, ModeJ };

/// Gaussian quantum discord with a Gaussian measurement on the chosen mode
/// (default: mode j). Uses the exact minimized conditional determinant; when
/// the measured marginal is pure (det = 1/4) the quotient degenerates and the
/// simplified limit branch is used instead, reported through
/// `degenerate_branch` when non-null.
double gaussian_discord_exact(const TwoModeCovariance& sigma,
                              MeasuredSide side = MeasuredSide::ModeJ,
                              bool* degenerate_branch = nullptr);

/// E_N = max{0, -ln(2 lambda~2)}.
double log_negativity_exact(const TwoModeCovariance& sigma);

/// Renyi-2 entropy of a single-mode block: S2 = ln(2 sqrt(det)) = -ln purity.
double renyi2_entropy(const Eigen::Matrix2d& block);

// Single-mode symplectic building blocks (unit determinant); handy for
// generating local-symplectic conjugations in tests.
Eigen::Matrix2d single_mode_rotation(double theta);
Eigen::Matrix2d single_mode_squeeze(double r);
TwoModeCovariance conjugate_local(const TwoModeCovariance& sigma,
                                  const Eigen::Matrix2d& s_i, const Eigen::Matrix2d& s_j);

}  // namespace qbm
