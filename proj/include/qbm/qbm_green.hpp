#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace qbm {

using Complex = std::complex<double>;

enum class Side { R, L };

/// Lorentz-Drude (Ohmic) spectral density
///   I(w) = 2 m gamma0 w Lambda^2 / (pi (w^2 + Lambda^2)),
/// m the system mass. All frequencies, rates and temperatures are expressed
/// in units of gamma0 (k_B = hbar = 1).
struct SpectralDensity {
    double gamma0 = 1.0;
    double Lambda = 1.0;
    double mass_system = 10.0;
    double mass_env = 1.0;
    Side side = Side::R;

    double value(double omega) const;
    /// I(w)/m; the combination the correlation formulas actually use.
    double over_mass(double omega) const;
};

/// Laplace transform of the dissipation kernel. For the Lorentz-Drude density
/// gamma(t) = gamma0 Lambda exp(-Lambda t), so gamma~(s) = gamma0 Lambda/(s + Lambda).
Complex dissipation_laplace(const SpectralDensity& sd, Complex s);

/// Periodic driving V(t) = omega_r^2 + sum_{k!=0} V_k e^{i k omega_d t}, with
/// omega_r^2 the renormalized static coefficient (counterterm already
/// absorbed) and V_{-k} = conj(V_k) for a real drive.
struct DrivingSpec {
    double omega_r = 1.0;
    double omega_d = 1.0;
    std::vector<std::pair<int, Complex>> fourier;  // driving harmonics, k != 0

    static DrivingSpec single_cosine(double omega_r, double omega_d, double amplitude);

    Complex coefficient(int k) const;
    int max_harmonic() const;
    /// Real cosine amplitude 2|V_1| (0 if no first harmonic).
    double cosine_amplitude() const;
    /// Hard errors throw std::invalid_argument; soft issues (parametric
    /// resonance proximity, conjugacy repair) come back as warnings.
    std::vector<std::string> validate() const;
};

/// Static (undriven) Green function in Laplace domain,
///   g~(s) = [s^2 + omega_r^2 + s gamma~(s)]^{-1}.
Complex static_green(const SpectralDensity& sd, const DrivingSpec& driving, Complex s);

/// Perturbative Floquet coefficients A~_k(s) of the driven Green function,
/// built from the recurrence
///   A_k^{(m)}(s) = g~(s + i k w_d) [delta_{k0} - sum_{n!=0} V_n A~_{k-n}^{(m-1)}(s)]
/// with A_k^{(0)}(s) = g~(s + i k w_d) delta_{k0}. Evaluation is memoized per
/// Laplace point behind a mutex; instances are safe for concurrent reads.
class GreenCoefficients {
  public:
    GreenCoefficients(SpectralDensity sd, DrivingSpec driving, int order, int k_max = -1);

    /// A~_k(s) for |k| <= k_max (0 outside the window by truncation).
    Complex evaluate(int k, Complex s) const;
    /// A~_k(i w), direct evaluation on the imaginary axis. Throws for |k| > k_max.
    Complex evaluate_Ak(int k, double omega) const;

    /// max_k |g~^{-1}(s + i k w_d) A~_k(s) + sum_{n!=0} V_n A~_{k-n}(s) - delta_{k0}|.
    double residual_check(Complex s) const;

    int order() const { return order_; }
    int k_max() const { return k_max_; }
    const SpectralDensity& spectral_density() const { return sd_; }
    const DrivingSpec& driving() const { return driving_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

  private:
    std::vector<Complex> table(Complex s) const;  // A~_k at fixed s, index k + k_max

    SpectralDensity sd_;
    DrivingSpec driving_;
    int order_;
    int k_max_;
    std::vector<std::string> warnings_;
    mutable std::map<std::pair<double, double>, std::vector<Complex>> cache_;
    mutable std::unique_ptr<std::mutex> cache_mutex_;
};

GreenCoefficients solve_green_coefficients(const SpectralDensity& sd, const DrivingSpec& driving,
                                           int order_m);

/// Raise the order from 2 until the residual at a probe set drops below
/// rel_target * |g~| or order 6 is reached.
GreenCoefficients solve_green_coefficients_auto(const SpectralDensity& sd,
                                                const DrivingSpec& driving, int max_order = 6,
                                                double rel_target = 1e-8);

}  // namespace qbm
