#include "qbm/qbm_green.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbm {

namespace {
constexpr double kPi = std::numbers::pi_v<double>;
}

double SpectralDensity::value(double omega) const {
    if (omega < 0.0) throw std::invalid_argument("spectral density argument must be >= 0");
    return 2.0 * mass_system * gamma0 * omega * Lambda * Lambda /
           (kPi * (omega * omega + Lambda * Lambda));
}

double SpectralDensity::over_mass(double omega) const { return value(omega) / mass_system; }

Complex dissipation_laplace(const SpectralDensity& sd, Complex s) {
    const Complex denom = s + sd.Lambda;
    if (std::abs(denom) < 1e-14 * sd.Lambda) throw std::domain_error("dissipation kernel pole");
    return sd.gamma0 * sd.Lambda / denom;
}

DrivingSpec DrivingSpec::single_cosine(double omega_r, double omega_d, double amplitude) {
    DrivingSpec d;
    d.omega_r = omega_r;
    d.omega_d = omega_d;
    d.fourier = {{1, Complex(0.5 * amplitude, 0.0)}, {-1, Complex(0.5 * amplitude, 0.0)}};
    return d;
}

Complex DrivingSpec::coefficient(int k) const {
    for (const auto& [kk, v] : fourier)
        if (kk == k) return v;
    return Complex(0.0, 0.0);
}

int DrivingSpec::max_harmonic() const {
    int m = 0;
    for (const auto& [k, v] : fourier)
        if (std::abs(v) > 0.0) m = std::max(m, std::abs(k));
    return m;
}

double DrivingSpec::cosine_amplitude() const { return 2.0 * std::abs(coefficient(1)); }

std::vector<std::string> DrivingSpec::validate() const {
    if (!(omega_d > 0.0)) throw std::invalid_argument("omega_d must be positive");
    if (!(omega_r > 0.0)) throw std::invalid_argument("omega_r must be positive");
    std::vector<std::string> warnings;
    for (const auto& [k, v] : fourier) {
        if (k == 0) throw std::invalid_argument("driving harmonics must have k != 0");
        if (std::abs(coefficient(-k) - std::conj(v)) > 1e-12 * (1.0 + std::abs(v)))
            warnings.push_back("driving coefficients violate V_{-k} = conj(V_k)");
    }
    // Detuning from the parametric resonance n w_d ~ 2 w_r for the first few n.
    for (int n = 1; n <= 4; ++n) {
        if (std::abs(n * omega_d - 2.0 * omega_r) < 0.05 * omega_r)
            warnings.push_back("driving near parametric resonance at harmonic n=" +
                               std::to_string(n));
    }
    return warnings;
}

Complex static_green(const SpectralDensity& sd, const DrivingSpec& driving, Complex s) {
    const Complex denom = s * s + driving.omega_r * driving.omega_r + s * dissipation_laplace(sd, s);
    if (std::abs(denom) < 1e-14 * driving.omega_r * driving.omega_r)
        throw std::domain_error("on-resonance pole in static Green function");
    return 1.0 / denom;
}

GreenCoefficients::GreenCoefficients(SpectralDensity sd, DrivingSpec driving, int order, int k_max)
    : sd_(std::move(sd)),
      driving_(std::move(driving)),
      order_(order),
      k_max_(k_max),
      cache_mutex_(std::make_unique<std::mutex>()) {
    if (order_ < 0) throw std::invalid_argument("perturbative order must be >= 0");
    warnings_ = driving_.validate();
    const int max_harm = driving_.max_harmonic();
    if (k_max_ < 0) k_max_ = std::max(1, 2 * max_harm * std::max(order_, 1));
    if (k_max_ < order_ * max_harm)
        warnings_.push_back("harmonic window truncates order-" + std::to_string(order_) +
                            " contributions (k_max < order * max harmonic)");
    // Perturbative validity probe: the first-order correction to A~_0 is
    // suppressed by |V_k g~(s + i k w_d)| relative to the zeroth order.
    if (max_harm > 0) {
        const Complex s_probe(0.0, 0.5 * driving_.omega_r);
        double worst = 0.0;
        for (const auto& [k, v] : driving_.fourier) {
            const Complex gk =
                static_green(sd_, driving_, s_probe + Complex(0.0, k * driving_.omega_d));
            worst = std::max(worst, std::abs(v) * std::abs(gk));
        }
        if (worst > 0.5) warnings_.push_back("perturbative series weakly convergent: |V g~| > 0.5");
    }
}

std::vector<Complex> GreenCoefficients::table(Complex s) const {
    const int width = 2 * k_max_ + 1;
    std::vector<Complex> prev(width, Complex(0.0, 0.0));
    std::vector<Complex> cur(width, Complex(0.0, 0.0));
    std::vector<Complex> g(width);
    for (int k = -k_max_; k <= k_max_; ++k)
        g[k + k_max_] = static_green(sd_, driving_, s + Complex(0.0, k * driving_.omega_d));

    prev[k_max_] = g[k_max_];  // zeroth order: only k = 0 survives
    for (int m = 1; m <= order_; ++m) {
        for (int k = -k_max_; k <= k_max_; ++k) {
            Complex sum(0.0, 0.0);
            for (const auto& [n, v] : driving_.fourier) {
                const int idx = k - n;
                if (idx < -k_max_ || idx > k_max_) continue;
                sum += v * prev[idx + k_max_];
            }
            const Complex delta = (k == 0) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
            cur[k + k_max_] = g[k + k_max_] * (delta - sum);
        }
        std::swap(prev, cur);
    }
    return prev;
}

Complex GreenCoefficients::evaluate(int k, Complex s) const {
    if (std::abs(k) > k_max_) throw std::invalid_argument("harmonic index outside window");
    const std::pair<double, double> key(s.real(), s.imag());
    std::lock_guard<std::mutex> lock(*cache_mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, table(s)).first;
    return it->second[k + k_max_];
}

Complex GreenCoefficients::evaluate_Ak(int k, double omega) const {
    return evaluate(k, Complex(0.0, omega));
}

double GreenCoefficients::residual_check(Complex s) const {
    double worst = 0.0;
    for (int k = -k_max_; k <= k_max_; ++k) {
        const Complex gk = static_green(sd_, driving_, s + Complex(0.0, k * driving_.omega_d));
        Complex acc = evaluate(k, s) / gk;
        for (const auto& [n, v] : driving_.fourier) {
            const int idx = k - n;
            if (std::abs(idx) > k_max_) continue;
            acc += v * evaluate(idx, s);
        }
        if (k == 0) acc -= 1.0;
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

GreenCoefficients solve_green_coefficients(const SpectralDensity& sd, const DrivingSpec& driving,
                                           int order_m) {
    return GreenCoefficients(sd, driving, order_m);
}

GreenCoefficients solve_green_coefficients_auto(const SpectralDensity& sd,
                                                const DrivingSpec& driving, int max_order,
                                                double rel_target) {
    const Complex probes[] = {Complex(0.0, 0.5 * driving.omega_r),
                              Complex(0.0, 0.9 * driving.omega_r),
                              Complex(0.0, 0.5 * driving.omega_d)};
    for (int m = 2; m <= max_order; ++m) {
        GreenCoefficients gc(sd, driving, m);
        bool ok = true;
        for (const Complex& s : probes) {
            const double scale = std::abs(static_green(sd, driving, s));
            if (gc.residual_check(s) > rel_target * scale) {
                ok = false;
                break;
            }
        }
        if (ok || m == max_order) return gc;
    }
    return GreenCoefficients(sd, driving, max_order);
}

}  // namespace qbm
