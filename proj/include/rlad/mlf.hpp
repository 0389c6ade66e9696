#pragma once

#include "rlad/random.hpp"

namespace rlad {

/// Order and time scale of the Mittag-Leffler waiting-time family:
/// P{T > t} = E_beta(-(t/gamma)^beta).
class MlParams {
public:
    /// Throws DomainError unless 0 < beta <= 1 and gamma > 0.
    explicit MlParams(double beta, double gamma = 1.0);

    double beta() const noexcept { return beta_; }
    double gamma() const noexcept { return gamma_; }

    /// (t/gamma)^beta, the argument fed to E_beta.
    double scaled_power(double t) const;

    friend bool operator==(const MlParams&, const MlParams&) = default;

private:
    double beta_;
    double gamma_;
};

/// E_beta(z) on the closed negative real axis, absolute error <= 1e-10.
///
/// Three algorithms are combined: the power series where its largest term stays
/// small, the asymptotic expansion where its optimally truncated error is below
/// 1e-14, and double-exponential quadrature of the exponential-mixture representation
/// elsewhere. Throws DomainError for beta outside (0,1] or z > 0 and
/// AccuracyError when quadrature cannot certify the tolerance.
double eval_mlf(double beta, double z);

/// Survival function P{T > t}.
double survival(const MlParams& p, double t);

/// Density -d/dt survival. DomainError for t <= 0 when beta < 1.
double density(const MlParams& p, double t);

/// Exponential-mixture kernel K_beta(r); beta = 1 is a point mass and throws.
double mixture_kernel(double beta, double r);

/// Exact, rejection-free variate: gamma * (-ln U) * (sin(beta pi (1-V)) / sin(beta pi V))^(1/beta).
double sample(const MlParams& p, RandomStream& rng);

/// n-th derivative of E_beta at z <= 0, relative error <= 1e-8.
/// Certified window: n <= 2000 and |z| <= 2000^beta; AccuracyError outside.
double mlf_derivative(double beta, unsigned n, double z);

inline constexpr unsigned kDerivativeMaxOrder = 2000;
inline constexpr double kDerivativeMaxTime = 2000.0;

}  // namespace rlad
