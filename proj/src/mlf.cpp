#include "rlad/mlf.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <string>

#include "rlad/error.hpp"
#include "rlad/hp_series.hpp"

namespace rlad {

namespace {

constexpr double pi = std::numbers::pi;

void check_beta(double beta)
{
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw DomainError("beta must lie in (0,1], got " + num(beta));
    }
}

// sin(pi y) with exact zeros at integers.
double sin_pi(double y)
{
    const double r = std::nearbyint(y);
    const double f = y - r;
    if (std::abs(f) < 1e-14) {
        return 0.0;
    }
    const double s = std::sin(pi * f);
    return std::fmod(r, 2.0) == 0.0 ? s : -s;
}

// sum_{k>=0} (-x)^k / Gamma(offset + beta k), offset > 0; only used when the largest
// term is small enough that cancellation costs at most two digits.
struct SeriesResult {
    double value;
    bool ok;
};

SeriesResult power_series(double beta, double offset, double x)
{
    const double lx = std::log(x);
    // Largest term magnitude decides whether cancellation is acceptable.
    double max_log = -1e300;
    double prev = -1e300;
    for (int k = 0; k < 100000; ++k) {
        const double lt = k * lx - std::lgamma(offset + beta * k);
        max_log = std::max(max_log, lt);
        if (lt < prev && lt < -40.0) {
            break;
        }
        prev = lt;
    }
    if (max_log > std::log(100.0)) {
        return {0.0, false};
    }
    double sum = 0.0;
    double comp = 0.0;
    prev = -1e300;
    for (int k = 0; k < 100000; ++k) {
        const double lt = k * lx - std::lgamma(offset + beta * k);
        const double term = (k % 2 == 1) ? -std::exp(lt) : std::exp(lt);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (lt < prev && lt < -42.0) {
            break;
        }
        prev = lt;
    }
    return {sum, true};
}

struct AsymptoticResult {
    double value;
    double error;
};

// sum_{k>=1} (-1)^{k+1} w_k x^{-k} / Gamma(1 - beta k) with w_k = 1 (weight 0) or beta k
// (weight 1), truncated at its smallest term.
AsymptoticResult asymptotic(double beta, double x, int weight)
{
    const double lx = std::log(x);
    double sum = 0.0;
    double last = 1e300;
    for (int k = 1; k < 400; ++k) {
        // 1/Gamma(1 - y) = Gamma(y) sin(pi y) / pi
        const double y = beta * k;
        const double w = weight == 0 ? 1.0 : y;
        const double mag = std::exp(std::lgamma(y) - k * lx) * w / pi;
        if (mag > last) {
            return {sum, last};
        }
        const double term = mag * sin_pi(y) * ((k % 2 == 1) ? 1.0 : -1.0);
        sum += term;
        last = mag;
        if (mag < 1e-18 * std::abs(sum)) {
            return {sum, mag};
        }
    }
    return {sum, last};
}

// (sin(beta pi)/(beta pi)) * int_0^inf u^{weight/beta} exp(-t u^{1/beta}) / (u^2 + 2u cos(beta pi) + 1) du
// which equals E_beta(-t^beta) for weight 0 and the unit-scale density at t for weight 1.
double mixture_quadrature(double beta, double t, int weight)
{
    // Double-exponential quadrature copes with the u^{1/beta} endpoint behaviour.
    thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    const double c = std::cos(beta * pi);
    const double inv_beta = 1.0 / beta;
    auto inner = [=](double u) {
        const double ub = std::pow(u, inv_beta);
        const double w = weight == 0 ? 1.0 : ub;
        return w * std::exp(-t * ub) / (u * u + 2.0 * u * c + 1.0);
    };
    // u -> 1/v maps [1, inf) onto (0, 1].
    auto outer = [=](double v) {
        if (v <= 0.0) {
            return 0.0;
        }
        const double ub = std::pow(v, -inv_beta);
        const double w = weight == 0 ? 1.0 : ub;
        const double e = std::exp(-t * ub);
        return e == 0.0 ? 0.0 : w * e / (1.0 + 2.0 * v * c + v * v);
    };
    double err_inner = 0.0;
    double err_outer = 0.0;
    const double a = integrator.integrate(inner, 0.0, 1.0, 1e-15, &err_inner);
    const double b = integrator.integrate(outer, 0.0, 1.0, 1e-15, &err_outer);
    const double pre = std::sin(beta * pi) / (beta * pi);
    const double value = pre * (a + b);
    const double err = pre * (err_inner + err_outer);
    const double scale = weight == 0 ? 1.0 : std::max(1.0, std::abs(value));
    if (!(err <= 1e-11 * scale)) {
        throw AccuracyError("mixture quadrature could not certify E_beta at beta=" +
                            num(beta) + ", t=" + num(t));
    }
    return value;
}

// Unit-scale density t^{beta-1} E_{beta,beta}(-t^beta).
double unit_density(double beta, double t)
{
    const double x = std::pow(t, beta);
    const SeriesResult s = power_series(beta, beta, x);
    if (s.ok) {
        return std::pow(t, beta - 1.0) * s.value;
    }
    const AsymptoticResult a = asymptotic(beta, x, 1);
    if (a.error <= 1e-14 * std::abs(a.value)) {
        return a.value / t;
    }
    return mixture_quadrature(beta, t, 1);
}

}  // namespace

MlParams::MlParams(double beta, double gamma) : beta_(beta), gamma_(gamma)
{
    check_beta(beta);
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw DomainError("gamma must be finite and > 0, got " + num(gamma));
    }
}

double MlParams::scaled_power(double t) const
{
    return std::pow(t / gamma_, beta_);
}

double eval_mlf(double beta, double z)
{
    check_beta(beta);
    if (std::isnan(z) || z > 0.0) {
        throw DomainError("eval_mlf supports z <= 0 only");
    }
    if (z == 0.0) {
        return 1.0;
    }
    if (beta == 1.0) {
        return std::exp(z);
    }
    if (std::isinf(z)) {
        return 0.0;
    }
    const double x = -z;
    const SeriesResult s = power_series(beta, 1.0, x);
    if (s.ok) {
        return s.value;
    }
    const AsymptoticResult a = asymptotic(beta, x, 0);
    if (a.error <= 1e-14) {
        return a.value;
    }
    return mixture_quadrature(beta, std::pow(x, 1.0 / beta), 0);
}

double survival(const MlParams& p, double t)
{
    if (!(t >= 0.0)) {
        throw DomainError("survival needs t >= 0");
    }
    if (t == 0.0) {
        return 1.0;
    }
    return eval_mlf(p.beta(), -p.scaled_power(t));
}

double density(const MlParams& p, double t)
{
    if (p.beta() == 1.0) {
        if (!(t >= 0.0)) {
            throw DomainError("density needs t >= 0");
        }
        return std::exp(-t / p.gamma()) / p.gamma();
    }
    if (!(t > 0.0)) {
        throw DomainError("density diverges at t = 0 for beta < 1");
    }
    return unit_density(p.beta(), t / p.gamma()) / p.gamma();
}

double mixture_kernel(double beta, double r)
{
    check_beta(beta);
    if (beta == 1.0) {
        throw DomainError("mixture kernel degenerates to a point mass at beta = 1");
    }
    if (!(r > 0.0)) {
        throw DomainError("mixture kernel needs r > 0");
    }
    const double rb = std::pow(r, beta);
    return std::pow(r, beta - 1.0) * std::sin(beta * pi) /
           (pi * (rb * rb + 2.0 * rb * std::cos(beta * pi) + 1.0));
}

double sample(const MlParams& p, RandomStream& rng)
{
    const double e = -std::log(rng.uniform());
    if (p.beta() == 1.0) {
        return p.gamma() * e;
    }
    const double v = rng.uniform();
    const double bp = p.beta() * pi;
    const double ratio = std::sin(bp * (1.0 - v)) / std::sin(bp * v);
    return p.gamma() * e * std::pow(ratio, 1.0 / p.beta());
}

double mlf_derivative(double beta, unsigned n, double z)
{
    check_beta(beta);
    if (std::isnan(z) || z > 0.0) {
        throw DomainError("mlf_derivative supports z <= 0 only");
    }
    if (beta == 1.0) {
        return std::exp(z);
    }
    if (n > kDerivativeMaxOrder || -z > std::pow(kDerivativeMaxTime, beta)) {
        throw AccuracyError("derivative request outside the certified window (n <= 2000, |z| <= "
                            "2000^beta)");
    }
    if (n == 0) {
        return eval_mlf(beta, z);
    }
    return hp::mlf_derivative_hp(beta, n, -z, 1e-10);
}

}  // namespace rlad
