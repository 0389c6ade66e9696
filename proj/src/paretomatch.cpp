#include "rlad/paretomatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rlad/error.hpp"

namespace rlad {

ParetoParams::ParetoParams(double delta) : delta_(delta)
{
    if (!(delta > 1.0 && delta < 2.0)) {
        throw DomainError("Pareto exponent delta must lie in (1,2), got " + num(delta));
    }
}

double pareto_survival(const ParetoParams& p, double t)
{
    if (!(t >= 0.0)) {
        throw DomainError("pareto_survival needs t >= 0, got " + num(t));
    }
    return std::exp((1.0 - p.delta()) * std::log1p(t));
}

double pareto_sample(const ParetoParams& p, RandomStream& rng)
{
    // expm1 keeps draws near 0 (U close to 1) strictly positive.
    return std::expm1(-std::log(rng.uniform()) / (p.delta() - 1.0));
}

double initial_gamma(double beta)
{
    if (!(beta > 0.0 && beta < 1.0)) {
        throw DomainError("initial_gamma needs 0 < beta < 1, got " + num(beta));
    }
    const double pi = std::numbers::pi;
    return std::pow(pi / (std::sin(beta * pi) * std::tgamma(beta)), 1.0 / beta);
}

MatchSpec match_quality(const MlParams& ml, const ParetoParams& p, double horizon,
                        std::size_t gridsize)
{
    if (std::abs(ml.beta() - (p.delta() - 1.0)) > 1e-12) {
        throw DomainError("matching needs beta = delta - 1, got beta=" + num(ml.beta()) +
                          ", delta=" + num(p.delta()));
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DomainError("horizon must be finite and > 0, got " + num(horizon));
    }
    if (gridsize < 2) {
        throw DomainError("match grid needs at least 2 points");
    }
    MatchSpec m{ml, p, horizon, {}, {}, {}, 0.0, 0.0};
    const double lo = std::log(horizon / 1e3);
    const double hi = std::log(horizon);
    for (std::size_t k = 0; k < gridsize; ++k) {
        const double t =
            std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(gridsize - 1));
        const double a = survival(ml, t);
        const double b = pareto_survival(p, t);
        m.grid.push_back(t);
        m.ml_survival.push_back(a);
        m.pareto_survival.push_back(b);
        m.discrepancy = std::max(m.discrepancy, std::abs(a - b));
        const double la = a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
        m.log_discrepancy = std::max(m.log_discrepancy, std::abs(la - std::log(b)));
    }
    return m;
}

RefinedGamma refine_gamma(const MlParams& ml0, const ParetoParams& p, double horizon,
                          std::size_t gridsize)
{
    const double beta = ml0.beta();
    auto objective = [&](double g) {
        return match_quality(MlParams(beta, g), p, horizon, gridsize).discrepancy;
    };
    const double g0 = ml0.gamma();
    RefinedGamma out{ml0, objective(g0), 0.0, false, 0};
    out.initial_discrepancy = out.discrepancy;

    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = g0 / 4.0;
    double b = 4.0 * g0;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    while ((b - a) > 1e-3 * 0.5 * (a + b)) {
        ++out.iterations;
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d);
        }
    }
    const double g = fc < fd ? c : d;
    const double fg = std::min(fc, fd);
    if (fg < out.discrepancy) {
        out.ml = MlParams(beta, g);
        out.discrepancy = fg;
        out.improved = true;
    }
    return out;
}

}  // namespace rlad
