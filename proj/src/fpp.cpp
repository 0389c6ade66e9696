#include "rlad/fpp.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rlad/error.hpp"
#include "rlad/hp_series.hpp"

namespace rlad {

namespace {

constexpr double pi = std::numbers::pi;

double poisson_mass(double z, std::size_t n)
{
    if (z == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    const double nd = static_cast<double>(n);
    return std::exp(-z + nd * std::log(z) - std::lgamma(nd + 1.0));
}

void check_time(double t)
{
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw DomainError("time must be finite and >= 0");
    }
}

// Table length guess from the first two factorial moments,
// E[N] = z/Gamma(1+beta) and E[N(N-1)] = 2 z^2/Gamma(1+2 beta).
std::size_t initial_guess(double beta, double z)
{
    const double mean = z / std::tgamma(1.0 + beta);
    const double second = 2.0 * z * z / std::tgamma(1.0 + 2.0 * beta);
    const double var = std::max(second + mean - mean * mean, 0.0);
    return static_cast<std::size_t>(mean + 12.0 * std::sqrt(var) + 24.0);
}

}  // namespace

CountingLaw::CountingLaw(MlParams ml_, std::size_t n_max_, PmfMethod method_)
    : ml(ml_), n_max(n_max_), method(method_)
{
    if (n_max < 1) {
        throw DomainError("counting law needs n_max >= 1");
    }
}

double pmf(const CountingLaw& law, double t, std::size_t n)
{
    check_time(t);
    if (n > law.n_max) {
        throw DomainError("event count " + std::to_string(n) + " exceeds n_max " +
                          std::to_string(law.n_max));
    }
    const double z = law.ml.scaled_power(t);
    switch (law.method) {
    case PmfMethod::series_derivative: {
        if (law.ml.beta() == 1.0) {
            return poisson_mass(z, n);
        }
        const hp::PmfBlock block = hp::pmf_block_serial(law.ml.beta(), z, n, 1);
        return block.probs.front();
    }
    case PmfMethod::stable_integral:
        if (n == 0) {
            return survival(law.ml, t);
        }
        return pmf_stable_integral(law.ml.beta(), t / law.ml.gamma(), n);
    case PmfMethod::monte_carlo:
        break;
    }
    throw AccuracyError("Monte Carlo estimates cannot certify 1e-8 absolute error; use "
                        "pmf_monte_carlo for an estimate with standard errors");
}

PmfTable pmf_table(const MlParams& ml, double t, const TableOptions& opts)
{
    check_time(t);
    PmfTable table;
    table.t = t;
    const double z = ml.scaled_power(t);
    if (z == 0.0) {
        table.probs = {1.0};
        return table;
    }
    const double beta = ml.beta();
    const double target = 1.0 - opts.tail_target;
    // The series kernel produces every row below the last one anyway, so each attempt
    // computes the whole table and a miss doubles its length.
    std::size_t len = std::min(initial_guess(beta, z) + 1, opts.n_cap + 1);
    while (true) {
        std::vector<double> probs(len);
        double bound = 0.0;
        if (beta == 1.0) {
            for (std::size_t n = 0; n < len; ++n) {
                probs[n] = poisson_mass(z, n);
            }
            bound = 1e-15;
        } else {
            hp::PmfBlock b = opts.parallel ? hp::pmf_block(beta, z, 0, len)
                                           : hp::pmf_block_serial(beta, z, 0, len);
            probs = std::move(b.probs);
            bound = b.error_bound;
        }
        double cum = 0.0;
        double comp = 0.0;
        for (std::size_t n = 0; n < len; ++n) {
            const double y = probs[n] - comp;
            const double s = cum + y;
            comp = (s - cum) - y;
            cum = s;
            if (cum >= target) {
                probs.resize(n + 1);
                table.probs = std::move(probs);
                table.rounding_bound = bound;
                table.tail_bound =
                    std::max(0.0, 1.0 - cum) + static_cast<double>(n + 1) * bound;
                return table;
            }
        }
        if (len > opts.n_cap) {
            throw TruncationError("tail mass still above " + num(opts.tail_target) +
                                  " at n_max cap " + std::to_string(opts.n_cap));
        }
        len = std::min(2 * len, opts.n_cap + 1);
    }
}

double pgf(const CountingLaw& law, double z, double t)
{
    check_time(t);
    if (!(z >= -1.0 && z <= 1.0)) {
        throw DomainError("pgf argument must lie in [-1, 1]");
    }
    if (z == 1.0) {
        return 1.0;
    }
    return eval_mlf(law.ml.beta(), (z - 1.0) * law.ml.scaled_power(t));
}

std::vector<double> sample_path(const CountingLaw& law, double horizon, RandomStream& rng,
                                std::size_t event_cap)
{
    if (!(horizon > 0.0)) {
        throw DomainError("sample_path needs horizon > 0");
    }
    std::vector<double> times;
    double s = 0.0;
    while (true) {
        const double gap = sample(law.ml, rng);
        // A zero gap would break strict ordering; resample (probability ~2^-53).
        if (!(gap > 0.0)) {
            continue;
        }
        s += gap;
        if (s > horizon) {
            return times;
        }
        if (times.size() >= event_cap) {
            throw ResourceError("renewal path exceeded event cap " + std::to_string(event_cap));
        }
        times.push_back(s);
    }
}

double stable_cdf(double beta, double x)
{
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw DomainError("stable index must lie in (0,1]");
    }
    if (!(x > 0.0)) {
        return 0.0;
    }
    if (beta == 1.0) {
        return x >= 1.0 ? 1.0 : 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    // F(x) = (1/pi) int_0^pi exp(-a(theta) x^{-beta/(1-beta)}) dtheta with
    // a(theta) = sin((1-beta) theta) sin(beta theta)^{beta/(1-beta)} / sin(theta)^{1/(1-beta)}.
    const double c = beta / (1.0 - beta);
    const double lx = c * std::log(x);
    // g = ln(a(theta)) - lx increases from g(0+) to +inf at pi. The upper half is
    // parametrised by s = pi - theta so that sin(theta) keeps full relative precision
    // where the integrand switches off.
    auto g_low = [=](double theta) {
        if (theta <= 0.0) {
            return std::log(1.0 - beta) + c * std::log(beta) - lx;
        }
        return std::log(std::sin((1.0 - beta) * theta)) + c * std::log(std::sin(beta * theta)) -
               std::log(std::sin(theta)) / (1.0 - beta) - lx;
    };
    auto g_high = [=](double s) {
        if (s <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        return std::log(std::sin((1.0 - beta) * pi - (1.0 - beta) * s)) +
               c * std::log(std::sin(beta * pi - beta * s)) - std::log(std::sin(s)) / (1.0 - beta) -
               lx;
    };
    // Near beta = 1 the integrand is a sharp step; splitting at level crossings of g
    // keeps every piece smooth. Past exp(g) = 750 the integrand is 0.
    const std::array<double, 6> levels{-6.0, -2.0, 0.0, 1.0, 2.0, 6.62};
    thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    double v = 0.0;
    double err_total = 0.0;
    auto integrate_half = [&](auto&& gfun, bool increasing) {
        std::vector<double> cuts{0.0, pi / 2.0};
        for (double level : levels) {
            double lo = 0.0;
            double hi = pi / 2.0;
            if ((gfun(lo) < level) != increasing || (gfun(hi) < level) == increasing) {
                continue;
            }
            for (int i = 0; i < 200 && hi - lo > 1e-300; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) {
                    break;
                }
                ((gfun(mid) < level) == increasing ? lo : hi) = mid;
            }
            cuts.push_back(hi);
        }
        std::sort(cuts.begin(), cuts.end());
        auto f = [&](double u) {
            const double e = gfun(u);
            return e > 6.62 ? 0.0 : std::exp(-std::exp(e));
        };
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] <= cuts[i]) {
                continue;
            }
            double err = 0.0;
            v += integrator.integrate(f, cuts[i], cuts[i + 1], 1e-13, &err);
            err_total += err;
        }
    };
    integrate_half(g_low, true);
    integrate_half(g_high, false);
    if (!(err_total <= 1e-9)) {
        throw AccuracyError("stable CDF quadrature did not converge at x=" + num(x));
    }
    return std::clamp(v / pi, 0.0, 1.0);
}

double pmf_stable_integral(double beta, double t, std::size_t n)
{
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw DomainError("beta must lie in (0,1]");
    }
    check_time(t);
    if (n == 0) {
        throw DomainError("the stable-integral representation needs n >= 1");
    }
    const double nd = static_cast<double>(n);
    if (beta == 1.0) {
        return poisson_mass(t, n);
    }
    if (t == 0.0) {
        return 0.0;
    }
    // int_0^inf F(t u^{-1/beta}) (1 - u/n) u^{n-1} e^{-u} / (n-1)! du
    const double log_norm = std::lgamma(nd);
    auto integrand = [=](double u) {
        if (u <= 0.0) {
            return n == 1 ? stable_cdf(beta, std::numeric_limits<double>::infinity()) : 0.0;
        }
        const double w = std::exp((nd - 1.0) * std::log(u) - u - log_norm) * (1.0 - u / nd);
        if (w == 0.0) {
            return 0.0;
        }
        return w * stable_cdf(beta, t * std::pow(u, -1.0 / beta));
    };
    // The Gamma-like weight is negligible beyond n + 40 sqrt(n) + 60.
    const double upper = nd + 40.0 * std::sqrt(nd) + 60.0;
    std::vector<double> cuts{0.0};
    const double lo = std::max(0.0, nd - 8.0 * std::sqrt(nd));
    const double hi = nd + 8.0 * std::sqrt(nd);
    if (lo > 0.0) {
        cuts.push_back(lo);
    }
    cuts.push_back(nd);
    cuts.push_back(hi);
    cuts.push_back(upper);
    double total = 0.0;
    double err_total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double err = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, cuts[i], cuts[i + 1], 12, 1e-10, &err);
        err_total += err;
    }
    if (!(err_total <= 1e-7)) {
        throw AccuracyError("stable-integral quadrature error estimate " +
                            num(err_total) + " too large");
    }
    return std::max(total, 0.0);
}

MonteCarloPmf pmf_monte_carlo(const MlParams& ml, double t, std::size_t n_max, std::size_t paths,
                              std::uint64_t seed)
{
    check_time(t);
    if (paths == 0) {
        throw DomainError("pmf_monte_carlo needs at least one path");
    }
    // Fixed-size blocks with their own streams keep the estimate independent of
    // the thread count.
    constexpr std::size_t block = 4096;
    const std::size_t blocks = (paths + block - 1) / block;
    std::vector<std::vector<std::uint64_t>> hist(blocks, std::vector<std::uint64_t>(n_max + 1, 0));
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
        RandomStream rng = RandomStream::for_replicate(seed, static_cast<std::uint64_t>(b));
        const std::size_t begin = static_cast<std::size_t>(b) * block;
        const std::size_t end = std::min(paths, begin + block);
        auto& h = hist[static_cast<std::size_t>(b)];
        for (std::size_t p = begin; p < end; ++p) {
            std::size_t count = 0;
            double s = 0.0;
            while (count <= n_max) {
                s += sample(ml, rng);
                if (s > t) {
                    break;
                }
                ++count;
            }
            ++h[std::min(count, n_max)];
        }
    }
    MonteCarloPmf out;
    out.paths = paths;
    out.probs.assign(n_max + 1, 0.0);
    out.std_error.assign(n_max + 1, 0.0);
    const double np = static_cast<double>(paths);
    for (std::size_t n = 0; n <= n_max; ++n) {
        std::uint64_t c = 0;
        for (const auto& h : hist) {
            c += h[n];
        }
        const double p = static_cast<double>(c) / np;
        out.probs[n] = p;
        out.std_error[n] = std::sqrt(p * (1.0 - p) / np);
    }
    return out;
}

}  // namespace rlad
