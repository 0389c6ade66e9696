#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "rlad/error.hpp"
#include "rlad/fpp.hpp"
#include "rlad/hp_series.hpp"
#include "rlad/mlf.hpp"

using namespace rlad;

namespace {

// Event counts of `paths` renewal paths up to t, drawn straight from the sampler.
std::vector<std::size_t> count_events(const MlParams& ml, double t, std::size_t paths,
                                      std::uint64_t seed)
{
    auto rng = RandomStream::for_replicate(seed, 0);
    std::vector<std::size_t> counts(paths);
    for (auto& c : counts) {
        double s = sample(ml, rng);
        c = 0;
        while (s <= t) {
            ++c;
            s += sample(ml, rng);
        }
    }
    return counts;
}

}  // namespace

TEST_CASE("Poisson case")
{
    const CountingLaw law(MlParams(1.0), 200);
    for (double t : {0.1, 1.0, 7.5, 40.0}) {
        for (std::size_t n : {0u, 1u, 3u, 10u, 60u}) {
            CHECK(std::abs(pmf(law, t, n) - oracle::poisson_pmf(t, n)) < 1e-12);
        }
        const PmfTable tab = pmf_table(MlParams(1.0), t);
        for (std::size_t n = 0; n < tab.probs.size(); ++n) {
            CHECK(std::abs(tab.probs[n] - oracle::poisson_pmf(t, n)) < 1e-12);
        }
    }
}

TEST_CASE("zero events is the survival function")
{
    for (double beta : {0.3, 0.5, 0.7, 0.95}) {
        const MlParams ml(beta, 1.7);
        const CountingLaw law(ml, 10);
        for (double t : {0.2, 1.0, 30.0, 400.0}) {
            CAPTURE(beta);
            CAPTURE(t);
            CHECK(std::abs(pmf(law, t, 0) - survival(ml, t)) < 1e-12);
        }
    }
}

TEST_CASE("tables are normalised within the certified bounds")
{
    for (double beta : {0.3, 0.5, 0.7, 0.9}) {
        for (double t : {0.5, 1.0, 20.0, 150.0}) {
            const PmfTable tab = pmf_table(MlParams(beta), t);
            const double sum = std::accumulate(tab.probs.begin(), tab.probs.end(), 0.0);
            CAPTURE(beta);
            CAPTURE(t);
            CHECK(sum + tab.tail_bound >= 1.0 - 1e-8);
            CHECK(sum + tab.tail_bound <= 1.0 + 1e-8);
            CHECK(sum <= 1.0 + 1e-12);
            CHECK(1.0 - sum <= 1e-8 + 1e-12);
            for (double p : tab.probs) {
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
            }
        }
    }
}

TEST_CASE("beta = 1/2, t = 1: table against simulated renewal counts")
{
    const MlParams ml(0.5);
    const PmfTable tab = pmf_table(ml, 1.0);
    const std::size_t paths = 1000000;
    const auto counts = count_events(ml, 1.0, paths, 21);
    for (std::size_t n = 0; n < std::min<std::size_t>(tab.probs.size(), 15); ++n) {
        const double emp =
            static_cast<double>(std::count(counts.begin(), counts.end(), n)) / paths;
        const double p = tab.probs[n];
        if (p * paths < 20.0) continue;
        CAPTURE(n);
        CHECK(std::abs(emp - p) <= 4.0 * std::sqrt(p * (1 - p) / paths) + 1e-12);
    }
}

TEST_CASE("generating function")
{
    for (double t : {0.0, 1.0, 9.0}) CHECK(pgf(CountingLaw(MlParams(0.6), 5), 1.0, t) == 1.0);
    for (double z : {-1.0, -0.3, 0.4, 0.9}) {
        for (double t : {0.5, 3.0}) {
            CHECK(pgf(CountingLaw(MlParams(1.0), 5), z, t) ==
                  doctest::Approx(std::exp((z - 1) * t)).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(pgf(CountingLaw(MlParams(0.6), 5), 1.5, 1.0), DomainError);

    const PmfTable one = pmf_table(MlParams(0.5), 1.0);
    double alt = 0.0;
    for (std::size_t n = 0; n < one.probs.size(); ++n) alt += (n % 2 ? -1.0 : 1.0) * one.probs[n];
    CHECK(std::abs(pgf(CountingLaw(MlParams(0.5), 5), -1.0, 1.0) - alt) < 1e-6);
    CHECK(std::abs(eval_mlf(0.5, -2.0) - alt) < 1e-6);

    for (double beta : {0.4, 0.7, 0.9}) {
        for (double t : {0.5, 5.0, 60.0}) {
            const PmfTable tab = pmf_table(MlParams(beta, 1.5), t);
            for (double z : {-1.0, -0.5, 0.5}) {
                double s = 0.0;
                double zn = 1.0;
                for (double p : tab.probs) {
                    s += zn * p;
                    zn *= z;
                }
                CAPTURE(beta);
                CAPTURE(t);
                CAPTURE(z);
                CHECK(std::abs(s - pgf(CountingLaw(MlParams(beta, 1.5), 5), z, t)) < 1e-6);
            }
        }
    }
}

TEST_CASE("P{N(t) >= n} is non-decreasing in t")
{
    for (double beta : {0.5, 0.8}) {
        std::vector<double> prev(8, 0.0);
        for (double t = 0.25; t <= 30.0; t *= 1.3) {
            const PmfTable tab = pmf_table(MlParams(beta), t);
            double below = 0.0;
            for (std::size_t n = 0; n < prev.size(); ++n) {
                const double at_least = 1.0 - below;
                CHECK(at_least >= prev[n] - 1e-12);
                prev[n] = at_least;
                if (n < tab.probs.size()) below += tab.probs[n];
            }
        }
    }
}

TEST_CASE("renewal paths")
{
    auto rng = RandomStream::for_replicate(31, 0);
    const CountingLaw exp_law(MlParams(1.0), 5);
    double sum = 0.0;
    double sum2 = 0.0;
    const int paths = 10000;
    for (int k = 0; k < paths; ++k) {
        const auto s = sample_path(exp_law, 1000.0, rng);
        sum += s.size();
        sum2 += static_cast<double>(s.size()) * s.size();
    }
    const double mean = sum / paths;
    const double se = std::sqrt((sum2 / paths - mean * mean) / paths);
    CHECK(std::abs(mean - 1000.0) < 3.0 * se);

    for (double beta : {0.4, 0.8, 1.0}) {
        const CountingLaw law(MlParams(beta, 0.5), 5);
        for (int k = 0; k < 200; ++k) {
            const auto s = sample_path(law, 50.0, rng);
            for (std::size_t j = 0; j < s.size(); ++j) {
                CHECK(s[j] > (j ? s[j - 1] : 0.0));
                CHECK(s[j] <= 50.0);
            }
        }
    }

    const CountingLaw half(MlParams(0.5), 5);
    const int n = 100000;
    int empty = 0;
    for (int k = 0; k < n; ++k) empty += sample_path(half, 10.0, rng).empty();
    const double p0 = eval_mlf(0.5, -std::sqrt(10.0));
    CHECK(std::abs(static_cast<double>(empty) / n - p0) < 3.0 * std::sqrt(p0 * (1 - p0) / n));

    CHECK_THROWS_AS(sample_path(exp_law, 1000.0, rng, 10), ResourceError);
    CHECK_THROWS_AS(sample_path(exp_law, 0.0, rng), DomainError);
}

TEST_CASE("renewal counts match the mass function")
{
    const MlParams ml(0.7, 1.0);
    const CountingLaw law(ml, 5);
    auto rng = RandomStream::for_replicate(41, 0);
    const std::size_t paths = 100000;
    std::vector<std::size_t> hist(64, 0);
    for (std::size_t k = 0; k < paths; ++k) {
        ++hist[std::min<std::size_t>(sample_path(law, 5.0, rng).size(), 63)];
    }
    const PmfTable tab = pmf_table(ml, 5.0);
    for (std::size_t n = 0; n < std::min<std::size_t>(tab.probs.size(), 63); ++n) {
        const double p = tab.probs[n];
        // the normal approximation needs a reasonable expected count
        if (p * paths < 20.0) continue;
        CAPTURE(n);
        CHECK(std::abs(static_cast<double>(hist[n]) / paths - p) <=
              4.0 * std::sqrt(p * (1 - p) / paths) + 1e-12);
    }
}

TEST_CASE("library Monte Carlo estimator")
{
    const MlParams ml(0.6, 2.0);
    const MonteCarloPmf mc = pmf_monte_carlo(ml, 8.0, 40, 200000, 5);
    const PmfTable tab = pmf_table(ml, 8.0);
    CHECK(std::abs(std::accumulate(mc.probs.begin(), mc.probs.end(), 0.0) - 1.0) < 1e-12);
    for (std::size_t n = 0; n < 30 && n < tab.probs.size(); ++n) {
        const double p = tab.probs[n];
        if (p * mc.paths < 20.0) continue;
        CHECK(std::abs(mc.probs[n] - p) <= 4.0 * std::sqrt(p * (1 - p) / mc.paths) + 1e-12);
    }
    CHECK_THROWS_AS(pmf(CountingLaw(ml, 5, PmfMethod::monte_carlo), 1.0, 1), AccuracyError);
}

TEST_CASE("stable CDF at beta = 1/2 has a closed form")
{
    // Laplace transform exp(-sqrt(s)): Levy law with CDF erfc(1 / (2 sqrt(x)))
    for (double x : {0.01, 0.1, 0.5, 1.0, 4.0, 30.0, 1000.0}) {
        CAPTURE(x);
        CHECK(std::abs(stable_cdf(0.5, x) - std::erfc(0.5 / std::sqrt(x))) < 1e-9);
    }
}

TEST_CASE("subordination integral against the series")
{
    const CountingLaw law(MlParams(0.7), 20);
    for (std::size_t n : {1u, 3u, 10u}) {
        CHECK(std::abs(pmf_stable_integral(0.7, 5.0, n) - pmf(law, 5.0, n)) < 1e-5);
    }
    const CountingLaw stable(MlParams(0.7, 2.0), 20, PmfMethod::stable_integral);
    const CountingLaw series(MlParams(0.7, 2.0), 20);
    for (std::size_t n : {0u, 2u, 6u}) {
        CHECK(std::abs(pmf(stable, 9.0, n) - pmf(series, 9.0, n)) < 1e-5);
    }
    CHECK(std::abs(pmf_stable_integral(0.9999, 2.0, 1) - 2.0 * std::exp(-2.0)) < 1e-4);
    CHECK_THROWS_AS(pmf_stable_integral(0.7, 5.0, 0), DomainError);
}

TEST_CASE("subordination integral against simulation at t = 250")
{
    const MonteCarloPmf mc = pmf_monte_carlo(MlParams(0.5), 250.0, 200, 1000000, 77);
    const double p = pmf_stable_integral(0.5, 250.0, 50);
    CHECK(std::abs(mc.probs[50] - p) < 4.0 * mc.std_error[50]);
}

TEST_CASE("series kernel: serial and parallel agree exactly")
{
    // z up to (2000)^beta, the certified time window
    for (double beta : {0.35, 0.7}) {
        for (double z : {0.5, 6.0, std::pow(2000.0, beta)}) {
            const auto a = hp::pmf_block(beta, z, 0, 60);
            const auto b = hp::pmf_block_serial(beta, z, 0, 60);
            CHECK(a.probs == b.probs);
            CHECK(a.error_bound == b.error_bound);
            const auto c = hp::pmf_block(beta, z, 17, 9);
            for (std::size_t k = 0; k < 9; ++k) {
                CHECK(std::abs(c.probs[k] - a.probs[17 + k]) <= a.error_bound + c.error_bound);
            }
        }
    }
}

TEST_CASE("series kernel against row-wise derivatives")
{
    for (double beta : {0.5, 0.7}) {
        const double z = 9.0;
        const auto block = hp::pmf_block(beta, z, 0, 40);
        for (unsigned n : {1u, 5u, 20u, 39u}) {
            // P_n = z^n / n! E^{(n)}(-z)
            const double direct = std::exp(n * std::log(z) - std::lgamma(n + 1.0)) *
                                  hp::mlf_derivative_hp(beta, n, z, 1e-12);
            CAPTURE(beta);
            CAPTURE(n);
            CHECK(std::abs(block.probs[n] - direct) <= 1e-12 + 1e-10 * direct);
        }
    }
}

TEST_CASE("rational orders are detected")
{
    CHECK(hp::as_small_rational(0.7).p == 7);
    CHECK(hp::as_small_rational(0.7).q == 10);
    CHECK(hp::as_small_rational(1.0 / 3.0).q == 3);
    CHECK(hp::as_small_rational(0.5).q == 2);
    CHECK(hp::as_small_rational(0.7853981633974483).q == 0);
}

TEST_CASE("truncation and argument errors")
{
    TableOptions tiny;
    tiny.n_cap = 5;
    CHECK_THROWS_AS(pmf_table(MlParams(0.5), 200.0, tiny), TruncationError);
    CHECK_THROWS_AS(pmf_table(MlParams(0.5), -1.0), DomainError);
    CHECK_THROWS_AS(CountingLaw(MlParams(0.5), 0), DomainError);
    CHECK_THROWS_AS(pmf(CountingLaw(MlParams(0.5), 3), 1.0, 4), DomainError);
    const PmfTable zero = pmf_table(MlParams(0.5), 0.0);
    CHECK(zero.probs == std::vector<double>{1.0});
}
