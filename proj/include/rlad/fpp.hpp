#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rlad/mlf.hpp"
#include "rlad/random.hpp"

namespace rlad {

enum class PmfMethod { series_derivative, monte_carlo, stable_integral };

/// Law of the fractional Poisson counting process N_beta(t).
struct CountingLaw {
    MlParams ml;
    std::size_t n_max = 1;  // largest event count a caller may ask for
    PmfMethod method = PmfMethod::series_derivative;

    CountingLaw(MlParams ml_, std::size_t n_max_, PmfMethod method_ = PmfMethod::series_derivative);
};

/// P{N_beta(t) = n} = (t/gamma)^{beta n} / n! * E_beta^{(n)}(-(t/gamma)^beta).
/// Throws AccuracyError when the law's method cannot certify 1e-8 absolute error.
double pmf(const CountingLaw& law, double t, std::size_t n);

/// The full mass function P{N(t) = 0..n_max}, with n_max the first index whose
/// partial sum reaches 1 - tail_target. All masses are non-negative, so the
/// partial sums certify the discarded tail.
struct PmfTable {
    double t = 0.0;
    std::vector<double> probs;
    double tail_bound = 0.0;      // bound on sum_{n > n_max} P{N(t) = n}
    double rounding_bound = 0.0;  // bound on |computed - exact| for each entry
};

struct TableOptions {
    double tail_target = 1e-8;
    std::size_t n_cap = 20000;
    bool parallel = true;
};

PmfTable pmf_table(const MlParams& ml, double t, const TableOptions& opts = {});

/// G(z; t) = E[z^{N(t)}] = E_beta((z - 1) (t/gamma)^beta), |z| <= 1.
double pgf(const CountingLaw& law, double z, double t);

/// Renewal event times S_1 < S_2 < ... <= horizon.
std::vector<double> sample_path(const CountingLaw& law, double horizon, RandomStream& rng,
                                std::size_t event_cap = 10'000'000);

/// CDF of the one-sided stable law with Laplace transform exp(-s^beta), via
/// Zolotarev's integral over (0, pi).
double stable_cdf(double beta, double x);

/// P{N_beta(t) = n} from the subordination integral over a stable CDF (gamma = 1).
double pmf_stable_integral(double beta, double t, std::size_t n);

/// Empirical counting masses from `paths` simulated renewal paths.
struct MonteCarloPmf {
    std::vector<double> probs;   // index n = 0..n_max; last bin also holds overflow
    std::vector<double> std_error;  // binomial standard errors
    std::size_t paths = 0;
};

MonteCarloPmf pmf_monte_carlo(const MlParams& ml, double t, std::size_t n_max, std::size_t paths,
                              std::uint64_t seed);

}  // namespace rlad
