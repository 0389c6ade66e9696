#pragma once

// Independent reference computations used by the tests. None of them call into the
// library kernels they check.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

/// E_beta(z) from the defining power series summed in MPFR, with enough precision
/// to absorb the cancellation plus `digits` decimal digits.
double mlf_series(double beta, double z, int digits = 50);

/// n-th derivative of E_beta at z from the term-wise differentiated series in MPFR.
double mlf_derivative_series(double beta, unsigned n, double z, int digits = 40);

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf);

/// Asymptotic 1% critical value of the KS statistic.
double ks_critical_1pct(std::size_t n);

std::vector<double> binomial_pmf(std::size_t n, double p);

/// Poisson(t) mass at n through Boost.Math.
double poisson_pmf(double t, std::size_t n);

/// Forward Kolmogorov equations dp/dt = rate * p (Q - I) from the point mass at i,
/// integrated with an adaptive Dormand-Prince scheme at tight tolerances.
std::vector<std::vector<double>> kolmogorov(const Eigen::MatrixXd& q, std::size_t i,
                                            const std::vector<double>& times, double rate = 1.0);

struct SisEstimate {
    std::vector<double> mean_infected;
    std::vector<double> std_error;
};

/// Direct-method Gillespie simulation of Markovian SIS on a fixed graph.
SisEstimate gillespie_sis(const std::vector<std::vector<int>>& adjacency, double tau_i,
                          double tau_h, std::size_t initial_infected,
                          const std::vector<double>& times, std::size_t reps,
                          std::uint64_t seed);

/// Minimiser of f over a uniform scan of `points` values in [lo, hi].
double scan_minimum(const std::function<double(double)>& f, double lo, double hi,
                    std::size_t points);

}  // namespace oracle
