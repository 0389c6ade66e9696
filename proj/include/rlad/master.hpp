#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlad/chain.hpp"
#include "rlad/fpp.hpp"
#include "rlad/mlf.hpp"

namespace rlad {

/// Renewal counting process N(t) driving a semi-Markov chain. `table(t, parallel)` returns
/// P{N(t) = n} for n = 0..n_max with a bound on the discarded tail; `survival(t)`
/// is P{T > t} = P{N(t) = 0}.
struct CountingProcess {
    std::string name;
    std::function<PmfTable(double t, bool parallel)> table;
    std::function<double(double)> survival;

    /// Fractional Poisson counts from Mittag-Leffler waiting times (beta = 1: Poisson).
    static CountingProcess mittag_leffler(const MlParams& ml, TableOptions opts = {});
    /// Poisson counts from exponential waiting times with the given mean.
    static CountingProcess exponential(double mean, TableOptions opts = {});
};

struct SemiMarkovSpec {
    TransitionMatrix chain;
    CountingProcess counting;
};

/// p_{i,j}(t) for j over the state space at each requested time.
struct TransientSolution {
    std::size_t initial = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> probs;  // probs[t][j]
    std::vector<double> truncation_error;    // certified bound on the missing mass per time
};

///   p_{i,j}(t) = sum_n (Q^n)_{i,j} P{N(t) = n},
/// with the n = 0 term equal to the survival function times delta_{ij}.
/// Parallel over times (or inside the counting kernel when there is only one time).
TransientSolution transient_pmf(const SemiMarkovSpec& spec, std::size_t i,
                                const std::vector<double>& times);

/// Serial reference for transient_pmf.
TransientSolution transient_pmf_serial(const SemiMarkovSpec& spec, std::size_t i,
                                       const std::vector<double>& times);

/// The same solution through Q = V diag(lambda) V^{-1} and the generating function,
///   p_{i,j}(t) = sum_m V_{i,m} V^{-1}_{m,j} E_beta((lambda_m - 1)(t/gamma)^beta).
/// Limited to chains whose spectral form is well conditioned.
TransientSolution transient_pmf_spectral(const TransitionMatrix& q, const MlParams& ml,
                                         std::size_t i, const std::vector<double>& times);

/// E[X(t)] = sum_j j p_{i,j}(t) through the series solution.
std::vector<double> expected_links(const SemiMarkovSpec& spec, std::size_t i,
                                   const std::vector<double>& times);

/// Mean of the Ehrenfest chain under Mittag-Leffler counts:
///   M/2 + (i - M/2) E_beta(-2 (1 - alpha) (t/gamma)^beta / M).
std::vector<double> expected_links_closed_form(const ChainParams& p, const MlParams& ml,
                                               std::size_t i, const std::vector<double>& times);

/// max over grid points t_n in [t_start, T] of |D^beta p_{i,j}(t_n) - gamma^{-beta} ((pQ)_j - p_j)|,
/// where D^beta is the L1 discretisation of the Caputo derivative. `sol` must sit on a
/// uniform grid starting at 0. A negative t_start selects T/2.
double caputo_residual(const TransientSolution& sol, const ChainParams& p, const MlParams& ml,
                       std::size_t j, double t_start = -1.0);

struct RefinementStudy {
    std::vector<double> steps;
    std::vector<double> residuals;
    double order = 0.0;  // least-squares slope of log residual against log step
};

/// Residuals of state j (started from i) on uniform grids of [0, horizon] with the
/// given steps. Throws AccuracyError if the finest residual exceeds `tolerance`.
RefinementStudy caputo_refinement(const ChainParams& p, const MlParams& ml, std::size_t i,
                                  std::size_t j, double horizon, const std::vector<double>& steps,
                                  double tolerance);

/// p_{A,A}(t) of the two-state chain q_{A,B} = q_{B,B} = 1 through the generic engine.
std::vector<double> relaxation_survival(const CountingProcess& law,
                                        const std::vector<double>& times);

/// sup_k |p_k - q_k|.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

/// First time whose distance to `target` falls below eps, if any.
std::optional<double> equilibration_time(const TransientSolution& sol,
                                         const std::vector<double>& target, double eps);

}  // namespace rlad
