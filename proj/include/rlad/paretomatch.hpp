#pragma once

#include <cstddef>
#include <vector>

#include "rlad/mlf.hpp"
#include "rlad/random.hpp"

namespace rlad {

/// Generalised Pareto law with density (delta - 1)/(1 + t)^delta, 1 < delta < 2.
class ParetoParams {
public:
    explicit ParetoParams(double delta);
    double delta() const { return delta_; }

    bool operator==(const ParetoParams&) const = default;

private:
    double delta_;
};

/// (1 + t)^{1 - delta}.
double pareto_survival(const ParetoParams& p, double t);

/// Inverse CDF: U^{-1/(delta-1)} - 1.
double pareto_sample(const ParetoParams& p, RandomStream& rng);

/// (pi / (sin(beta pi) Gamma(beta)))^{1/beta}: the scale whose Mittag-Leffler tail
/// matches the Pareto(1 + beta) tail.
double initial_gamma(double beta);

struct MatchSpec {
    MlParams ml;
    ParetoParams pareto;
    double horizon = 0.0;
    std::vector<double> grid;
    std::vector<double> ml_survival;
    std::vector<double> pareto_survival;
    double discrepancy = 0.0;      // max |S_ml - S_pareto| over the grid
    double log_discrepancy = 0.0;  // max |ln S_ml - ln S_pareto| over the grid
};

/// Compares both survival functions on `gridsize` log-spaced points of
/// [horizon/1e3, horizon]. Requires ml.beta() == delta - 1.
MatchSpec match_quality(const MlParams& ml, const ParetoParams& p, double horizon,
                        std::size_t gridsize = 200);

struct RefinedGamma {
    MlParams ml;
    double discrepancy = 0.0;
    double initial_discrepancy = 0.0;
    bool improved = false;  // false when no point beat the starting scale
    int iterations = 0;
};

/// Golden-section search for gamma on [gamma0/4, 4 gamma0] (relative tolerance 1e-3)
/// minimising the match_quality discrepancy. Never returns a worse scale than ml0.
RefinedGamma refine_gamma(const MlParams& ml0, const ParetoParams& p, double horizon,
                          std::size_t gridsize = 200);

}  // namespace rlad
