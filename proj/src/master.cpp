#include "rlad/master.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlad/error.hpp"

namespace rlad {

namespace {

void check_times(const std::vector<double>& times)
{
    for (double t : times) {
        if (!(t >= 0.0) || !std::isfinite(t)) {
            throw DomainError("times must be finite and >= 0, got " + num(t));
        }
    }
}

void check_state(std::size_t i, std::size_t states)
{
    if (i >= states) {
        throw DomainError("initial state " + std::to_string(i) + " outside 0.." +
                          std::to_string(states - 1));
    }
}

// Accumulates sum_n P_n(t) e_i Q^n for every time, walking the row vector once.
TransientSolution accumulate(const SemiMarkovSpec& spec, std::size_t i,
                             const std::vector<double>& times, std::vector<PmfTable> tables)
{
    const Eigen::MatrixXd& q = spec.chain.matrix();
    const auto s = q.rows();
    TransientSolution sol;
    sol.initial = i;
    sol.times = times;
    sol.probs.assign(times.size(), std::vector<double>(static_cast<std::size_t>(s), 0.0));
    sol.truncation_error.resize(times.size());
    std::size_t n_max = 0;
    for (std::size_t k = 0; k < tables.size(); ++k) {
        n_max = std::max(n_max, tables[k].probs.size());
        sol.truncation_error[k] = tables[k].tail_bound;
    }
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(s);
    r(static_cast<Eigen::Index>(i)) = 1.0;
    for (std::size_t n = 0; n < n_max; ++n) {
        for (std::size_t k = 0; k < tables.size(); ++k) {
            if (n >= tables[k].probs.size()) {
                continue;
            }
            const double w = tables[k].probs[n];
            auto& out = sol.probs[k];
            for (Eigen::Index j = 0; j < s; ++j) {
                out[static_cast<std::size_t>(j)] += w * r(j);
            }
        }
        if (n + 1 < n_max) {
            r = r * q;
        }
    }
    return sol;
}

TransientSolution transient_impl(const SemiMarkovSpec& spec, std::size_t i,
                                 const std::vector<double>& times, bool parallel)
{
    check_times(times);
    check_state(i, spec.chain.states());
    std::vector<PmfTable> tables(times.size());
    if (parallel && times.size() > 1) {
        std::vector<std::string> errors(times.size());
        std::vector<char> failed(times.size(), 0);
        std::vector<ErrorCategory> cats(times.size(), ErrorCategory::accuracy);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(times.size()); ++k) {
            const auto u = static_cast<std::size_t>(k);
            try {
                tables[u] = spec.counting.table(times[u], false);
            } catch (const Error& e) {
                failed[u] = 1;
                cats[u] = e.category();
                errors[u] = e.what();
            }
        }
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (failed[k]) {
                throw_with_context(cats[k], "t=" + num(times[k]) + ": " + errors[k]);
            }
        }
    } else {
        for (std::size_t k = 0; k < times.size(); ++k) {
            tables[k] = spec.counting.table(times[k], parallel);
        }
    }
    return accumulate(spec, i, times, std::move(tables));
}

}  // namespace

CountingProcess CountingProcess::mittag_leffler(const MlParams& ml, TableOptions opts)
{
    CountingProcess c;
    c.name = "mittag-leffler(beta=" + num(ml.beta()) + ", gamma=" + num(ml.gamma()) + ")";
    c.table = [ml, opts](double t, bool parallel) {
        TableOptions o = opts;
        o.parallel = parallel;
        return pmf_table(ml, t, o);
    };
    c.survival = [ml](double t) { return rlad::survival(ml, t); };
    return c;
}

CountingProcess CountingProcess::exponential(double mean, TableOptions opts)
{
    CountingProcess c = mittag_leffler(MlParams(1.0, mean), opts);
    c.name = "exponential(mean=" + num(mean) + ")";
    return c;
}

TransientSolution transient_pmf(const SemiMarkovSpec& spec, std::size_t i,
                                const std::vector<double>& times)
{
    return transient_impl(spec, i, times, true);
}

TransientSolution transient_pmf_serial(const SemiMarkovSpec& spec, std::size_t i,
                                       const std::vector<double>& times)
{
    return transient_impl(spec, i, times, false);
}

TransientSolution transient_pmf_spectral(const TransitionMatrix& q, const MlParams& ml,
                                         std::size_t i, const std::vector<double>& times)
{
    check_times(times);
    check_state(i, q.states());
    const Spectral sp = spectral(q);
    const auto s = static_cast<Eigen::Index>(q.states());
    const auto ii = static_cast<Eigen::Index>(i);
    TransientSolution sol;
    sol.initial = i;
    sol.times = times;
    sol.truncation_error.assign(times.size(), 0.0);
    for (double t : times) {
        const double z = ml.scaled_power(t);
        Eigen::VectorXd g(s);
        for (Eigen::Index m = 0; m < s; ++m) {
            const double lam = std::clamp(sp.values(m), -1.0, 1.0);
            g(m) = eval_mlf(ml.beta(), (lam - 1.0) * z);
        }
        const Eigen::RowVectorXd row = sp.right.row(ii).cwiseProduct(g.transpose()) * sp.left;
        sol.probs.emplace_back(row.data(), row.data() + s);
    }
    return sol;
}

std::vector<double> expected_links(const SemiMarkovSpec& spec, std::size_t i,
                                   const std::vector<double>& times)
{
    const TransientSolution sol = transient_pmf(spec, i, times);
    std::vector<double> out;
    out.reserve(times.size());
    for (const auto& p : sol.probs) {
        double m = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            m += static_cast<double>(j) * p[j];
        }
        out.push_back(m);
    }
    return out;
}

std::vector<double> expected_links_closed_form(const ChainParams& p, const MlParams& ml,
                                               std::size_t i, const std::vector<double>& times)
{
    check_times(times);
    check_state(i, p.states());
    const double m = static_cast<double>(p.links());
    const double rate = 2.0 * (1.0 - p.alpha()) / m;
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        out.push_back(m / 2.0 +
                      (static_cast<double>(i) - m / 2.0) * eval_mlf(ml.beta(), -rate * ml.scaled_power(t)));
    }
    return out;
}

double caputo_residual(const TransientSolution& sol, const ChainParams& p, const MlParams& ml,
                       std::size_t j, double t_start)
{
    const std::size_t n_pts = sol.times.size();
    if (n_pts < 3 || sol.times.front() != 0.0) {
        throw DomainError("Caputo residual needs a uniform grid of at least 3 points from t = 0");
    }
    const double h = sol.times[1];
    for (std::size_t k = 0; k < n_pts; ++k) {
        if (std::abs(sol.times[k] - static_cast<double>(k) * h) > 1e-9 * std::max(1.0, sol.times[k])) {
            throw DomainError("Caputo residual needs a uniform time grid");
        }
    }
    check_state(j, p.states());
    if (sol.probs.empty() || sol.probs.front().size() != p.states()) {
        throw DimensionError("solution state space does not match the chain");
    }
    const double horizon = sol.times.back();
    if (t_start < 0.0) {
        t_start = horizon / 2.0;
    }

    const double beta = ml.beta();
    const Eigen::MatrixXd q = build_q(p).matrix();
    const auto jj = static_cast<Eigen::Index>(j);
    std::vector<double> f(n_pts);
    for (std::size_t k = 0; k < n_pts; ++k) {
        f[k] = sol.probs[k][j];
    }
    // L1 weights b_k = (k+1)^{1-beta} - k^{1-beta}.
    std::vector<double> b(n_pts);
    b[0] = 1.0;  // pow(0, 0) would zero it at beta = 1
    for (std::size_t k = 1; k < n_pts; ++k) {
        const double kd = static_cast<double>(k);
        b[k] = std::pow(kd + 1.0, 1.0 - beta) - std::pow(kd, 1.0 - beta);
    }
    const double scale = std::pow(h, -beta) / std::tgamma(2.0 - beta);
    const double rate = std::pow(ml.gamma(), -beta);

    double worst = 0.0;
    for (std::size_t n = 1; n < n_pts; ++n) {
        if (sol.times[n] < t_start) {
            continue;
        }
        double d = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            d += b[k] * (f[n - k] - f[n - k - 1]);
        }
        d *= scale;
        double flow = -f[n];
        for (Eigen::Index m = std::max<Eigen::Index>(0, jj - 1);
             m <= std::min<Eigen::Index>(q.rows() - 1, jj + 1); ++m) {
            flow += sol.probs[n][static_cast<std::size_t>(m)] * q(m, jj);
        }
        worst = std::max(worst, std::abs(d - rate * flow));
    }
    return worst;
}

RefinementStudy caputo_refinement(const ChainParams& p, const MlParams& ml, std::size_t i,
                                  std::size_t j, double horizon, const std::vector<double>& steps,
                                  double tolerance)
{
    if (steps.size() < 2) {
        throw DomainError("refinement study needs at least two step sizes");
    }
    const SemiMarkovSpec spec{build_q(p), CountingProcess::mittag_leffler(ml)};
    RefinementStudy out;
    for (double h : steps) {
        if (!(h > 0.0 && h < horizon)) {
            throw DomainError("step " + num(h) + " outside (0, horizon)");
        }
        const auto n = static_cast<std::size_t>(std::llround(horizon / h));
        std::vector<double> grid(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            grid[k] = static_cast<double>(k) * h;
        }
        const TransientSolution sol = transient_pmf(spec, i, grid);
        out.steps.push_back(h);
        out.residuals.push_back(caputo_residual(sol, p, ml, j));
    }
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    const double cnt = static_cast<double>(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const double x = std::log(out.steps[k]);
        const double y = std::log(out.residuals[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.order = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    const auto finest = std::min_element(out.steps.begin(), out.steps.end()) - out.steps.begin();
    if (!(out.residuals[static_cast<std::size_t>(finest)] <= tolerance)) {
        throw AccuracyError("grid too coarse: residual " +
                            num(out.residuals[static_cast<std::size_t>(finest)]) +
                            " at the finest step exceeds " + num(tolerance));
    }
    return out;
}

std::vector<double> relaxation_survival(const CountingProcess& law, const std::vector<double>& times)
{
    Eigen::MatrixXd q(2, 2);
    q << 0.0, 1.0, 0.0, 1.0;
    const SemiMarkovSpec spec{TransitionMatrix(q), law};
    const TransientSolution sol = transient_pmf(spec, 0, times);
    std::vector<double> out;
    out.reserve(times.size());
    for (const auto& p : sol.probs) {
        out.push_back(p[0]);
    }
    return out;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q)
{
    if (p.size() != q.size()) {
        throw DimensionError("distance between vectors of sizes " + std::to_string(p.size()) +
                             " and " + std::to_string(q.size()));
    }
    double d = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        d = std::max(d, std::abs(p[k] - q[k]));
    }
    return d;
}

std::optional<double> equilibration_time(const TransientSolution& sol,
                                         const std::vector<double>& target, double eps)
{
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        if (tv_distance(sol.probs[k], target) < eps) {
            return sol.times[k];
        }
    }
    return std::nullopt;
}

}  // namespace rlad
