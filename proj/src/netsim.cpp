#include "rlad/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rlad/error.hpp"

namespace rlad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Network plus epidemic state with incrementally maintained counters.
class SimState {
public:
    SimState(const SimConfig& cfg, RandomStream& rng)
        : n_(cfg.chain.nodes()), adj_(n_ * n_, 0), infected_(n_, 0), inf_nbrs_(n_, 0)
    {
        for (std::size_t u = 0; u < n_; ++u) {
            for (std::size_t v = u + 1; v < n_; ++v) {
                pairs_.emplace_back(u, v);
            }
        }
        switch (cfg.initial.kind) {
        case InitialLinks::Kind::full:
            for (const auto& [u, v] : pairs_) {
                set_link(u, v, true);
            }
            break;
        case InitialLinks::Kind::count: {
            std::vector<std::size_t> idx(pairs_.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t k = 0; k < cfg.initial.count; ++k) {
                std::swap(idx[k], idx[k + rng.below(idx.size() - k)]);
                set_link(pairs_[idx[k]].first, pairs_[idx[k]].second, true);
            }
            break;
        }
        case InitialLinks::Kind::explicit_set:
            for (const auto& [u, v] : cfg.initial.pairs) {
                set_link(u, v, true);
            }
            break;
        }
        if (cfg.epidemic) {
            std::vector<std::size_t> nodes(n_);
            std::iota(nodes.begin(), nodes.end(), std::size_t{0});
            for (std::size_t k = 0; k < cfg.epidemic->initial_infected; ++k) {
                std::swap(nodes[k], nodes[k + rng.below(n_ - k)]);
                infect(nodes[k]);
            }
        }
    }

    std::uint32_t links() const { return links_; }
    std::uint32_t infected() const { return n_infected_; }
    std::uint64_t si_links() const { return si_; }

    void toggle_random_pair(RandomStream& rng)
    {
        const auto& [u, v] = pairs_[rng.below(pairs_.size())];
        set_link(u, v, !adj_[u * n_ + v]);
    }

    // Infection along a uniformly chosen S-I link: a susceptible node is chosen
    // with weight equal to its number of infected neighbours.
    void infect_random(RandomStream& rng)
    {
        std::uint64_t k = rng.below(si_);
        for (std::size_t v = 0; v < n_; ++v) {
            if (infected_[v]) {
                continue;
            }
            if (k < inf_nbrs_[v]) {
                infect(v);
                return;
            }
            k -= inf_nbrs_[v];
        }
        throw ResourceError("S-I link counter out of sync");
    }

    void recover_random(RandomStream& rng)
    {
        std::uint64_t k = rng.below(n_infected_);
        for (std::size_t v = 0; v < n_; ++v) {
            if (infected_[v] && k-- == 0) {
                recover(v);
                return;
            }
        }
        throw ResourceError("infected counter out of sync");
    }

private:
    void set_link(std::size_t u, std::size_t v, bool on)
    {
        if (static_cast<bool>(adj_[u * n_ + v]) == on) {
            return;
        }
        adj_[u * n_ + v] = adj_[v * n_ + u] = on ? 1 : 0;
        const int d = on ? 1 : -1;
        links_ += static_cast<std::uint32_t>(d);
        if (infected_[u]) {
            inf_nbrs_[v] += static_cast<std::uint32_t>(d);
            if (!infected_[v]) {
                si_ += static_cast<std::uint64_t>(d);
            }
        }
        if (infected_[v]) {
            inf_nbrs_[u] += static_cast<std::uint32_t>(d);
            if (!infected_[u]) {
                si_ += static_cast<std::uint64_t>(d);
            }
        }
    }

    void infect(std::size_t v)
    {
        infected_[v] = 1;
        ++n_infected_;
        si_ -= inf_nbrs_[v];
        for (std::size_t w = 0; w < n_; ++w) {
            if (adj_[v * n_ + w]) {
                ++inf_nbrs_[w];
                if (!infected_[w]) {
                    ++si_;
                }
            }
        }
    }

    void recover(std::size_t v)
    {
        infected_[v] = 0;
        --n_infected_;
        si_ += inf_nbrs_[v];
        for (std::size_t w = 0; w < n_; ++w) {
            if (adj_[v * n_ + w]) {
                --inf_nbrs_[w];
                if (!infected_[w]) {
                    --si_;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
    std::vector<std::uint8_t> adj_;
    std::vector<std::uint8_t> infected_;
    std::vector<std::uint32_t> inf_nbrs_;
    std::uint32_t links_ = 0;
    std::uint32_t n_infected_ = 0;
    std::uint64_t si_ = 0;
};

struct RunStats {
    std::size_t network_events = 0;
    std::size_t idle_events = 0;
};

// Event loop. The network keeps one absolute next-event time drawn from the waiting
// law; the epidemic clock is a fresh exponential after every event (memorylessness).
// `emit(t, state)` is called for the initial state at t = 0 and after every change,
// with the new state holding from t.
template <class Emit>
RunStats simulate(const SimConfig& cfg, std::size_t replicate, bool with_epidemic, Emit&& emit)
{
    RandomStream rng = RandomStream::for_replicate(cfg.seed, replicate);
    SimState s(cfg, rng);
    RunStats stats;
    emit(0.0, s);

    const double alpha = cfg.chain.alpha();
    const double inv_tau_i = with_epidemic ? 1.0 / cfg.epidemic->tau_infection : 0.0;
    const double inv_tau_h = with_epidemic ? 1.0 / cfg.epidemic->tau_recovery : 0.0;
    double t = 0.0;
    double next_network = draw_waiting_time(cfg.law, rng);
    std::size_t events = 0;
    while (true) {
        double next_epidemic = kInf;
        double infect_rate = 0.0;
        double total_rate = 0.0;
        if (with_epidemic) {
            infect_rate = static_cast<double>(s.si_links()) * inv_tau_i;
            total_rate = infect_rate + static_cast<double>(s.infected()) * inv_tau_h;
            if (total_rate > 0.0) {
                next_epidemic = t + rng.exponential(1.0 / total_rate);
            }
        }
        const double next = std::min(next_network, next_epidemic);
        if (next > cfg.horizon) {
            return stats;
        }
        if (++events > cfg.event_cap) {
            throw ResourceError("replicate exceeded the event cap of " +
                                std::to_string(cfg.event_cap));
        }
        t = next;
        if (next_network <= next_epidemic) {
            ++stats.network_events;
            if (alpha > 0.0 && rng.uniform() < alpha) {
                ++stats.idle_events;
            } else {
                s.toggle_random_pair(rng);
                emit(t, s);
            }
            next_network = t + draw_waiting_time(cfg.law, rng);
        } else {
            if (rng.uniform() * total_rate < infect_rate) {
                s.infect_random(rng);
            } else {
                s.recover_random(rng);
            }
            emit(t, s);
        }
    }
}

Trajectory trajectory(const SimConfig& cfg, std::size_t replicate, bool with_epidemic)
{
    cfg.validate();
    if (replicate >= cfg.replicates) {
        throw DomainError("replicate index " + std::to_string(replicate) + " out of range");
    }
    Trajectory tr;
    const RunStats stats = simulate(cfg, replicate, with_epidemic, [&](double t, const SimState& s) {
        tr.time.push_back(t);
        tr.links.push_back(s.links());
        if (with_epidemic) {
            tr.infected.push_back(s.infected());
        }
    });
    tr.network_events = stats.network_events;
    tr.idle_events = stats.idle_events;
    return tr;
}

struct ReplicateRecord {
    std::vector<std::uint32_t> links;
    std::vector<std::uint32_t> infected;
    RunStats stats;
};

ReplicateRecord record_replicate(const SimConfig& cfg, std::size_t replicate,
                                 const std::vector<double>& times)
{
    const bool epi = cfg.epidemic.has_value();
    ReplicateRecord rec;
    rec.links.resize(times.size());
    if (epi) {
        rec.infected.resize(times.size());
    }
    std::size_t next = 0;
    std::uint32_t cur_links = 0;
    std::uint32_t cur_inf = 0;
    auto fill_before = [&](double t) {
        // Record times strictly before t see the state that held until t.
        while (next < times.size() && times[next] < t) {
            rec.links[next] = cur_links;
            if (epi) {
                rec.infected[next] = cur_inf;
            }
            ++next;
        }
    };
    rec.stats = simulate(cfg, replicate, epi, [&](double t, const SimState& s) {
        fill_before(t);
        cur_links = s.links();
        cur_inf = s.infected();
    });
    fill_before(kInf);
    return rec;
}

SimEnsemble ensemble_impl(const SimConfig& cfg, const std::vector<double>& times, bool parallel)
{
    cfg.validate();
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0 && times[k] <= cfg.horizon)) {
            throw DomainError("record time " + num(times[k]) + " outside [0, horizon]");
        }
        if (k > 0 && !(times[k] > times[k - 1])) {
            throw DomainError("record times must be strictly increasing");
        }
    }
    const std::size_t reps = cfg.replicates;
    std::vector<ReplicateRecord> recs(reps);
    std::vector<std::string> errors(reps);
    std::vector<ErrorCategory> cats(reps, ErrorCategory::resource);
    std::vector<char> failed(reps, 0);
    auto run_one = [&](std::size_t r) {
        try {
            recs[r] = record_replicate(cfg, r, times);
        } catch (const Error& e) {
            failed[r] = 1;
            cats[r] = e.category();
            errors[r] = e.what();
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(reps); ++r) {
            run_one(static_cast<std::size_t>(r));
        }
    } else {
        for (std::size_t r = 0; r < reps; ++r) {
            run_one(r);
        }
    }
    for (std::size_t r = 0; r < reps; ++r) {
        if (failed[r]) {
            throw_with_context(cats[r], "replicate " + std::to_string(r) + ": " + errors[r]);
        }
    }

    const std::size_t states = cfg.chain.states();
    const double nodes = static_cast<double>(cfg.chain.nodes());
    const double rd = static_cast<double>(reps);
    SimEnsemble out;
    out.times = times;
    out.replicates = reps;
    for (std::size_t r = 0; r < reps; ++r) {
        out.replicate_seeds.push_back(RandomStream::derive_seed(cfg.seed, r));
    }
    std::size_t net_events = 0;
    std::size_t idle = 0;
    for (const auto& rec : recs) {
        net_events += rec.stats.network_events;
        idle += rec.stats.idle_events;
    }
    out.idle_fraction = net_events > 0 ? static_cast<double>(idle) / static_cast<double>(net_events) : 0.0;

    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<std::uint64_t> counts(states, 0);
        double sum = 0.0;
        double sum_sq = 0.0;
        double isum = 0.0;
        double isum_sq = 0.0;
        for (const auto& rec : recs) {
            const double x = rec.links[k];
            ++counts[rec.links[k]];
            sum += x;
            sum_sq += x * x;
            if (cfg.epidemic) {
                const double f = static_cast<double>(rec.infected[k]) / nodes;
                isum += f;
                isum_sq += f * f;
            }
        }
        std::vector<double> pmf(states);
        std::vector<double> se(states);
        for (std::size_t j = 0; j < states; ++j) {
            pmf[j] = static_cast<double>(counts[j]) / rd;
            se[j] = std::sqrt(pmf[j] * (1.0 - pmf[j]) / rd);
        }
        out.link_pmf.push_back(std::move(pmf));
        out.link_pmf_se.push_back(std::move(se));
        auto mean_se = [&](double s1, double s2) {
            const double m = s1 / rd;
            const double var = reps > 1 ? std::max(0.0, (s2 - rd * m * m) / (rd - 1.0)) : 0.0;
            return std::pair{m, std::sqrt(var / rd)};
        };
        const auto [ml, mlse] = mean_se(sum, sum_sq);
        out.mean_links.push_back(ml);
        out.mean_links_se.push_back(mlse);
        if (cfg.epidemic) {
            const auto [mp, mpse] = mean_se(isum, isum_sq);
            out.prevalence.push_back(mp);
            out.prevalence_se.push_back(mpse);
        }
    }
    return out;
}

}  // namespace

double draw_waiting_time(const WaitingLaw& law, RandomStream& rng)
{
    return std::visit(
        [&](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, MlParams>) {
                return sample(l, rng);
            } else if constexpr (std::is_same_v<L, ParetoParams>) {
                return pareto_sample(l, rng);
            } else {
                return rng.exponential(l.mean);
            }
        },
        law);
}

void SimConfig::validate() const
{
    if (chain.nodes() == 0) {
        throw ConfigError("simulation needs a node count N");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DomainError("horizon must be finite and > 0, got " + num(horizon));
    }
    if (replicates < 1) {
        throw DomainError("replicates must be >= 1");
    }
    if (const auto* e = std::get_if<ExponentialLaw>(&law); e != nullptr && !(e->mean > 0.0)) {
        throw DomainError("exponential mean must be > 0, got " + num(e->mean));
    }
    if (initial.kind == InitialLinks::Kind::count && initial.count > chain.links()) {
        throw DomainError("initial link count " + std::to_string(initial.count) + " exceeds M = " +
                          std::to_string(chain.links()));
    }
    if (initial.kind == InitialLinks::Kind::explicit_set) {
        std::vector<char> seen(chain.nodes() * chain.nodes(), 0);
        for (const auto& [u, v] : initial.pairs) {
            if (u == v || u >= chain.nodes() || v >= chain.nodes()) {
                throw DomainError("invalid initial link (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ")");
            }
            char& s = seen[std::min(u, v) * chain.nodes() + std::max(u, v)];
            if (s) {
                throw DomainError("duplicate initial link (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ")");
            }
            s = 1;
        }
    }
    if (epidemic) {
        if (!(epidemic->tau_infection > 0.0) || !std::isfinite(epidemic->tau_infection) ||
            !(epidemic->tau_recovery > 0.0) || !std::isfinite(epidemic->tau_recovery)) {
            throw DomainError("epidemic mean times must be finite and > 0");
        }
        if (epidemic->initial_infected > chain.nodes()) {
            throw DomainError("initial infected count exceeds N");
        }
    }
}

Trajectory run_rlad(const SimConfig& cfg, std::size_t replicate)
{
    if (cfg.epidemic) {
        throw ConfigError("run_rlad takes a configuration without an epidemic");
    }
    return trajectory(cfg, replicate, false);
}

Trajectory run_rlad_sis(const SimConfig& cfg, std::size_t replicate)
{
    if (!cfg.epidemic) {
        throw ConfigError("run_rlad_sis needs epidemic parameters");
    }
    return trajectory(cfg, replicate, true);
}

SimEnsemble ensemble(const SimConfig& cfg, const std::vector<double>& record_times)
{
    return ensemble_impl(cfg, record_times, true);
}

SimEnsemble ensemble_serial(const SimConfig& cfg, const std::vector<double>& record_times)
{
    return ensemble_impl(cfg, record_times, false);
}

}  // namespace rlad
