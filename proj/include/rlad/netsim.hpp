#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "rlad/chain.hpp"
#include "rlad/mlf.hpp"
#include "rlad/paretomatch.hpp"
#include "rlad/random.hpp"

namespace rlad {

struct ExponentialLaw {
    double mean = 1.0;
};

/// Inter-event law of the network clock.
using WaitingLaw = std::variant<MlParams, ParetoParams, ExponentialLaw>;

double draw_waiting_time(const WaitingLaw& law, RandomStream& rng);

struct InitialLinks {
    enum class Kind { full, count, explicit_set };
    Kind kind = Kind::full;
    std::size_t count = 0;                                  // Kind::count
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // Kind::explicit_set

    static InitialLinks full() { return {}; }
    static InitialLinks with_count(std::size_t c) { return {Kind::count, c, {}}; }
};

struct EpidemicParams {
    double tau_infection = 0.25;  // mean transmission time per S-I link
    double tau_recovery = 1.0;    // mean recovery time per infected node
    std::size_t initial_infected = 5;
};

struct SimConfig {
    ChainParams chain{20, 0.0};
    WaitingLaw law = MlParams(1.0);
    double horizon = 250.0;
    InitialLinks initial = InitialLinks::full();
    std::optional<EpidemicParams> epidemic;
    std::size_t replicates = 1;
    std::uint64_t seed = 1;
    std::size_t event_cap = 10'000'000;

    /// Throws DomainError / ConfigError for inconsistent settings.
    void validate() const;
};

/// Piecewise-constant path: state (links, infected) holds on [time[k], time[k+1]).
/// time[0] = 0 is the initial state. `infected` is empty without an epidemic.
struct Trajectory {
    std::vector<double> time;
    std::vector<std::uint32_t> links;
    std::vector<std::uint32_t> infected;
    std::size_t network_events = 0;
    std::size_t idle_events = 0;  // network events that left the graph unchanged
};

/// RLAD network alone: at each renewal epoch one of the M node pairs is toggled with
/// probability 1 - alpha.
Trajectory run_rlad(const SimConfig& cfg, std::size_t replicate);

/// RLAD network with a Markovian SIS epidemic on top of it.
Trajectory run_rlad_sis(const SimConfig& cfg, std::size_t replicate);

struct SimEnsemble {
    std::vector<double> times;
    std::vector<std::vector<double>> link_pmf;     // [time][j], j = 0..M
    std::vector<std::vector<double>> link_pmf_se;  // binomial standard errors
    std::vector<double> mean_links;
    std::vector<double> mean_links_se;
    std::vector<double> prevalence;  // mean infected fraction; empty without an epidemic
    std::vector<double> prevalence_se;
    std::vector<std::uint64_t> replicate_seeds;
    std::size_t replicates = 0;
    double idle_fraction = 0.0;  // pooled idle network events / network events
};

/// Runs cfg.replicates replicates and aggregates the states at `record_times`.
/// Replicate r draws from RandomStream::for_replicate(cfg.seed, r); results are
/// combined in replicate order, so the output does not depend on the thread count.
SimEnsemble ensemble(const SimConfig& cfg, const std::vector<double>& record_times);

/// Serial reference for ensemble.
SimEnsemble ensemble_serial(const SimConfig& cfg, const std::vector<double>& record_times);

}  // namespace rlad
