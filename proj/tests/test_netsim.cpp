#include <doctest.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rlad/error.hpp"
#include "rlad/master.hpp"
#include "rlad/netsim.hpp"
#include "rlad/paretomatch.hpp"

using namespace rlad;

namespace {

SimConfig small_config(double beta = 0.7, std::size_t replicates = 200)
{
    SimConfig cfg;
    cfg.chain = ChainParams(6, 0.0);
    cfg.law = MlParams(beta, 1.0);
    cfg.horizon = 50.0;
    cfg.replicates = replicates;
    cfg.seed = 99;
    return cfg;
}

void check_same(const SimEnsemble& a, const SimEnsemble& b)
{
    CHECK(a.times == b.times);
    CHECK(a.link_pmf == b.link_pmf);
    CHECK(a.link_pmf_se == b.link_pmf_se);
    CHECK(a.mean_links == b.mean_links);
    CHECK(a.mean_links_se == b.mean_links_se);
    CHECK(a.prevalence == b.prevalence);
    CHECK(a.prevalence_se == b.prevalence_se);
    CHECK(a.replicate_seeds == b.replicate_seeds);
    CHECK(a.idle_fraction == b.idle_fraction);
}

}  // namespace

TEST_CASE("every event moves one link when alpha = 0")
{
    for (const WaitingLaw& law : {WaitingLaw{MlParams(0.6, 2.0)}, WaitingLaw{ParetoParams(1.4)},
                                  WaitingLaw{ExponentialLaw{0.5}}}) {
        SimConfig cfg = small_config();
        cfg.law = law;
        cfg.replicates = 5;
        for (std::size_t r = 0; r < cfg.replicates; ++r) {
            const Trajectory tr = run_rlad(cfg, r);
            CHECK(tr.time.front() == 0.0);
            CHECK(tr.links.front() == 15);
            CHECK(tr.idle_events == 0);
            CHECK(tr.network_events + 1 == tr.time.size());
            CHECK(tr.infected.empty());
            for (std::size_t k = 1; k < tr.time.size(); ++k) {
                CHECK(tr.time[k] > tr.time[k - 1]);
                CHECK(tr.time[k] <= cfg.horizon);
                const int step = static_cast<int>(tr.links[k]) - static_cast<int>(tr.links[k - 1]);
                CHECK(std::abs(step) == 1);
                CHECK(tr.links[k] <= 15);
            }
        }
    }
}

TEST_CASE("initial link configurations")
{
    SimConfig cfg = small_config();
    cfg.initial = InitialLinks::with_count(4);
    CHECK(run_rlad(cfg, 0).links.front() == 4);
    cfg.initial = InitialLinks{InitialLinks::Kind::explicit_set, 0, {{0, 1}, {2, 5}, {4, 3}}};
    CHECK(run_rlad(cfg, 0).links.front() == 3);
    cfg.initial = InitialLinks::with_count(0);
    CHECK(run_rlad(cfg, 0).links.front() == 0);
}

TEST_CASE("configuration errors")
{
    auto expect_domain = [](auto mutate) {
        SimConfig cfg = small_config();
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), DomainError);
    };
    expect_domain([](SimConfig& c) { c.horizon = 0.0; });
    expect_domain([](SimConfig& c) { c.horizon = std::numeric_limits<double>::infinity(); });
    expect_domain([](SimConfig& c) { c.replicates = 0; });
    expect_domain([](SimConfig& c) { c.law = ExponentialLaw{0.0}; });
    expect_domain([](SimConfig& c) { c.initial = InitialLinks::with_count(16); });
    expect_domain([](SimConfig& c) { c.initial = InitialLinks{InitialLinks::Kind::explicit_set, 0, {{2, 2}}}; });
    expect_domain([](SimConfig& c) { c.initial = InitialLinks{InitialLinks::Kind::explicit_set, 0, {{0, 6}}}; });
    expect_domain(
        [](SimConfig& c) { c.initial = InitialLinks{InitialLinks::Kind::explicit_set, 0, {{0, 1}, {1, 0}}}; });
    expect_domain([](SimConfig& c) { c.epidemic = EpidemicParams{0.0, 1.0, 2}; });
    expect_domain([](SimConfig& c) { c.epidemic = EpidemicParams{0.25, 1.0, 7}; });

    SimConfig cfg = small_config();
    cfg.chain = ChainParams::from_links(7, 0.0);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = small_config();
    CHECK_THROWS_AS(run_rlad_sis(cfg, 0), ConfigError);
    cfg.epidemic = EpidemicParams{};
    CHECK_THROWS_AS(run_rlad(cfg, 0), ConfigError);
    CHECK_THROWS_AS(run_rlad_sis(cfg, cfg.replicates), DomainError);

    cfg = small_config();
    CHECK_THROWS_AS(ensemble(cfg, {10.0, 5.0}), DomainError);
    CHECK_THROWS_AS(ensemble(cfg, {60.0}), DomainError);
}

TEST_CASE("event cap")
{
    SimConfig cfg = small_config(0.3);
    cfg.horizon = 1000.0;
    cfg.law = ExponentialLaw{0.01};
    cfg.event_cap = 1000;
    CHECK_THROWS_AS(run_rlad(cfg, 0), ResourceError);
    cfg.replicates = 3;
    try {
        ensemble(cfg, {1.0});
        FAIL("ensemble should propagate the event cap");
    } catch (const ResourceError& e) {
        CHECK(std::string(e.what()).find("replicate 0") != std::string::npos);
    }
}

TEST_CASE("single replicate gives indicators")
{
    SimConfig cfg = small_config(0.8, 1);
    cfg.epidemic = EpidemicParams{0.5, 1.0, 2};
    const std::vector<double> times{0.0, 3.0, 17.5, 50.0};
    const auto ens = ensemble(cfg, times);
    const auto tr = run_rlad_sis(cfg, 0);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto at = std::upper_bound(tr.time.begin(), tr.time.end(), times[k]) - tr.time.begin() - 1;
        const std::uint32_t links = tr.links[static_cast<std::size_t>(at)];
        for (std::size_t j = 0; j < ens.link_pmf[k].size(); ++j) {
            CHECK(ens.link_pmf[k][j] == (j == links ? 1.0 : 0.0));
            CHECK(ens.link_pmf_se[k][j] == 0.0);
        }
        CHECK(ens.mean_links[k] == links);
        CHECK(ens.prevalence[k] == tr.infected[static_cast<std::size_t>(at)] / 6.0);
    }
    CHECK(ens.replicate_seeds == std::vector<std::uint64_t>{RandomStream::derive_seed(99, 0)});
}

TEST_CASE("results do not depend on the thread count")
{
    SimConfig cfg = small_config(0.55, 64);
    cfg.chain = ChainParams(7, 0.2);
    cfg.epidemic = EpidemicParams{0.25, 1.0, 3};
    const std::vector<double> times{0.0, 1.0, 10.0, 49.0};
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = ensemble(cfg, times);
    omp_set_num_threads(3);
    const auto three = ensemble(cfg, times);
    omp_set_num_threads(saved);
    check_same(one, three);
    check_same(one, ensemble_serial(cfg, times));
    check_same(one, ensemble(cfg, times));

    cfg.seed = 100;
    CHECK(ensemble(cfg, times).mean_links != one.mean_links);
}

TEST_CASE("state bounds and estimator consistency")
{
    SimConfig cfg = small_config(0.6, 300);
    cfg.chain = ChainParams(6, 0.1);
    cfg.epidemic = EpidemicParams{0.3, 1.0, 2};
    for (std::size_t r = 0; r < 20; ++r) {
        const auto tr = run_rlad_sis(cfg, r);
        CHECK(*std::max_element(tr.links.begin(), tr.links.end()) <= 15);
        CHECK(*std::max_element(tr.infected.begin(), tr.infected.end()) <= 6);
        CHECK(tr.infected.front() == 2);
    }
    const auto ens = ensemble(cfg, {0.0, 5.0, 25.0, 50.0});
    for (std::size_t k = 0; k < ens.times.size(); ++k) {
        const auto& v = ens.link_pmf[k];
        CHECK(std::abs(std::accumulate(v.begin(), v.end(), 0.0) - 1.0) < 1e-12);
        double mean = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) mean += j * v[j];
        CHECK(mean == doctest::Approx(ens.mean_links[k]).epsilon(1e-12));
        CHECK(ens.prevalence[k] >= 0.0);
        CHECK(ens.prevalence[k] <= 1.0);
    }
    CHECK(ens.prevalence[0] == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("idle events occur at rate alpha")
{
    SimConfig cfg = small_config();
    cfg.chain = ChainParams(6, 0.3);
    cfg.law = ExponentialLaw{1.0};
    cfg.horizon = 20000.0;
    const auto tr = run_rlad(cfg, 0);
    const double n = static_cast<double>(tr.network_events);
    const double frac = tr.idle_events / n;
    CHECK(std::abs(frac - 0.3) < 3.0 * std::sqrt(0.21 / n));
    for (std::size_t k = 1; k < tr.time.size(); ++k) {
        CHECK(std::abs(static_cast<int>(tr.links[k]) - static_cast<int>(tr.links[k - 1])) <= 1);
    }

    cfg.horizon = 2000.0;
    cfg.replicates = 10;
    const auto ens = ensemble(cfg, {2000.0});
    CHECK(std::abs(ens.idle_fraction - 0.3) < 3.0 * std::sqrt(0.21 / 20000.0));
}

TEST_CASE("ensemble mean follows the exponential relaxation at beta = 1")
{
    SimConfig cfg = small_config(1.0, 4000);
    cfg.horizon = 1000.0;
    const std::vector<double> times{10.0, 100.0, 1000.0};
    const auto ens = ensemble(cfg, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double exact = 7.5 + 7.5 * std::exp(-2.0 * times[k] / 15.0);
        CHECK(std::abs(ens.mean_links[k] - exact) < 3.0 * ens.mean_links_se[k]);
    }
}

TEST_CASE("ensemble link law matches the exact solution")
{
    SimConfig cfg = small_config(0.7, 4000);
    cfg.chain = ChainParams(8, 0.0);
    cfg.horizon = 20.0;
    cfg.law = MlParams(0.7, 1.5);
    const auto ens = ensemble(cfg, {20.0});
    const SemiMarkovSpec spec{build_q(cfg.chain), CountingProcess::mittag_leffler(MlParams(0.7, 1.5))};
    const auto exact = transient_pmf(spec, 28, {20.0});
    const double d = tv_distance(ens.link_pmf[0], exact.probs[0]);
    MESSAGE("sup distance to the exact law: " << d);
    CHECK(d < 0.03);
}

TEST_CASE("SIS on a frozen complete graph")
{
    SimConfig cfg = small_config(1.0, 4000);
    cfg.law = ExponentialLaw{1e12};
    cfg.horizon = 5.0;
    cfg.epidemic = EpidemicParams{0.25, 1.0, 2};
    const std::vector<double> times{0.5, 1.0, 2.0, 5.0};
    const auto ens = ensemble(cfg, times);
    std::vector<std::vector<int>> complete(6, std::vector<int>(6, 1));
    for (std::size_t u = 0; u < 6; ++u) complete[u][u] = 0;
    const auto ref = oracle::gillespie_sis(complete, 0.25, 1.0, 2, times, 4000, 12345);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(ens.mean_links[k] == 15.0);
        const double sim = 6.0 * ens.prevalence[k];
        const double se = std::hypot(6.0 * ens.prevalence_se[k], ref.std_error[k]);
        CHECK(std::abs(sim - ref.mean_infected[k]) < 3.0 * se);
    }

    // transmission switched off: pure recovery
    cfg.epidemic = EpidemicParams{1e12, 1.0, 5};
    const auto decay = ensemble(cfg, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double expect = 5.0 * std::exp(-times[k]);
        CHECK(std::abs(6.0 * decay.prevalence[k] - expect) < 3.0 * 6.0 * decay.prevalence_se[k]);
    }
}

TEST_CASE("matched Pareto network reproduces the Mittag-Leffler link law")
{
    for (double beta : {0.7, 0.5}) {
        SimConfig ml;
        ml.chain = ChainParams(20, 0.0);
        ml.law = MlParams(beta, initial_gamma(beta));
        ml.horizon = 2000.0;
        ml.replicates = 5000;
        ml.seed = 7;
        SimConfig pareto = ml;
        pareto.law = ParetoParams(1.0 + beta);
        pareto.seed = 8;
        const auto a = ensemble(ml, {2000.0});
        const auto b = ensemble(pareto, {2000.0});
        const double d = tv_distance(a.link_pmf[0], b.link_pmf[0]);
        MESSAGE("beta " << beta << ": link-law distance at t = 2000: " << d);
        CHECK(d <= 0.05);
    }
}
