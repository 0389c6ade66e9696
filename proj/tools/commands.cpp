#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "command.hpp"
#include "rlad/chain.hpp"
#include "rlad/error.hpp"
#include "rlad/fpp.hpp"
#include "rlad/master.hpp"
#include "rlad/mlf.hpp"
#include "rlad/netsim.hpp"
#include "rlad/paretomatch.hpp"
#include "rlad/random.hpp"

namespace rlad::cli {

namespace {

namespace fs = std::filesystem;

Param real(std::string key, json fallback, std::string help)
{
    return {std::move(key), Kind::real, std::move(fallback), std::move(help)};
}

Param integer(std::string key, json fallback, std::string help)
{
    return {std::move(key), Kind::integer, std::move(fallback), std::move(help)};
}

Param text(std::string key, json fallback, std::string help)
{
    return {std::move(key), Kind::text, std::move(fallback), std::move(help)};
}

Param reals(std::string key, json fallback, std::string help)
{
    return {std::move(key), Kind::reals, std::move(fallback), std::move(help)};
}

Param required(Param p)
{
    p.required = true;
    return p;
}

Param output(std::string key, std::string help)
{
    Param p{std::move(key), Kind::text, "", std::move(help)};
    p.role = Role::output_file;
    return p;
}

std::size_t as_size(std::uint64_t v) { return static_cast<std::size_t>(v); }

ChainParams chain_from(const Run& r)
{
    if (r.config().contains("links") && r.set("links")) {
        return ChainParams::from_links(as_size(r.integer("links")), r.real("alpha"));
    }
    return ChainParams(as_size(r.integer("N")), r.real("alpha"));
}

MlParams ml_from(const Run& r) { return MlParams(r.real("beta"), r.real("gamma")); }

// Shared by simulate and sis.
std::vector<Param> sim_params()
{
    return {
        integer("N", 20, "Number of nodes"),
        real("alpha", 0.0, "Probability that an event leaves the network unchanged"),
        text("law", "ml", "Waiting-time law: ml, pareto or exponential"),
        real("beta", 1.0, "Mittag-Leffler order"),
        real("gamma", 1.0, "Mittag-Leffler time scale"),
        real("delta", nullptr, "Pareto exponent [default: 1 + beta]"),
        real("mean", 1.0, "Mean of the exponential law"),
        real("horizon", 250.0, "Simulated time span"),
        reals("times", nullptr, "Record times (list or start:step:stop) [default: horizon]"),
        text("initial", "full", "Initial network: full, or a number of random links"),
        integer("replicates", 1000, "Number of independent replicates"),
        integer("seed", 1, "Master seed"),
        integer("event_cap", 10'000'000, "Maximum network events per replicate"),
    };
}

WaitingLaw law_from(const Run& r)
{
    const std::string law = r.text("law");
    if (law == "ml") return ml_from(r);
    if (law == "pareto") {
        return ParetoParams(r.set("delta") ? r.real("delta") : 1.0 + r.real("beta"));
    }
    if (law == "exponential") return ExponentialLaw{r.real("mean")};
    throw ConfigError("--law must be ml, pareto or exponential, got '" + law + "'");
}

SimConfig sim_from(const Run& r, bool epidemic)
{
    SimConfig cfg;
    cfg.chain = ChainParams(as_size(r.integer("N")), r.real("alpha"));
    cfg.law = law_from(r);
    cfg.horizon = r.real("horizon");
    const std::string init = r.text("initial");
    if (init == "full") {
        cfg.initial = InitialLinks::full();
    } else {
        std::size_t used = 0;
        unsigned long long c = 0;
        try {
            c = std::stoull(init, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != init.size() || init[0] == '-') {
            throw ConfigError("--initial must be 'full' or a link count, got '" + init + "'");
        }
        cfg.initial = InitialLinks::with_count(static_cast<std::size_t>(c));
    }
    if (epidemic) {
        cfg.epidemic = EpidemicParams{r.real("tau_i"), r.real("tau_h"),
                                      as_size(r.integer("initial_infected"))};
    }
    cfg.replicates = as_size(r.integer("replicates"));
    cfg.seed = r.integer("seed");
    cfg.event_cap = as_size(r.integer("event_cap"));
    return cfg;
}

std::vector<double> record_times(const Run& r)
{
    return r.set("times") ? r.reals("times") : std::vector<double>{r.real("horizon")};
}

// ---- mlf ----------------------------------------------------------------------

void mlf_eval(Run& r)
{
    const double beta = r.real("beta");
    Csv csv({"z", "value"});
    for (double z : r.reals("z")) {
        csv.row(z, eval_mlf(beta, z));
    }
    r.write(r.text("out"), csv.str());
}

void mlf_sample(Run& r)
{
    const MlParams ml = ml_from(r);
    auto rng = RandomStream::for_replicate(r.integer("seed"), 0);
    Csv csv({"sample"});
    for (std::uint64_t k = 0; k < r.integer("count"); ++k) {
        csv.row(sample(ml, rng));
    }
    r.write(r.text("out"), csv.str());
}

// ---- fpp ----------------------------------------------------------------------

void fpp_pmf(Run& r)
{
    const MlParams ml = ml_from(r);
    const std::string method = r.text("method");
    Csv csv({"t", "n", "probability"});
    for (double t : r.reals("times")) {
        if (method == "series-derivative") {
            TableOptions opts;
            opts.tail_target = r.real("tail_target");
            const PmfTable tab = pmf_table(ml, t, opts);
            std::size_t last = tab.probs.size() - 1;
            if (r.set("n_max")) last = std::min(last, as_size(r.integer("n_max")));
            for (std::size_t n = 0; n <= last; ++n) {
                csv.row(t, n, tab.probs[n]);
            }
        } else if (method == "stable-integral") {
            if (!r.set("n_max")) {
                throw ConfigError("--method stable-integral needs --n-max");
            }
            const double tau = t / ml.gamma();
            for (std::size_t n = 0; n <= as_size(r.integer("n_max")); ++n) {
                const double p = n == 0 ? survival(ml, t) : pmf_stable_integral(ml.beta(), tau, n);
                csv.row(t, n, p);
            }
        } else {
            throw ConfigError("--method must be series-derivative or stable-integral, got '" +
                              method + "'");
        }
    }
    r.write(r.text("out"), csv.str());
}

// ---- chain --------------------------------------------------------------------

void chain_stationary(Run& r)
{
    const auto pi = stationary(chain_from(r));
    Csv csv({"j", "probability"});
    for (std::size_t j = 0; j < pi.size(); ++j) csv.row(j, pi[j]);
    r.write(r.text("out"), csv.str());
}

void chain_degree(Run& r)
{
    const auto d = degree_distribution(ChainParams(as_size(r.integer("N")), 0.0));
    Csv csv({"degree", "probability"});
    for (std::size_t k = 0; k < d.size(); ++k) csv.row(k, d[k]);
    r.write(r.text("out"), csv.str());
}

// ---- solve --------------------------------------------------------------------

void solve(Run& r)
{
    const ChainParams p = chain_from(r);
    const MlParams ml = ml_from(r);
    TableOptions opts;
    opts.tail_target = r.real("tail_target");
    const SemiMarkovSpec spec{build_q(p), CountingProcess::mittag_leffler(ml, opts)};
    const std::size_t i = r.set("i") ? as_size(r.integer("i")) : p.links();
    if (i > p.links()) {
        throw DomainError("--i must lie in [0, M = " + std::to_string(p.links()) + "], got " +
                          std::to_string(i));
    }
    const TransientSolution sol = transient_pmf(spec, i, r.reals("times"));
    Csv csv({"t", "j", "probability"});
    Csv links({"t", "expected_links"});
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        double mean = 0.0;
        for (std::size_t j = 0; j < sol.probs[k].size(); ++j) {
            csv.row(sol.times[k], j, sol.probs[k][j]);
            mean += static_cast<double>(j) * sol.probs[k][j];
        }
        links.row(sol.times[k], mean);
    }
    r.write(r.text("out"), csv.str());
    if (!r.text("links_out").empty()) {
        r.write(r.text("links_out"), links.str());
    }
}

// ---- simulate / sis -----------------------------------------------------------

void simulate(Run& r)
{
    const SimEnsemble e = ensemble(sim_from(r, false), record_times(r));
    Csv csv({"t", "j", "pmf_estimate", "stderr"});
    Csv summary({"t", "mean_links", "stderr"});
    for (std::size_t k = 0; k < e.times.size(); ++k) {
        for (std::size_t j = 0; j < e.link_pmf[k].size(); ++j) {
            csv.row(e.times[k], j, e.link_pmf[k][j], e.link_pmf_se[k][j]);
        }
        summary.row(e.times[k], e.mean_links[k], e.mean_links_se[k]);
    }
    r.write(r.text("out"), csv.str());
    if (!r.text("summary_out").empty()) {
        r.write(r.text("summary_out"), summary.str());
    }
}

void sis(Run& r)
{
    const SimEnsemble e = ensemble(sim_from(r, true), record_times(r));
    Csv csv({"t", "mean_links", "mean_links_stderr", "mean_prevalence", "prevalence_stderr"});
    for (std::size_t k = 0; k < e.times.size(); ++k) {
        csv.row(e.times[k], e.mean_links[k], e.mean_links_se[k], e.prevalence[k],
                e.prevalence_se[k]);
    }
    r.write(r.text("out"), csv.str());
}

// ---- match --------------------------------------------------------------------

json match_summary(const MatchSpec& m)
{
    json s = json::object();
    s["beta"] = m.ml.beta();
    s["delta"] = m.pareto.delta();
    s["gamma"] = m.ml.gamma();
    s["horizon"] = m.horizon;
    s["grid_points"] = m.grid.size();
    s["grid_start"] = m.grid.front();
    s["discrepancy"] = m.discrepancy;
    s["log_discrepancy"] = m.log_discrepancy;
    s["tail_ratio_1e5"] = survival(m.ml, 1e5) / pareto_survival(m.pareto, 1e5);
    return s;
}

std::string summary_path(const std::string& out)
{
    fs::path p(out);
    p.replace_extension();
    return p.string() + ".summary.json";
}

void match(Run& r)
{
    const double beta = r.real("beta");
    const ParetoParams pareto(1.0 + beta);
    const double g0 = r.set("gamma") ? r.real("gamma") : initial_gamma(beta);
    const double horizon = r.real("horizon");
    const std::size_t grid = as_size(r.integer("grid"));
    MlParams ml(beta, g0);
    RefinedGamma refined{ml, 0.0, 0.0, false, 0};
    if (r.flag("refine")) {
        refined = refine_gamma(ml, pareto, horizon, grid);
        ml = refined.ml;
    }
    const MatchSpec m = match_quality(ml, pareto, horizon, grid);
    Csv csv({"t", "ml_survival", "pareto_survival"});
    for (std::size_t k = 0; k < m.grid.size(); ++k) {
        csv.row(m.grid[k], m.ml_survival[k], m.pareto_survival[k]);
    }
    json s = match_summary(m);
    if (r.flag("refine")) {
        s["refined"] = {{"gamma_start", g0},
                        {"discrepancy_start", refined.initial_discrepancy},
                        {"improved", refined.improved},
                        {"iterations", refined.iterations}};
    }
    const std::string out = r.text("out");
    r.write(out, csv.str());
    std::string sp = r.text("summary_out");
    if (sp.empty() && !out.empty()) sp = summary_path(out);
    if (!sp.empty()) r.write(sp, s.dump(2) + "\n");
}

// ---- reproduce ----------------------------------------------------------------

constexpr std::size_t kNodes = 20;
constexpr double kTauI = 0.25;
constexpr double kTauH = 1.0;
constexpr std::size_t kInfected = 5;

struct Network {
    std::string label;
    WaitingLaw law;
};

// Mittag-Leffler scales of the matched pairs.
const MlParams kMl07(0.7, 4.0);
const MlParams kMl05(0.5, std::numbers::pi);

std::string beta_label(double b) { return fmt(b); }

struct Recipe {
    Run& r;
    fs::path dir;
    std::uint64_t seed;

    std::size_t replicates(std::size_t fallback) const
    {
        return r.set("replicates") ? as_size(r.integer("replicates")) : fallback;
    }

    SimConfig config(const WaitingLaw& law, double horizon, std::size_t reps, std::uint64_t stream,
                     bool epidemic) const
    {
        SimConfig c;
        c.chain = ChainParams(kNodes, 0.0);
        c.law = law;
        c.horizon = horizon;
        c.initial = InitialLinks::full();
        if (epidemic) c.epidemic = EpidemicParams{kTauI, kTauH, kInfected};
        c.replicates = reps;
        c.seed = RandomStream::derive_seed(seed, stream);
        return c;
    }

    void write(const std::string& name, const std::string& content)
    {
        r.write((dir / name).string(), content);
    }
};

std::vector<double> exact_pmf(const MlParams& ml, double t)
{
    const ChainParams p(kNodes, 0.0);
    const SemiMarkovSpec spec{build_q(p), CountingProcess::mittag_leffler(ml)};
    return transient_pmf(spec, p.links(), {t}).probs.front();
}

void fig0(Recipe& rc)
{
    const double t = 250.0;
    const std::size_t reps = rc.replicates(10000);
    const double betas[] = {1.0, 0.7, 0.5};
    for (std::size_t k = 0; k < 3; ++k) {
        const MlParams ml(betas[k], 1.0);
        const auto exact = exact_pmf(ml, t);
        const SimEnsemble e = ensemble(rc.config(ml, t, reps, k, false), {t});
        Csv csv({"j", "exact", "mc_estimate", "mc_stderr"});
        for (std::size_t j = 0; j < exact.size(); ++j) {
            csv.row(j, exact[j], e.link_pmf[0][j], e.link_pmf_se[0][j]);
        }
        rc.write("fig0_beta" + beta_label(betas[k]) + ".csv", csv.str());
    }
}

void fig1a(Recipe& rc)
{
    const double t = 2000.0;
    const ChainParams p(kNodes, 0.0);
    const auto pi = stationary(p);
    const SimEnsemble e = ensemble(rc.config(MlParams(1.0, 1.0), t, rc.replicates(5000), 0, false), {t});
    Csv csv({"j", "simulated", "stderr", "binomial"});
    for (std::size_t j = 0; j < pi.size(); ++j) {
        csv.row(j, e.link_pmf[0][j], e.link_pmf_se[0][j], pi[j]);
    }
    rc.write("fig1a.csv", csv.str());
}

void fig1bc(Recipe& rc, const MlParams& ml, const std::string& name)
{
    const double t = 2000.0;
    const std::size_t reps = rc.replicates(5000);
    const ChainParams p(kNodes, 0.0);
    const auto pi = stationary(p);
    const auto exact = exact_pmf(ml, t);
    const SimEnsemble a = ensemble(rc.config(ml, t, reps, 0, false), {t});
    const SimEnsemble b =
        ensemble(rc.config(ParetoParams(1.0 + ml.beta()), t, reps, 1, false), {t});
    Csv csv({"j", "ml_estimate", "ml_stderr", "pareto_estimate", "pareto_stderr", "exact",
             "binomial"});
    for (std::size_t j = 0; j < pi.size(); ++j) {
        csv.row(j, a.link_pmf[0][j], a.link_pmf_se[0][j], b.link_pmf[0][j], b.link_pmf_se[0][j],
                exact[j], pi[j]);
    }
    rc.write(name, csv.str());
}

void fig1d(Recipe& rc)
{
    const ChainParams p(kNodes, 0.0);
    std::vector<double> times;
    for (int k = 0; k <= 200; ++k) times.push_back(10.0 * k);
    const auto a = expected_links_closed_form(p, MlParams(1.0, 1.0), p.links(), times);
    const auto b = expected_links_closed_form(p, kMl07, p.links(), times);
    const auto c = expected_links_closed_form(p, kMl05, p.links(), times);
    Csv csv({"t", "exact_beta1", "exact_beta0.7", "exact_beta0.5", "reference"});
    const double ref = static_cast<double>(kNodes * (kNodes - 1)) / 4.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        csv.row(times[k], a[k], b[k], c[k], ref);
    }
    rc.write("fig1d.csv", csv.str());
}

void fig1e(Recipe& rc)
{
    const double horizon = 2000.0;
    const std::size_t reps = rc.replicates(5000);
    std::vector<double> times;
    for (int k = 0; k <= 200; ++k) times.push_back(10.0 * k);
    const std::vector<Network> nets = {
        {"ml_beta1", MlParams(1.0, 1.0)},
        {"ml_beta0.7", kMl07},
        {"pareto_delta1.7", ParetoParams(1.7)},
        {"ml_beta0.5", kMl05},
        {"pareto_delta1.5", ParetoParams(1.5)},
    };
    Csv csv({"network", "t", "mean_links", "mean_links_stderr", "mean_prevalence",
             "prevalence_stderr"});
    for (std::size_t n = 0; n < nets.size(); ++n) {
        const SimEnsemble e = ensemble(rc.config(nets[n].law, horizon, reps, n, true), times);
        for (std::size_t k = 0; k < times.size(); ++k) {
            csv.row(nets[n].label, e.times[k], e.mean_links[k], e.mean_links_se[k],
                    e.prevalence[k], e.prevalence_se[k]);
        }
    }
    rc.write("fig1e.csv", csv.str());
}

void fig_match(Recipe& rc)
{
    json all = json::array();
    for (const MlParams& ml : {kMl07, kMl05}) {
        const ParetoParams pareto(1.0 + ml.beta());
        const MatchSpec m = match_quality(ml, pareto, 2000.0, 200);
        Csv csv({"t", "ml_survival", "pareto_survival"});
        for (std::size_t k = 0; k < m.grid.size(); ++k) {
            csv.row(m.grid[k], m.ml_survival[k], m.pareto_survival[k]);
        }
        rc.write("match_beta" + beta_label(ml.beta()) + ".csv", csv.str());
        const RefinedGamma g = refine_gamma(ml, pareto, 2000.0, 200);
        json s = match_summary(m);
        s["refined"] = {{"gamma", g.ml.gamma()},
                        {"discrepancy", g.discrepancy},
                        {"improved", g.improved},
                        {"iterations", g.iterations}};
        all.push_back(s);
    }
    rc.write("match_summary.json", all.dump(2) + "\n");
}

void reproduce(Run& r)
{
    const std::string fig = r.text("figure");
    Recipe rc{r, fs::path(r.text("out_dir")), r.integer("seed")};
    if (fig == "fig0") {
        fig0(rc);
    } else if (fig == "fig1a") {
        fig1a(rc);
    } else if (fig == "fig1b") {
        fig1bc(rc, kMl07, "fig1b.csv");
    } else if (fig == "fig1c") {
        fig1bc(rc, kMl05, "fig1c.csv");
    } else if (fig == "fig1d") {
        fig1d(rc);
    } else if (fig == "fig1e") {
        fig1e(rc);
    } else if (fig == "match") {
        fig_match(rc);
    } else {
        throw ConfigError("unknown figure id '" + fig +
                          "' (expected fig0, fig1a, fig1b, fig1c, fig1d, fig1e or match)");
    }
    r.set_manifest_path((rc.dir / (fig + ".manifest.json")).string());
}

}  // namespace

std::vector<Command> commands()
{
    std::vector<Command> c;

    c.push_back({"mlf eval", "Evaluate E_beta(z) for z <= 0",
                 {required(real("beta", nullptr, "Order in (0,1]")),
                  required(reals("z", nullptr, "Arguments (list or start:step:stop)")),
                  output("out", "CSV path (default: standard output)")},
                 mlf_eval});

    c.push_back({"mlf sample", "Draw Mittag-Leffler waiting times",
                 {required(real("beta", nullptr, "Order in (0,1]")),
                  real("gamma", 1.0, "Time scale"),
                  integer("count", 1000, "Number of draws"),
                  integer("seed", 1, "Seed"),
                  output("out", "CSV path (default: standard output)")},
                 mlf_sample});

    c.push_back({"fpp pmf", "Fractional Poisson mass function",
                 {required(real("beta", nullptr, "Order in (0,1]")),
                  real("gamma", 1.0, "Time scale"),
                  required(reals("times", nullptr, "Times (list or start:step:stop)")),
                  text("method", "series-derivative", "series-derivative or stable-integral"),
                  real("tail_target", 1e-8, "Discarded tail mass of the series table"),
                  integer("n_max", nullptr, "Largest count to emit"),
                  output("out", "CSV path (default: standard output)")},
                 fpp_pmf});

    c.push_back({"chain stationary", "Stationary law of the link-count chain",
                 {integer("N", 20, "Number of nodes"),
                  integer("links", nullptr, "Link capacity M (overrides N)"),
                  real("alpha", 0.0, "Delay probability"),
                  output("out", "CSV path (default: standard output)")},
                 chain_stationary});

    c.push_back({"chain degree", "Stationary degree law of one node",
                 {integer("N", 20, "Number of nodes"),
                  output("out", "CSV path (default: standard output)")},
                 chain_degree});

    c.push_back({"solve", "Exact transient link-count law",
                 {integer("N", 20, "Number of nodes"),
                  integer("links", nullptr, "Link capacity M (overrides N)"),
                  real("alpha", 0.0, "Delay probability"),
                  real("beta", 1.0, "Mittag-Leffler order"),
                  real("gamma", 1.0, "Mittag-Leffler time scale"),
                  integer("i", nullptr, "Initial link count [default: M]"),
                  required(reals("times", nullptr, "Times (list or start:step:stop)")),
                  real("tail_target", 1e-8, "Discarded counting mass per time"),
                  output("out", "CSV path for (t, j, probability)"),
                  output("links_out", "CSV path for (t, expected_links)")},
                 solve});

    auto sim = sim_params();
    sim.push_back(output("out", "CSV path for (t, j, pmf_estimate, stderr)"));
    sim.push_back(output("summary_out", "CSV path for (t, mean_links, stderr)"));
    c.push_back({"simulate", "Event-driven ensemble of the network", sim, simulate});

    auto epi = sim_params();
    epi.push_back(real("tau_i", 0.25, "Mean infection time per S-I link"));
    epi.push_back(real("tau_h", 1.0, "Mean recovery time"));
    epi.push_back(integer("initial_infected", 5, "Infected nodes at time 0"));
    for (auto& p : epi) {
        if (p.key == "horizon") p.fallback = 2000.0;
    }
    epi.push_back(output("out", "CSV path for the prevalence series"));
    c.push_back({"sis", "SIS epidemic on the evolving network", epi, sis});

    c.push_back({"match", "Mittag-Leffler versus Pareto survival",
                 {required(real("beta", nullptr, "Order in (0,1); Pareto delta = 1 + beta")),
                  real("gamma", nullptr, "Time scale [default: tail-matching scale]"),
                  real("horizon", 2000.0, "Grid covers [horizon/1000, horizon]"),
                  integer("grid", 200, "Number of log-spaced points"),
                  Param{"refine", Kind::flag, false, "Optimise gamma before reporting"},
                  output("out", "CSV path for (t, ml_survival, pareto_survival)"),
                  output("summary_out", "JSON summary path [default: next to --out]")},
                 match});

    Param figure{"figure", Kind::text, nullptr,
                 "fig0, fig1a, fig1b, fig1c, fig1d, fig1e or match", true, true};
    Param dir{"out_dir", Kind::text, ".", "Output directory"};
    dir.role = Role::output_dir;
    c.push_back({"reproduce", "Regenerate a named figure data set",
                 {figure, dir, integer("seed", 1, "Master seed"),
                  integer("replicates", nullptr, "Override the replicate count")},
                 reproduce});

    return c;
}

}  // namespace rlad::cli
