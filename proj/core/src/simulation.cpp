#include "caprecap/simulation.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "caprecap/errors.hpp"
#include "caprecap/identification.hpp"
#include "caprecap/inference.hpp"
#include "caprecap/math.hpp"
#include "caprecap/rng.hpp"

namespace caprecap {

double dgp_gamma(double a, double x) {
    const double p1 = expit(a + 0.4 * x);
    const double p2 = expit(a + 0.3 * x);
    return 1.0 - (1.0 - p1) * (1.0 - p2);
}

QProbs dgp_q_probs(double a, double x) {
    const double p1 = expit(a + 0.4 * x);
    const double p2 = expit(a + 0.3 * x);
    const double gamma = 1.0 - (1.0 - p1) * (1.0 - p2);
    QProbs q;
    q.q1 = p1 / gamma;
    q.q2 = p2 / gamma;
    q.q12 = p1 * p2 / gamma;
    q.gamma = gamma;
    return q;
}

double dgp_psi(double a) {
    return simpson([a](double x) { return dgp_gamma(a, x); }, 2.0, 3.0, 20000);
}

Population generate_population(long n, double a, std::uint64_t seed) {
    if (n < 1) throw EstimationError("generate_population: n must be >= 1");
    Population pop;
    pop.intercept = a;
    pop.rows.resize(n);
    KeyedRng rng(seed, Stream::population);
    for (long i = 0; i < n; ++i) {
        PopulationRow& r = pop.rows[i];
        r.x = rng.uniform(2.0, 3.0);
        const double p1 = expit(a + 0.4 * r.x);
        const double p2 = expit(a + 0.3 * r.x);
        r.y1 = rng.bernoulli(p1) ? 1 : 0;
        r.y2 = rng.bernoulli(p2) ? 1 : 0;
        r.true_q = dgp_q_probs(a, r.x);
    }
    return pop;
}

Observed observe(const Population& population) {
    if (population.rows.empty()) throw EmptyInput("observe");
    Observed out;
    out.dataset.k_lists = 2;
    out.dataset.dim = 1;
    for (const PopulationRow& r : population.rows) {
        if (r.y1 == 0 && r.y2 == 0) continue;
        UnitRecord u;
        u.y = {r.y1, r.y2};
        u.x = {r.x};
        out.dataset.units.push_back(std::move(u));
        out.true_q.push_back(r.true_q);
    }
    if (out.dataset.units.empty()) throw AllUnobserved();
    return out;
}

std::pair<double, double> variance_comparison(double psi_two_list,
                                              double psi_all_list, long n) {
    if (!(psi_two_list > 0.0 && psi_two_list <= 1.0) ||
        !(psi_all_list > 0.0 && psi_all_list <= 1.0)) {
        throw EstimationError("variance_comparison: psi outside (0,1]");
    }
    if (psi_all_list < psi_two_list) {
        throw OrderViolation("variance_comparison: all-list psi " +
                             fmt17(psi_all_list) + " below two-list psi " +
                             fmt17(psi_two_list));
    }
    const double nn = static_cast<double>(n);
    return {nn * (1.0 / psi_two_list - 1.0), nn * (1.0 / psi_all_list - 1.0)};
}

std::vector<QProbs> cor2_scenario_q_probs(std::span<const QProbs> true_q,
                                          Cor2Scenario scenario) {
    std::vector<QProbs> out;
    out.reserve(true_q.size());
    for (const QProbs& t : true_q) {
        double q1 = t.q1, q2 = t.q2, q12 = t.q12;
        switch (scenario) {
            case Cor2Scenario::q1_q12_exact:
                q2 = 0.5;
                break;
            case Cor2Scenario::q1_gamma_exact:
                q2 = 0.5;
                q12 = t.gamma * q1 * q2;
                break;
            case Cor2Scenario::q2_q12_exact:
                q1 = 0.5;
                break;
            case Cor2Scenario::q2_gamma_exact:
                q1 = 0.5;
                q12 = t.gamma * q1 * q2;
                break;
        }
        out.push_back(make_q_probs(q1, q2, q12));
    }
    return out;
}

namespace {

struct RepOutcome {
    bool usable = false;
    // Indexed like config.methods.
    std::vector<double> psi_hat;
    std::vector<double> n_hat;
    std::vector<bool> covered;
};

RepOutcome run_one_rep(const SimConfig& config, int rep, double /*psi_true*/) {
    RepOutcome out;
    const std::uint64_t rep_seed =
        config.seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(rep) + 1));

    Population pop;
    Observed obs;
    try {
        pop = generate_population(config.n_population, config.a, rep_seed);
        obs = observe(pop);
    } catch (const AllUnobserved&) {
        return out;
    }
    const long n_obs = obs.dataset.n_observed();

    NuisanceResult nuis;
    if (config.nuisance.source == NuisanceSource::oracle_noise) {
        nuis = oracle_noise_q_probs(obs.true_q, config.alpha_noise,
                                    config.n_population, rep_seed, config.nuisance);
    } else {
        nuis = cross_fit_nuisances(obs.dataset, config.nuisance, config.folds,
                                   rep_seed);
    }

    // The doubly robust fit doubles as the variance donor for the plug-in
    // interval, which has no variance formula of its own.
    PsiEstimate dr = doubly_robust(obs.dataset, nuis.q);

    out.usable = true;
    out.psi_hat.reserve(config.methods.size());
    for (Method m : config.methods) {
        PsiEstimate est =
            m == Method::doubly_robust
                ? dr
                : estimate_with(m, obs.dataset, nuis.q, config.tmle,
                                config.nuisance.epsilon);
        const PopulationEstimate pe = population_estimate(
            n_obs, est, config.ci_level_alpha, dr.sigma_hat_sq);
        out.psi_hat.push_back(est.psi_hat);
        out.n_hat.push_back(pe.n_hat);
        out.covered.push_back(pe.ci_lower <= config.n_population &&
                              config.n_population <= pe.ci_upper);
    }
    return out;
}

}  // namespace

SimMetrics run_replications(const SimConfig& config) {
    if (config.n_reps < 1) throw EstimationError("run_replications: n_reps must be >= 1");
    if (config.methods.empty()) throw EstimationError("run_replications: no methods");

    SimMetrics metrics;
    metrics.psi_true = dgp_psi(config.a);
    metrics.n_true = config.n_population;
    metrics.alpha_noise = config.alpha_noise;

    std::vector<RepOutcome> outcomes(config.n_reps);
    const int threads = std::max(1, config.threads);
    if (threads == 1) {
        for (int r = 0; r < config.n_reps; ++r) {
            outcomes[r] = run_one_rep(config, r, metrics.psi_true);
        }
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= config.n_reps) return;
                outcomes[r] = run_one_rep(config, r, metrics.psi_true);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Fixed-order reduction: identical totals for any worker count.
    const std::size_t n_methods = config.methods.size();
    metrics.per_method.resize(n_methods);
    metrics.psi_hats.assign(n_methods, {});
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodMetrics& mm = metrics.per_method[m];
        mm.method = config.methods[m];
        std::vector<double> errs, sq_errs, n_hats;
        long covered = 0;
        for (const RepOutcome& rep : outcomes) {
            if (!rep.usable) continue;
            const double e = rep.psi_hat[m] - metrics.psi_true;
            errs.push_back(e);
            sq_errs.push_back(e * e);
            n_hats.push_back(rep.n_hat[m]);
            covered += rep.covered[m] ? 1 : 0;
            metrics.psi_hats[m].push_back(rep.psi_hat[m]);
        }
        mm.reps_used = static_cast<int>(errs.size());
        if (mm.reps_used > 0) {
            mm.bias = mean(errs);
            mm.rmse = std::sqrt(mean(sq_errs));
            mm.coverage = static_cast<double>(covered) / mm.reps_used;
            mm.mean_n_hat = mean(n_hats);
        }
    }
    return metrics;
}

std::string metrics_csv(const SimMetrics& metrics, bool header) {
    std::ostringstream os;
    if (header) {
        os << "method,psi_true,n_true,alpha,bias,rmse,coverage,mean_n_hat,reps_used\n";
    }
    for (const MethodMetrics& mm : metrics.per_method) {
        os << method_name(mm.method) << ',' << fmt17(metrics.psi_true) << ','
           << metrics.n_true << ',' << fmt17(metrics.alpha_noise) << ','
           << fmt17(mm.bias) << ',' << fmt17(mm.rmse) << ',' << fmt17(mm.coverage)
           << ',' << fmt17(mm.mean_n_hat) << ',' << mm.reps_used << "\n";
    }
    return os.str();
}

}  // namespace caprecap
