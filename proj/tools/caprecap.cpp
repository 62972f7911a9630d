// Command-line front end: data ingestion, estimation runs, simulation
// sweeps, and the built-in consistency checks.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "caprecap/dataset.hpp"
#include "caprecap/errors.hpp"
#include "caprecap/estimators.hpp"
#include "caprecap/identification.hpp"
#include "caprecap/inference.hpp"
#include "caprecap/math.hpp"
#include "caprecap/nuisance.hpp"
#include "caprecap/rng.hpp"
#include "caprecap/simulation.hpp"

namespace cr = caprecap;

namespace {

cr::Method parse_method(const std::string& name) {
    if (name == "plug_in") return cr::Method::plug_in;
    if (name == "doubly_robust") return cr::Method::doubly_robust;
    if (name == "tmle") return cr::Method::tmle;
    throw CLI::ValidationError("--method", "unknown method '" + name + "'");
}

// Expands the listed covariate columns (1-based x indices) into indicator
// columns, first level as reference.
cr::CaptureDataset one_hot_expand(const cr::CaptureDataset& data,
                                  const std::vector<int>& columns) {
    for (int c : columns) {
        if (c < 1 || c > data.dim) {
            throw cr::SchemaError("--one-hot: column x" + std::to_string(c) +
                                  " out of range");
        }
    }
    std::map<int, std::vector<double>> levels;
    for (int c : columns) {
        std::set<double> seen;
        for (const auto& u : data.units) seen.insert(u.x[c - 1]);
        levels[c] = std::vector<double>(seen.begin(), seen.end());
    }
    cr::CaptureDataset out;
    out.k_lists = data.k_lists;
    out.units.reserve(data.units.size());
    for (const auto& u : data.units) {
        cr::UnitRecord nu;
        nu.y = u.y;
        for (int j = 0; j < data.dim; ++j) {
            auto it = levels.find(j + 1);
            if (it == levels.end()) {
                nu.x.push_back(u.x[j]);
            } else {
                for (std::size_t l = 1; l < it->second.size(); ++l) {
                    nu.x.push_back(u.x[j] == it->second[l] ? 1.0 : 0.0);
                }
            }
        }
        out.units.push_back(std::move(nu));
    }
    out.dim = out.units.empty() ? 0 : static_cast<int>(out.units.front().x.size());
    return out;
}

struct EstimateArgs {
    std::string csv_path;
    std::string method = "doubly_robust";
    int folds = 5;
    double trunc_eps = 0.01;
    double alpha_level = 0.05;
    std::uint64_t seed = 1;
    int threads = 1;
    bool external_nuisance = false;
    bool k2_identity = false;
    bool no_covariates = false;
    std::vector<int> one_hot;
    double tmle_tol = 1e-4;
    int tmle_max_rounds = 100;
};

int cmd_estimate(const EstimateArgs& args) {
    const cr::CsvData csv = cr::read_csv_file(args.csv_path);
    cr::CaptureDataset data = csv.dataset;
    if (!args.one_hot.empty()) data = one_hot_expand(data, args.one_hot);

    const cr::Method method = parse_method(args.method);
    cr::NuisanceConfig ncfg;
    ncfg.epsilon = args.trunc_eps;
    ncfg.seed = args.seed;
    ncfg.enforce_k2_identity = args.k2_identity;
    ncfg.intercept_only = args.no_covariates || data.dim == 0;
    // Intercept-only fits on the full sample reproduce the classical
    // closed-form estimators exactly; fold-splitting would only jitter them.
    const int folds = ncfg.intercept_only ? 1 : args.folds;

    cr::TmleConfig tcfg;
    tcfg.beta_tolerance = args.tmle_tol;
    tcfg.max_rounds = args.tmle_max_rounds;
    tcfg.k2_variant = args.k2_identity && data.k_lists == 2;

    cr::NuisanceResult nuis;
    if (args.external_nuisance) {
        if (!csv.has_external_nuisance()) {
            throw cr::SchemaError(
                "--external-nuisance given but the CSV has no q1_hat,q2_hat,q12_hat "
                "columns");
        }
        nuis = cr::external_q_probs(csv.q1_hat, csv.q2_hat, csv.q12_hat, ncfg,
                                    data.k_lists);
    } else {
        nuis = cr::cross_fit_nuisances(data, ncfg, folds, args.seed);
    }

    cr::PsiEstimate est =
        cr::estimate_with(method, data, nuis.q, tcfg, ncfg.epsilon);
    est.diagnostics.gamma_clamps += nuis.gamma_clamps;

    // The plug-in has no variance formula; it borrows the doubly robust one
    // computed on the same nuisances.
    std::optional<double> borrowed;
    if (method == cr::Method::plug_in) {
        borrowed = cr::doubly_robust(data, nuis.q).sigma_hat_sq;
    }
    const long n_obs = data.n_observed();
    const cr::PopulationEstimate pop =
        cr::population_estimate(n_obs, est, args.alpha_level, borrowed);

    std::cout << cr::estimate_report_json(est, pop, n_obs, args.alpha_level, borrowed)
              << "\n";
    if (est.diagnostics.gamma_clamps > 0 || est.diagnostics.psi_inv_clamps > 0 ||
        est.diagnostics.offset_clamps > 0) {
        std::cerr << "note: clamps fired (gamma=" << est.diagnostics.gamma_clamps
                  << ", psi_inv=" << est.diagnostics.psi_inv_clamps
                  << ", offset=" << est.diagnostics.offset_clamps << ")\n";
    }
    return 0;
}

struct SimulateArgs {
    long n = 5000;
    std::vector<double> a{-1.758};
    std::vector<double> alpha{0.5};
    int reps = 200;
    std::string methods = "plug_in,doubly_robust,tmle";
    std::uint64_t seed = 1;
    int threads = 1;
    double alpha_level = 0.05;
    double trunc_eps = 0.01;
    std::string nuisance = "oracle";
    int folds = 5;
    bool grid = false;
    bool per_unit_noise = false;
    bool recohere = false;
    bool k2_identity = false;
    std::string out_path;
};

std::vector<cr::Method> parse_methods(const std::string& csv) {
    std::vector<cr::Method> out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(parse_method(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (out.empty()) throw CLI::ValidationError("--methods", "no methods given");
    return out;
}

int cmd_simulate(const SimulateArgs& args) {
    if (!args.grid && (args.a.size() > 1 || args.alpha.size() > 1)) {
        throw CLI::ValidationError(
            "--a/--alpha", "multiple values require --grid (or the sweep command)");
    }
    cr::SimConfig cfg;
    cfg.n_population = args.n;
    cfg.n_reps = args.reps;
    cfg.methods = parse_methods(args.methods);
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    cfg.ci_level_alpha = args.alpha_level;
    cfg.folds = args.folds;
    cfg.nuisance.source = args.nuisance == "logistic" ? cr::NuisanceSource::logistic
                                                      : cr::NuisanceSource::oracle_noise;
    cfg.nuisance.epsilon = args.trunc_eps;
    cfg.nuisance.sharing = args.per_unit_noise ? cr::NoiseSharing::per_unit
                                               : cr::NoiseSharing::per_function;
    cfg.nuisance.recohere_noise = args.recohere;
    cfg.nuisance.enforce_k2_identity = args.k2_identity;
    cfg.tmle.k2_variant = args.k2_identity;

    std::ostringstream body;
    bool first = true;
    for (double a : args.a) {
        for (double alpha : args.alpha) {
            cfg.a = a;
            cfg.alpha_noise = alpha;
            const cr::SimMetrics metrics = cr::run_replications(cfg);
            body << cr::metrics_csv(metrics, first);
            first = false;
        }
    }
    if (args.out_path.empty() || args.out_path == "-") {
        std::cout << body.str();
    } else {
        std::ofstream out(args.out_path);
        if (!out) throw cr::SchemaError("cannot open output file: " + args.out_path);
        out << body.str();
        std::cerr << "wrote " << args.out_path << "\n";
    }
    return 0;
}

// ---- check: the built-in consistency suite ---------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

CheckResult check_petersen(bool inject_fault) {
    // 160 rows, n1 = 100, n2 = 80, n12 = 20: the Lincoln-Petersen count.
    std::vector<cr::RawRow> rows;
    for (int i = 0; i < 20; ++i) rows.push_back({{1, 1}, {}});
    for (int i = 0; i < 80; ++i) rows.push_back({{1, 0}, {}});
    for (int i = 0; i < 60; ++i) rows.push_back({{0, 1}, {}});
    const cr::CaptureDataset data = cr::validate_dataset(rows);

    cr::NuisanceConfig ncfg;
    ncfg.intercept_only = true;
    const cr::NuisanceResult nuis = cr::cross_fit_nuisances(data, ncfg, 1, 1);
    const cr::PsiEstimate pi = cr::plug_in(nuis.q);
    const double n_hat = data.n_observed() / pi.psi_hat;
    const double expected = inject_fault ? 401.0 : 400.0;

    CheckResult r{"petersen_reduction", false, ""};
    r.pass = std::fabs(n_hat - expected) <= 1e-9 * expected &&
             std::fabs(pi.psi_hat - (inject_fault ? 0.41 : 0.4)) <= 1e-9;
    r.detail = "n_hat=" + cr::fmt17(n_hat) + " psi_hat=" + cr::fmt17(pi.psi_hat);
    return r;
}

CheckResult check_one_step_identity(std::uint64_t seed, int reps, long n) {
    double worst = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        const cr::Population pop = cr::generate_population(
            n, -1.758, seed ^ (0x9e3779b97f4a7c15ULL * (rep + 1)));
        const cr::Observed obs = cr::observe(pop);
        cr::NuisanceConfig ncfg;
        const cr::NuisanceResult nuis =
            cr::oracle_noise_q_probs(obs.true_q, 0.25, n, seed + rep, ncfg);

        const cr::PsiEstimate dr = cr::doubly_robust(obs.dataset, nuis.q);
        const cr::PsiEstimate pi = cr::plug_in(nuis.q);
        std::vector<double> phi(nuis.q.size());
        for (std::size_t i = 0; i < nuis.q.size(); ++i) {
            phi[i] = cr::eif(obs.dataset.units[i], nuis.q[i], pi.psi_inv_hat);
        }
        const double resid = dr.diagnostics.psi_inv_raw - pi.psi_inv_hat -
                             cr::mean(phi);
        worst = std::max(worst, std::fabs(resid));
    }
    CheckResult r{"one_step_identity", worst <= 1e-12,
                  "max |psi_dr^-1 - psi_pi^-1 - QN(phi)| = " + cr::fmt17(worst)};
    return r;
}

CheckResult check_eif_mean_zero(std::uint64_t seed, long draws) {
    const double a = -1.758;
    const double psi = cr::dgp_psi(a);
    cr::KeyedRng rng(seed, cr::Stream::check, 1);
    std::vector<double> phis;
    phis.reserve(draws);
    // Rejection sampling from Q: keep captured draws only.
    while (static_cast<long>(phis.size()) < draws) {
        const double x = rng.uniform(2.0, 3.0);
        const double p1 = cr::expit(a + 0.4 * x);
        const double p2 = cr::expit(a + 0.3 * x);
        const bool y1 = rng.bernoulli(p1), y2 = rng.bernoulli(p2);
        if (!y1 && !y2) continue;
        cr::UnitRecord u;
        u.y = {static_cast<std::uint8_t>(y1), static_cast<std::uint8_t>(y2)};
        phis.push_back(cr::eif(u, cr::dgp_q_probs(a, x), 1.0 / psi));
    }
    const double m = cr::mean(phis);
    const double sd = std::sqrt(cr::variance_unbiased(phis));
    const double bound = 4.0 * sd / std::sqrt(double(draws));
    CheckResult r{"eif_mean_zero", std::fabs(m) <= bound,
                  "|mean|=" + cr::fmt17(std::fabs(m)) + " bound=" + cr::fmt17(bound)};
    return r;
}

CheckResult check_efficiency_bound(std::uint64_t seed, long draws, double tol) {
    const double a = -1.758;
    const double psi = cr::dgp_psi(a);

    // Closed form over the observed-data covariate density gamma(x)/psi.
    const int nodes = 4001;
    cr::EfficiencyBoundInput input;
    input.samples.reserve(nodes);
    input.weights.reserve(nodes);
    double wsum = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double x = 2.0 + (i + 0.5) / nodes;
        input.samples.push_back(cr::dgp_q_probs(a, x));
        const double w = cr::dgp_gamma(a, x) / psi / nodes;
        input.weights.push_back(w);
        wsum += w;
    }
    for (double& w : input.weights) w /= wsum;
    const double closed = cr::efficiency_bound(input);

    cr::KeyedRng rng(seed, cr::Stream::check, 2);
    std::vector<double> phis;
    phis.reserve(draws);
    while (static_cast<long>(phis.size()) < draws) {
        const double x = rng.uniform(2.0, 3.0);
        const double p1 = cr::expit(a + 0.4 * x);
        const double p2 = cr::expit(a + 0.3 * x);
        const bool y1 = rng.bernoulli(p1), y2 = rng.bernoulli(p2);
        if (!y1 && !y2) continue;
        cr::UnitRecord u;
        u.y = {static_cast<std::uint8_t>(y1), static_cast<std::uint8_t>(y2)};
        phis.push_back(cr::eif(u, cr::dgp_q_probs(a, x), 1.0 / psi));
    }
    const double mc = cr::variance_unbiased(phis);
    const double rel = std::fabs(mc - closed) / closed;
    CheckResult r{"efficiency_bound_vs_mc", rel <= tol,
                  "closed=" + cr::fmt17(closed) + " mc=" + cr::fmt17(mc) +
                      " rel=" + cr::fmt17(rel)};
    return r;
}

CheckResult check_tmle_score(std::uint64_t seed, long n) {
    const cr::Population pop = cr::generate_population(n, -1.758, seed);
    const cr::Observed obs = cr::observe(pop);
    cr::NuisanceConfig ncfg;
    const cr::NuisanceResult nuis =
        cr::oracle_noise_q_probs(obs.true_q, 0.25, n, seed, ncfg);

    cr::TmleConfig tcfg;
    tcfg.beta_tolerance = 1e-8;
    tcfg.max_rounds = 500;
    const cr::PsiEstimate est =
        cr::estimate_with(cr::Method::tmle, obs.dataset, nuis.q, tcfg, 0.01);

    const double score = cr::mean(est.eif_values);
    const double sd = std::sqrt(est.sigma_hat_sq.value());
    const double bound = 1e-3 * sd / std::sqrt(double(obs.dataset.n_observed()));
    CheckResult r{"tmle_score_equation",
                  std::fabs(score) <= bound && est.psi_hat > 0.0 && est.psi_hat <= 1.0,
                  "|QN phi*|=" + cr::fmt17(std::fabs(score)) +
                      " bound=" + cr::fmt17(bound) +
                      " rounds=" + std::to_string(est.diagnostics.tmle_rounds)};
    return r;
}

struct CheckArgs {
    std::uint64_t seed = 1;
    bool quick = false;
    bool json = false;
    bool inject_fault = false;
};

int cmd_check(const CheckArgs& args) {
    std::vector<CheckResult> results;
    results.push_back(check_petersen(args.inject_fault));
    if (args.quick) {
        results.push_back(check_one_step_identity(args.seed, 1, 2000));
        results.push_back(check_eif_mean_zero(args.seed, 20000));
        results.push_back(check_tmle_score(args.seed, 2000));
    } else {
        results.push_back(check_one_step_identity(args.seed, 5, 5000));
        results.push_back(check_eif_mean_zero(args.seed, 200000));
        results.push_back(check_efficiency_bound(args.seed, 200000, 0.03));
        results.push_back(check_tmle_score(args.seed, 5000));
    }

    bool all = true;
    for (const CheckResult& r : results) all = all && r.pass;
    if (args.json) {
        std::ostringstream os;
        os << "{\"checks\":[";
        for (std::size_t i = 0; i < results.size(); ++i) {
            os << (i ? "," : "") << "{\"name\":\"" << results[i].name << "\",\"pass\":"
               << (results[i].pass ? "true" : "false") << ",\"detail\":\""
               << results[i].detail << "\"}";
        }
        os << "],\"all_pass\":" << (all ? "true" : "false") << "}";
        std::cout << os.str() << "\n";
    } else {
        for (const CheckResult& r : results) {
            std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  ("
                      << r.detail << ")\n";
        }
        std::cout << (all ? "all checks passed" : "CHECK FAILURES") << "\n";
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"caprecap: capture-recapture population size estimation"};
    app.require_subcommand(1);

    EstimateArgs est;
    CLI::App* estimate =
        app.add_subcommand("estimate", "Estimate psi and n from a CSV dataset");
    estimate->add_option("csv", est.csv_path, "input CSV (y1..yK,x1..xd[,q*_hat])")
        ->required();
    estimate->add_option("--method", est.method, "plug_in | doubly_robust | tmle");
    estimate->add_option("--folds", est.folds, "cross-fitting folds (1 = naive)")
        ->check(CLI::PositiveNumber);
    estimate->add_option("--trunc-eps", est.trunc_eps, "q-probability truncation");
    estimate->add_option("--alpha-level", est.alpha_level, "CI level alpha");
    estimate->add_option("--seed", est.seed)->envname("CAPRECAP_SEED");
    estimate->add_option("--threads", est.threads);
    estimate->add_flag("--external-nuisance", est.external_nuisance,
                       "use q1_hat,q2_hat,q12_hat columns instead of fitting");
    estimate->add_flag("--k2-identity", est.k2_identity,
                       "enforce q1 + q2 - q12 = 1 (K = 2 only)");
    estimate->add_flag("--no-covariates", est.no_covariates,
                       "intercept-only nuisances (classical estimators)");
    estimate->add_option("--one-hot", est.one_hot,
                         "x-columns to expand into indicators")
        ->delimiter(',');
    estimate->add_option("--tmle-tol", est.tmle_tol);
    estimate->add_option("--tmle-max-rounds", est.tmle_max_rounds);

    SimulateArgs sim;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Replication study on the built-in DGP");
    CLI::App* sweep =
        app.add_subcommand("sweep", "Grid of simulate cells (comma lists)");
    for (CLI::App* cmd : {simulate, sweep}) {
        cmd->add_option("--n", sim.n, "population size")->check(CLI::PositiveNumber);
        cmd->add_option("--a", sim.a, "DGP intercept(s)")->delimiter(',');
        cmd->add_option("--alpha", sim.alpha, "nuisance noise exponent(s)")
            ->delimiter(',');
        cmd->add_option("--reps", sim.reps, "replications per cell")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--methods", sim.methods, "comma list of estimators");
        cmd->add_option("--seed", sim.seed)->envname("CAPRECAP_SEED");
        cmd->add_option("--threads", sim.threads)->check(CLI::PositiveNumber);
        cmd->add_option("--alpha-level", sim.alpha_level);
        cmd->add_option("--trunc-eps", sim.trunc_eps);
        cmd->add_option("--nuisance", sim.nuisance, "oracle | logistic");
        cmd->add_option("--folds", sim.folds)->check(CLI::PositiveNumber);
        cmd->add_flag("--per-unit-noise", sim.per_unit_noise,
                      "draw oracle noise per unit instead of per q-function");
        cmd->add_flag("--recohere", sim.recohere,
                      "shrink noisy q12 under min(q1,q2)");
        cmd->add_flag("--k2-identity", sim.k2_identity);
        cmd->add_option("--out", sim.out_path, "output CSV path (default stdout)");
    }
    simulate->add_flag("--grid", sim.grid, "allow comma lists for --a/--alpha");

    CheckArgs chk;
    CLI::App* check = app.add_subcommand("check", "Run built-in consistency checks");
    check->add_option("--seed", chk.seed)->envname("CAPRECAP_SEED");
    check->add_flag("--quick", chk.quick, "reduced sizes, under 5 seconds");
    check->add_flag("--json", chk.json, "machine-readable report");
    check->add_flag("--inject-fault", chk.inject_fault)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(estimate)) return cmd_estimate(est);
        if (app.got_subcommand(simulate)) return cmd_simulate(sim);
        if (app.got_subcommand(sweep)) {
            sim.grid = true;
            return cmd_simulate(sim);
        }
        if (app.got_subcommand(check)) return cmd_check(chk);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cr::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
