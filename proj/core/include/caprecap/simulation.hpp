#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "caprecap/estimators.hpp"
#include "caprecap/nuisance.hpp"
#include "caprecap/types.hpp"

namespace caprecap {

// One latent population member: covariate, capture pair, and the true
// nuisance values at its covariate.
struct PopulationRow {
    double x = 0.0;
    std::uint8_t y1 = 0, y2 = 0;
    QProbs true_q;
};

struct Population {
    std::vector<PopulationRow> rows;
    double intercept = 0.0;  // the DGP's a
};

// Two-list data generating process:
//   X ~ Uniform(2,3), P(Y1=1|x) = expit(a + 0.4x), P(Y2=1|x) = expit(a + 0.3x),
// lists conditionally independent given X.
Population generate_population(long n, double a, std::uint64_t seed);

// True conditional capture probability and q-probabilities at x.
QProbs dgp_q_probs(double a, double x);
double dgp_gamma(double a, double x);

// Marginal capture probability E[gamma(X)] by quadrature.
double dgp_psi(double a);

struct Observed {
    CaptureDataset dataset;       // units with Y != 0, covariate dim 1
    std::vector<QProbs> true_q;   // aligned truth for the observed units
};

// Keeps only captured rows; N ~ Bin(n, psi).  Throws AllUnobserved at N = 0.
Observed observe(const Population& population);

struct SimConfig {
    long n_population = 5000;
    double a = -1.758;
    double alpha_noise = 0.5;  // +infinity means exact nuisances
    int n_reps = 200;
    std::vector<Method> methods = {Method::plug_in, Method::doubly_robust,
                                   Method::tmle};
    std::uint64_t seed = 1;
    double ci_level_alpha = 0.05;
    int threads = 1;
    NuisanceConfig nuisance{NuisanceSource::oracle_noise};
    int folds = 5;  // used when nuisance.source == logistic
    TmleConfig tmle;
};

struct MethodMetrics {
    Method method = Method::plug_in;
    double bias = 0.0;
    double rmse = 0.0;
    double coverage = 0.0;
    double mean_n_hat = 0.0;
    int reps_used = 0;
};

struct SimMetrics {
    double psi_true = 0.0;
    long n_true = 0;
    double alpha_noise = 0.0;
    std::vector<MethodMetrics> per_method;
    // Raw per-replication capture-probability estimates, aligned with
    // per_method; kept for seed-sharing comparisons across configurations.
    std::vector<std::vector<double>> psi_hats;
};

SimMetrics run_replications(const SimConfig& config);

// CSV rows {method,psi_true,n_true,alpha,bias,rmse,coverage,mean_n_hat,reps_used};
// header emitted when requested.
std::string metrics_csv(const SimMetrics& metrics, bool header);

// Appendix-style comparison of var(n_hat) = n(1/psi - 1) when psi is known,
// using only lists 1-2 versus all K lists.
std::pair<double, double> variance_comparison(double psi_two_list,
                                              double psi_all_list, long n);

// Misspecification patterns for the double-robustness checks: one member of
// each (q1|q2, q12|gamma) pair kept exact, the partner distorted to a flat
// 0.5.
enum class Cor2Scenario {
    q1_q12_exact,    // q2 flat: gamma distorted
    q1_gamma_exact,  // q2 flat, q12 rebuilt so gamma stays exact
    q2_q12_exact,    // q1 flat: gamma distorted
    q2_gamma_exact,  // q1 flat, q12 rebuilt so gamma stays exact
};

std::vector<QProbs> cor2_scenario_q_probs(std::span<const QProbs> true_q,
                                          Cor2Scenario scenario);

}  // namespace caprecap
