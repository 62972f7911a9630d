#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "caprecap/nuisance.hpp"
#include "caprecap/types.hpp"

namespace caprecap {

struct TmleConfig {
    double beta_tolerance = 1e-4;  // stop when max_j |beta_j| <= tolerance
    int max_rounds = 100;
    double logit_clamp = 1e-6;     // floor for offset arguments q1 - q12 etc.
    bool k2_variant = false;       // replace step 5 by q2 = 1 + q12 - q1
};

// Plug-in: harmonic mean of the estimated conditional capture probabilities.
// Carries no influence values and no variance.
PsiEstimate plug_in(std::span<const QProbs> eval_q);

// One-step / doubly robust estimator: psi_inv = mean of the per-unit
// summand s_i = (1/gamma)(y1/q1 + y2/q2 - y1 y2/q12), clamped to >= 1.
PsiEstimate doubly_robust(const CaptureDataset& data, std::span<const QProbs> eval_q);

struct TmleResult {
    PsiEstimate estimate;
    std::vector<QProbs> fluctuated_q;
    int rounds = 0;
    bool converged = false;
    // Worst |q1 + q2 - q12 - 1| seen across rounds (k2 variant telemetry).
    double max_k2_gap = 0.0;
};

// Iterative offset-logistic fluctuation of the q-probabilities until the
// plug-in built from them also solves the EIF estimating equation.
TmleResult tmle(const CaptureDataset& data, std::vector<QProbs> initial_q,
                const TmleConfig& config = {});

struct CrossFitOptions {
    int folds = 5;            // 1 = naive mode (train = eval = everything)
    std::uint64_t seed = 1;
    bool per_fold_variance = false;  // sigma^2 as mean of within-fold variances
};

// Cross-fitting orchestration: nuisances fitted per fold on the complement,
// per-unit values pooled over all N before the final reduction.
PsiEstimate cross_fit(const CaptureDataset& data, Method method,
                      const NuisanceConfig& nuisance, const CrossFitOptions& options,
                      const TmleConfig& tmle_config = {});

// Per-unit q-probabilities from cross-fitted (or naive) nuisance fits,
// aligned with data.units.
NuisanceResult cross_fit_nuisances(const CaptureDataset& data,
                                   const NuisanceConfig& nuisance, int folds,
                                   std::uint64_t seed);

// Dispatch a fitted nuisance set through one of the three estimators.
PsiEstimate estimate_with(Method method, const CaptureDataset& data,
                          std::span<const QProbs> eval_q,
                          const TmleConfig& tmle_config = {},
                          double trunc_eps = 0.01);

}  // namespace caprecap
