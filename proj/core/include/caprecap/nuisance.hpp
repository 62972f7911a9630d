#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "caprecap/types.hpp"

namespace caprecap {

struct FoldAssignment {
    std::vector<int> labels;  // fold index per unit, in [0, k)
    int k = 0;
};

// Uniformly random balanced partition; fold sizes differ by at most one.
// Deterministic given the seed.
FoldAssignment make_folds(int n, int k, std::uint64_t seed);

enum class NuisanceSource { logistic, oracle_noise };
enum class NoiseSharing { per_function, per_unit };

struct NuisanceConfig {
    NuisanceSource source = NuisanceSource::logistic;
    double epsilon = 0.01;        // truncation of q-probability estimates
    double alpha = 0.25;          // oracle-noise rate exponent (n^{-alpha})
    std::uint64_t seed = 1;
    bool enforce_k2_identity = false;  // rederive q2 = 1 + q12 - q1 when K = 2
    bool intercept_only = false;       // ignore covariates (classical estimators)
    NoiseSharing sharing = NoiseSharing::per_function;
    bool recohere_noise = false;  // shrink noisy q12 back under min(q1, q2)
};

struct NuisanceResult {
    std::vector<QProbs> q;  // aligned with the requested eval indices
    long gamma_clamps = 0;
};

// Fits logistic regressions for Y1, Y2 and Y1*Y2 on the training rows and
// predicts on the evaluation rows.  Predictions are truncated to
// [eps, 1-eps], q12 is shrunk under min(q1, q2), and q2 is optionally
// rederived from the K = 2 identity.
NuisanceResult estimate_q_probs(const CaptureDataset& data,
                                std::span<const int> train_idx,
                                std::span<const int> eval_idx,
                                const NuisanceConfig& config);

// The simulation-study nuisance model: q_hat = expit(logit(q) + e) with
// e ~ N(n^{-alpha}, n^{-2alpha}), drawn per q-function (shared across
// units) or per unit.  alpha = +infinity reproduces the truth exactly.
NuisanceResult oracle_noise_q_probs(std::span<const QProbs> true_q, double alpha,
                                    long n, std::uint64_t seed,
                                    const NuisanceConfig& config = {});

// Normalizes externally supplied q-probability columns through the same
// truncate/coherence pipeline as the built-in fits.
NuisanceResult external_q_probs(std::span<const double> q1,
                                std::span<const double> q2,
                                std::span<const double> q12,
                                const NuisanceConfig& config, int k_lists);

}  // namespace caprecap
