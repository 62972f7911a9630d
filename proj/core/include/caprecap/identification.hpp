#pragma once

#include <span>
#include <vector>

#include "caprecap/types.hpp"

namespace caprecap {

struct GammaResult {
    double value = 0.0;   // conditional capture probability in (0,1]
    bool clamped = false; // true when q12/(q1*q2) exceeded 1 + 1e-8
};

// gamma(x) = q12/(q1*q2), the conditional capture probability identified
// from the observed-data distribution under list-1/list-2 conditional
// independence.  Values above 1 (sampling noise) are clamped and flagged.
GammaResult conditional_capture_prob(double q1, double q2, double q12);

// Convenience: assembles a QProbs with the derived gamma.
QProbs make_q_probs(double q1, double q2, double q12, long* gamma_clamps = nullptr);

// psi = harmonic mean of the gamma values: [mean(1/gamma_i)]^{-1}.
double psi_from_gammas(std::span<const double> gammas);

// Efficient influence function
//   phi(z) = (1/gamma)(y1/q1 + y2/q2 - y1*y2/q12) - 1/psi.
// Only lists 1 and 2 of the capture profile enter.
double eif(const UnitRecord& unit, const QProbs& q, double psi_inv);

// Discrete distribution over q-probability triples; empty weights mean
// uniform.  Weights must sum to 1 within 1e-12.
struct EfficiencyBoundInput {
    std::vector<QProbs> samples;
    std::vector<double> weights;
};

// Nonparametric efficiency bound
//   sigma^2 = E[(1/g){((1-g)/g)((1-q12)/q12) + q0/q12}] + var(1/g),
// with q0 = max(0, 1 - q1 - q2 + q12); q0 is exactly zero for K = 2.
double efficiency_bound(const EfficiencyBoundInput& input);

// Empirical second-order remainder
//   R2 = mean_i (1/q12_hat)[(q1-q1_hat)(q2_hat-q2) + (q12-q12_hat)(1/g - 1/g_hat)].
// A diagnostic: computable only when the true q's are known (simulation).
double remainder_r2(std::span<const QProbs> true_q, std::span<const QProbs> est_q);

}  // namespace caprecap
