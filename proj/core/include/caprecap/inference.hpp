#pragma once

#include <optional>
#include <span>
#include <string>

#include "caprecap/types.hpp"

namespace caprecap {

// Unbiased empirical variance (N/(N-1))(mean of squares - squared mean).
double eif_variance(std::span<const double> eif_values);

// Wald interval psi_inv_hat +/- z_{1-alpha/2} sigma_hat / sqrt(N).
ConfidenceInterval ci_psi_inv(double psi_inv_hat, double sigma_hat, long n,
                              double alpha);

// Delta-method interval psi_hat +/- z_{1-alpha/2} sigma_hat psi_hat^2 / sqrt(N),
// intersected with [0, 1].
ConfidenceInterval ci_psi(double psi_hat, double sigma_hat, long n, double alpha);

// n_hat = N / psi_hat with tau^2 = psi sigma^2 + (1 - psi)/psi and the
// interval n_hat +/- z tau sqrt(n_hat).  Plug-in estimates carry no variance
// of their own and require a borrowed influence-function variance.
PopulationEstimate population_estimate(long n_observed, const PsiEstimate& psi,
                                       double alpha,
                                       std::optional<double> borrowed_sigma_sq = {});

// The machine-readable per-estimate report (all numerics at 17 significant
// digits): {method, N, psi_hat, psi_ci, n_hat, n_ci, sigma_hat_sq,
// tau_hat_sq, alpha, diagnostics:{clamp_counts, tmle_rounds}}.
std::string estimate_report_json(const PsiEstimate& psi, const PopulationEstimate& pop,
                                 long n_observed, double alpha,
                                 std::optional<double> sigma_override = {});

}  // namespace caprecap
