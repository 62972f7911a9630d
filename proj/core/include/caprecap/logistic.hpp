#pragma once

#include <optional>
#include <span>
#include <vector>

namespace caprecap {

struct LogisticModel {
    std::vector<double> coefficients;  // intercept first when fitted with one
    bool intercept = true;
    bool converged = false;
    bool separation = false;  // some |coefficient| ran past 30 and was clamped
    int iterations = 0;

    // Linear predictor for one feature row (without any offset).
    double linear(std::span<const double> features) const;
    double predict(std::span<const double> features, double offset = 0.0) const;
};

struct LogisticOptions {
    bool intercept = true;
    int max_iter = 100;
    double score_tol = 1e-8;    // converged when max |score| <= score_tol
    double loglik_rel_tol = 1e-10;
    double ridge = 1e-10;       // jitter added to the information matrix
    double coef_limit = 30.0;   // separation threshold
};

// Newton/IRLS fit of a Bernoulli log-likelihood with an optional fixed
// offset.  features is row-major N x p (p excludes the intercept).
// Throws DegenerateDesign when the information matrix is singular after the
// ridge jitter or when N < p + intercept + 1.
LogisticModel fit_logistic(std::span<const double> features, std::size_t n_cols,
                           std::span<const double> labels,
                           std::span<const double> offset = {},
                           const LogisticOptions& options = {});

// Single-covariate convenience used by the TMLE fluctuation steps:
// no-intercept, one column, fixed offset, tight tolerance.
double fit_fluctuation(std::span<const double> covariate,
                       std::span<const double> labels,
                       std::span<const double> offset);

}  // namespace caprecap
