#include "caprecap/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "caprecap/errors.hpp"
#include "caprecap/identification.hpp"
#include "caprecap/logistic.hpp"
#include "caprecap/math.hpp"

namespace caprecap {

namespace {

// The bracketed summand of the doubly robust estimator; its mean estimates
// 1/psi and s_i - mean(s) is the estimated influence function.
double dr_summand(const UnitRecord& u, const QProbs& q) {
    const double y1 = u.y[0];
    const double y2 = u.y.size() > 1 ? u.y[1] : 0.0;
    double t = 0.0;
    if (y1 != 0.0) t += 1.0 / q.q1;
    if (y2 != 0.0) t += 1.0 / q.q2;
    if (y1 != 0.0 && y2 != 0.0) t -= 1.0 / q.q12;
    return t / q.gamma;
}

void finalize_from_summands(PsiEstimate& est, std::span<const double> summands) {
    const double raw = mean(summands);
    est.diagnostics.psi_inv_raw = raw;
    est.psi_inv_hat = raw;
    if (est.psi_inv_hat < 1.0) {
        est.psi_inv_hat = 1.0;
        ++est.diagnostics.psi_inv_clamps;
    }
    est.psi_hat = 1.0 / est.psi_inv_hat;
    est.eif_values.resize(summands.size());
    for (std::size_t i = 0; i < summands.size(); ++i) {
        est.eif_values[i] = summands[i] - est.psi_inv_hat;
    }
    if (summands.size() >= 2) {
        est.sigma_hat_sq = variance_unbiased(summands);
    }
}

}  // namespace

PsiEstimate plug_in(std::span<const QProbs> eval_q) {
    if (eval_q.empty()) throw EmptyInput("plug_in");
    std::vector<double> gammas(eval_q.size());
    for (std::size_t i = 0; i < eval_q.size(); ++i) gammas[i] = eval_q[i].gamma;
    PsiEstimate est;
    est.method = Method::plug_in;
    est.psi_hat = psi_from_gammas(gammas);
    est.psi_inv_hat = 1.0 / est.psi_hat;
    est.diagnostics.psi_inv_raw = est.psi_inv_hat;
    return est;
}

PsiEstimate doubly_robust(const CaptureDataset& data, std::span<const QProbs> eval_q) {
    if (eval_q.empty()) throw EmptyInput("doubly_robust");
    if (eval_q.size() != data.units.size()) {
        throw LengthMismatch("doubly_robust: units vs eval_q");
    }
    std::vector<double> summands(eval_q.size());
    for (std::size_t i = 0; i < eval_q.size(); ++i) {
        summands[i] = dr_summand(data.units[i], eval_q[i]);
    }
    PsiEstimate est;
    est.method = Method::doubly_robust;
    finalize_from_summands(est, summands);

    // One-step identity: psi_dr^{-1} = psi_pi^{-1} + Q_N(phi_hat), with the
    // influence function centered at the plug-in value.
    const PsiEstimate pi = plug_in(eval_q);
    std::vector<double> phi(eval_q.size());
    for (std::size_t i = 0; i < eval_q.size(); ++i) {
        phi[i] = eif(data.units[i], eval_q[i], pi.psi_inv_hat);
    }
    est.diagnostics.one_step_residual =
        est.diagnostics.psi_inv_raw - pi.psi_inv_hat - mean(phi);
    return est;
}

TmleResult tmle(const CaptureDataset& data, std::vector<QProbs> initial_q,
                const TmleConfig& config) {
    const std::size_t n = initial_q.size();
    if (n == 0) throw EmptyInput("tmle");
    if (n != data.units.size()) throw LengthMismatch("tmle: units vs initial_q");

    TmleResult result;
    Diagnostics& diag = result.estimate.diagnostics;

    std::vector<double> y1(n), y2(n), y12(n), y1only(n), y2only(n);
    for (std::size_t i = 0; i < n; ++i) {
        y1[i] = data.units[i].y[0];
        y2[i] = data.units[i].y.size() > 1 ? data.units[i].y[1] : 0.0;
        y12[i] = y1[i] * y2[i];
        y1only[i] = y1[i] * (1.0 - y2[i]);
        y2only[i] = y2[i] * (1.0 - y1[i]);
    }

    std::vector<QProbs>& q = initial_q;
    std::vector<double> h12(n), h1(n), h2(n), offset(n);

    auto record_k2_gap = [&] {
        for (const QProbs& p : q) {
            result.max_k2_gap =
                std::max(result.max_k2_gap, std::fabs(p.q1 + p.q2 - p.q12 - 1.0));
        }
    };
    if (config.k2_variant) record_k2_gap();

    // Floors the offset argument before the logit; ties q1 <= q12 are pushed
    // just inside the domain and counted.
    auto safe_logit = [&](double v) {
        if (v <= config.logit_clamp) {
            ++diag.offset_clamps;
            v = config.logit_clamp;
        } else if (v >= 1.0 - config.logit_clamp) {
            ++diag.offset_clamps;
            v = 1.0 - config.logit_clamp;
        }
        return logit(v);
    };

    int round = 0;
    for (; round < config.max_rounds; ++round) {
        // Step 2: clever covariates at the current estimates.
        for (std::size_t i = 0; i < n; ++i) {
            const QProbs& p = q[i];
            h12[i] = p.q1 * p.q2 / (p.q12 * p.q12) - p.q1 / p.q12 - p.q2 / p.q12;
            h1[i] = p.q2 / p.q12;
            h2[i] = p.q1 / p.q12;
        }

        // Step 3: fluctuate q12.
        for (std::size_t i = 0; i < n; ++i) offset[i] = safe_logit(q[i].q12);
        const double b12 = fit_fluctuation(h12, y12, offset);
        for (std::size_t i = 0; i < n; ++i) {
            q[i].q12 = expit(offset[i] + b12 * h12[i]);
        }

        // Step 4: fluctuate q1 on the (Y1 only) scale, clamped to 1 - q12.
        for (std::size_t i = 0; i < n; ++i) offset[i] = safe_logit(q[i].q1 - q[i].q12);
        const double b1 = fit_fluctuation(h1, y1only, offset);
        for (std::size_t i = 0; i < n; ++i) {
            q[i].q1 = std::min(q[i].q12 + expit(offset[i] + b1 * h1[i]),
                               1.0 - q[i].q12);
        }

        // Step 5: fluctuate q2 likewise, or rederive it from the K = 2
        // identity in the variant.
        double b2 = 0.0;
        if (config.k2_variant) {
            for (std::size_t i = 0; i < n; ++i) {
                q[i].q2 = 1.0 + q[i].q12 - q[i].q1;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                offset[i] = safe_logit(q[i].q2 - q[i].q12);
            }
            b2 = fit_fluctuation(h2, y2only, offset);
            for (std::size_t i = 0; i < n; ++i) {
                q[i].q2 = std::min(q[i].q12 + expit(offset[i] + b2 * h2[i]),
                                   1.0 + q[i].q12 - q[i].q1);
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            const GammaResult g = conditional_capture_prob(q[i].q1, q[i].q2, q[i].q12);
            if (g.clamped) ++diag.gamma_clamps;
            q[i].gamma = g.value;
        }
        if (config.k2_variant) record_k2_gap();

        const double max_beta =
            std::max({std::fabs(b12), std::fabs(b1), std::fabs(b2)});
        if (max_beta <= config.beta_tolerance) {
            result.converged = true;
            ++round;
            break;
        }
    }

    result.rounds = round;
    diag.tmle_rounds = round;
    diag.tmle_converged = result.converged;

    std::vector<double> summands(n);
    for (std::size_t i = 0; i < n; ++i) {
        summands[i] = q[i].q1 * q[i].q2 / q[i].q12;
    }
    result.estimate.method = Method::tmle;
    finalize_from_summands(result.estimate, summands);

    // Influence values from the fluctuated nuisances.
    for (std::size_t i = 0; i < n; ++i) {
        result.estimate.eif_values[i] =
            eif(data.units[i], q[i], result.estimate.psi_inv_hat);
    }
    if (n >= 2) {
        result.estimate.sigma_hat_sq = variance_unbiased(result.estimate.eif_values);
    }
    result.fluctuated_q = std::move(initial_q);
    return result;
}

NuisanceResult cross_fit_nuisances(const CaptureDataset& data,
                                   const NuisanceConfig& nuisance, int folds,
                                   std::uint64_t seed) {
    const int n = data.n_observed();
    if (n < 1) throw EmptyInput("cross_fit_nuisances");
    if (folds < 1) throw BadFoldCount("cross_fit: folds must be >= 1");

    NuisanceResult pooled;
    pooled.q.resize(n);

    if (folds == 1) {
        // Naive mode: train and evaluate on the full sample.
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        return estimate_q_probs(data, all, all, nuisance);
    }

    const FoldAssignment fa = make_folds(n, folds, seed);
    for (int f = 0; f < folds; ++f) {
        std::vector<int> train, eval;
        for (int i = 0; i < n; ++i) {
            (fa.labels[i] == f ? eval : train).push_back(i);
        }
        NuisanceResult part = estimate_q_probs(data, train, eval, nuisance);
        for (std::size_t j = 0; j < eval.size(); ++j) {
            pooled.q[eval[j]] = part.q[j];
        }
        pooled.gamma_clamps += part.gamma_clamps;
    }
    return pooled;
}

PsiEstimate estimate_with(Method method, const CaptureDataset& data,
                          std::span<const QProbs> eval_q,
                          const TmleConfig& tmle_config, double trunc_eps) {
    switch (method) {
        case Method::plug_in:
            return plug_in(eval_q);
        case Method::doubly_robust:
            return doubly_robust(data, eval_q);
        case Method::tmle: {
            // The fluctuation offsets need q's strictly inside (eps, 1-eps).
            std::vector<QProbs> init(eval_q.begin(), eval_q.end());
            long clamps = 0;
            for (QProbs& p : init) {
                const double q1 = clamp_prob(p.q1, trunc_eps, 1.0 - trunc_eps);
                const double q2 = clamp_prob(p.q2, trunc_eps, 1.0 - trunc_eps);
                double q12 = clamp_prob(p.q12, trunc_eps, 1.0 - trunc_eps);
                q12 = std::min(q12, std::min(q1, q2));
                p = make_q_probs(q1, q2, q12, &clamps);
            }
            TmleResult r = tmle(data, std::move(init), tmle_config);
            r.estimate.diagnostics.gamma_clamps += clamps;
            return std::move(r.estimate);
        }
    }
    throw EstimationError("estimate_with: unknown method");
}

PsiEstimate cross_fit(const CaptureDataset& data, Method method,
                      const NuisanceConfig& nuisance, const CrossFitOptions& options,
                      const TmleConfig& tmle_config) {
    NuisanceResult nr =
        cross_fit_nuisances(data, nuisance, options.folds, options.seed);
    PsiEstimate est =
        estimate_with(method, data, nr.q, tmle_config, nuisance.epsilon);
    est.diagnostics.gamma_clamps += nr.gamma_clamps;

    if (options.per_fold_variance && options.folds >= 2 &&
        !est.eif_values.empty()) {
        // Sensitivity variant: average the within-fold unbiased variances.
        const FoldAssignment fa =
            make_folds(data.n_observed(), options.folds, options.seed);
        std::vector<double> fold_vars;
        for (int f = 0; f < options.folds; ++f) {
            std::vector<double> vals;
            for (int i = 0; i < data.n_observed(); ++i) {
                if (fa.labels[i] == f) vals.push_back(est.eif_values[i]);
            }
            if (vals.size() >= 2) fold_vars.push_back(variance_unbiased(vals));
        }
        if (!fold_vars.empty()) est.sigma_hat_sq = mean(fold_vars);
    }
    return est;
}

}  // namespace caprecap
