#include "caprecap/logistic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "caprecap/errors.hpp"
#include "caprecap/math.hpp"

namespace caprecap {

double LogisticModel::linear(std::span<const double> features) const {
    std::size_t j = 0;
    double eta = 0.0;
    if (intercept) eta = coefficients[j++];
    for (double f : features) eta += coefficients[j++] * f;
    return eta;
}

double LogisticModel::predict(std::span<const double> features, double offset) const {
    return expit(linear(features) + offset);
}

namespace {

double log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        ll += y[i] * eta[i] - log1pexp(eta[i]);
    }
    return ll;
}

}  // namespace

LogisticModel fit_logistic(std::span<const double> features, std::size_t n_cols,
                           std::span<const double> labels,
                           std::span<const double> offset,
                           const LogisticOptions& options) {
    const std::size_t n = labels.size();
    const std::size_t p = n_cols + (options.intercept ? 1 : 0);
    if (p == 0) throw DegenerateDesign("fit_logistic: no parameters to fit");
    if (n_cols > 0 && features.size() != n * n_cols) {
        throw LengthMismatch("fit_logistic: features size vs N*p");
    }
    if (!offset.empty() && offset.size() != n) {
        throw LengthMismatch("fit_logistic: offset size vs N");
    }
    if (n < p + 1) {
        throw DegenerateDesign("fit_logistic: N = " + std::to_string(n) +
                               " rows for " + std::to_string(p) + " parameters");
    }

    Eigen::MatrixXd design(n, p);
    Eigen::VectorXd y(n), off = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = 0;
        if (options.intercept) design(i, j++) = 1.0;
        for (std::size_t c = 0; c < n_cols; ++c) design(i, j++) = features[i * n_cols + c];
        y[i] = labels[i];
        if (!offset.empty()) off[i] = offset[i];
    }

    // Constant labels with no offset put the MLE at infinity.
    if (offset.empty()) {
        const double ybar = y.mean();
        if (ybar == 0.0 || ybar == 1.0) {
            LogisticModel sep;
            sep.intercept = options.intercept;
            sep.separation = true;
            sep.converged = false;
            sep.coefficients.assign(p, 0.0);
            if (options.intercept) {
                sep.coefficients[0] = ybar == 1.0 ? options.coef_limit : -options.coef_limit;
            }
            return sep;
        }
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (options.intercept && offset.empty()) {
        // Starting at logit(mean) makes intercept-only fits exact on entry.
        const double ybar = clamp_prob(y.mean(), 1e-6, 1.0 - 1e-6);
        beta[0] = logit(ybar);
    }

    LogisticModel model;
    model.intercept = options.intercept;
    Eigen::VectorXd eta = design * beta + off;
    double ll = log_likelihood(eta, y);

    for (int iter = 0; iter < options.max_iter; ++iter) {
        Eigen::VectorXd mu(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            mu[i] = expit(eta[i]);
            w[i] = mu[i] * (1.0 - mu[i]);
        }
        const Eigen::VectorXd score = design.transpose() * (y - mu);
        if (score.cwiseAbs().maxCoeff() <= options.score_tol) {
            model.converged = true;
            break;
        }
        Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
        info.diagonal().array() += options.ridge;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success ||
            ldlt.vectorD().minCoeff() <= 10.0 * options.ridge) {
            throw DegenerateDesign("fit_logistic: singular information matrix");
        }
        const Eigen::VectorXd delta = ldlt.solve(score);
        if (!delta.allFinite()) {
            throw DegenerateDesign("fit_logistic: non-finite Newton step");
        }
        beta += delta;
        model.iterations = iter + 1;

        if (beta.cwiseAbs().maxCoeff() > options.coef_limit) {
            beta = beta.cwiseMax(-options.coef_limit).cwiseMin(options.coef_limit);
            model.separation = true;
            model.converged = false;
            break;
        }

        eta = design * beta + off;
        const double ll_new = log_likelihood(eta, y);
        if (std::fabs(ll_new - ll) <= options.loglik_rel_tol * (std::fabs(ll) + 1.0)) {
            ll = ll_new;
            model.converged = true;
            break;
        }
        ll = ll_new;
    }

    model.coefficients.assign(beta.data(), beta.data() + p);
    return model;
}

double fit_fluctuation(std::span<const double> covariate,
                       std::span<const double> labels,
                       std::span<const double> offset) {
    // Guard: a vanishing clever covariate carries no information and the
    // update is a no-op regardless of the coefficient.
    double info0 = 0.0;
    for (std::size_t i = 0; i < covariate.size(); ++i) {
        const double mu = expit(offset[i]);
        info0 += covariate[i] * covariate[i] * mu * (1.0 - mu);
    }
    if (info0 < 1e-12 * static_cast<double>(covariate.size())) return 0.0;

    LogisticOptions opt;
    opt.intercept = false;
    opt.score_tol = 1e-10;
    const LogisticModel m = fit_logistic(covariate, 1, labels, offset, opt);
    return m.coefficients[0];
}

}  // namespace caprecap
