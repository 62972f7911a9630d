#include "caprecap/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "caprecap/errors.hpp"
#include "caprecap/identification.hpp"
#include "caprecap/logistic.hpp"
#include "caprecap/math.hpp"
#include "caprecap/rng.hpp"

namespace caprecap {

FoldAssignment make_folds(int n, int k, std::uint64_t seed) {
    if (k < 1 || k > n) {
        throw BadFoldCount("make_folds: k = " + std::to_string(k) + " with N = " +
                           std::to_string(n));
    }
    FoldAssignment out;
    out.k = k;
    out.labels.resize(n);
    // First (n mod k) folds get the extra unit, then shuffle.
    const int base = n / k, rem = n % k;
    int pos = 0;
    for (int f = 0; f < k; ++f) {
        const int size = base + (f < rem ? 1 : 0);
        for (int i = 0; i < size; ++i) out.labels[pos++] = f;
    }
    KeyedRng rng(seed, Stream::folds);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(out.labels[i], out.labels[j]);
    }
    return out;
}

namespace {

// Truncate, enforce q12 <= min(q1, q2) by shrinking q12, then optionally
// rederive q2 from the K = 2 identity.
QProbs coherent_q_probs(double q1, double q2, double q12, const NuisanceConfig& cfg,
                        int k_lists, long* gamma_clamps) {
    const double eps = cfg.epsilon;
    q1 = clamp_prob(q1, eps, 1.0 - eps);
    q2 = clamp_prob(q2, eps, 1.0 - eps);
    q12 = clamp_prob(q12, eps, 1.0 - eps);
    q12 = std::min(q12, std::min(q1, q2));
    if (cfg.enforce_k2_identity && k_lists == 2) {
        q2 = 1.0 + q12 - q1;
    }
    return make_q_probs(q1, q2, q12, gamma_clamps);
}

}  // namespace

NuisanceResult estimate_q_probs(const CaptureDataset& data,
                                std::span<const int> train_idx,
                                std::span<const int> eval_idx,
                                const NuisanceConfig& config) {
    if (train_idx.empty() || eval_idx.empty()) {
        throw EmptyInput("estimate_q_probs");
    }
    const std::size_t d = config.intercept_only ? 0 : static_cast<std::size_t>(data.dim);
    const std::size_t n_train = train_idx.size();

    std::vector<double> features(n_train * d);
    std::vector<double> y1(n_train), y2(n_train), y12(n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
        const UnitRecord& u = data.units[train_idx[i]];
        for (std::size_t j = 0; j < d; ++j) features[i * d + j] = u.x[j];
        y1[i] = u.y[0];
        y2[i] = u.y.size() > 1 ? u.y[1] : 0.0;
        y12[i] = y1[i] * y2[i];
    }

    const LogisticModel m1 = fit_logistic(features, d, y1);
    const LogisticModel m2 = fit_logistic(features, d, y2);
    const LogisticModel m12 = fit_logistic(features, d, y12);

    NuisanceResult out;
    out.q.reserve(eval_idx.size());
    std::vector<double> row(d);
    for (int idx : eval_idx) {
        const UnitRecord& u = data.units[idx];
        for (std::size_t j = 0; j < d; ++j) row[j] = u.x[j];
        const double p1 = m1.predict(row);
        const double p2 = m2.predict(row);
        const double p12 = m12.predict(row);
        out.q.push_back(coherent_q_probs(p1, p2, p12, config, data.k_lists,
                                         &out.gamma_clamps));
    }
    return out;
}

NuisanceResult oracle_noise_q_probs(std::span<const QProbs> true_q, double alpha,
                                    long n, std::uint64_t seed,
                                    const NuisanceConfig& config) {
    if (true_q.empty()) throw EmptyInput("oracle_noise_q_probs");
    if (!(alpha > 0.0)) throw EstimationError("oracle_noise_q_probs: alpha must be > 0");
    if (n < 1) throw EstimationError("oracle_noise_q_probs: n must be >= 1");

    NuisanceResult out;
    out.q.reserve(true_q.size());

    const bool exact = std::isinf(alpha);
    const double rate = exact ? 0.0 : std::pow(static_cast<double>(n), -alpha);
    KeyedRng rng(seed, Stream::noise);

    double e1 = 0.0, e2 = 0.0, e12 = 0.0;
    if (!exact && config.sharing == NoiseSharing::per_function) {
        e1 = rng.normal(rate, rate);
        e2 = rng.normal(rate, rate);
        e12 = rng.normal(rate, rate);
    }

    for (const QProbs& q : true_q) {
        if (!exact && config.sharing == NoiseSharing::per_unit) {
            e1 = rng.normal(rate, rate);
            e2 = rng.normal(rate, rate);
            e12 = rng.normal(rate, rate);
        }
        double q1 = exact ? q.q1 : expit(logit(q.q1) + e1);
        double q2 = exact ? q.q2 : expit(logit(q.q2) + e2);
        double q12 = exact ? q.q12 : expit(logit(q.q12) + e12);

        if (config.enforce_k2_identity) {
            // Cap q12 at q1 so the rederived q2 stays a probability.
            q12 = std::min(q12, q1);
            q2 = 1.0 + q12 - q1;
        }
        if (config.recohere_noise) {
            q12 = std::min(q12, std::min(q1, q2));
        }
        out.q.push_back(make_q_probs(q1, q2, q12, &out.gamma_clamps));
    }
    return out;
}

NuisanceResult external_q_probs(std::span<const double> q1,
                                std::span<const double> q2,
                                std::span<const double> q12,
                                const NuisanceConfig& config, int k_lists) {
    if (q1.size() != q2.size() || q1.size() != q12.size()) {
        throw LengthMismatch("external_q_probs: nuisance columns");
    }
    if (q1.empty()) throw EmptyInput("external_q_probs");
    NuisanceResult out;
    out.q.reserve(q1.size());
    for (std::size_t i = 0; i < q1.size(); ++i) {
        out.q.push_back(coherent_q_probs(q1[i], q2[i], q12[i], config, k_lists,
                                         &out.gamma_clamps));
    }
    return out;
}

}  // namespace caprecap
