#include "caprecap/identification.hpp"

#include <algorithm>
#include <cmath>

#include "caprecap/errors.hpp"
#include "caprecap/math.hpp"

namespace caprecap {

GammaResult conditional_capture_prob(double q1, double q2, double q12) {
    if (q12 <= 0.0) {
        throw PositivityViolation("conditional_capture_prob: q12 = " + fmt17(q12) +
                                  " violates Q{q12(X) > 0} = 1");
    }
    if (q1 <= 0.0 || q2 <= 0.0) {
        throw PositivityViolation("conditional_capture_prob: marginal q-probability <= 0");
    }
    const double raw = q12 / (q1 * q2);
    GammaResult out;
    out.clamped = raw > 1.0 + 1e-8;
    out.value = std::min(raw, 1.0);
    return out;
}

QProbs make_q_probs(double q1, double q2, double q12, long* gamma_clamps) {
    const GammaResult g = conditional_capture_prob(q1, q2, q12);
    if (g.clamped && gamma_clamps) ++*gamma_clamps;
    return QProbs{q1, q2, q12, g.value};
}

double psi_from_gammas(std::span<const double> gammas) {
    if (gammas.empty()) throw EmptyInput("psi_from_gammas");
    std::vector<double> inv(gammas.size());
    for (std::size_t i = 0; i < gammas.size(); ++i) inv[i] = 1.0 / gammas[i];
    return 1.0 / mean(inv);
}

double eif(const UnitRecord& unit, const QProbs& q, double psi_inv) {
    const double y1 = unit.y[0];
    const double y2 = unit.y.size() > 1 ? unit.y[1] : 0.0;
    double t = 0.0;
    if (y1 != 0.0) t += 1.0 / q.q1;
    if (y2 != 0.0) t += 1.0 / q.q2;
    if (y1 != 0.0 && y2 != 0.0) t -= 1.0 / q.q12;
    return t / q.gamma - psi_inv;
}

double efficiency_bound(const EfficiencyBoundInput& input) {
    const std::size_t n = input.samples.size();
    if (n == 0) throw EmptyInput("efficiency_bound");
    std::vector<double> w;
    if (input.weights.empty()) {
        w.assign(n, 1.0 / static_cast<double>(n));
    } else {
        if (input.weights.size() != n) {
            throw LengthMismatch("efficiency_bound: weights vs samples");
        }
        w = input.weights;
        const double total = pairwise_sum(w);
        if (std::fabs(total - 1.0) > 1e-12) {
            throw EstimationError("efficiency_bound: weights sum to " + fmt17(total));
        }
    }

    std::vector<double> cond(n), inv_gamma(n);
    for (std::size_t i = 0; i < n; ++i) {
        const QProbs& q = input.samples[i];
        if (q.q12 <= 0.0) {
            throw PositivityViolation("efficiency_bound: q12 <= 0 at sample " +
                                      std::to_string(i));
        }
        const double g = q.gamma;
        const double q0 = std::max(0.0, 1.0 - q.q1 - q.q2 + q.q12);
        cond[i] = w[i] * (1.0 / g) *
                  (((1.0 - g) / g) * ((1.0 - q.q12) / q.q12) + q0 / q.q12);
        inv_gamma[i] = 1.0 / g;
    }
    return pairwise_sum(cond) + variance_weighted(inv_gamma, w);
}

double remainder_r2(std::span<const QProbs> true_q, std::span<const QProbs> est_q) {
    if (true_q.size() != est_q.size()) {
        throw LengthMismatch("remainder_r2: true vs estimated q vectors");
    }
    if (true_q.empty()) throw EmptyInput("remainder_r2");
    std::vector<double> terms(true_q.size());
    for (std::size_t i = 0; i < true_q.size(); ++i) {
        const QProbs& t = true_q[i];
        const QProbs& e = est_q[i];
        if (e.q12 <= 0.0) {
            throw PositivityViolation("remainder_r2: estimated q12 <= 0 at sample " +
                                      std::to_string(i));
        }
        terms[i] = ((t.q1 - e.q1) * (e.q2 - t.q2) +
                    (t.q12 - e.q12) * (1.0 / t.gamma - 1.0 / e.gamma)) /
                   e.q12;
    }
    return mean(terms);
}

}  // namespace caprecap
