#include "caprecap/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "caprecap/errors.hpp"
#include "caprecap/math.hpp"

namespace caprecap {

double eif_variance(std::span<const double> eif_values) {
    if (eif_values.size() < 2) {
        throw TooFewValues("eif_variance: need at least 2 influence values");
    }
    return variance_unbiased(eif_values);
}

ConfidenceInterval ci_psi_inv(double psi_inv_hat, double sigma_hat, long n,
                              double alpha) {
    const double half = z_two_sided(alpha) * sigma_hat / std::sqrt(double(n));
    return ConfidenceInterval{psi_inv_hat - half, psi_inv_hat + half, 1.0 - alpha,
                              CiTarget::psi_inv};
}

ConfidenceInterval ci_psi(double psi_hat, double sigma_hat, long n, double alpha) {
    const double half =
        z_two_sided(alpha) * sigma_hat * psi_hat * psi_hat / std::sqrt(double(n));
    return ConfidenceInterval{std::max(0.0, psi_hat - half),
                              std::min(1.0, psi_hat + half), 1.0 - alpha,
                              CiTarget::psi};
}

PopulationEstimate population_estimate(long n_observed, const PsiEstimate& psi,
                                       double alpha,
                                       std::optional<double> borrowed_sigma_sq) {
    std::optional<double> varsigma_sq = psi.sigma_hat_sq;
    if (!varsigma_sq) varsigma_sq = borrowed_sigma_sq;
    if (!varsigma_sq) throw MissingVariance();

    PopulationEstimate out;
    out.alpha = alpha;
    out.n_hat = static_cast<double>(n_observed) / psi.psi_hat;
    out.tau_hat_sq =
        psi.psi_hat * *varsigma_sq + (1.0 - psi.psi_hat) / psi.psi_hat;
    const double half =
        z_two_sided(alpha) * std::sqrt(out.tau_hat_sq) * std::sqrt(out.n_hat);
    out.ci_lower = out.n_hat - half;
    out.ci_upper = out.n_hat + half;
    return out;
}

std::string estimate_report_json(const PsiEstimate& psi, const PopulationEstimate& pop,
                                 long n_observed, double alpha,
                                 std::optional<double> sigma_override) {
    const double sigma_sq =
        sigma_override ? *sigma_override : psi.sigma_hat_sq.value_or(0.0);
    const ConfidenceInterval psi_ci =
        ci_psi(psi.psi_hat, std::sqrt(sigma_sq), n_observed, alpha);

    std::ostringstream os;
    os << "{\"method\":\"" << method_name(psi.method) << "\""
       << ",\"N\":" << n_observed
       << ",\"psi_hat\":" << fmt17(psi.psi_hat)
       << ",\"psi_ci\":[" << fmt17(psi_ci.lower) << "," << fmt17(psi_ci.upper) << "]"
       << ",\"n_hat\":" << fmt17(pop.n_hat)
       << ",\"n_ci\":[" << fmt17(pop.ci_lower) << "," << fmt17(pop.ci_upper) << "]"
       << ",\"sigma_hat_sq\":" << fmt17(sigma_sq)
       << ",\"tau_hat_sq\":" << fmt17(pop.tau_hat_sq)
       << ",\"alpha\":" << fmt17(alpha)
       << ",\"diagnostics\":{\"clamp_counts\":{"
       << "\"gamma\":" << psi.diagnostics.gamma_clamps
       << ",\"psi_inv\":" << psi.diagnostics.psi_inv_clamps
       << ",\"offset\":" << psi.diagnostics.offset_clamps
       << "},\"tmle_rounds\":" << psi.diagnostics.tmle_rounds << "}}";
    return os.str();
}

}  // namespace caprecap
