#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace caprecap {

// One observed individual: capture profile over K lists plus d covariates.
// Immutable by convention after dataset construction.
struct UnitRecord {
    std::vector<std::uint8_t> y;  // capture indicators, never all zero
    std::vector<double> x;        // finite covariates
};

struct CaptureDataset {
    std::vector<UnitRecord> units;
    int k_lists = 0;
    int dim = 0;

    int n_observed() const { return static_cast<int>(units.size()); }
};

// The q-probabilities of a unit under the observed-data distribution:
// marginal membership on list 1 and 2, joint membership, and the derived
// conditional capture probability gamma = q12/(q1*q2).
struct QProbs {
    double q1 = 0.0;
    double q2 = 0.0;
    double q12 = 0.0;
    double gamma = 0.0;
};

enum class Method { plug_in, doubly_robust, tmle };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::plug_in: return "plug_in";
        case Method::doubly_robust: return "doubly_robust";
        case Method::tmle: return "tmle";
    }
    return "?";
}

// Clamp and convergence telemetry accumulated along an estimation path.
struct Diagnostics {
    long gamma_clamps = 0;    // gamma estimates above 1 pulled back to 1
    long psi_inv_clamps = 0;  // psi_inv estimates below 1 pulled up to 1
    long offset_clamps = 0;   // TMLE offsets with non-positive argument
    int tmle_rounds = 0;
    bool tmle_converged = true;
    // Pre-clamp value of the psi_inv estimate; equals psi_inv_hat unless a
    // clamp fired.  Keeps algebraic identities checkable.
    double psi_inv_raw = 0.0;
    // Residual of psi_dr^{-1} = psi_pi^{-1} + mean(eif), doubly_robust only.
    double one_step_residual = 0.0;

    void merge(const Diagnostics& o) {
        gamma_clamps += o.gamma_clamps;
        psi_inv_clamps += o.psi_inv_clamps;
        offset_clamps += o.offset_clamps;
    }
};

struct PsiEstimate {
    double psi_hat = 0.0;
    double psi_inv_hat = 0.0;
    std::vector<double> eif_values;        // empty for plug_in
    std::optional<double> sigma_hat_sq;    // unset for plug_in and N < 2
    Method method = Method::plug_in;
    Diagnostics diagnostics;
};

struct PopulationEstimate {
    double n_hat = 0.0;
    double tau_hat_sq = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double alpha = 0.05;
};

enum class CiTarget { psi_inv, psi, n };

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    CiTarget target = CiTarget::psi;
};

}  // namespace caprecap
