#pragma once

#include <vector>

#include "klab/density.hpp"

namespace klab {

// One greedy cell: witness box W and the members removed with it.
struct FactorCell {
    OrientedBox witness;
    std::vector<std::size_t> members;
    double cell_delta = 0.0;   // Δ(members, W) at selection time
    double objective = 0.0;    // |W|^{-eta} * Δ at selection time
    std::string witness_kind;
};

struct FactoringResult {
    std::vector<std::size_t> kept;   // the retained density level
    std::vector<FactorCell> cells;   // cells of the retained level
    double level = 0.0;              // dyadic Δ level (lower edge 2^k)
    double eta_factor = 0.0;
    uint64_t seed = 0;
    // full selection trace (all levels) for diagnostics and invariants
    std::vector<double> objective_trace;
    std::vector<FactorCell> all_cells;
};

// Greedy maximal-density factoring: repeatedly select the candidate W
// maximizing |W|^{-eta} Δ(remaining, W), remove its members, pigeonhole the
// selections by dyadic Δ level and keep the most populous level. Every
// element's own box is a candidate, so each round removes at least one
// element. Ties break toward smaller |W|, then candidate enumeration order.
FactoringResult greedy_factor(const ConvexFamily& F, const CandidatePolicy& policy,
                              double eta_factor, uint64_t seed);

struct BulletCheck {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct FactorVerifyReport {
    std::vector<BulletCheck> bullets;
    double tol = 0.0;
    double delta_max_kept = 0.0;
    bool all_pass() const {
        for (const auto& b : bullets)
            if (!b.pass) return false;
        return true;
    }
};

// Post-condition verifier: partition/containment, per-cell density against
// delta_max of the kept level, |V_uni[W]| vs |V'[W]|, per-cell Frostman in
// the witness, and the witness family's own non-clustering (eta-weighted
// forms when eta > 0). Report-only.
FactorVerifyReport verify_factoring(const ConvexFamily& F, const FactoringResult& R,
                                    const CandidatePolicy& policy, double tol);

// Measured ratio Δ(F,W)/Δ(F,K_small) divided by (|W|/|K_small|)^eta.
// Values >= 1/tol certify the size-biased selection property.
double bias_ratio_check(const ConvexFamily& F, const FactoringResult& R,
                        const OrientedBox& K_small, const OrientedBox& W);

}  // namespace klab
