#pragma once

#include <string>
#include <vector>

#include "klab/family.hpp"

namespace klab {

struct NotContained : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RegularizationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite surrogate for "max over all convex K": axis-aligned octree boxes,
// per-seed dyadic dilation ladders along the seed's own frame, bounding
// boxes of k-nearest-neighbor clusters, and the ambient ball. Enumeration
// is deterministic given the family order.
struct CandidatePolicy {
    int octree_depth = 4;
    int max_seeds = 64;
    int ladder_step = 1;      // dyadic exponent stride (1 -> x2 rungs, 2 -> x4 rungs)
    int max_knn = 64;         // k-NN clusters for k = 2,4,...,max_knn
    bool include_ambient = true;
    std::size_t max_candidates = 200000;

    // scales the enumeration down for very large families
    static CandidatePolicy standard(std::size_t family_size);
};

struct Candidate {
    OrientedBox box;
    double volume = 0.0;
    std::string kind;  // "octree" | "ladder" | "knn" | "ambient" | "own" | "extra"
};

// The declared candidate family (octree boxes intersecting the family's
// bounding box are pruned to those holding at least one element center).
std::vector<Candidate> enumerate_candidates(const ConvexFamily& F, const CandidatePolicy& policy);

// indices of elements with contains(W, K, dilation)
std::vector<std::size_t> family_in(const ConvexFamily& F, const OrientedBox& K,
                                   double dilation = kMembershipDilation);

// sum of |W| over W in F[K], divided by |K|
double delta(const ConvexFamily& F, const OrientedBox& K,
             double dilation = kMembershipDilation);

struct DensityReport {
    double value = 0.0;
    OrientedBox witness;
    std::string witness_kind;
    std::size_t candidates_searched = 0;
    double dilation = kMembershipDilation;
};

DensityReport delta_max(const ConvexFamily& F, const CandidatePolicy& policy);

// C_F(F, K): delta_max over candidates inside K divided by delta(F, K).
// K itself is always a candidate, so the value is >= 1.
double frostman_cf(const ConvexFamily& F, const OrientedBox& K,
                   const CandidatePolicy& policy);

enum class FamilyClass { KatzTao, Frostman, Both, Neither };

struct ClassifyReport {
    FamilyClass cls = FamilyClass::Neither;
    double delta_max_value = 0.0;
    double cf_value = 0.0;
    double threshold_kt = 0.0;
    double threshold_f = 0.0;
};

// Katz-Tao iff delta_max <= threshold; Frostman iff C_F(F, ambient) <=
// threshold. Default thresholds (1/delta)^0.1.
ClassifyReport classify(const ConvexFamily& F, const OrientedBox& K,
                        const CandidatePolicy& policy, double threshold_kt = 0.0,
                        double threshold_f = 0.0);

struct RegularizeResult {
    std::vector<std::size_t> kept;
    double fraction = 1.0;
    double achieved_delta_max = 0.0;
    uint64_t seed_used = 0;
    int attempts = 0;
};

// Random subset with inclusion probability 1/target_density (Katz-Tao
// regularization). Retries up to 8 seeds until delta_max of the subset is
// within the threshold; throws RegularizationFailed with the best attempt
// recorded otherwise.
RegularizeResult random_regularize(const ConvexFamily& F, double target_density,
                                   uint64_t seed, const CandidatePolicy& policy,
                                   double threshold);

ConvexFamily subfamily(const ConvexFamily& F, const std::vector<std::size_t>& idx);

// default ⪅ threshold: (1/delta)^exponent
double tol_threshold(double delta_scale, double exponent = 0.1);

}  // namespace klab
