#pragma once

#include <vector>

#include "klab/density.hpp"

namespace klab {

struct HypothesisViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SelectionShortfall : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FillBudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Multiscale grouping at scales rho_j = delta^{j*eps}. Level 0 is the root
// scale 1; level J holds the delta-tubes themselves. Each level's nodes are
// essentially distinct rho x rho x 1 boxes; every tube is assigned to
// exactly one node per level and nodes link to a parent at the next coarser
// level.
struct ScaleTree {
    double delta = 0.0;
    double epsilon = 0.0;  // effective (possibly clamped) epsilon
    int levels = 0;        // J: number of scales below the root
    std::vector<double> rho;  // rho[j], j = 0..J, rho[0] = 1, rho[J] = delta

    struct Node {
        OrientedBox box;
        std::size_t parent = 0;           // index into the previous level
        std::vector<std::size_t> tubes;   // original tube indices under this node
    };
    std::vector<std::vector<Node>> level;      // level[j], j = 0..J
    std::vector<std::vector<std::size_t>> node_of_tube;  // [j][tube] -> node index
};

// Greedy nearest-representative clustering per scale. Join requires axis
// angle <= rho, midpoint distance <= rho and dilation-2 containment of the
// thickened tubes; among admissible representatives the closest in angle
// wins. eps is clamped so consecutive scales stay at least a factor 2 apart.
ScaleTree build_scale_tree(const ConvexFamily& F, double epsilon);

struct UniformityReport {
    bool uniform = true;
    int worst_level = 0;
    double worst_ratio = 1.0;  // max count / median count at the worst scale
    double slack = 0.0;
};

UniformityReport check_uniform(const ScaleTree& tree, double slack = 0.0);

struct StickinessProfile {
    struct LevelStats {
        double rho = 0.0;
        std::size_t min_count = 0, max_count = 0;
        double median_count = 0.0;
        double band_lo = 0.0, band_hi = 0.0;  // delta^eps (rho/delta)^2 bounds
        double margin = 0.0;  // log2 distance into the band (>= 0 inside)
        bool in_band = false;
    };
    std::vector<LevelStats> levels;
    bool sticky = false;
    double epsilon_sticky = 0.0;
};

StickinessProfile check_sticky(const ScaleTree& tree, double epsilon_sticky);

struct SubmultReport {
    double direct = 0.0;                  // delta_max of the whole family
    std::vector<double> conditional;      // per gap: max over sampled parents
    double product = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// Lemma-style submultiplicativity of delta_max across a scale subsequence:
// direct <= tol * prod of conditional values, conditionals evaluated on
// parent-rescaled child families over a seeded parent sample.
SubmultReport delta_max_submult_check(const ScaleTree& tree, const ConvexFamily& F,
                                      const std::vector<int>& scale_indices,
                                      const CandidatePolicy& policy, double tol,
                                      uint64_t seed = 0);

// Scales rho_j (interior: 2 <= j <= J-2) where the median conditional
// Frostman constant over sampled parents is <= tol.
std::vector<int> find_sticky_intermediate_scales(const ScaleTree& tree,
                                                 const ConvexFamily& F,
                                                 const CandidatePolicy& policy, double tol,
                                                 uint64_t seed = 0);

struct StickySelection {
    std::vector<std::size_t> tubes;   // selected / final tube indices into F
    ConvexFamily family;              // extracted or embedded family
    StickinessProfile profile;        // of the rebuilt tree, band 3*eps
    double delta_max_value = 0.0;
    uint64_t seed_used = 0;
};

// Top-down random selection (4 over the tree levels): ~rho_1^{-2} top nodes,
// then (rho_{m-1}/rho_m)^2 children per selected node. Requires per-level
// scale gaps and conditional Frostman bounds; the result must pass
// check_sticky with band 3*eps (asserted).
StickySelection extract_sticky_subset(const ScaleTree& tree, const ConvexFamily& F,
                                      const CandidatePolicy& policy, uint64_t seed,
                                      double tol);

// Fill under-full nodes with fresh tubes sampled inside the parent until
// counts reach the sticky band; the input family is a subset of the output.
StickySelection embed_in_sticky_superset(const ScaleTree& tree, const ConvexFamily& F,
                                         const CandidatePolicy& policy, uint64_t seed,
                                         double tol);

// conditional family of a node: children boxes (or tubes at the leaf level)
// rescaled by the parent box to the unit cube
ConvexFamily conditional_family(const ScaleTree& tree, const ConvexFamily& F, int level,
                                std::size_t node, int child_level);

}  // namespace klab
