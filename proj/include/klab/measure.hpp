#pragma once

#include <optional>
#include <vector>

#include "klab/grid.hpp"

namespace klab {

struct EmptyUnion : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoIncidences : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Summary measurements over one rasterization. All satisfy
// mu * union_volume == shading_sum exactly because they come from the same
// integer cell counts.
struct MeasureSummary {
    double h = 0.0;
    double union_volume = 0.0;
    double shading_sum = 0.0;   // sum over elements of grid-measured |Y(W)|
    double mu = 0.0;
    double integral_f = 0.0;    // same as shading_sum
    double integral_f2 = 0.0;   // sum of squared counts * h^3
    std::size_t occupied_cells = 0;
};

MeasureSummary measure_family(const ConvexFamily& F, const Shading& Y, double h,
                              std::size_t cell_budget = kDefaultCellBudget);

double union_volume(const ConvexFamily& F, const Shading& Y, double h);
double multiplicity_mu(const ConvexFamily& F, const Shading& Y, double h);

// min over elements of |Y(W)| / |W|; exactly 1 for a full shading.
double lambda_min(const ConvexFamily& F, const Shading& Y);

struct IncidenceStats {
    double total_mass = 0.0;          // |Tri|, ordered pairs, diagonal excluded
    double theta_min = 0.0;           // lowest bucket edge (a/b of the family)
    std::vector<double> bucket_mass;  // dyadic buckets [theta_min 2^k, theta_min 2^{k+1})
    int typical_bucket = 0;
    double typical_theta = 0.0;       // lower edge of the heaviest bucket
    bool subsampled = false;
};

// |Tri| = sum over ordered distinct pairs of |Y(W1) ∩ Y(W2)| with dyadic
// angle bucketing. Cellwise-exact up to 2000 elements; beyond that a seeded
// sample of 10^6 unordered pairs is measured by Monte-Carlo and scaled.
IncidenceStats incidence_stats(const ConvexFamily& F, const Shading& Y, AngleMode mode,
                               double h, uint64_t seed = 0x7a11ULL,
                               std::size_t cell_budget = kDefaultCellBudget);

struct BallRestriction {
    ConvexFamily clipped;                      // deduplicated T_B representatives
    std::vector<std::vector<std::size_t>> parents;  // per representative: {T : T_B ⊂ 2T}
    std::vector<std::size_t> source;           // element of F whose clip became the rep
    Shading shading;                           // cellwise-restricted shading
};

// Clip every tube of F to the ball B, deduplicate the clipped tubes under
// dilation-2 containment and attach the parent multiset of each
// representative.
BallRestriction restrict_to_ball(const ConvexFamily& F, const OrientedBox& B,
                                 const Shading& Y);

// Monte-Carlo union volume: `samples` points uniform in the family's
// bounding box, membership tested against the shading. Independent of the
// grid path; used as an oracle and for cross-checks.
double mc_union_volume(const ConvexFamily& F, const Shading& Y, std::size_t samples,
                       uint64_t seed);

}  // namespace klab
