#pragma once

#include <vector>

#include "klab/family.hpp"

namespace klab {

// Generator output plus the ground truth the oracles check against.
struct GeneratedFamily {
    ConvexFamily family;
    std::vector<int> direction_index;          // net index per element (when meaningful)
    std::vector<std::vector<int>> node_path;   // per element: node index per tree level
    std::vector<std::size_t> level_node_count; // ground-truth node count per level
    int branching = 0;                         // children per node (cantor generators)
    double theta = 0.0;                        // prescribed angle (slab generators)
    OrientedBox region;                        // the enclosing set (clustered generators)
};

// ~delta^-2 tubes with delta-separated directions on a Fibonacci hemisphere
// net, positions uniform in the unit ball.
GeneratedFamily gen_direction_separated(double delta, uint64_t seed);

// Maximal-by-net family: direction net x position net over the
// perpendicular disk; |T| within a constant of delta^-4.
GeneratedFamily gen_all_tubes(double delta);

// Maximal net of tubes inside the box K (long axis near K's long axis).
// K with extents >= 2 delegates to gen_all_tubes for consistency.
GeneratedFamily gen_clustered(double delta, const OrientedBox& K);

// Self-similar sticky family: at each tree level every node spawns
// (rho_{j-1}/rho_j)^2 children laid out on direction grids tuned so the
// scale-tree clustering recovers the construction exactly.
// branching_boost > 1 multiplies the per-node child count (over-dense
// variant for subset-extraction tests; exact recovery is not promised).
GeneratedFamily gen_sticky_cantor(double delta, double epsilon, uint64_t seed,
                                  int branching_boost = 1);

// N tubes with uniform random direction and position.
GeneratedFamily gen_frostman_random(double delta, std::size_t N, uint64_t seed);

// Tubes concentrated in a theta x 1 x 1 planar slab (in-plane direction
// spread), the planar obstruction case.
GeneratedFamily gen_slab_concentrated(double delta, double theta, uint64_t seed);

// a x b x 1 planks in the unit ball, directions spread over the hemisphere.
GeneratedFamily gen_plank_family(double a, double b, std::size_t count, uint64_t seed);

// delta x 1 x 1 slabs inside a theta x 1 x 1 slab with tilts drawn from
// [0.35 theta, 0.5 theta] around spread azimuths, giving typical pairwise
// angle ~ theta/2 and offsets decorrelated by bit reversal.
GeneratedFamily gen_slab_family_in_slab(double delta, double theta, uint64_t seed);

// Length-1 tubes all passing through the ball B(center, r) with dense
// direction/offset coverage inside it (the full-ball branch).
GeneratedFamily gen_through_ball(double delta, const Vec3& center, double r, uint64_t seed);

// One tube per rho-cell: sparse spray used by uniformity and embedding tests.
GeneratedFamily gen_spray(double delta, double rho, uint64_t seed);

// Tubes organized into thickened cells a_factor*delta x b_factor*delta x r
// inside the ball B(0, r); the thick-case generator.
GeneratedFamily gen_cell_clustered(double delta, double r, double a_factor, double b_factor,
                                   std::size_t cells, uint64_t seed);

// In-plane fan of tubes spanning a delta x b x r wafer inside B(0, r); the
// thin/slab-case generator.
GeneratedFamily gen_planar_fan(double delta, double r, double b, uint64_t seed);

// Several delta x b x r wafers at mutual plane angles ~ delta/b stacked in a
// common slab; the tangential-case generator.
GeneratedFamily gen_tangential_planks(double delta, double r, double b, std::size_t wafers,
                                      uint64_t seed);

}  // namespace klab
