#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "klab/geom3.hpp"
#include "klab/rng.hpp"

namespace klab {

// Finite collection of oriented boxes at a scale delta. Shadings live in a
// separate Shading object keyed by index.
struct ConvexFamily {
    double delta = 0.0;  // nominal scale (shortest extent of a generic element)
    std::vector<OrientedBox> boxes;

    std::size_t size() const { return boxes.size(); }
    bool empty() const { return boxes.empty(); }
    const OrientedBox& operator[](std::size_t i) const { return boxes[i]; }

    // shortest extent actually present, used to pick grid resolutions
    double min_extent() const;
};

// Per-element measurable subset Y(W) over the element's own voxelization.
// An element is either fully shaded (Y = W, measure |W| exact) or carries a
// bitset over its local grid at resolution h.
class Shading {
  public:
    static Shading full(const ConvexFamily& F);
    // lower half along the long axis, realized on the local voxel grid
    static Shading lower_half(const ConvexFamily& F, double h);
    // seeded independent cell subset with inclusion probability frac
    static Shading random_cells(const ConvexFamily& F, double h, double frac, uint64_t seed);

    bool is_full(std::size_t i) const { return cells_[i].bits.empty() && cells_[i].full; }
    bool member(const ConvexFamily& F, std::size_t i, const Vec3& p) const;
    double measure(const ConvexFamily& F, std::size_t i) const;
    double total_measure(const ConvexFamily& F) const;
    double voxel_h() const { return h_; }

    // Keep a cell iff its center lies in the current shading and in `keep`
    // (dilation 1.0 with corner slack). Used when clipping derived families.
    Shading restricted(const ConvexFamily& F, const OrientedBox& keep) const;

    // Shading for a derived family: element i of `derived` inherits the
    // cells of parent(i) restricted to the derived element's own box.
    Shading transfer(const ConvexFamily& F, const ConvexFamily& derived,
                     const std::vector<std::size_t>& parent, double h) const;

    std::size_t size() const { return cells_.size(); }

  private:
    struct ElementCells {
        bool full = true;
        int nx = 0, ny = 0, nz = 0;
        std::vector<uint64_t> bits;  // empty when full
        uint64_t popcount = 0;
    };

    static ElementCells voxelize(const OrientedBox& box, double h);
    std::vector<ElementCells> cells_;
    double h_ = 0.0;

    friend class ShadingBuilder;
};

struct DistinctReport {
    bool ok = true;
    std::optional<std::pair<std::size_t, std::size_t>> offending;
    double worst_fraction = 0.0;  // largest overlap fraction seen
};

// Monte-Carlo estimate of |A ∩ B| by sampling `samples` points in A.
double pair_intersection_volume(const OrientedBox& A, const OrientedBox& B,
                                int samples, uint64_t seed);

// Every distinct pair must satisfy |T1 ∩ T2| <= (1/2)|T1|; pairwise overlap
// estimated with 4096 samples after an analytic prune that only near-parallel
// nearby pairs survive.
DistinctReport essentially_distinct(const ConvexFamily& F, uint64_t seed = 0x5eedULL);

}  // namespace klab
