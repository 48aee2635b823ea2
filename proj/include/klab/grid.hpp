#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "klab/family.hpp"

namespace klab {

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class GridMode { Union, Multiplicity };

// Voxel discretization of the region spanned by a family. Cells hold
// per-cell counts; union mode clamps to 0/1.
class OccupancyGrid {
  public:
    Vec3 origin{};
    double h = 0.0;
    int nx = 0, ny = 0, nz = 0;
    GridMode mode = GridMode::Union;
    std::vector<uint16_t> cells;

    std::size_t cell_count() const { return (std::size_t)nx * ny * nz; }
    std::size_t index(int i, int j, int k) const {
        return ((std::size_t)k * ny + j) * nx + i;
    }
    Vec3 cell_center(int i, int j, int k) const {
        return origin + Vec3{(i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h};
    }
    std::size_t occupied() const;
    uint64_t total_mass() const;     // sum of counts
    uint64_t total_mass_sq() const;  // sum of squared counts
    double occupied_volume() const { return (double)occupied() * h * h * h; }
};

constexpr std::size_t kDefaultCellBudget = 200'000'000;

// Deterministic rasterization: a cell counts toward element i when its
// center lies in Y(W_i). Merge is an integer add, so the result does not
// depend on the parallel schedule.
OccupancyGrid rasterize(const ConvexFamily& F, const Shading& Y, double h, GridMode mode,
                        std::size_t cell_budget = kDefaultCellBudget);

// Per-cell element lists in CSR layout for incidence counting.
struct CellOwners {
    OccupancyGrid grid;                // multiplicity grid
    std::vector<uint32_t> offsets;     // size cells+1
    std::vector<uint32_t> owners;      // element indices
};

CellOwners rasterize_owners(const ConvexFamily& F, const Shading& Y, double h,
                            std::size_t cell_budget = kDefaultCellBudget);

}  // namespace klab
