#include "klab/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <string>

#include "klab/parallel.hpp"

namespace klab {

std::size_t OccupancyGrid::occupied() const {
    std::size_t n = 0;
    for (uint16_t c : cells) n += (c > 0);
    return n;
}

uint64_t OccupancyGrid::total_mass() const {
    uint64_t s = 0;
    for (uint16_t c : cells) s += c;
    return s;
}

uint64_t OccupancyGrid::total_mass_sq() const {
    uint64_t s = 0;
    for (uint16_t c : cells) s += (uint64_t)c * c;
    return s;
}

namespace {

struct Aabb {
    Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
    void grow(const Vec3& p) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
};

Aabb family_aabb(const ConvexFamily& F) {
    Aabb box;
    for (const auto& b : F.boxes)
        for (const auto& c : b.corners()) box.grow(c);
    return box;
}

// Visit grid cells whose center lies in Y(W_i). The element is cut into
// segments along its long axis so the scanned index ranges stay tight for
// long thin boxes.
template <typename Fn>
void scan_element(const OccupancyGrid& g, const ConvexFamily& F, const Shading& Y,
                  std::size_t i, Fn&& emit) {
    const OrientedBox& box = F[i];
    double seg_len = std::max(2.0 * g.h, box.b());
    int nseg = std::max(1, (int)std::ceil(box.c() / seg_len));
    seg_len = box.c() / nseg;
    Vec3 axis = box.long_axis();
    for (int s = 0; s < nseg; ++s) {
        double t0 = -box.c() / 2 + s * seg_len;
        Vec3 seg_center = box.center() + axis * (t0 + seg_len / 2);
        OrientedBox seg = OrientedBox::make(seg_center, box.frame(),
                                            {box.a(), box.b(), seg_len});
        Aabb ab;
        for (const auto& c : seg.corners()) ab.grow(c);
        int i0 = std::max(0, (int)std::floor((ab.lo.x - g.origin.x) / g.h));
        int j0 = std::max(0, (int)std::floor((ab.lo.y - g.origin.y) / g.h));
        int k0 = std::max(0, (int)std::floor((ab.lo.z - g.origin.z) / g.h));
        int i1 = std::min(g.nx - 1, (int)std::floor((ab.hi.x - g.origin.x) / g.h));
        int j1 = std::min(g.ny - 1, (int)std::floor((ab.hi.y - g.origin.y) / g.h));
        int k1 = std::min(g.nz - 1, (int)std::floor((ab.hi.z - g.origin.z) / g.h));
        for (int k = k0; k <= k1; ++k)
            for (int j = j0; j <= j1; ++j)
                for (int ii = i0; ii <= i1; ++ii) {
                    Vec3 p = g.cell_center(ii, j, k);
                    // segment membership avoids double counting on seams
                    Vec3 q = box.to_local(p);
                    if (std::fabs(q.x) > box.a() / 2 || std::fabs(q.y) > box.b() / 2)
                        continue;
                    if (q.z < t0 || q.z >= t0 + seg_len) continue;
                    if (q.z < -box.c() / 2 || q.z > box.c() / 2) continue;
                    if (!Y.is_full(i) && !Y.member(F, i, p)) continue;
                    emit(g.index(ii, j, k));
                }
    }
}

OccupancyGrid make_grid(const ConvexFamily& F, double h, GridMode mode,
                        std::size_t cell_budget) {
    if (F.empty()) throw std::runtime_error("rasterize: empty family");
    if (h <= 0) throw std::runtime_error("rasterize: h must be positive");
    Aabb ab = family_aabb(F);
    OccupancyGrid g;
    g.h = h;
    g.mode = mode;
    g.origin = ab.lo - Vec3{h, h, h};
    g.nx = (int)std::ceil((ab.hi.x - g.origin.x) / h) + 1;
    g.ny = (int)std::ceil((ab.hi.y - g.origin.y) / h) + 1;
    g.nz = (int)std::ceil((ab.hi.z - g.origin.z) / h) + 1;
    std::size_t need = (std::size_t)g.nx * g.ny * g.nz;
    if (need > cell_budget)
        throw BudgetExceeded("grid needs " + std::to_string(need) + " cells, budget " +
                             std::to_string(cell_budget));
    g.cells.assign(need, 0);
    return g;
}

}  // namespace

OccupancyGrid rasterize(const ConvexFamily& F, const Shading& Y, double h, GridMode mode,
                        std::size_t cell_budget) {
    OccupancyGrid g = make_grid(F, h, mode, cell_budget);
    parallel_for_each(F.size(), [&](std::size_t i) {
        scan_element(g, F, Y, i, [&](std::size_t idx) {
            std::atomic_ref<uint16_t> cell(g.cells[idx]);
            if (mode == GridMode::Union)
                cell.store(1, std::memory_order_relaxed);
            else
                cell.fetch_add(1, std::memory_order_relaxed);
        });
    });
    return g;
}

CellOwners rasterize_owners(const ConvexFamily& F, const Shading& Y, double h,
                            std::size_t cell_budget) {
    CellOwners out;
    out.grid = rasterize(F, Y, h, GridMode::Multiplicity, cell_budget);
    std::size_t n = out.grid.cell_count();
    out.offsets.assign(n + 1, 0);
    for (std::size_t c = 0; c < n; ++c)
        out.offsets[c + 1] = out.offsets[c] + out.grid.cells[c];
    out.owners.assign(out.offsets[n], 0);
    std::vector<std::atomic<uint32_t>> cursor(n);
    for (std::size_t c = 0; c < n; ++c)
        cursor[c].store(out.offsets[c], std::memory_order_relaxed);
    parallel_for_each(F.size(), [&](std::size_t i) {
        scan_element(out.grid, F, Y, i, [&](std::size_t idx) {
            uint32_t slot = cursor[idx].fetch_add(1, std::memory_order_relaxed);
            out.owners[slot] = (uint32_t)i;
        });
    });
    return out;
}

}  // namespace klab
