#include "klab/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "klab/parallel.hpp"

namespace klab {

double ConvexFamily::min_extent() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& b : boxes) m = std::min(m, b.a());
    return boxes.empty() ? 0.0 : m;
}

Shading::ElementCells Shading::voxelize(const OrientedBox& box, double h) {
    ElementCells e;
    e.full = false;
    e.nx = std::max(1, (int)std::lround(box.a() / h));
    e.ny = std::max(1, (int)std::lround(box.b() / h));
    e.nz = std::max(1, (int)std::lround(box.c() / h));
    std::size_t n = (std::size_t)e.nx * e.ny * e.nz;
    e.bits.assign((n + 63) / 64, 0);
    return e;
}

Shading Shading::full(const ConvexFamily& F) {
    Shading s;
    s.h_ = 0.0;
    s.cells_.resize(F.size());
    return s;  // default ElementCells is full
}

Shading Shading::lower_half(const ConvexFamily& F, double h) {
    Shading s;
    s.h_ = h;
    s.cells_.resize(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
        ElementCells e = voxelize(F[i], h);
        std::size_t idx = 0;
        for (int kz = 0; kz < e.nz; ++kz) {
            double z = (kz + 0.5) * h - e.nz * h / 2.0;
            bool on = z < 0.0;
            for (int ky = 0; ky < e.ny; ++ky)
                for (int kx = 0; kx < e.nx; ++kx, ++idx)
                    if (on) {
                        e.bits[idx >> 6] |= 1ULL << (idx & 63);
                        ++e.popcount;
                    }
        }
        s.cells_[i] = std::move(e);
    }
    return s;
}

Shading Shading::random_cells(const ConvexFamily& F, double h, double frac, uint64_t seed) {
    Shading s;
    s.h_ = h;
    s.cells_.resize(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
        ElementCells e = voxelize(F[i], h);
        Rng rng(mix_seed(seed, i));
        std::size_t n = (std::size_t)e.nx * e.ny * e.nz;
        for (std::size_t idx = 0; idx < n; ++idx)
            if (rng.bernoulli(frac)) {
                e.bits[idx >> 6] |= 1ULL << (idx & 63);
                ++e.popcount;
            }
        s.cells_[i] = std::move(e);
    }
    return s;
}

bool Shading::member(const ConvexFamily& F, std::size_t i, const Vec3& p) const {
    const ElementCells& e = cells_[i];
    const OrientedBox& box = F[i];
    if (e.full) return box.contains_point(p);
    Vec3 q = box.to_local(p);
    int kx = (int)std::floor(q.x / h_ + e.nx / 2.0);
    int ky = (int)std::floor(q.y / h_ + e.ny / 2.0);
    int kz = (int)std::floor(q.z / h_ + e.nz / 2.0);
    if (kx < 0 || kx >= e.nx || ky < 0 || ky >= e.ny || kz < 0 || kz >= e.nz) return false;
    std::size_t idx = ((std::size_t)kz * e.ny + ky) * e.nx + kx;
    return (e.bits[idx >> 6] >> (idx & 63)) & 1ULL;
}

double Shading::measure(const ConvexFamily& F, std::size_t i) const {
    const ElementCells& e = cells_[i];
    if (e.full) return F[i].volume();
    return (double)e.popcount * h_ * h_ * h_;
}

double Shading::total_measure(const ConvexFamily& F) const {
    double s = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) s += measure(F, i);
    return s;
}

Shading Shading::restricted(const ConvexFamily& F, const OrientedBox& keep) const {
    Shading out;
    out.h_ = h_ > 0 ? h_ : F.min_extent() / 4.0;
    out.cells_.resize(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
        ElementCells e = voxelize(F[i], out.h_);
        std::size_t idx = 0;
        for (int kz = 0; kz < e.nz; ++kz)
            for (int ky = 0; ky < e.ny; ++ky)
                for (int kx = 0; kx < e.nx; ++kx, ++idx) {
                    Vec3 c = F[i].from_local({(kx + 0.5) * out.h_ - e.nx * out.h_ / 2.0,
                                              (ky + 0.5) * out.h_ - e.ny * out.h_ / 2.0,
                                              (kz + 0.5) * out.h_ - e.nz * out.h_ / 2.0});
                    if (member(F, i, c) && keep.contains_point(c)) {
                        e.bits[idx >> 6] |= 1ULL << (idx & 63);
                        ++e.popcount;
                    }
                }
        out.cells_[i] = std::move(e);
    }
    return out;
}

Shading Shading::transfer(const ConvexFamily& F, const ConvexFamily& derived,
                          const std::vector<std::size_t>& parent, double h) const {
    Shading out;
    out.h_ = h;
    out.cells_.resize(derived.size());
    for (std::size_t i = 0; i < derived.size(); ++i) {
        ElementCells e = voxelize(derived[i], h);
        std::size_t idx = 0;
        for (int kz = 0; kz < e.nz; ++kz)
            for (int ky = 0; ky < e.ny; ++ky)
                for (int kx = 0; kx < e.nx; ++kx, ++idx) {
                    Vec3 c = derived[i].from_local({(kx + 0.5) * h - e.nx * h / 2.0,
                                                    (ky + 0.5) * h - e.ny * h / 2.0,
                                                    (kz + 0.5) * h - e.nz * h / 2.0});
                    if (member(F, parent[i], c)) {
                        e.bits[idx >> 6] |= 1ULL << (idx & 63);
                        ++e.popcount;
                    }
                }
        out.cells_[i] = std::move(e);
    }
    return out;
}

double pair_intersection_volume(const OrientedBox& A, const OrientedBox& B,
                                int samples, uint64_t seed) {
    Rng rng(seed);
    int hits = 0;
    for (int s = 0; s < samples; ++s) {
        Vec3 local{(rng.uniform() - 0.5) * A.a(), (rng.uniform() - 0.5) * A.b(),
                   (rng.uniform() - 0.5) * A.c()};
        if (B.contains_point(A.from_local(local))) ++hits;
    }
    return A.volume() * (double)hits / samples;
}

// distance between the two long-axis segments
static double segment_distance(const OrientedBox& A, const OrientedBox& B) {
    Vec3 p1 = A.center(), d1 = A.long_axis();
    Vec3 p2 = B.center(), d2 = B.long_axis();
    double l1 = A.c() / 2, l2 = B.c() / 2;
    // coarse but adequate: sample parameters of one segment, project on the
    // other (exact segment-segment distance is not needed for a prune)
    double best = std::numeric_limits<double>::infinity();
    for (int i = -4; i <= 4; ++i) {
        Vec3 q = p1 + d1 * (l1 * i / 4.0);
        double t = std::clamp(dot(q - p2, d2), -l2, l2);
        best = std::min(best, norm(q - (p2 + d2 * t)));
    }
    for (int i = -4; i <= 4; ++i) {
        Vec3 q = p2 + d2 * (l2 * i / 4.0);
        double t = std::clamp(dot(q - p1, d1), -l1, l1);
        best = std::min(best, norm(q - (p1 + d1 * t)));
    }
    return best;
}

// Fubini bound along A's long axis: |A ∩ B| <= a_A b_A * min fiber length.
static double overlap_upper_bound(const OrientedBox& A, const OrientedBox& B) {
    Vec3 u = A.long_axis();
    double L = A.c();
    for (int k = 0; k < 3; ++k) {
        double g = std::fabs(dot(u, B.axis(k)));
        if (g > 1e-12) L = std::min(L, B.extent(k) / g);
    }
    return A.a() * A.b() * L;
}

DistinctReport essentially_distinct(const ConvexFamily& F, uint64_t seed) {
    DistinctReport rep;
    std::size_t n = F.size();
    if (n < 2) return rep;

    double max_b = 0.0, min_c = std::numeric_limits<double>::infinity();
    double max_cross = 0.0;
    for (const auto& t : F.boxes) {
        max_b = std::max(max_b, t.b());
        min_c = std::min(min_c, t.c());
        max_cross = std::max(max_cross, std::hypot(t.a(), t.b()) / 2);
    }
    // pairs can only exceed half-overlap when nearly parallel
    double angle_thresh = std::min(1.0, 4.0 * max_b / min_c);
    double cell = std::max(1e-3, 1.5 * angle_thresh);

    // direction hash over folded axis directions; each element inserted at
    // both +-d so that nearly antiparallel pairs fall in adjacent cells
    std::map<std::tuple<int, int, int>, std::vector<std::size_t>> grid;
    auto key_of = [&](const Vec3& d) {
        return std::make_tuple((int)std::floor(d.x / cell), (int)std::floor(d.y / cell),
                               (int)std::floor(d.z / cell));
    };
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 d = F[i].long_axis();
        grid[key_of(d)].push_back(i);
        auto k2 = key_of(-d);
        if (k2 != key_of(d)) grid[k2].push_back(i);
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (auto& [key, bucket] : grid) {
        auto [kx, ky, kz] = key;
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({kx + dx, ky + dy, kz + dz});
                    if (it == grid.end()) continue;
                    for (std::size_t i : bucket)
                        for (std::size_t j : it->second)
                            if (i < j) pairs.emplace_back(i, j);
                }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    std::vector<double> frac(pairs.size(), 0.0);
    parallel_for_each(pairs.size(), [&](std::size_t p) {
        auto [i, j] = pairs[p];
        const OrientedBox &A = F[i], &B = F[j];
        double vmin = std::min(A.volume(), B.volume());
        if (segment_distance(A, B) > max_cross * 2.01) return;
        double bound = std::min(overlap_upper_bound(A, B), overlap_upper_bound(B, A));
        if (bound <= 0.5 * vmin) return;
        double vol = pair_intersection_volume(A, B, 4096, mix_seed(seed, i, j));
        frac[p] = vol / A.volume();
    });
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (frac[p] > rep.worst_fraction) {
            rep.worst_fraction = frac[p];
            if (frac[p] > 0.5) {
                rep.ok = false;
                if (!rep.offending) rep.offending = pairs[p];
            }
        }
        if (frac[p] > 0.5 && !rep.offending) rep.offending = pairs[p];
    }
    if (rep.worst_fraction > 0.5) rep.ok = false;
    return rep;
}

}  // namespace klab
