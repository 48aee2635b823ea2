#pragma once

// Independent test oracles. These deliberately re-derive quantities by
// brute force (corner arithmetic, dense grids, point sampling) so they stay
// decoupled from the library code paths they check.

#include <cmath>
#include <vector>

#include "klab/family.hpp"
#include "klab/geom3.hpp"
#include "klab/rng.hpp"

namespace oracle {

using klab::ConvexFamily;
using klab::Mat3;
using klab::OrientedBox;
using klab::Rng;
using klab::Vec3;

// direct arithmetic on the 8 corners, written independently of
// klab::contains
inline bool corner_containment(const OrientedBox& inner, const OrientedBox& outer,
                               double dilation) {
    for (int sx : {-1, 1})
        for (int sy : {-1, 1})
            for (int sz : {-1, 1}) {
                Vec3 p = inner.center() + inner.axis(0) * (sx * inner.a() / 2) +
                         inner.axis(1) * (sy * inner.b() / 2) +
                         inner.axis(2) * (sz * inner.c() / 2);
                Vec3 d = p - outer.center();
                double qx = std::fabs(klab::dot(d, outer.axis(0)));
                double qy = std::fabs(klab::dot(d, outer.axis(1)));
                double qz = std::fabs(klab::dot(d, outer.axis(2)));
                if (qx > dilation * outer.a() / 2 + 1e-9 ||
                    qy > dilation * outer.b() / 2 + 1e-9 ||
                    qz > dilation * outer.c() / 2 + 1e-9)
                    return false;
            }
    return true;
}

// angle between plane normals via plain arccos of the inner product
inline double normal_angle(const OrientedBox& x, const OrientedBox& y) {
    double c = std::fabs(klab::dot(x.short_axis(), y.short_axis()));
    return std::acos(std::min(1.0, c));
}

// dense-grid overlap volume of two boxes at a fixed resolution
inline double grid_overlap(const OrientedBox& A, const OrientedBox& B, double res) {
    int nx = std::max(1, (int)std::ceil(A.a() / res));
    int ny = std::max(1, (int)std::ceil(A.b() / res));
    int nz = std::max(1, (int)std::ceil(A.c() / res));
    long hits = 0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                Vec3 local{(i + 0.5) * A.a() / nx - A.a() / 2,
                           (j + 0.5) * A.b() / ny - A.b() / 2,
                           (k + 0.5) * A.c() / nz - A.c() / 2};
                if (B.contains_point(A.from_local(local))) ++hits;
            }
    return A.volume() * (double)hits / ((double)nx * ny * nz);
}

// uniform point sampling membership count against a plain box list
inline double point_sample_union(const std::vector<OrientedBox>& boxes, std::size_t samples,
                                 uint64_t seed) {
    Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
    for (const auto& b : boxes)
        for (const auto& c : b.corners()) {
            lo = {std::min(lo.x, c.x), std::min(lo.y, c.y), std::min(lo.z, c.z)};
            hi = {std::max(hi.x, c.x), std::max(hi.y, c.y), std::max(hi.z, c.z)};
        }
    Rng rng(seed);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        Vec3 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
        for (const auto& b : boxes)
            if (b.contains_point(p)) {
                ++hits;
                break;
            }
    }
    return (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z) * (double)hits / (double)samples;
}

// seeded random boxes inside the unit ball for property tests
inline OrientedBox random_box(Rng& rng, double min_ext = 0.01, double max_ext = 1.0) {
    Vec3 d = klab::normalized(
        {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.1, 1)});
    Vec3 e1 = klab::any_perp(d);
    Vec3 e2 = klab::cross(d, e1);
    Vec3 ext{rng.uniform(min_ext, max_ext), rng.uniform(min_ext, max_ext),
             rng.uniform(min_ext, max_ext)};
    Vec3 center{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    return OrientedBox::make(center, Mat3::from_rows(e1, e2, d), ext);
}

inline OrientedBox random_tube(Rng& rng, double delta) {
    Vec3 d = klab::normalized(
        {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.05, 1)});
    Vec3 p = Vec3{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
    return OrientedBox::tube(p, d, delta);
}

}  // namespace oracle
