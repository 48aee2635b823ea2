#include "klab/measure.hpp"

#include <algorithm>
#include <cmath>

#include "klab/parallel.hpp"

namespace klab {

MeasureSummary measure_family(const ConvexFamily& F, const Shading& Y, double h,
                              std::size_t cell_budget) {
    OccupancyGrid g = rasterize(F, Y, h, GridMode::Multiplicity, cell_budget);
    MeasureSummary s;
    s.h = h;
    double h3 = h * h * h;
    s.occupied_cells = g.occupied();
    s.union_volume = (double)s.occupied_cells * h3;
    s.shading_sum = (double)g.total_mass() * h3;
    s.integral_f = s.shading_sum;
    s.integral_f2 = (double)g.total_mass_sq() * h3;
    if (s.occupied_cells == 0) throw EmptyUnion("no occupied cell");
    s.mu = s.shading_sum / s.union_volume;
    return s;
}

double union_volume(const ConvexFamily& F, const Shading& Y, double h) {
    OccupancyGrid g = rasterize(F, Y, h, GridMode::Union);
    std::size_t occ = g.occupied();
    if (occ == 0) throw EmptyUnion("no occupied cell");
    return (double)occ * h * h * h;
}

double multiplicity_mu(const ConvexFamily& F, const Shading& Y, double h) {
    return measure_family(F, Y, h).mu;
}

double lambda_min(const ConvexFamily& F, const Shading& Y) {
    double lam = 1.0;
    for (std::size_t i = 0; i < F.size(); ++i)
        lam = std::min(lam, Y.measure(F, i) / F[i].volume());
    return lam;
}

namespace {

int angle_bucket(double ang, double theta_min, int nbuckets) {
    if (ang < theta_min) return 0;
    int b = (int)std::floor(std::log2(ang / theta_min));
    return std::clamp(b, 0, nbuckets - 1);
}

}  // namespace

IncidenceStats incidence_stats(const ConvexFamily& F, const Shading& Y, AngleMode mode,
                               double h, uint64_t seed, std::size_t cell_budget) {
    if (F.size() < 2) throw NoIncidences("need at least two elements");
    IncidenceStats st;
    st.theta_min = std::max(1e-6, F[0].a() / F[0].b());
    int nbuckets = std::max(1, (int)std::ceil(std::log2((M_PI / 2) / st.theta_min)));
    st.bucket_mass.assign(nbuckets, 0.0);

    std::size_t n = F.size();
    if (n <= 2000) {
        // exact cellwise pair mass; pair angles cached in a packed matrix
        std::vector<uint8_t> bucket_of(n * n, 0);
        parallel_for_each(n, [&](std::size_t i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                uint8_t b = (uint8_t)angle_bucket(angle(F[i], F[j], mode), st.theta_min,
                                                  nbuckets);
                bucket_of[i * n + j] = b;
            }
        });
        CellOwners co = rasterize_owners(F, Y, h, cell_budget);
        std::vector<uint64_t> counts(nbuckets, 0);
        std::size_t ncells = co.grid.cell_count();
        for (std::size_t c = 0; c < ncells; ++c) {
            uint32_t lo = co.offsets[c], hi = co.offsets[c + 1];
            if (hi - lo < 2) continue;
            for (uint32_t p = lo; p < hi; ++p)
                for (uint32_t q = p + 1; q < hi; ++q) {
                    uint32_t i = co.owners[p], j = co.owners[q];
                    if (i == j) continue;
                    if (i > j) std::swap(i, j);
                    counts[bucket_of[(std::size_t)i * n + j]] += 2;  // ordered pairs
                }
        }
        double h3 = h * h * h;
        for (int b = 0; b < nbuckets; ++b) {
            st.bucket_mass[b] = (double)counts[b] * h3;
            st.total_mass += st.bucket_mass[b];
        }
    } else {
        // seeded sample of unordered pairs, Monte-Carlo volume per pair,
        // scaled to the full pair count
        st.subsampled = true;
        const std::size_t target = 1'000'000;
        double total_unordered = 0.5 * (double)n * (double)(n - 1);
        std::size_t npairs = (std::size_t)std::min((double)target, total_unordered);
        double scale = total_unordered / (double)npairs;
        std::vector<double> mass(npairs, 0.0);
        std::vector<int> bucket(npairs, 0);
        parallel_for_each(npairs, [&](std::size_t p) {
            Rng rng(mix_seed(seed, p));
            std::size_t i = rng.below(n), j = rng.below(n - 1);
            if (j >= i) ++j;
            double vol = 0.0;
            // both elements shaded: estimate |Y_i ∩ Y_j| from points in box i
            const OrientedBox& A = F[i];
            Rng prng(mix_seed(seed, p, 1));
            int hits = 0, samples = 128;
            for (int s = 0; s < samples; ++s) {
                Vec3 local{(prng.uniform() - 0.5) * A.a(), (prng.uniform() - 0.5) * A.b(),
                           (prng.uniform() - 0.5) * A.c()};
                Vec3 w = A.from_local(local);
                if (Y.member(F, i, w) && Y.member(F, j, w)) ++hits;
            }
            vol = A.volume() * hits / samples;
            mass[p] = vol;
            bucket[p] = angle_bucket(angle(F[i], F[j], mode), st.theta_min, nbuckets);
        });
        for (std::size_t p = 0; p < npairs; ++p)
            st.bucket_mass[bucket[p]] += 2.0 * scale * mass[p] / 1.0;
        for (double m : st.bucket_mass) st.total_mass += m;
    }

    if (st.total_mass <= 0.0) throw NoIncidences("no pair intersections");
    int best = 0;
    for (int b = 1; b < nbuckets; ++b)
        if (st.bucket_mass[b] > st.bucket_mass[best]) best = b;  // ties keep smaller theta
    st.typical_bucket = best;
    st.typical_theta = st.theta_min * std::pow(2.0, best);
    return st;
}

BallRestriction restrict_to_ball(const ConvexFamily& F, const OrientedBox& B,
                                 const Shading& Y) {
    BallRestriction out;
    out.clipped.delta = F.delta;
    std::vector<OrientedBox> clips;
    std::vector<std::size_t> clip_source;
    for (std::size_t i = 0; i < F.size(); ++i) {
        auto c = intersect_ball(F[i], B);
        if (c) {
            clips.push_back(*c);
            clip_source.push_back(i);
        }
    }
    // greedy dedup: a clip joins the first representative whose dilated box
    // swallows it
    for (std::size_t k = 0; k < clips.size(); ++k) {
        bool joined = false;
        for (std::size_t r = 0; r < out.clipped.size() && !joined; ++r)
            if (contains(clips[k], out.clipped[r], 2.0)) joined = true;
        if (!joined) {
            out.clipped.boxes.push_back(clips[k]);
            out.source.push_back(clip_source[k]);
        }
    }
    out.parents.resize(out.clipped.size());
    parallel_for_each(out.clipped.size(), [&](std::size_t r) {
        for (std::size_t i = 0; i < F.size(); ++i)
            if (contains(out.clipped[r], F[i], 2.0)) out.parents[r].push_back(i);
    });
    if (!out.clipped.empty()) {
        double h = std::max(out.clipped.min_extent() / 4.0, F.delta / 4.0);
        Shading inherited = Y.transfer(F, out.clipped, out.source, h);
        ConvexFamily& C = out.clipped;
        out.shading = inherited.restricted(C, B);
    }
    return out;
}

double mc_union_volume(const ConvexFamily& F, const Shading& Y, std::size_t samples,
                       uint64_t seed) {
    Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
    for (const auto& b : F.boxes)
        for (const auto& c : b.corners()) {
            lo = {std::min(lo.x, c.x), std::min(lo.y, c.y), std::min(lo.z, c.z)};
            hi = {std::max(hi.x, c.x), std::max(hi.y, c.y), std::max(hi.z, c.z)};
        }
    double vol_box = (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);

    // coarse cell lists so each sample only tests nearby elements
    double cell = std::max({(hi.x - lo.x), (hi.y - lo.y), (hi.z - lo.z)}) / 24.0;
    cell = std::max(cell, 1e-6);
    int cx = (int)std::ceil((hi.x - lo.x) / cell) + 1;
    int cy = (int)std::ceil((hi.y - lo.y) / cell) + 1;
    int cz = (int)std::ceil((hi.z - lo.z) / cell) + 1;
    auto cell_of = [&](const Vec3& p) {
        int i = std::clamp((int)((p.x - lo.x) / cell), 0, cx - 1);
        int j = std::clamp((int)((p.y - lo.y) / cell), 0, cy - 1);
        int k = std::clamp((int)((p.z - lo.z) / cell), 0, cz - 1);
        return ((std::size_t)k * cy + j) * cx + i;
    };
    std::vector<std::vector<uint32_t>> lists((std::size_t)cx * cy * cz);
    for (std::size_t e = 0; e < F.size(); ++e) {
        const OrientedBox& b = F[e];
        int nseg = std::max(1, (int)std::ceil(b.c() / cell));
        double seg = b.c() / nseg;
        double pad = std::hypot(b.a(), b.b()) / 2;
        for (int s = 0; s < nseg; ++s) {
            Vec3 m = b.center() + b.long_axis() * (-b.c() / 2 + (s + 0.5) * seg);
            double half = seg / 2 + pad;
            int i0 = std::clamp((int)((m.x - half - lo.x) / cell), 0, cx - 1);
            int i1 = std::clamp((int)((m.x + half - lo.x) / cell), 0, cx - 1);
            int j0 = std::clamp((int)((m.y - half - lo.y) / cell), 0, cy - 1);
            int j1 = std::clamp((int)((m.y + half - lo.y) / cell), 0, cy - 1);
            int k0 = std::clamp((int)((m.z - half - lo.z) / cell), 0, cz - 1);
            int k1 = std::clamp((int)((m.z + half - lo.z) / cell), 0, cz - 1);
            for (int k = k0; k <= k1; ++k)
                for (int j = j0; j <= j1; ++j)
                    for (int i = i0; i <= i1; ++i) {
                        auto& l = lists[((std::size_t)k * cy + j) * cx + i];
                        if (l.empty() || l.back() != e) l.push_back((uint32_t)e);
                    }
        }
    }

    std::vector<uint64_t> hit_chunks(thread_count(), 0);
    std::size_t per = (samples + thread_count() - 1) / thread_count();
    parallel_for_each(hit_chunks.size(), [&](std::size_t w) {
        Rng rng(mix_seed(seed, w));
        uint64_t hits = 0;
        std::size_t count = std::min(per, samples - std::min(samples, per * w));
        for (std::size_t s = 0; s < count; ++s) {
            Vec3 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
            for (uint32_t i : lists[cell_of(p)])
                if (Y.member(F, i, p)) {
                    ++hits;
                    break;
                }
        }
        hit_chunks[w] = hits;
    });
    uint64_t hits = 0;
    for (uint64_t c : hit_chunks) hits += c;
    return vol_box * (double)hits / (double)samples;
}

}  // namespace klab
