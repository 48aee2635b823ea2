#include "klab/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "klab/parallel.hpp"

namespace klab {

double tol_threshold(double delta_scale, double exponent) {
    return std::pow(1.0 / delta_scale, exponent);
}

ConvexFamily subfamily(const ConvexFamily& F, const std::vector<std::size_t>& idx) {
    ConvexFamily out;
    out.delta = F.delta;
    out.boxes.reserve(idx.size());
    for (std::size_t i : idx) out.boxes.push_back(F[i]);
    return out;
}

CandidatePolicy CandidatePolicy::standard(std::size_t family_size) {
    CandidatePolicy p;
    if (family_size > 20000) {
        p.octree_depth = 4;
        p.max_seeds = 48;
        p.ladder_step = 2;
    } else if (family_size > 2000) {
        p.octree_depth = 5;
        p.max_seeds = 64;
        p.ladder_step = 1;
    } else {
        p.octree_depth = 5;
        p.max_seeds = 96;
        p.ladder_step = 1;
    }
    return p;
}

namespace {

// recursive octree over the ambient cube, partitioning element centers;
// nodes without a center are skipped
void octree_candidates(const std::vector<Vec3>& centers, std::vector<std::size_t> idx,
                       Vec3 lo, double side, int depth, int max_depth,
                       std::vector<Candidate>& out) {
    if (idx.empty()) return;
    Vec3 c = lo + Vec3{side / 2, side / 2, side / 2};
    out.push_back({OrientedBox::make(c, Mat3::identity(), {side, side, side}),
                   side * side * side, "octree"});
    if (depth >= max_depth) return;
    std::array<std::vector<std::size_t>, 8> child;
    for (std::size_t i : idx) {
        const Vec3& p = centers[i];
        int o = (p.x >= c.x) | ((p.y >= c.y) << 1) | ((p.z >= c.z) << 2);
        child[o].push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    double half = side / 2;
    for (int o = 0; o < 8; ++o) {
        Vec3 clo = lo + Vec3{(o & 1) ? half : 0.0, (o & 2) ? half : 0.0, (o & 4) ? half : 0.0};
        octree_candidates(centers, std::move(child[o]), clo, half, depth + 1, max_depth, out);
    }
}

}  // namespace

std::vector<Candidate> enumerate_candidates(const ConvexFamily& F,
                                            const CandidatePolicy& policy) {
    std::vector<Candidate> out;
    std::size_t n = F.size();
    if (n == 0) return out;

    std::vector<Vec3> centers(n);
    for (std::size_t i = 0; i < n; ++i) centers[i] = F[i].center();

    if (policy.include_ambient)
        out.push_back({OrientedBox::ball({0, 0, 0}, 1.0), 8.0, "ambient"});

    {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        octree_candidates(centers, std::move(all), Vec3{-2, -2, -2}, 4.0, 0,
                          policy.octree_depth, out);
    }

    // evenly spread deterministic seed subset
    std::size_t nseeds = std::min<std::size_t>(policy.max_seeds, n);
    std::vector<std::size_t> seeds;
    for (std::size_t s = 0; s < nseeds; ++s) seeds.push_back(s * n / nseeds);

    int step = std::max(1, policy.ladder_step);
    for (std::size_t s : seeds) {
        const OrientedBox& B = F[s];
        // dyadic dilation ladder along the box's own frame, extents capped
        // by the ambient domain
        std::array<std::vector<double>, 3> rungs;
        for (int axis = 0; axis < 3; ++axis) {
            double e = B.extent(axis);
            for (double f = 1.0; e * f <= kMaxExtent * (1 + 1e-12); f *= std::pow(2.0, step))
                rungs[axis].push_back(f);
        }
        for (double f0 : rungs[0])
            for (double f1 : rungs[1])
                for (double f2 : rungs[2]) {
                    Vec3 ext{B.a() * f0, B.b() * f1, B.c() * f2};
                    out.push_back({OrientedBox::make(B.center(), B.frame(), ext),
                                   ext.x * ext.y * ext.z, "ladder"});
                    if (out.size() >= policy.max_candidates) break;
                }
    }

    // bounding boxes of k-nearest-neighbor clusters in the seed's frame
    for (std::size_t s : seeds) {
        if (policy.max_knn < 2) break;
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t i = 0; i < n; ++i)
            dist[i] = {norm2(centers[i] - centers[s]), i};
        std::size_t keep = std::min<std::size_t>(policy.max_knn, n);
        std::nth_element(dist.begin(), dist.begin() + keep - 1, dist.end());
        std::sort(dist.begin(), dist.begin() + keep);
        for (int k = 2; k <= policy.max_knn && (std::size_t)k <= n; k *= 2) {
            Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
            for (int t = 0; t < k; ++t) {
                const OrientedBox& b = F[dist[t].second];
                for (const Vec3& c : b.corners()) {
                    Vec3 q = F[s].frame() * (c - F[s].center());
                    lo = {std::min(lo.x, q.x), std::min(lo.y, q.y), std::min(lo.z, q.z)};
                    hi = {std::max(hi.x, q.x), std::max(hi.y, q.y), std::max(hi.z, q.z)};
                }
            }
            Vec3 ext = hi - lo;
            ext = {std::min(ext.x, kMaxExtent), std::min(ext.y, kMaxExtent),
                   std::min(ext.z, kMaxExtent)};
            Vec3 mid = (lo + hi) * 0.5;
            Vec3 center = F[s].center() + F[s].frame().transpose() * mid;
            if (ext.x > 1e-12 && ext.y > 1e-12 && ext.z > 1e-12)
                out.push_back({OrientedBox::make(center, F[s].frame(), ext),
                               ext.x * ext.y * ext.z, "knn"});
        }
        if (out.size() >= policy.max_candidates) break;
    }
    if (out.size() > policy.max_candidates) out.resize(policy.max_candidates);
    return out;
}

std::vector<std::size_t> family_in(const ConvexFamily& F, const OrientedBox& K,
                                   double dilation) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < F.size(); ++i) {
        // centers must land in the dilated K; cheap reject before corners
        if (!K.contains_point(F[i].center(), dilation)) continue;
        if (contains(F[i], K, dilation)) out.push_back(i);
    }
    return out;
}

double delta(const ConvexFamily& F, const OrientedBox& K, double dilation) {
    double s = 0.0;
    for (std::size_t i : family_in(F, K, dilation)) s += F[i].volume();
    return s / K.volume();
}

DensityReport delta_max(const ConvexFamily& F, const CandidatePolicy& policy) {
    DensityReport rep;
    if (F.empty()) return rep;
    std::vector<Candidate> cand = enumerate_candidates(F, policy);
    // the first seed's own box is rung (1,1,1) of its ladder, so a value of
    // at least ~1 is always represented
    std::vector<double> vals(cand.size(), 0.0);
    parallel_for_each(cand.size(), [&](std::size_t c) {
        vals[c] = delta(F, cand[c].box, kMembershipDilation);
    });
    std::size_t best = 0;
    for (std::size_t c = 1; c < cand.size(); ++c) {
        if (vals[c] > vals[best] ||
            (vals[c] == vals[best] && cand[c].volume < cand[best].volume))
            best = c;
    }
    rep.value = vals[best];
    rep.witness = cand[best].box;
    rep.witness_kind = cand[best].kind;
    rep.candidates_searched = cand.size();
    return rep;
}

double frostman_cf(const ConvexFamily& F, const OrientedBox& K,
                   const CandidatePolicy& policy) {
    std::vector<std::size_t> inside = family_in(F, K, kMembershipDilation);
    if (inside.size() != F.size()) {
        std::string msg = "elements not contained in K:";
        for (std::size_t i = 0, shown = 0; i < F.size() && shown < 8; ++i) {
            if (!std::binary_search(inside.begin(), inside.end(), i)) {
                msg += " " + std::to_string(i);
                ++shown;
            }
        }
        throw NotContained(msg);
    }
    double base = delta(F, K, kMembershipDilation);
    if (base <= 0.0) throw NotContained("delta(F, K) vanishes");
    std::vector<Candidate> cand = enumerate_candidates(F, policy);
    double best = base;  // K itself is always admissible
    std::vector<double> vals(cand.size(), 0.0);
    parallel_for_each(cand.size(), [&](std::size_t c) {
        if (!contains(cand[c].box, K, kMembershipDilation)) return;
        vals[c] = delta(F, cand[c].box, kMembershipDilation);
    });
    for (double v : vals) best = std::max(best, v);
    return best / base;
}

ClassifyReport classify(const ConvexFamily& F, const OrientedBox& K,
                        const CandidatePolicy& policy, double threshold_kt,
                        double threshold_f) {
    ClassifyReport rep;
    double def = tol_threshold(F.delta > 0 ? F.delta : F.min_extent(), 0.1);
    rep.threshold_kt = threshold_kt > 0 ? threshold_kt : def;
    rep.threshold_f = threshold_f > 0 ? threshold_f : def;
    rep.delta_max_value = delta_max(F, policy).value;
    rep.cf_value = frostman_cf(F, K, policy);
    bool kt = rep.delta_max_value <= rep.threshold_kt;
    bool fr = rep.cf_value <= rep.threshold_f;
    rep.cls = kt && fr ? FamilyClass::Both
              : kt     ? FamilyClass::KatzTao
              : fr     ? FamilyClass::Frostman
                       : FamilyClass::Neither;
    return rep;
}

RegularizeResult random_regularize(const ConvexFamily& F, double target_density,
                                   uint64_t seed, const CandidatePolicy& policy,
                                   double threshold) {
    double fraction = target_density <= 1.0 ? 1.0 : 1.0 / target_density;
    RegularizeResult best;
    best.fraction = fraction;
    best.achieved_delta_max = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 8; ++attempt) {
        RegularizeResult r;
        r.fraction = fraction;
        r.seed_used = mix_seed(seed, attempt);
        r.attempts = attempt + 1;
        Rng rng(r.seed_used);
        for (std::size_t i = 0; i < F.size(); ++i)
            if (fraction >= 1.0 || rng.bernoulli(fraction)) r.kept.push_back(i);
        if (r.kept.empty()) continue;
        ConvexFamily sub = subfamily(F, r.kept);
        r.achieved_delta_max = delta_max(sub, policy).value;
        if (r.achieved_delta_max < best.achieved_delta_max) best = r;
        if (r.achieved_delta_max <= threshold) {
            best = r;
            best.attempts = attempt + 1;
            return best;
        }
        if (fraction >= 1.0) break;  // retries cannot change a full keep
    }
    if (best.achieved_delta_max <= threshold) return best;
    throw RegularizationFailed("delta_max " + std::to_string(best.achieved_delta_max) +
                               " above threshold " + std::to_string(threshold) + " after " +
                               std::to_string(best.attempts) + " attempts");
}

}  // namespace klab
