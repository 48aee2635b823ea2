#include "klab/factoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <tuple>

#include "klab/parallel.hpp"

namespace klab {

namespace {

// membership lists for the policy candidates plus every element's own box
struct GreedyIndex {
    std::vector<Candidate> cand;              // policy candidates then own boxes
    std::vector<std::vector<uint32_t>> members;
    std::vector<std::vector<uint32_t>> cand_of_elem;  // transpose
    std::size_t own_base = 0;                 // cand[own_base + i] is element i's box
};

// near-duplicate search: element j can only sit inside 1.05 * box_i when the
// long axes are nearly parallel, so bucket directions first
std::vector<std::vector<uint32_t>> own_box_members(const ConvexFamily& F) {
    std::size_t n = F.size();
    std::vector<std::vector<uint32_t>> out(n);
    if (n <= 4000) {
        parallel_for_each(n, [&](std::size_t i) {
            for (std::size_t j = 0; j < n; ++j)
                if (contains(F[j], F[i], kMembershipDilation)) out[i].push_back((uint32_t)j);
        });
        return out;
    }
    double ratio = 0.0;
    for (const auto& b : F.boxes) ratio = std::max(ratio, b.b() / b.c());
    double cell = std::max(1e-3, 3.0 * kMembershipDilation * ratio);
    std::map<std::tuple<int, int, int>, std::vector<uint32_t>> grid;
    auto key_of = [&](const Vec3& d) {
        return std::make_tuple((int)std::floor(d.x / cell), (int)std::floor(d.y / cell),
                               (int)std::floor(d.z / cell));
    };
    for (std::size_t j = 0; j < n; ++j) {
        Vec3 d = F[j].long_axis();
        grid[key_of(d)].push_back((uint32_t)j);
        if (key_of(-d) != key_of(d)) grid[key_of(-d)].push_back((uint32_t)j);
    }
    parallel_for_each(n, [&](std::size_t i) {
        auto [kx, ky, kz] = key_of(F[i].long_axis());
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({kx + dx, ky + dy, kz + dz});
                    if (it == grid.end()) continue;
                    for (uint32_t j : it->second)
                        if (contains(F[j], F[i], kMembershipDilation))
                            out[i].push_back((uint32_t)j);
                }
        std::sort(out[i].begin(), out[i].end());
        out[i].erase(std::unique(out[i].begin(), out[i].end()), out[i].end());
    });
    return out;
}

GreedyIndex build_index(const ConvexFamily& F, const CandidatePolicy& policy) {
    GreedyIndex ix;
    ix.cand = enumerate_candidates(F, policy);
    ix.own_base = ix.cand.size();
    for (std::size_t i = 0; i < F.size(); ++i)
        ix.cand.push_back({F[i], F[i].volume(), "own"});
    ix.members.resize(ix.cand.size());
    parallel_for_each(ix.own_base, [&](std::size_t c) {
        const OrientedBox& K = ix.cand[c].box;
        for (std::size_t i = 0; i < F.size(); ++i) {
            if (!K.contains_point(F[i].center(), kMembershipDilation)) continue;
            if (contains(F[i], K, kMembershipDilation))
                ix.members[c].push_back((uint32_t)i);
        }
    });
    auto own = own_box_members(F);
    for (std::size_t i = 0; i < F.size(); ++i)
        ix.members[ix.own_base + i] = std::move(own[i]);
    ix.cand_of_elem.resize(F.size());
    for (std::size_t c = 0; c < ix.cand.size(); ++c)
        for (uint32_t e : ix.members[c]) ix.cand_of_elem[e].push_back((uint32_t)c);
    return ix;
}

}  // namespace

FactoringResult greedy_factor(const ConvexFamily& F, const CandidatePolicy& policy,
                              double eta_factor, uint64_t seed) {
    if (F.empty()) throw std::runtime_error("greedy_factor: empty family");
    FactoringResult R;
    R.eta_factor = eta_factor;
    R.seed = seed;

    GreedyIndex ix = build_index(F, policy);
    std::size_t nc = ix.cand.size(), n = F.size();

    std::vector<double> sum(nc, 0.0);  // alive member volume per candidate
    for (std::size_t c = 0; c < nc; ++c)
        for (uint32_t e : ix.members[c]) sum[c] += F[e].volume();

    auto objective = [&](std::size_t c) {
        return sum[c] / std::pow(ix.cand[c].volume, 1.0 + eta_factor);
    };

    // max-heap with lazy revalidation; sums only decrease, so a stale entry
    // is always an upper bound
    struct Entry {
        double obj;
        double vol;
        std::size_t c;
        bool operator<(const Entry& o) const {
            if (obj != o.obj) return obj < o.obj;
            if (vol != o.vol) return vol > o.vol;  // prefer smaller volume
            return c > o.c;                        // then enumeration order
        }
    };
    std::priority_queue<Entry> heap;
    for (std::size_t c = 0; c < nc; ++c)
        if (sum[c] > 0) heap.push({objective(c), ix.cand[c].volume, c});

    std::vector<char> alive(n, 1);
    std::size_t remaining = n;
    while (remaining > 0 && !heap.empty()) {
        Entry top = heap.top();
        heap.pop();
        double cur = objective(top.c);
        if (cur <= 0.0) continue;
        if (cur < top.obj * (1.0 - 1e-12)) {
            heap.push({cur, top.vol, top.c});
            continue;
        }
        FactorCell cell;
        cell.witness = ix.cand[top.c].box;
        cell.witness_kind = ix.cand[top.c].kind;
        double vol_sum = 0.0;
        for (uint32_t e : ix.members[top.c])
            if (alive[e]) {
                cell.members.push_back(e);
                vol_sum += F[e].volume();
            }
        if (cell.members.empty()) continue;
        cell.cell_delta = vol_sum / ix.cand[top.c].volume;
        cell.objective = cur;
        for (std::size_t e : cell.members) {
            alive[e] = 0;
            --remaining;
            for (uint32_t c2 : ix.cand_of_elem[e]) sum[c2] -= F[e].volume();
        }
        R.objective_trace.push_back(cell.objective);
        R.all_cells.push_back(std::move(cell));
    }

    // guard against float drift exhausting the heap early: any survivor
    // becomes its own singleton cell
    for (std::size_t e = 0; e < n; ++e)
        if (alive[e]) {
            FactorCell cell;
            cell.witness = F[e];
            cell.witness_kind = "own";
            cell.members = {e};
            cell.cell_delta = 1.0;
            cell.objective = std::pow(F[e].volume(), -eta_factor);
            R.objective_trace.push_back(cell.objective);
            R.all_cells.push_back(std::move(cell));
        }

    // dyadic pigeonholing of the selection densities; keep the most
    // populous level by element count
    std::map<int, std::size_t> level_count;
    for (const auto& cell : R.all_cells) {
        int lv = (int)std::floor(std::log2(std::max(cell.cell_delta, 1e-300)));
        level_count[lv] += cell.members.size();
    }
    int best_level = 0;
    std::size_t best_count = 0;
    for (auto [lv, cnt] : level_count)
        if (cnt > best_count || (cnt == best_count && lv > best_level)) {
            best_level = lv;
            best_count = cnt;
        }
    R.level = std::pow(2.0, best_level);
    for (const auto& cell : R.all_cells) {
        int lv = (int)std::floor(std::log2(std::max(cell.cell_delta, 1e-300)));
        if (lv == best_level) {
            R.cells.push_back(cell);
            for (std::size_t e : cell.members) R.kept.push_back(e);
        }
    }
    std::sort(R.kept.begin(), R.kept.end());
    return R;
}

FactorVerifyReport verify_factoring(const ConvexFamily& F, const FactoringResult& R,
                                    const CandidatePolicy& policy, double tol) {
    FactorVerifyReport rep;
    rep.tol = tol;
    ConvexFamily kept_family = subfamily(F, R.kept);
    rep.delta_max_kept = delta_max(kept_family, policy).value;
    // the kept level's own witnesses are admissible convex sets too
    for (const auto& cell : R.cells)
        rep.delta_max_kept = std::max(rep.delta_max_kept, delta(kept_family, cell.witness));

    // b1: cells partition kept, each member inside its witness
    {
        BulletCheck b{"partition-and-containment"};
        std::vector<std::size_t> all;
        bool contained = true;
        for (const auto& cell : R.cells)
            for (std::size_t e : cell.members) {
                all.push_back(e);
                if (!contains(F[e], cell.witness, kMembershipDilation)) contained = false;
            }
        std::sort(all.begin(), all.end());
        bool disjoint = std::adjacent_find(all.begin(), all.end()) == all.end();
        bool exhaustive = all == R.kept;
        b.pass = contained && disjoint && exhaustive;
        b.measured = (double)all.size();
        b.bound = (double)R.kept.size();
        if (!contained) b.detail = "member outside witness";
        else if (!disjoint) b.detail = "cells overlap";
        else if (!exhaustive) b.detail = "cells do not cover kept";
        rep.bullets.push_back(b);
    }

    // b2: per-cell density within tol of delta_max(kept)
    {
        BulletCheck b{"cell-density-near-max"};
        b.pass = true;
        b.bound = tol;
        for (const auto& cell : R.cells) {
            double ratio = rep.delta_max_kept / std::max(cell.cell_delta, 1e-300);
            b.measured = std::max(b.measured, ratio);
            // the kept level's densities sit within one dyadic step of each
            // other; the operative max may also exceed them by the tol slack
            if (ratio > tol * 2.0 || ratio < 1.0 / (tol * 2.0)) b.pass = false;
        }
        rep.bullets.push_back(b);
    }

    // b3: |V_uni[W]| >= |V'[W]| / tol
    {
        BulletCheck b{"cell-captures-level-members"};
        b.pass = true;
        b.bound = tol;
        for (const auto& cell : R.cells) {
            std::vector<std::size_t> in_w = family_in(kept_family, cell.witness);
            double ratio = (double)in_w.size() / std::max<double>(1.0, cell.members.size());
            b.measured = std::max(b.measured, ratio);
            if (ratio > tol) b.pass = false;
        }
        rep.bullets.push_back(b);
    }

    // b4: per-cell Frostman in the witness (eta-weighted when eta > 0)
    {
        BulletCheck b{"cell-frostman-in-witness"};
        b.pass = true;
        b.bound = tol;
        for (const auto& cell : R.cells) {
            ConvexFamily cf = subfamily(F, cell.members);
            double base = delta(cf, cell.witness);
            if (base <= 0) {
                b.pass = false;
                b.detail = "vanishing cell density";
                continue;
            }
            double worst = 1.0;
            for (const auto& cand : enumerate_candidates(cf, policy)) {
                if (!contains(cand.box, cell.witness, kMembershipDilation)) continue;
                double d = delta(cf, cand.box);
                double weight = R.eta_factor > 0
                                    ? std::pow(cell.witness.volume() / cand.volume,
                                               R.eta_factor)
                                    : 1.0;
                worst = std::max(worst, d / (base * weight));
            }
            b.measured = std::max(b.measured, worst);
            if (worst > tol) b.pass = false;
        }
        rep.bullets.push_back(b);
    }

    // b5: witness family is Katz-Tao (eta-weighted ambient correction)
    {
        BulletCheck b{"witness-family-katz-tao"};
        ConvexFamily W;
        W.delta = F.delta;
        double min_vol = std::numeric_limits<double>::infinity();
        for (const auto& cell : R.cells) {
            W.boxes.push_back(cell.witness);
            min_vol = std::min(min_vol, cell.witness.volume());
        }
        double dmax = delta_max(W, CandidatePolicy::standard(W.size())).value;
        double ambient_vol = 8.0;
        double allowance =
            R.eta_factor > 0 ? std::pow(ambient_vol / min_vol, R.eta_factor) : 1.0;
        b.measured = dmax;
        b.bound = tol * allowance;
        b.pass = dmax <= b.bound;
        rep.bullets.push_back(b);
    }
    return rep;
}

double bias_ratio_check(const ConvexFamily& F, const FactoringResult& R,
                        const OrientedBox& K_small, const OrientedBox& W) {
    double dw = delta(F, W);
    double dk = delta(F, K_small);
    if (dk <= 0.0) return std::numeric_limits<double>::infinity();
    double expected = std::pow(W.volume() / K_small.volume(), R.eta_factor);
    return (dw / dk) / expected;
}

}  // namespace klab
