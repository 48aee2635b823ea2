#include "klab/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "klab/parallel.hpp"

namespace klab {

namespace {

OrientedBox thick_tube_box(const OrientedBox& tube, double rho) {
    double w = std::min(kMaxExtent, std::max(rho, tube.b()));
    return OrientedBox::make(tube.center(), tube.frame(), {w, w, tube.c()});
}

// direction-bucket index over representatives for nearest-rep clustering
struct RepIndex {
    double cell;
    std::map<std::tuple<int, int, int>, std::vector<std::size_t>> grid;

    explicit RepIndex(double c) : cell(std::max(c, 1e-4)) {}
    std::tuple<int, int, int> key(const Vec3& d) const {
        return {(int)std::floor(d.x / cell), (int)std::floor(d.y / cell),
                (int)std::floor(d.z / cell)};
    }
    void insert(const Vec3& d, std::size_t id) {
        grid[key(d)].push_back(id);
        if (key(-d) != key(d)) grid[key(-d)].push_back(id);
    }
    template <typename Fn>
    void neighbors(const Vec3& d, Fn&& fn) const {
        auto [kx, ky, kz] = key(d);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({kx + dx, ky + dy, kz + dz});
                    if (it == grid.end()) continue;
                    for (std::size_t id : it->second) fn(id);
                }
    }
};

double axis_angle(const Vec3& a, const Vec3& b) {
    return std::acos(std::clamp(std::fabs(dot(a, b)), 0.0, 1.0));
}

}  // namespace

ScaleTree build_scale_tree(const ConvexFamily& F, double epsilon) {
    if (F.empty()) throw std::runtime_error("build_scale_tree: empty family");
    ScaleTree tree;
    tree.delta = F.delta;
    double eps_min = std::log(2.0) / std::log(1.0 / F.delta);
    tree.epsilon = std::max(epsilon, eps_min);
    int J = std::max(1, (int)std::lround(1.0 / tree.epsilon));
    tree.levels = J;
    tree.epsilon = 1.0 / J;
    tree.rho.resize(J + 1);
    for (int j = 0; j <= J; ++j)
        tree.rho[j] = std::pow(F.delta, (double)j / J);
    tree.rho[0] = 1.0;
    tree.rho[J] = F.delta;

    std::size_t n = F.size();
    tree.level.assign(J + 1, {});
    tree.node_of_tube.assign(J + 1, std::vector<std::size_t>(n, 0));

    // root level: same clustering rule at scale 1
    for (int j = 0; j <= J; ++j) {
        double rho = tree.rho[j];
        auto& nodes = tree.level[j];
        RepIndex index(rho);
        std::vector<Vec3> rep_dir;
        for (std::size_t i = 0; i < n; ++i) {
            const OrientedBox& t = F[i];
            OrientedBox ti = thick_tube_box(t, rho);
            double best_angle = 1e30;
            double best_dist = 1e30;
            std::size_t best = SIZE_MAX;
            index.neighbors(t.long_axis(), [&](std::size_t r) {
                double ang = axis_angle(t.long_axis(), tree.level[j][r].box.long_axis());
                if (ang > rho) return;
                double dist = norm(t.center() - tree.level[j][r].box.center());
                if (dist > rho) return;
                if (!contains(ti, tree.level[j][r].box, 2.0)) return;
                if (ang < best_angle - 1e-15 ||
                    (std::fabs(ang - best_angle) <= 1e-15 && dist < best_dist)) {
                    best_angle = ang;
                    best_dist = dist;
                    best = r;
                }
            });
            if (best == SIZE_MAX) {
                ScaleTree::Node node;
                node.box = ti;
                node.tubes = {i};
                nodes.push_back(std::move(node));
                best = nodes.size() - 1;
                index.insert(t.long_axis(), best);
                rep_dir.push_back(t.long_axis());
            } else {
                nodes[best].tubes.push_back(i);
            }
            tree.node_of_tube[j][i] = best;
        }
    }
    // parent links: the node of the representative tube one level up
    for (int j = 1; j <= J; ++j)
        for (auto& node : tree.level[j])
            node.parent = tree.node_of_tube[j - 1][node.tubes.front()];
    for (auto& node : tree.level[0]) node.parent = 0;
    return tree;
}

UniformityReport check_uniform(const ScaleTree& tree, double slack) {
    UniformityReport rep;
    rep.slack = slack > 0 ? slack
                          : std::pow(1.0 / tree.delta, tree.epsilon);
    for (int j = 1; j <= tree.levels; ++j) {
        std::vector<std::size_t> counts;
        for (const auto& node : tree.level[j]) counts.push_back(node.tubes.size());
        if (counts.empty()) continue;
        std::sort(counts.begin(), counts.end());
        double median = (double)counts[counts.size() / 2];
        double ratio = (double)counts.back() / std::max(1.0, median);
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_level = j;
        }
    }
    rep.uniform = rep.worst_ratio <= rep.slack;
    return rep;
}

StickinessProfile check_sticky(const ScaleTree& tree, double epsilon_sticky) {
    StickinessProfile prof;
    prof.epsilon_sticky = epsilon_sticky;
    prof.sticky = true;
    double delta = tree.delta;
    for (int j = 1; j <= tree.levels; ++j) {
        StickinessProfile::LevelStats ls;
        ls.rho = tree.rho[j];
        std::vector<std::size_t> counts;
        for (const auto& node : tree.level[j]) counts.push_back(node.tubes.size());
        std::sort(counts.begin(), counts.end());
        ls.min_count = counts.front();
        ls.max_count = counts.back();
        ls.median_count = (double)counts[counts.size() / 2];
        double base = (ls.rho / delta) * (ls.rho / delta);
        ls.band_lo = std::pow(delta, epsilon_sticky) * base;
        ls.band_hi = std::pow(delta, -epsilon_sticky) * base;
        ls.in_band = (double)ls.min_count >= ls.band_lo &&
                     (double)ls.max_count <= ls.band_hi;
        ls.margin = std::min(std::log2((double)ls.min_count / ls.band_lo),
                             std::log2(ls.band_hi / (double)ls.max_count));
        prof.sticky = prof.sticky && ls.in_band;
        prof.levels.push_back(ls);
    }
    return prof;
}

ConvexFamily conditional_family(const ScaleTree& tree, const ConvexFamily& F, int level,
                                std::size_t node, int child_level) {
    // rescale by the dilated node box, which is guaranteed to contain the
    // node's tubes by the clustering join rule
    const OrientedBox& nb = tree.level[level][node].box;
    OrientedBox dilated = OrientedBox::make(
        nb.center(), nb.frame(),
        {std::min(kMaxExtent, 2 * nb.a()), std::min(kMaxExtent, 2 * nb.b()),
         std::min(kMaxExtent, 2 * nb.c())});
    AffineMap map = rescale_to_unit(dilated);
    ConvexFamily out;
    if (child_level >= tree.levels) {
        for (std::size_t t : tree.level[level][node].tubes)
            out.boxes.push_back(map.apply_box(F[t]));
    } else {
        for (const auto& child : tree.level[child_level]) {
            // ancestor chase up to `level`
            std::size_t anc = tree.node_of_tube[level][child.tubes.front()];
            if (anc == node) out.boxes.push_back(map.apply_box(child.box));
        }
    }
    out.delta = out.empty() ? tree.delta : out.min_extent();
    return out;
}

SubmultReport delta_max_submult_check(const ScaleTree& tree, const ConvexFamily& F,
                                      const std::vector<int>& scale_indices,
                                      const CandidatePolicy& policy, double tol,
                                      uint64_t seed) {
    SubmultReport rep;
    rep.tol = tol;
    rep.direct = delta_max(F, policy).value;
    rep.product = 1.0;
    for (std::size_t m = 1; m < scale_indices.size(); ++m) {
        int coarse = scale_indices[m - 1], fine = scale_indices[m];
        std::size_t nn = tree.level[coarse].size();
        Rng rng(mix_seed(seed, m));
        std::vector<std::size_t> sample;
        for (std::size_t s = 0; s < std::min<std::size_t>(6, nn); ++s) {
            std::size_t pick = rng.below(nn);
            if (std::find(sample.begin(), sample.end(), pick) == sample.end())
                sample.push_back(pick);
        }
        double worst = 0.0;
        for (std::size_t node : sample) {
            ConvexFamily cond = conditional_family(tree, F, coarse, node, fine);
            if (cond.empty()) continue;
            worst = std::max(worst,
                             delta_max(cond, CandidatePolicy::standard(cond.size())).value);
        }
        if (worst <= 0) worst = 1.0;
        rep.conditional.push_back(worst);
        rep.product *= worst;
    }
    rep.pass = rep.direct <= tol * rep.product;
    return rep;
}

std::vector<int> find_sticky_intermediate_scales(const ScaleTree& tree,
                                                 const ConvexFamily& F,
                                                 const CandidatePolicy& policy, double tol,
                                                 uint64_t seed) {
    std::vector<int> out;
    OrientedBox unit_cube = OrientedBox::make({0, 0, 0}, Mat3::identity(), {1, 1, 1});
    for (int j = 2; j <= tree.levels - 2; ++j) {
        const auto& nodes = tree.level[j];
        // parents sampled by descending count for a stable "typical" answer
        std::vector<std::size_t> order(nodes.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (nodes[a].tubes.size() != nodes[b].tubes.size())
                return nodes[a].tubes.size() > nodes[b].tubes.size();
            return a < b;
        });
        (void)seed;
        std::vector<double> cfs;
        for (std::size_t s = 0; s < std::min<std::size_t>(5, order.size()); ++s) {
            ConvexFamily cond = conditional_family(tree, F, j, order[s], tree.levels);
            if (cond.size() < 2) continue;
            try {
                cfs.push_back(frostman_cf(cond, unit_cube,
                                          CandidatePolicy::standard(cond.size())));
            } catch (const NotContained&) {
                cfs.push_back(1e30);
            }
        }
        if (cfs.empty()) continue;
        std::sort(cfs.begin(), cfs.end());
        if (cfs[cfs.size() / 2] <= tol) out.push_back(j);
    }
    return out;
}

namespace {

struct LevelHypotheses {
    bool use_cf;  // true: Frostman bound, false: delta_max bound
    double tol;
};

void check_level_hypotheses(const ScaleTree& tree, const ConvexFamily& F,
                            const CandidatePolicy& policy, const LevelHypotheses& hyp) {
    OrientedBox unit_cube = OrientedBox::make({0, 0, 0}, Mat3::identity(), {1, 1, 1});
    for (int m = 1; m <= tree.levels; ++m) {
        double ratio = tree.rho[m - 1] / tree.rho[m];
        double bound = hyp.tol * std::pow(ratio, tree.epsilon);
        const auto& parents = tree.level[m - 1];
        std::vector<double> vals;
        for (std::size_t node = 0; node < std::min<std::size_t>(parents.size(), 5); ++node) {
            ConvexFamily cond = conditional_family(tree, F, m - 1, node, m);
            if (cond.size() < 2) continue;
            if (hyp.use_cf) {
                try {
                    vals.push_back(frostman_cf(cond, unit_cube,
                                               CandidatePolicy::standard(cond.size())));
                } catch (const NotContained&) {
                    vals.push_back(1e30);
                }
            } else {
                vals.push_back(
                    delta_max(cond, CandidatePolicy::standard(cond.size())).value);
            }
        }
        if (vals.empty()) continue;
        std::sort(vals.begin(), vals.end());
        if (vals[vals.size() / 2] > bound)
            throw HypothesisViolated("level " + std::to_string(m) + ": median " +
                                     std::to_string(vals[vals.size() / 2]) + " > bound " +
                                     std::to_string(bound));
    }
    (void)policy;
}

}  // namespace

StickySelection extract_sticky_subset(const ScaleTree& tree, const ConvexFamily& F,
                                      const CandidatePolicy& policy, uint64_t seed,
                                      double tol) {
    check_level_hypotheses(tree, F, policy, {true, tol});
    int J = tree.levels;
    std::string last_issue;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Rng rng(mix_seed(seed, attempt));
        // level-1 nodes
        std::size_t target1 = (std::size_t)std::lround(1.0 / (tree.rho[1] * tree.rho[1]));
        std::vector<std::size_t> current;  // node ids at the current level
        {
            std::vector<std::size_t> ids(tree.level[1].size());
            std::iota(ids.begin(), ids.end(), 0);
            for (std::size_t i = ids.size(); i > 1; --i)
                std::swap(ids[i - 1], ids[rng.below(i)]);
            ids.resize(std::min(ids.size(), target1));
            current = ids;
        }
        bool shortfall = false;
        for (int m = 2; m <= J && !shortfall; ++m) {
            double ratio = tree.rho[m - 1] / tree.rho[m];
            std::size_t target = (std::size_t)std::lround(ratio * ratio);
            double floor_count = std::pow(ratio, 2.0 - tree.epsilon) / tol;
            std::vector<std::vector<std::size_t>> kids_of(tree.level[m - 1].size());
            for (std::size_t c = 0; c < tree.level[m].size(); ++c)
                kids_of[tree.level[m][c].parent].push_back(c);
            std::vector<std::size_t> next;
            for (std::size_t parent : current) {
                std::vector<std::size_t>& kids = kids_of[parent];
                if ((double)kids.size() < floor_count) {
                    last_issue = "level " + std::to_string(m) + " node has " +
                                 std::to_string(kids.size()) + " children, floor " +
                                 std::to_string(floor_count);
                    shortfall = true;
                    break;
                }
                for (std::size_t i = kids.size(); i > 1; --i)
                    std::swap(kids[i - 1], kids[rng.below(i)]);
                kids.resize(std::min(kids.size(), target));
                next.insert(next.end(), kids.begin(), kids.end());
            }
            current = next;
        }
        if (shortfall) continue;

        StickySelection sel;
        sel.seed_used = mix_seed(seed, attempt);
        for (std::size_t node : current)
            for (std::size_t t : tree.level[J][node].tubes) sel.tubes.push_back(t);
        std::sort(sel.tubes.begin(), sel.tubes.end());
        sel.family = subfamily(F, sel.tubes);
        if (sel.family.size() < 2) continue;
        ScaleTree rebuilt = build_scale_tree(sel.family, tree.epsilon);
        sel.profile = check_sticky(rebuilt, 3.0 * tree.epsilon);
        sel.delta_max_value = delta_max(sel.family, policy).value;
        if (sel.profile.sticky) return sel;
        last_issue = "rebuilt tree fails the 3-eps band";
    }
    throw SelectionShortfall(last_issue.empty() ? "selection failed after 8 seeds"
                                                : last_issue);
}

StickySelection embed_in_sticky_superset(const ScaleTree& tree, const ConvexFamily& F,
                                         const CandidatePolicy& policy, uint64_t seed,
                                         double tol) {
    check_level_hypotheses(tree, F, policy, {false, tol});
    int J = tree.levels;
    std::string last_issue;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Rng rng(mix_seed(seed, attempt, 0x99));
        ConvexFamily out = F;
        // synthetic axes per level: (direction, midpoint, parent chart)
        struct Synth {
            Vec3 dir, mid;
            int level;
        };
        std::vector<Synth> frontier;
        auto spawn_children = [&](const Vec3& pdir, const Vec3& pmid, int m,
                                  std::vector<std::pair<Vec3, Vec3>> existing,
                                  std::size_t deficit) -> std::vector<Synth> {
            std::vector<Synth> made;
            double rho_m = tree.rho[m];
            double cone = 0.42 * tree.rho[m - 1];
            Vec3 u = any_perp(pdir), v = cross(pdir, u);
            std::size_t budget = 400 * std::max<std::size_t>(deficit, 1);
            while (made.size() < deficit && budget-- > 0) {
                Vec3 d = normalized(pdir + u * rng.uniform(-cone, cone) +
                                    v * rng.uniform(-cone, cone));
                Vec3 mid = pmid + u * rng.uniform(-cone, cone) +
                           v * rng.uniform(-cone, cone);
                bool clash = false;
                for (const auto& [ed, em] : existing) {
                    if (axis_angle(d, ed) <= 1.1 * rho_m &&
                        norm(mid - em) <= 1.1 * rho_m) {
                        clash = true;
                        break;
                    }
                }
                if (clash) continue;
                existing.push_back({d, mid});
                made.push_back({d, mid, m});
            }
            if (made.size() < deficit)
                throw FillBudgetExceeded("level " + std::to_string(m) +
                                         " fill budget exhausted");
            return made;
        };

        try {
            // pass over real nodes, filling deficits level by level
            for (int m = 1; m <= J; ++m) {
                double ratio = tree.rho[m - 1] / tree.rho[m];
                std::size_t target = (std::size_t)std::lround(ratio * ratio);
                std::vector<std::vector<std::size_t>> kids_of(tree.level[m - 1].size());
                if (m < J)
                    for (std::size_t c = 0; c < tree.level[m].size(); ++c)
                        kids_of[tree.level[m][c].parent].push_back(c);
                for (std::size_t p = 0; p < tree.level[m - 1].size(); ++p) {
                    std::vector<std::pair<Vec3, Vec3>> existing;
                    std::size_t have = 0;
                    if (m < J) {
                        for (std::size_t c : kids_of[p]) {
                            const auto& child = tree.level[m][c];
                            existing.push_back({child.box.long_axis(),
                                                child.box.center()});
                            ++have;
                        }
                    } else {
                        for (std::size_t t : tree.level[m - 1][p].tubes) {
                            existing.push_back({F[t].long_axis(), F[t].center()});
                            ++have;
                        }
                    }
                    if (have >= target) continue;
                    const auto& pbox = tree.level[m - 1][p].box;
                    auto made = spawn_children(pbox.long_axis(), pbox.center(), m,
                                               existing, target - have);
                    for (auto& s : made) frontier.push_back(s);
                }
            }
            // expand synthetic nodes down to delta-tubes
            while (!frontier.empty()) {
                Synth s = frontier.back();
                frontier.pop_back();
                if (s.level >= J) {
                    out.boxes.push_back(OrientedBox::tube(s.mid, s.dir, F.delta));
                    continue;
                }
                int m = s.level + 1;
                double ratio = tree.rho[m - 1] / tree.rho[m];
                std::size_t target = (std::size_t)std::lround(ratio * ratio);
                auto made = spawn_children(s.dir, s.mid, m, {}, target);
                for (auto& child : made) frontier.push_back(child);
            }
        } catch (const FillBudgetExceeded& e) {
            last_issue = e.what();
            continue;
        }

        StickySelection sel;
        sel.seed_used = mix_seed(seed, attempt, 0x99);
        sel.family = out;
        sel.tubes.resize(F.size());
        std::iota(sel.tubes.begin(), sel.tubes.end(), 0);
        ScaleTree rebuilt = build_scale_tree(out, tree.epsilon);
        sel.profile = check_sticky(rebuilt, 3.0 * tree.epsilon);
        sel.delta_max_value = delta_max(out, CandidatePolicy::standard(out.size())).value;
        if (sel.profile.sticky) return sel;
        last_issue = "rebuilt tree fails the 3-eps band";
    }
    if (!last_issue.empty() && last_issue.find("budget") != std::string::npos)
        throw FillBudgetExceeded(last_issue);
    throw SelectionShortfall(last_issue.empty() ? "embedding failed after 8 seeds"
                                                : last_issue);
}

}  // namespace klab
