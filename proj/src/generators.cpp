#include "klab/generators.hpp"

#include <algorithm>
#include <cmath>

namespace klab {

namespace {

constexpr double kGolden = 2.39996322972865332;  // golden angle

// n quasi-uniform directions on the upper hemisphere
std::vector<Vec3> fibonacci_hemisphere(std::size_t n) {
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double z = (i + 0.5) / n;  // uniform in (0,1) keeps z bounded away from 0
        double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = kGolden * (double)i;
        out.push_back({rxy * std::cos(phi), rxy * std::sin(phi), z});
    }
    return out;
}

// place a unit tube with direction d and perpendicular offset inside the
// Euclidean unit ball
Vec3 random_center_in_ball(const Vec3& d, Rng& rng, double pad = 0.02) {
    Vec3 u = any_perp(d), v = cross(d, u);
    double rmax = std::sqrt(3.0) / 2 - pad;
    double rr = rmax * std::sqrt(rng.uniform());
    double th = rng.uniform(0, 2 * M_PI);
    Vec3 p = u * (rr * std::cos(th)) + v * (rr * std::sin(th));
    double slide_max = std::sqrt(std::max(0.0, (1 - pad) * (1 - pad) - rr * rr)) - 0.5;
    if (slide_max > 0) p += d * rng.uniform(-slide_max, slide_max);
    return p;
}

uint32_t bit_reverse(uint32_t x, int bits) {
    uint32_t r = 0;
    for (int i = 0; i < bits; ++i)
        if (x & (1u << i)) r |= 1u << (bits - 1 - i);
    return r;
}

}  // namespace

GeneratedFamily gen_direction_separated(double delta, uint64_t seed) {
    GeneratedFamily out;
    out.family.delta = delta;
    std::size_t n = (std::size_t)std::lround(1.0 / (delta * delta));
    auto dirs = fibonacci_hemisphere(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        out.family.boxes.push_back(
            OrientedBox::tube(random_center_in_ball(dirs[i], rng), dirs[i], delta));
        out.direction_index.push_back((int)i);
    }
    return out;
}

GeneratedFamily gen_all_tubes(double delta) {
    GeneratedFamily out;
    out.family.delta = delta;
    std::size_t ndir = (std::size_t)std::lround(1.5 / (delta * delta));
    auto dirs = fibonacci_hemisphere(ndir);
    double rmax = std::sqrt(3.0) / 2 - delta;
    for (std::size_t i = 0; i < ndir; ++i) {
        Vec3 u = any_perp(dirs[i]), v = cross(dirs[i], u);
        int span = (int)std::floor(rmax / delta);
        for (int a = -span; a <= span; ++a)
            for (int b = -span; b <= span; ++b) {
                double x = a * delta, y = b * delta;
                if (x * x + y * y > rmax * rmax) continue;
                out.family.boxes.push_back(
                    OrientedBox::tube(u * x + v * y, dirs[i], delta));
                out.direction_index.push_back((int)i);
            }
    }
    return out;
}

GeneratedFamily gen_clustered(double delta, const OrientedBox& K) {
    if (K.a() >= 2.0) return gen_all_tubes(delta);
    GeneratedFamily out;
    out.family.delta = delta;
    out.region = K;
    double L = 0.92 * K.c();
    Vec3 axis = K.long_axis(), e1 = K.axis(0), e2 = K.axis(1);
    // tilt budgets keep the tube inside K; net spacings keep the family
    // essentially distinct
    double t1max = 0.4 * std::max(0.0, K.a() - delta) / L;
    double t2max = 0.4 * std::max(0.0, K.b() - delta) / L;
    double tilt_step = 2.0 * delta / L;
    double off_step = 1.2 * delta;
    auto steps = [](double lim, double step) {
        return std::max<long>(0, (long)std::floor(lim / step));
    };
    long n1 = steps(t1max, tilt_step), n2 = steps(t2max, tilt_step);
    for (long i = -n1; i <= n1; ++i)
        for (long j = -n2; j <= n2; ++j) {
            Vec3 d = normalized(axis + e1 * (i * tilt_step) + e2 * (j * tilt_step));
            double o1max = 0.45 * std::max(0.0, K.a() - delta - std::fabs(i) * tilt_step * L);
            double o2max = 0.45 * std::max(0.0, K.b() - delta - std::fabs(j) * tilt_step * L);
            long m1 = steps(o1max, off_step), m2 = steps(o2max, off_step);
            for (long p = -m1; p <= m1; ++p)
                for (long q = -m2; q <= m2; ++q) {
                    Vec3 c = K.center() + e1 * (p * off_step) + e2 * (q * off_step);
                    out.family.boxes.push_back(OrientedBox::tube(c, d, delta, L));
                    if (out.family.size() >= 300000) return out;
                }
        }
    return out;
}

GeneratedFamily gen_sticky_cantor(double delta, double epsilon, uint64_t seed,
                                  int branching_boost) {
    GeneratedFamily out;
    out.family.delta = delta;
    int L = (int)std::lround(std::log2(1.0 / delta));
    int J = std::max(1, (int)std::lround(1.0 / epsilon));
    while (L % J) ++J;  // scales must land on dyadic levels
    int kexp = L / J;
    int k = 1 << kexp;  // rho_{j-1} / rho_j
    std::vector<double> rho(J + 1);
    for (int j = 0; j <= J; ++j) rho[j] = std::pow(2.0, -(double)j * kexp);

    struct NodeSpec {
        double cx, cy;   // direction chart coords
        std::vector<int> path;
    };
    std::vector<NodeSpec> level = {{0.0, 0.0, {}}};
    out.level_node_count.push_back(1);
    Rng rng(seed);
    double shear = 0.05;

    for (int j = 1; j <= J; ++j) {
        // grid spacing shrinks with depth so nearest-representative
        // clustering assigns leaves to their own ancestor
        double sigma = 1.05 * std::pow(1.0 / 0.8, (double)(J - j));
        double spacing = sigma * rho[j];
        int per_axis_x = k, per_axis_y = k;
        long target = (long)k * k * branching_boost;
        while ((long)per_axis_x * per_axis_y < target) ++per_axis_x;
        if (branching_boost > 1) spacing = 1.05 * rho[j];
        std::vector<NodeSpec> next;
        std::size_t node_counter = 0;
        for (const auto& parent : level) {
            // children sorted central-first so the first emitted leaf of a
            // node becomes its cluster representative
            struct Kid {
                double dx, dy, rank;
            };
            std::vector<Kid> kids;
            long made = 0;
            for (int a = 0; a < per_axis_x && made < target; ++a)
                for (int b = 0; b < per_axis_y && made < target; ++b, ++made) {
                    double dx = (a - (per_axis_x - 1) / 2.0) * spacing;
                    double dy = (b - (per_axis_y - 1) / 2.0) * spacing;
                    kids.push_back({dx, dy, std::fabs(dx) + std::fabs(dy)});
                }
            std::stable_sort(kids.begin(), kids.end(),
                             [](const Kid& p, const Kid& q) { return p.rank < q.rank; });
            for (const auto& kid : kids) {
                NodeSpec child;
                child.cx = parent.cx + kid.dx;
                child.cy = parent.cy + kid.dy;
                child.path = parent.path;
                child.path.push_back((int)node_counter);
                next.push_back(child);
                ++node_counter;
            }
        }
        level = std::move(next);
        out.level_node_count.push_back(level.size());
        out.branching = (int)(k * (long)k * branching_boost);
    }

    for (const auto& leaf : level) {
        Vec3 d = normalized({leaf.cx, leaf.cy, 1.0});
        Vec3 mid{shear * leaf.cx, shear * leaf.cy, 0.0};
        out.family.boxes.push_back(OrientedBox::tube(mid, d, delta));
        out.node_path.push_back(leaf.path);
    }
    return out;
}

GeneratedFamily gen_frostman_random(double delta, std::size_t N, uint64_t seed) {
    GeneratedFamily out;
    out.family.delta = delta;
    Rng rng(seed);
    for (std::size_t i = 0; i < N; ++i) {
        double z = rng.uniform(0.05, 1.0);
        double phi = rng.uniform(0, 2 * M_PI);
        double rxy = std::sqrt(1 - z * z);
        Vec3 d{rxy * std::cos(phi), rxy * std::sin(phi), z};
        out.family.boxes.push_back(
            OrientedBox::tube(random_center_in_ball(d, rng), d, delta));
    }
    return out;
}

GeneratedFamily gen_slab_concentrated(double delta, double theta, uint64_t seed) {
    GeneratedFamily out;
    out.family.delta = delta;
    out.theta = theta;
    out.region = OrientedBox::slab({0, 0, 0}, {1, 0, 0}, theta);
    Rng rng(seed);
    double dphi = 1.4 * delta;
    long ndir = (long)std::floor(0.8 / dphi);
    double xmax = 0.45 * std::max(0.0, theta - delta);
    long nx = std::max<long>(1, (long)std::floor(xmax / (1.2 * delta)));
    for (long i = -ndir / 2; i <= ndir / 2; ++i) {
        Vec3 d = normalized({0.0, std::sin(i * dphi), std::cos(i * dphi)});
        for (long p = -nx; p <= nx; ++p) {
            double x = p * 1.2 * delta * 0.9;
            double y = rng.uniform(-0.1, 0.1);
            out.family.boxes.push_back(OrientedBox::tube({x, y, 0}, d, delta));
        }
    }
    return out;
}

GeneratedFamily gen_plank_family(double a, double b, std::size_t count, uint64_t seed) {
    GeneratedFamily out;
    out.family.delta = a;
    Rng rng(seed);
    auto dirs = fibonacci_hemisphere(count);
    for (std::size_t i = 0; i < count; ++i) {
        Vec3 d = dirs[i];
        Vec3 u = any_perp(d), v = cross(d, u);
        double rot = rng.uniform(0, 2 * M_PI);
        Vec3 normal = u * std::cos(rot) + v * std::sin(rot);
        Vec3 c = random_center_in_ball(d, rng);
        out.family.boxes.push_back(OrientedBox::plank(c, normal, d, a, b));
        out.direction_index.push_back((int)i);
    }
    return out;
}

GeneratedFamily gen_slab_family_in_slab(double delta, double theta, uint64_t seed) {
    GeneratedFamily out;
    out.family.delta = delta;
    out.theta = theta;
    out.region = OrientedBox::slab({0, 0, 0}, {1, 0, 0}, theta);
    std::size_t n = (std::size_t)std::lround(theta / delta);
    int bits = std::max(1, (int)std::ceil(std::log2((double)n)));
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        double tilt = theta * (0.25 + 0.25 * rng.uniform());
        double psi = kGolden * (double)i;
        Vec3 normal{std::cos(tilt), std::sin(tilt) * std::cos(psi),
                    std::sin(tilt) * std::sin(psi)};
        double off = 0.15 * theta *
                     (2.0 * bit_reverse((uint32_t)i, bits) / std::pow(2.0, bits) - 1.0);
        out.family.boxes.push_back(
            OrientedBox::slab({off, 0, 0}, normal, delta, 0.9));
    }
    return out;
}

GeneratedFamily gen_through_ball(double delta, const Vec3& center, double r, uint64_t seed) {
    GeneratedFamily out;
    out.family.delta = delta;
    out.region = OrientedBox::ball(center, r);
    Rng rng(seed);
    double ratio = r / delta;
    std::size_t ndir = std::min<std::size_t>(160, (std::size_t)(0.5 * ratio * ratio));
    auto dirs = fibonacci_hemisphere(std::max<std::size_t>(8, ndir));
    for (const Vec3& d : dirs) {
        Vec3 u = any_perp(d), v = cross(d, u);
        double omax = 0.85 * r;
        long span = (long)std::floor(omax / (2.0 * delta));
        for (long a = -span; a <= span; ++a)
            for (long b = -span; b <= span; ++b) {
                double x = a * 2.0 * delta, y = b * 2.0 * delta;
                if (x * x + y * y > omax * omax) continue;
                Vec3 mid = center + u * x + v * y;
                mid += d * rng.uniform(-0.05, 0.05);
                out.family.boxes.push_back(OrientedBox::tube(mid, d, delta));
            }
    }
    return out;
}

GeneratedFamily gen_spray(double delta, double rho, uint64_t seed) {
    GeneratedFamily out;
    out.family.delta = delta;
    std::size_t n = std::max<std::size_t>(4, (std::size_t)std::lround(0.5 / (rho * rho)));
    auto dirs = fibonacci_hemisphere(n);
    Rng rng(seed);
    for (const Vec3& d : dirs) {
        Vec3 u = any_perp(d), v = cross(d, u);
        Vec3 c = u * rng.uniform(-rho / 8, rho / 8) + v * rng.uniform(-rho / 8, rho / 8);
        out.family.boxes.push_back(OrientedBox::tube(c, d, delta));
    }
    return out;
}

GeneratedFamily gen_cell_clustered(double delta, double r, double a_factor, double b_factor,
                                   std::size_t cells, uint64_t seed) {
    GeneratedFamily out;
    out.family.delta = delta;
    out.region = OrientedBox::ball({0, 0, 0}, r);
    double a = a_factor * delta, b = b_factor * delta, L = 1.0;
    auto dirs = fibonacci_hemisphere(std::max<std::size_t>(cells, 2));
    Rng rng(seed);
    double span = 2.0 * r;  // clipped tubes have length ~2r inside the ball
    for (std::size_t m = 0; m < cells; ++m) {
        Vec3 axis = dirs[m];
        Vec3 u = any_perp(axis), v = cross(axis, u);
        double rot = rng.uniform(0, 2 * M_PI);
        Vec3 e1 = u * std::cos(rot) + v * std::sin(rot);
        Vec3 e2 = cross(axis, e1);
        // tilt and offset nets inside the a x b x 2r cell
        double t1max = 0.35 * (a - delta) / span, t2max = 0.35 * (b - delta) / span;
        double tstep = 1.6 * delta / span;
        long n1 = (long)std::floor(t1max / tstep), n2 = (long)std::floor(t2max / tstep);
        double ostep = 1.25 * delta;
        long m1 = (long)std::floor(0.4 * (a - delta) / ostep);
        long m2 = (long)std::floor(0.4 * (b - delta) / ostep);
        for (long i = -n1; i <= n1; ++i)
            for (long j = -n2; j <= n2; ++j) {
                Vec3 d = normalized(axis + e1 * (i * tstep) + e2 * (j * tstep));
                for (long p = -m1; p <= m1; ++p)
                    for (long q = -m2; q <= m2; ++q) {
                        Vec3 c = e1 * (p * ostep) + e2 * (q * ostep);
                        out.family.boxes.push_back(OrientedBox::tube(c, d, delta, L));
                        out.direction_index.push_back((int)m);
                    }
            }
    }
    return out;
}

GeneratedFamily gen_planar_fan(double delta, double r, double b, uint64_t seed) {
    GeneratedFamily out;
    out.family.delta = delta;
    out.region = OrientedBox::plank({0, 0, 0}, {1, 0, 0}, {0, 0, 1}, delta, b, 2 * r);
    Rng rng(seed);
    double span = 2.0 * r;
    double t2max = 0.35 * (b - delta) / span;
    double tstep = 1.6 * delta / span;
    long n2 = (long)std::floor(t2max / tstep);
    double ostep = 1.25 * delta;
    long m2 = (long)std::floor(0.4 * (b - delta) / ostep);
    for (long j = -n2; j <= n2; ++j) {
        Vec3 d = normalized(Vec3{0, j * tstep, 1.0});
        for (long q = -m2; q <= m2; ++q) {
            Vec3 c{rng.uniform(-delta / 8, delta / 8), q * ostep, 0};
            out.family.boxes.push_back(OrientedBox::tube(c, d, delta));
        }
    }
    return out;
}

GeneratedFamily gen_tangential_planks(double delta, double r, double b, std::size_t wafers,
                                      uint64_t seed) {
    GeneratedFamily out;
    out.family.delta = delta;
    Rng rng(seed);
    double span = 2.0 * r;
    double dtheta = 1.3 * delta / b;  // mutual wafer plane angle ~ delta/b
    for (std::size_t w = 0; w < wafers; ++w) {
        double phi = ((double)w - (wafers - 1) / 2.0) * dtheta;
        Vec3 normal{std::cos(phi), std::sin(phi), 0};
        Vec3 in_plane = {-std::sin(phi), std::cos(phi), 0};
        double xoff = ((double)w - (wafers - 1) / 2.0) * 1.4 * delta;
        double t2max = 0.35 * (b - delta) / span;
        double tstep = 1.6 * delta / span;
        long n2 = (long)std::floor(t2max / tstep);
        double ostep = 1.25 * delta;
        long m2 = (long)std::floor(0.4 * (b - delta) / ostep);
        for (long j = -n2; j <= n2; ++j) {
            Vec3 d = normalized(Vec3{0, 0, 1} + in_plane * (j * tstep));
            for (long q = -m2; q <= m2; ++q) {
                Vec3 c = normal * xoff + in_plane * (q * ostep);
                c += Vec3{0, 0, rng.uniform(-0.02, 0.02)};
                out.family.boxes.push_back(OrientedBox::tube(c, d, delta));
                out.direction_index.push_back((int)w);
            }
        }
    }
    return out;
}

}  // namespace klab
