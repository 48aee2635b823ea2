#include "klab/geom3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace klab {

SymEigen3 sym_eigen3(const Mat3& m) {
    // cyclic Jacobi on a symmetric matrix; a handful of sweeps is plenty at
    // 3x3
    double a[3][3] = {{m.row[0].x, m.row[0].y, m.row[0].z},
                      {m.row[1].x, m.row[1].y, m.row[1].z},
                      {m.row[2].x, m.row[2].y, m.row[2].z}};
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if (off < 1e-30) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::fabs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    int order[3] = {0, 1, 2};
    double eig[3] = {a[0][0], a[1][1], a[2][2]};
    std::sort(order, order + 3, [&](int i, int j) { return eig[i] < eig[j]; });
    SymEigen3 out;
    for (int i = 0; i < 3; ++i) {
        int k = order[i];
        out.value[i] = eig[k];
        out.vector.row[i] = Vec3{v[0][k], v[1][k], v[2][k]};
    }
    return out;
}

Svd3 svd3_left(const Mat3& m) {
    SymEigen3 e = sym_eigen3(m * m.transpose());
    Svd3 out;
    for (int i = 0; i < 3; ++i) {
        out.sigma[i] = std::sqrt(std::max(0.0, e.value[i]));
        out.u.row[i] = e.vector.row[i];
    }
    return out;
}

static void validate_frame(const Mat3& f) {
    for (int i = 0; i < 3; ++i) {
        if (std::fabs(norm(f.row[i]) - 1.0) > kFrameTol)
            throw Degenerate("frame row is not unit length");
        for (int j = i + 1; j < 3; ++j)
            if (std::fabs(dot(f.row[i], f.row[j])) > kFrameTol)
                throw Degenerate("frame rows are not orthogonal");
    }
}

OrientedBox OrientedBox::make(const Vec3& center, const Mat3& frame, const Vec3& extents) {
    validate_frame(frame);
    double e[3] = {extents.x, extents.y, extents.z};
    int order[3] = {0, 1, 2};
    std::stable_sort(order, order + 3, [&](int i, int j) { return e[i] < e[j]; });
    OrientedBox box;
    box.center_ = center;
    for (int i = 0; i < 3; ++i) {
        double v = e[order[i]];
        if (!(v > 0.0)) throw Degenerate("extent must be positive");
        if (v > kMaxExtent * (1.0 + kFrameTol)) throw Degenerate("extent exceeds ambient domain");
        (&box.ext_.x)[i] = v;
        box.frame_.row[i] = frame.row[order[i]];
    }
    return box;
}

OrientedBox OrientedBox::tube(const Vec3& center, const Vec3& dir, double thickness,
                              double length) {
    Vec3 e3 = normalized(dir);
    Vec3 e1 = any_perp(e3);
    Vec3 e2 = cross(e3, e1);
    return make(center, Mat3::from_rows(e1, e2, e3), {thickness, thickness, length});
}

OrientedBox OrientedBox::slab(const Vec3& center, const Vec3& normal, double thickness,
                              double side) {
    Vec3 e1 = normalized(normal);
    Vec3 e2 = any_perp(e1);
    Vec3 e3 = cross(e1, e2);
    return make(center, Mat3::from_rows(e1, e2, e3), {thickness, side, side});
}

OrientedBox OrientedBox::plank(const Vec3& center, const Vec3& normal, const Vec3& long_dir,
                               double a, double b, double c) {
    Vec3 e1 = normalized(normal);
    Vec3 e3 = normalized(long_dir - e1 * dot(long_dir, e1));
    Vec3 e2 = cross(e3, e1);
    return make(center, Mat3::from_rows(e1, e2, e3), {a, b, c});
}

OrientedBox OrientedBox::ball(const Vec3& center, double radius) {
    return make(center, Mat3::identity(), {2 * radius, 2 * radius, 2 * radius});
}

bool OrientedBox::is_cube(double rel) const {
    return ext_.z - ext_.x <= rel * ext_.z;
}

bool OrientedBox::contains_point(const Vec3& p, double dilation) const {
    Vec3 q = to_local(p);
    return std::fabs(q.x) <= dilation * ext_.x / 2 + kCornerTol &&
           std::fabs(q.y) <= dilation * ext_.y / 2 + kCornerTol &&
           std::fabs(q.z) <= dilation * ext_.z / 2 + kCornerTol;
}

std::array<Vec3, 8> OrientedBox::corners() const {
    std::array<Vec3, 8> out;
    Vec3 u = frame_.row[0] * (ext_.x / 2);
    Vec3 v = frame_.row[1] * (ext_.y / 2);
    Vec3 w = frame_.row[2] * (ext_.z / 2);
    int k = 0;
    for (int sx : {-1, 1})
        for (int sy : {-1, 1})
            for (int sz : {-1, 1}) out[k++] = center_ + u * sx + v * sy + w * sz;
    return out;
}

double OrientedBox::support_halfwidth(const Vec3& dir) const {
    return (std::fabs(dot(dir, frame_.row[0])) * ext_.x +
            std::fabs(dot(dir, frame_.row[1])) * ext_.y +
            std::fabs(dot(dir, frame_.row[2])) * ext_.z) / 2.0;
}

bool contains(const OrientedBox& inner, const OrientedBox& outer, double dilation) {
    for (const Vec3& p : inner.corners())
        if (!outer.contains_point(p, dilation)) return false;
    return true;
}

static double clamped_acos(double c) {
    return std::acos(std::clamp(c, -1.0, 1.0));
}

double angle(const OrientedBox& x, const OrientedBox& y, AngleMode mode) {
    if (mode == AngleMode::Tube) {
        if (x.b() > 4.0 * x.a() || y.b() > 4.0 * y.a())
            throw ShapeMismatch("tube angle requested for a box with b/a > 4");
        return clamped_acos(std::fabs(dot(x.long_axis(), y.long_axis())));
    }
    // The 2-plane spanned by (e2,e3) has normal e1; the principal angle
    // between the planes is the angle between the normals.
    return clamped_acos(std::fabs(dot(x.short_axis(), y.short_axis())));
}

AffineMap::AffineMap(const Mat3& linear, const Vec3& offset)
    : linear_(linear), offset_(offset) {
    det_ = linear_.det();
    if (det_ == 0.0) throw Degenerate("affine map is singular");
    Svd3 s = svd3_left(linear_);
    cond_ = s.sigma[0] > 0 ? s.sigma[2] / s.sigma[0] : std::numeric_limits<double>::infinity();
}

AffineMap AffineMap::inverse() const {
    Mat3 inv = linear_.inverse();
    return AffineMap(inv, -(inv * offset_));
}

AffineMap AffineMap::compose_after(const AffineMap& first) const {
    return AffineMap(linear_ * first.linear_, linear_ * first.offset_ + offset_);
}

OrientedBox AffineMap::apply_box(const OrientedBox& box) const {
    // edge matrix columns are extent_i * e_i; left singular vectors of the
    // mapped edges give the principal axes of the image ellipsoid
    Mat3 edges_t;  // row i = extent_i * e_i (transpose of the column form)
    for (int i = 0; i < 3; ++i) edges_t.row[i] = box.axis(i) * box.extent(i);
    Mat3 mapped = (linear_ * edges_t.transpose());
    Svd3 s = svd3_left(mapped);
    Vec3 ext{s.sigma[0], s.sigma[1], s.sigma[2]};
    Mat3 frame = s.u;
    // guard singular-vector degeneracy: re-orthonormalize
    frame.row[0] = normalized(frame.row[0]);
    frame.row[1] = normalized(frame.row[1] - frame.row[0] * dot(frame.row[1], frame.row[0]));
    frame.row[2] = cross(frame.row[0], frame.row[1]);
    return OrientedBox::make(apply(box.center()), frame, ext);
}

AffineMap rescale_to_unit(const OrientedBox& K) {
    if (K.a() < 1e-12) throw Degenerate("box extent below 1e-12");
    Mat3 lin = Mat3::diag(1.0 / K.a(), 1.0 / K.b(), 1.0 / K.c()) * K.frame();
    return AffineMap(lin, -(lin * K.center()));
}

std::optional<OrientedBox> intersect_ball(const OrientedBox& T, const OrientedBox& B) {
    double r = B.ball_radius();
    Vec3 d = T.long_axis();
    Vec3 m = T.center() - B.center();
    // |m + t d|^2 = r^2
    double b = dot(m, d);
    double c0 = norm2(m) - r * r;
    double disc = b * b - c0;
    if (disc <= 0.0) return std::nullopt;
    double sq = std::sqrt(disc);
    double t0 = std::max(-b - sq, -T.c() / 2);
    double t1 = std::min(-b + sq, T.c() / 2);
    double len = t1 - t0;
    if (len < 1e-12) return std::nullopt;
    Vec3 center = T.center() + d * ((t0 + t1) / 2);
    return OrientedBox::make(center, T.frame(), {T.a(), T.b(), len});
}

OrientedBox thicken(const OrientedBox& P, double new_a) {
    if (new_a < P.a() * (1.0 - 1e-12))
        throw ShrinkNotAllowed("thicken target below current shortest extent");
    return OrientedBox::make(P.center(), P.frame(), {std::max(new_a, P.a()), P.b(), P.c()});
}

}  // namespace klab
