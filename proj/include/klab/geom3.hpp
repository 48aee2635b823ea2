#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "klab/vec3.hpp"

namespace klab {

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Degenerate : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShrinkNotAllowed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kFrameTol = 1e-9;     // orthonormality tolerance
constexpr double kCornerTol = 1e-9;    // absolute slack in corner membership tests
constexpr double kMaxExtent = 4.0;     // ambient domain is the ball B(0,2)
constexpr double kMembershipDilation = 1.05;  // numerical slack for W[K] membership

// Oriented rectangular solid in R^3. Frame rows e1,e2,e3 are orthonormal and
// pair with extents a <= b <= c; construction re-sorts extents ascending and
// permutes the frame to match, so a single code path serves tubes, planks,
// slabs and balls.
class OrientedBox {
  public:
    OrientedBox() = default;

    // Validates orthonormality and extent bounds; canonicalizes the order.
    static OrientedBox make(const Vec3& center, const Mat3& frame, const Vec3& extents);

    // Shape constructors (balls are cubes of side 2r; tubes have square
    // cross-section).
    static OrientedBox tube(const Vec3& center, const Vec3& dir, double thickness,
                            double length = 1.0);
    static OrientedBox slab(const Vec3& center, const Vec3& normal, double thickness,
                            double side = 1.0);
    static OrientedBox plank(const Vec3& center, const Vec3& normal, const Vec3& long_dir,
                             double a, double b, double c = 1.0);
    static OrientedBox ball(const Vec3& center, double radius);

    const Vec3& center() const { return center_; }
    const Mat3& frame() const { return frame_; }
    Vec3 axis(int i) const { return frame_.row[i]; }
    Vec3 long_axis() const { return frame_.row[2]; }
    Vec3 short_axis() const { return frame_.row[0]; }
    double a() const { return ext_.x; }
    double b() const { return ext_.y; }
    double c() const { return ext_.z; }
    Vec3 extents() const { return ext_; }
    double extent(int i) const { return (&ext_.x)[i]; }
    double volume() const { return ext_.x * ext_.y * ext_.z; }
    // radius of the inscribed sphere when the box is a cube
    double ball_radius() const { return ext_.x / 2.0; }
    bool is_cube(double rel = 1e-9) const;

    Vec3 to_local(const Vec3& p) const { return frame_ * (p - center_); }
    Vec3 from_local(const Vec3& q) const {
        return center_ + frame_.row[0] * q.x + frame_.row[1] * q.y + frame_.row[2] * q.z;
    }
    bool contains_point(const Vec3& p, double dilation = 1.0) const;
    std::array<Vec3, 8> corners() const;
    // Half-width of the box's support interval along a world direction.
    double support_halfwidth(const Vec3& dir) const;

  private:
    Vec3 center_{};
    Mat3 frame_{};
    Vec3 ext_{1.0, 1.0, 1.0};
};

enum class AngleMode { Tube, Plank, Slab };

// true iff all 8 corners of `inner` lie in the dilation-scaled copy of
// `outer` (same center and frame, extents multiplied by `dilation`).
bool contains(const OrientedBox& inner, const OrientedBox& outer, double dilation = 1.0);

// Tube mode: angle between the long axes. Plank/slab mode: principal angle
// between the 2-planes spanned by (e2,e3), i.e. the angle between the short
// axes. Result in [0, pi/2].
double angle(const OrientedBox& x, const OrientedBox& y, AngleMode mode);

// Invertible affine map q = linear * p + offset.
class AffineMap {
  public:
    AffineMap() = default;
    AffineMap(const Mat3& linear, const Vec3& offset);

    const Mat3& linear() const { return linear_; }
    const Vec3& offset() const { return offset_; }
    double det() const { return det_; }
    double condition_number() const { return cond_; }

    Vec3 apply(const Vec3& p) const { return linear_ * p + offset_; }
    AffineMap inverse() const;
    AffineMap compose_after(const AffineMap& first) const;  // this(first(p))

    // Image of a box: the inscribed ellipsoid maps to an ellipsoid whose
    // principal box we return. Volume scales by |det| exactly; boxes whose
    // frame aligns with the map's stretch directions map exactly.
    OrientedBox apply_box(const OrientedBox& box) const;

  private:
    Mat3 linear_{};
    Vec3 offset_{};
    double det_ = 1.0;
    double cond_ = 1.0;
};

// Affine map sending K onto the axis-aligned unit cube centered at the
// origin (each extent mapped to length 1).
AffineMap rescale_to_unit(const OrientedBox& K);

// Clip a tube's axis segment to the inscribed sphere of the ball-box B;
// returns the sub-tube of T covering the chord, or nullopt when the axis
// misses the sphere.
std::optional<OrientedBox> intersect_ball(const OrientedBox& T, const OrientedBox& B);

// Same center and frame, shortest extent replaced by new_a >= a.
OrientedBox thicken(const OrientedBox& P, double new_a);

}  // namespace klab
