#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "klab/geom3.hpp"
#include "oracles.hpp"

using namespace klab;

TEST_CASE("construction sorts extents ascending with frame permutation") {
    Rng rng(11);
    for (int t = 0; t < 64; ++t) {
        OrientedBox b = oracle::random_box(rng);
        CHECK(b.a() <= b.b());
        CHECK(b.b() <= b.c());
        CHECK(b.volume() == doctest::Approx(b.a() * b.b() * b.c()).epsilon(1e-15));
        // frame still orthonormal
        for (int i = 0; i < 3; ++i) {
            CHECK(norm(b.axis(i)) == doctest::Approx(1.0).epsilon(1e-12));
            for (int j = i + 1; j < 3; ++j)
                CHECK(std::fabs(dot(b.axis(i), b.axis(j))) < 1e-12);
        }
    }
    CHECK_THROWS_AS(OrientedBox::make({0, 0, 0}, Mat3::identity(), {0.0, 1, 1}), Degenerate);
    CHECK_THROWS_AS(OrientedBox::make({0, 0, 0}, Mat3::identity(), {5.0, 1, 1}), Degenerate);
}

TEST_CASE("contains: reflexivity, unit tube in unit ball, dilation cases") {
    OrientedBox W = oracle::random_box(*new Rng(3));
    CHECK(contains(W, W, 1.0));

    OrientedBox tube = OrientedBox::tube({0, 0, 0}, {0, 0, 1}, 1.0 / 8);
    OrientedBox ball = OrientedBox::ball({0, 0, 0}, 1.0);
    CHECK(contains(tube, ball, 1.0));

    // perpendicular offsets of a congruent tube: implementation must agree
    // with the corner oracle at every offset and dilation; an offset of
    // 0.4 delta sits inside the dilation-2 copy but outside the original
    double d = 1.0 / 8;
    OrientedBox t1 = OrientedBox::tube({0, 0, 0}, {0, 0, 1}, d);
    for (double off : {0.25 * d, 0.4 * d, 0.75 * d, 1.5 * d, 3.0 * d}) {
        OrientedBox t2 = OrientedBox::tube({off, 0, 0}, {0, 0, 1}, d);
        CHECK(contains(t2, t1, 2.0) == oracle::corner_containment(t2, t1, 2.0));
        CHECK(contains(t2, t1, 1.0) == oracle::corner_containment(t2, t1, 1.0));
    }
    OrientedBox near = OrientedBox::tube({0.4 * d, 0, 0}, {0, 0, 1}, d);
    CHECK(contains(near, t1, 2.0));
    CHECK_FALSE(contains(near, t1, 1.0));
}

TEST_CASE("contains is transitive at dilation 1") {
    Rng rng(17);
    int checked = 0;
    for (int t = 0; t < 400 && checked < 40; ++t) {
        OrientedBox a = oracle::random_box(rng, 0.02, 0.3);
        OrientedBox b = oracle::random_box(rng, 0.3, 0.9);
        OrientedBox c = oracle::random_box(rng, 0.9, 2.0);
        if (contains(a, b, 1.0) && contains(b, c, 1.0)) {
            CHECK(contains(a, c, 1.0));
            ++checked;
        }
    }
    // containment chains occur: centers cluster near the origin
    CHECK(checked > 0);
}

TEST_CASE("angle: self, planar rotation, random pairs vs oracle, symmetry") {
    OrientedBox t = OrientedBox::tube({0, 0, 0}, {0, 0, 1}, 1.0 / 16);
    CHECK(angle(t, t, AngleMode::Tube) == doctest::Approx(0.0).epsilon(1e-12));

    // two planks sharing the long axis with width axes 30 degrees apart
    double c30 = std::cos(M_PI / 6), s30 = std::sin(M_PI / 6);
    OrientedBox p1 = OrientedBox::plank({0, 0, 0}, {1, 0, 0}, {0, 0, 1}, 0.01, 0.2);
    OrientedBox p2 = OrientedBox::plank({0, 0, 0}, {c30, s30, 0}, {0, 0, 1}, 0.01, 0.2);
    CHECK(angle(p1, p2, AngleMode::Plank) == doctest::Approx(M_PI / 6).epsilon(1e-9));

    Rng rng(23);
    for (int i = 0; i < 64; ++i) {
        OrientedBox a = oracle::random_box(rng);
        OrientedBox b = oracle::random_box(rng);
        double got = angle(a, b, AngleMode::Slab);
        CHECK(got == doctest::Approx(oracle::normal_angle(a, b)).epsilon(1e-9));
        CHECK(got == angle(b, a, AngleMode::Slab));
        CHECK(got >= 0.0);
        CHECK(got <= M_PI / 2 + 1e-12);
    }

    OrientedBox fat = OrientedBox::make({0, 0, 0}, Mat3::identity(), {0.1, 0.9, 1.0});
    CHECK_THROWS_AS(angle(fat, fat, AngleMode::Tube), ShapeMismatch);
}

TEST_CASE("rescale_to_unit: identity, slab-tangent tube, corner mapping") {
    OrientedBox cube = OrientedBox::make({0, 0, 0}, Mat3::identity(), {1, 1, 1});
    AffineMap id = rescale_to_unit(cube);
    Vec3 p{0.2, -0.3, 0.4};
    Vec3 q = id.apply(p);
    CHECK(norm(q - p) < 1e-12);

    // slab theta x 1 x 1 with a tangent delta-tube: image extents
    // (delta, delta/theta, 1) up to reordering
    double theta = 1.0 / 8, d = 1.0 / 64;
    OrientedBox slab = OrientedBox::slab({0, 0, 0}, {1, 0, 0}, theta);
    OrientedBox tube = OrientedBox::tube({0, 0, 0}, {0, 0, 1}, d);
    AffineMap L = rescale_to_unit(slab);
    OrientedBox img = L.apply_box(tube);
    CHECK(img.a() == doctest::Approx(d).epsilon(1e-9));
    CHECK(img.b() == doctest::Approx(d / theta).epsilon(1e-9));
    CHECK(img.c() == doctest::Approx(1.0).epsilon(1e-9));

    Rng rng(31);
    for (int t = 0; t < 32; ++t) {
        OrientedBox K = oracle::random_box(rng);
        AffineMap m = rescale_to_unit(K);
        for (const Vec3& corner : K.corners()) {
            Vec3 im = m.apply(corner);
            CHECK(std::fabs(std::fabs(im.x) - 0.5) < 1e-9);
            CHECK(std::fabs(std::fabs(im.y) - 0.5) < 1e-9);
            CHECK(std::fabs(std::fabs(im.z) - 0.5) < 1e-9);
        }
        // map . inverse is the identity
        AffineMap round = m.compose_after(m.inverse());
        Vec3 x{0.1, 0.2, -0.3};
        CHECK(norm(round.apply(x) - x) < 1e-9);
    }

    OrientedBox degenerate;
    CHECK_THROWS_AS(
        rescale_to_unit(OrientedBox::make({0, 0, 0}, Mat3::identity(), {1e-13, 1, 1})),
        Degenerate);
}

TEST_CASE("rescale preserves containment and volume ratios") {
    // exact when the boxes share the map's stretch frame (the tangent
    // configurations the rescales act on); otherwise the principal-box image
    // is an approximation covered by the 1.05 membership slack
    Rng rng(37);
    for (int t = 0; t < 48; ++t) {
        OrientedBox K = oracle::random_box(rng, 0.5, 1.5);
        Vec3 off{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                 rng.uniform(-0.05, 0.05)};
        OrientedBox b = OrientedBox::make(K.center() + off, K.frame(),
                                          K.extents() * 0.6);
        OrientedBox a = OrientedBox::make(b.center(), b.frame(), b.extents() * 0.5);
        REQUIRE(contains(a, b, 1.0));
        AffineMap m = rescale_to_unit(K);
        OrientedBox ia = m.apply_box(a), ib = m.apply_box(b);
        CHECK(contains(ia, ib, 1.0));
        CHECK(ia.volume() / ib.volume() ==
              doctest::Approx(a.volume() / b.volume()).epsilon(1e-9));
    }
    // mildly skewed boxes stay inside within the membership dilation
    for (int t = 0; t < 48; ++t) {
        OrientedBox K = oracle::random_box(rng, 0.5, 1.5);
        OrientedBox b = OrientedBox::make(K.center(), K.frame(), K.extents() * 0.7);
        Vec3 d = normalized(b.long_axis() + Vec3{rng.uniform(-0.02, 0.02),
                                                 rng.uniform(-0.02, 0.02),
                                                 rng.uniform(-0.02, 0.02)});
        OrientedBox a = OrientedBox::tube(b.center(), d, 0.05 * b.a(),
                                          0.5 * b.c());
        if (!contains(a, b, 1.0)) continue;
        AffineMap m = rescale_to_unit(K);
        CHECK(contains(m.apply_box(a), m.apply_box(b), kMembershipDilation));
    }
}

TEST_CASE("intersect_ball: chord through center, miss, offset chord formula") {
    double d = 1.0 / 32, r = 0.25;
    OrientedBox ball = OrientedBox::ball({0, 0, 0}, r);

    OrientedBox through = OrientedBox::tube({0, 0, 0}, {0, 0, 1}, d);
    auto clip = intersect_ball(through, ball);
    REQUIRE(clip.has_value());
    CHECK(std::fabs(clip->c() - 2 * r) <= d);

    OrientedBox miss = OrientedBox::tube({r + 2 * d, 0, 0}, {0, 0, 1}, d);
    // axis at distance r + 2d > r from the center in the perpendicular plane
    auto clip2 = intersect_ball(miss, ball);
    CHECK_FALSE(clip2.has_value());

    // axis at distance r/2: chord length 2 sqrt(r^2 - r^2/4) = r sqrt(3)
    OrientedBox offset = OrientedBox::tube({r / 2, 0, 0}, {0, 0, 1}, d);
    auto clip3 = intersect_ball(offset, ball);
    REQUIRE(clip3.has_value());
    CHECK(std::fabs(clip3->c() - r * std::sqrt(3.0)) <= d);
    // sampled points of the clip stay within the chord band of the sphere
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        Vec3 local{(rng.uniform() - 0.5) * clip3->a(), (rng.uniform() - 0.5) * clip3->b(),
                   (rng.uniform() - 0.5) * clip3->c()};
        Vec3 p = clip3->from_local(local);
        CHECK(norm(p - ball.center()) <= r + d);
    }
}

TEST_CASE("thicken: identity, plank thickening, monotone containment") {
    OrientedBox p = OrientedBox::plank({0, 0, 0}, {1, 0, 0}, {0, 0, 1}, 0.01, 0.2);
    OrientedBox same = thicken(p, p.a());
    CHECK(same.a() == p.a());
    CHECK(same.volume() == doctest::Approx(p.volume()).epsilon(1e-15));

    double theta = 0.3;
    OrientedBox thick = thicken(p, theta * p.b());
    CHECK(thick.a() == doctest::Approx(theta * p.b()));
    CHECK(thick.b() == doctest::Approx(p.b()));
    CHECK(thick.c() == doctest::Approx(1.0));
    CHECK(contains(p, thick, 1.0));

    CHECK_THROWS_AS(thicken(p, p.a() / 2), ShrinkNotAllowed);
}

TEST_CASE("affine image volume scales by |det| exactly") {
    Rng rng(41);
    for (int t = 0; t < 32; ++t) {
        OrientedBox b = oracle::random_box(rng);
        OrientedBox K = oracle::random_box(rng, 0.3, 1.5);
        AffineMap m = rescale_to_unit(K);
        OrientedBox img = m.apply_box(b);
        CHECK(img.volume() ==
              doctest::Approx(b.volume() * std::fabs(m.det())).epsilon(1e-9));
    }
}
