#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace klab {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](int i) { return (&x)[i]; }
    double operator[](int i) const { return (&x)[i]; }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    return n > 0.0 ? v / n : Vec3{0, 0, 0};
}

// Any unit vector perpendicular to d, chosen stably.
inline Vec3 any_perp(const Vec3& d) {
    Vec3 axis = std::fabs(d.x) <= std::fabs(d.y) && std::fabs(d.x) <= std::fabs(d.z)
                    ? Vec3{1, 0, 0}
                    : (std::fabs(d.y) <= std::fabs(d.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
    return normalized(cross(d, axis));
}

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<Vec3, 3> row{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};

    static Mat3 identity() { return Mat3{}; }
    static Mat3 diag(double a, double b, double c) {
        return Mat3{{Vec3{a, 0, 0}, Vec3{0, b, 0}, Vec3{0, 0, c}}};
    }
    static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
        return Mat3{{r0, r1, r2}};
    }

    Vec3 operator*(const Vec3& v) const {
        return {dot(row[0], v), dot(row[1], v), dot(row[2], v)};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 t = o.transpose();
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            r.row[i] = {dot(row[i], t.row[0]), dot(row[i], t.row[1]), dot(row[i], t.row[2])};
        return r;
    }
    Mat3 transpose() const {
        return Mat3{{Vec3{row[0].x, row[1].x, row[2].x},
                     Vec3{row[0].y, row[1].y, row[2].y},
                     Vec3{row[0].z, row[1].z, row[2].z}}};
    }
    double det() const {
        return dot(row[0], cross(row[1], row[2]));
    }
    Mat3 inverse() const {
        Vec3 c0 = cross(row[1], row[2]);
        Vec3 c1 = cross(row[2], row[0]);
        Vec3 c2 = cross(row[0], row[1]);
        double d = dot(row[0], c0);
        // columns of the inverse are the cofactor rows / det
        Mat3 r;
        r.row[0] = Vec3{c0.x, c1.x, c2.x} / d;
        r.row[1] = Vec3{c0.y, c1.y, c2.y} / d;
        r.row[2] = Vec3{c0.z, c1.z, c2.z} / d;
        return r;
    }
};

// Eigendecomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
// Returns eigenvalues (ascending) and the matching orthonormal eigenvectors
// as rows of V.
struct SymEigen3 {
    std::array<double, 3> value;
    Mat3 vector;  // row i is the eigenvector of value[i]
};

SymEigen3 sym_eigen3(const Mat3& m);

// Singular values of an arbitrary 3x3 matrix (ascending), with the left
// singular vectors as rows of U. Computed from the eigensystem of m m^T.
struct Svd3 {
    std::array<double, 3> sigma;
    Mat3 u;  // row i pairs with sigma[i]
};

Svd3 svd3_left(const Mat3& m);

}  // namespace klab
