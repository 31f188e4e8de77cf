#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace biotmix {

using Vector = std::vector<double>;

inline void check_arg(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline void check_state(bool ok, const std::string& msg) {
    if (!ok) throw std::runtime_error(msg);
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
// z-component of the 2D cross product
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// 2x2 matrix, row-major
struct Mat2 {
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    double trace() const { return a00 + a11; }
};

inline Mat2 operator+(Mat2 a, Mat2 b) {
    return {a.a00 + b.a00, a.a01 + b.a01, a.a10 + b.a10, a.a11 + b.a11};
}
inline Mat2 operator-(Mat2 a, Mat2 b) {
    return {a.a00 - b.a00, a.a01 - b.a01, a.a10 - b.a10, a.a11 - b.a11};
}
inline Mat2 operator*(double s, Mat2 a) {
    return {s * a.a00, s * a.a01, s * a.a10, s * a.a11};
}
// Frobenius inner product
inline double ddot(Mat2 a, Mat2 b) {
    return a.a00 * b.a00 + a.a01 * b.a01 + a.a10 * b.a10 + a.a11 * b.a11;
}

inline double dot(const Vector& a, const Vector& b) {
    check_arg(a.size() == b.size(), "dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Compensated dot product (Ogita-Rump "Dot2"). Used where a dot product
// feeds a large multiplier, e.g. the rank-one vectors of the corrected
// stress preconditioner, whose scaling grows like sqrt(lambda).
inline double dot_accurate(const Vector& a, const Vector& b) {
    check_arg(a.size() == b.size(), "dot_accurate: size mismatch");
    double s = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double p = a[i] * b[i];
        const double ep = std::fma(a[i], b[i], -p);
        const double t = s + p;
        const double et = (std::abs(s) >= std::abs(p)) ? (s - t) + p : (p - t) + s;
        s = t;
        comp += ep + et;
    }
    return s + comp;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const Vector& x, Vector& y) {
    check_arg(x.size() == y.size(), "axpy: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, Vector& x) {
    for (double& v : x) v *= alpha;
}

/// splitmix64-style mixing of a user seed with a stream index; used to give
/// every solve in a sweep its own documented, reproducible substream.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

} // namespace biotmix
