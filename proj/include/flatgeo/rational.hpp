#pragma once
// Exact rational scalars, 2-vectors and the handful of sign predicates the
// whole engine is built on. Everything downstream must stay float-free.

#include <gmpxx.h>
#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>
#include <functional>

namespace flatgeo {

using Q = mpq_class;
using Z = mpz_class;

struct Error : std::runtime_error {
    std::string kind;
    Error(std::string k, const std::string& msg)
        : std::runtime_error(msg), kind(std::move(k)) {}
};

// Internal invariants: throwing keeps them active in optimized builds.
#define FG_CHECK(cond, msg) \
    do { if (!(cond)) throw ::flatgeo::Error("internal", std::string("invariant failed: ") + (msg)); } while (0)

inline int sgn(const Q& x) { return sgn(x.get_num()); }

inline Q parse_q(const std::string& s) {
    if (s.empty()) throw Error("parse", "empty rational literal");
    for (char c : s)
        if (!(std::isdigit((unsigned char)c) || c == '-' || c == '+' || c == '/'))
            throw Error("parse", "bad rational literal: " + s);
    Q q;
    if (q.set_str(s, 10) != 0) throw Error("parse", "bad rational literal: " + s);
    if (sgn(q.get_den()) == 0) throw Error("parse", "zero denominator: " + s);
    q.canonicalize();
    return q;
}

inline std::string q_str(const Q& q) { return q.get_str(); }

struct Vec2 {
    Q x, y;
    Vec2() : x(0), y(0) {}
    Vec2(Q px, Q py) : x(std::move(px)), y(std::move(py)) {}
    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(const Q& t) const { return {x * t, y * t}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
    bool operator!=(const Vec2& o) const { return !(*this == o); }
    bool is_zero() const { return sgn(x) == 0 && sgn(y) == 0; }
};

inline Q cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline Q dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline Q norm2(const Vec2& a) { return a.x * a.x + a.y * a.y; }

inline Vec2 rot90ccw(const Vec2& a) { return {-a.y, a.x}; }
inline Vec2 rot90cw(const Vec2& a) { return {a.y, -a.x}; }

// Lexicographic order, used only for canonical tie-breaking.
inline bool lex_less(const Vec2& a, const Vec2& b) {
    int c = cmp(a.x, b.x);
    if (c != 0) return c < 0;
    return cmp(a.y, b.y) < 0;
}

// orientation of the triangle a,b,c: +1 ccw, -1 cw, 0 collinear
inline int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return sgn(cross(b - a, c - a));
}

// d against the circle through ccw triangle a,b,c: +1 inside, -1 outside, 0 on
inline int in_circle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    Vec2 A = a - d, B = b - d, C = c - d;
    Q det = norm2(A) * cross(B, C) - norm2(B) * cross(A, C) + norm2(C) * cross(A, B);
    return sgn(det);
}

// true iff p lies strictly inside the ccw wedge from u to w (angle < 2pi swept ccw)
inline bool in_wedge_strict(const Vec2& u, const Vec2& w, const Vec2& p) {
    // wedge spans ccw from direction u to direction w
    Q cu = cross(u, p), cw = cross(p, w);
    if (sgn(cross(u, w)) > 0 || (sgn(cross(u, w)) == 0 && sgn(dot(u, w)) > 0)) {
        // convex wedge (< pi)
        return sgn(cu) > 0 && sgn(cw) > 0;
    }
    // reflex or straight wedge: complement of the cw wedge from w to u
    return !(sgn(cu) <= 0 && sgn(cw) <= 0);
}

inline bool parallel(const Vec2& a, const Vec2& b) { return sgn(cross(a, b)) == 0; }
inline bool same_ray(const Vec2& a, const Vec2& b) {
    return parallel(a, b) && sgn(dot(a, b)) > 0;
}

struct Mat2 {
    Q a, b, c, d;  // row major: [a b; c d]
    Vec2 apply(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 mul(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Q det() const { return a * d - b * c; }
    Mat2 inverse() const {
        Q dt = det();
        if (sgn(dt) == 0) throw Error("matrix", "singular matrix");
        return {d / dt, -b / dt, -c / dt, a / dt};
    }
};

inline size_t hash_combine(size_t h, size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}
inline size_t q_hash(const Q& q) {
    size_t h = std::hash<unsigned long>()(mpz_get_ui(q.get_num_mpz_t()));
    return hash_combine(h, std::hash<unsigned long>()(mpz_get_ui(q.get_den_mpz_t())));
}

}  // namespace flatgeo
