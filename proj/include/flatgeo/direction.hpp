#pragma once
// Unoriented rational slopes. A direction is a primitive integer vector
// (p,q) with q > 0, or (1,0) for horizontal; (p,q) and (-p,-q) name the
// same direction. Sweeps enumerate by height = max(|p|,|q|).

#include "flatgeo/rational.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace flatgeo {

struct Direction {
    Z p, q;  // primitive, q > 0 or (p,q) == (1,0)

    Direction() : p(1), q(0) {}
    Direction(Z pp, Z qq) {
        if (sgn(pp) == 0 && sgn(qq) == 0) throw Error("direction", "zero direction");
        Z g = gcd(pp, qq);
        pp /= g; qq /= g;
        if (sgn(qq) < 0 || (sgn(qq) == 0 && sgn(pp) < 0)) { pp = -pp; qq = -qq; }
        p = pp; q = qq;
    }
    // direction of an arbitrary nonzero rational vector
    static Direction of(const Vec2& v) {
        if (v.is_zero()) throw Error("direction", "zero vector has no direction");
        Z a = v.x.get_num() * v.y.get_den();
        Z b = v.y.get_num() * v.x.get_den();
        return Direction(a, b);
    }

    Vec2 vec() const { return {Q(p), Q(q)}; }  // the canonical representative
    Z height() const { Z a = abs(p), b = abs(q); return a > b ? a : b; }

    bool operator==(const Direction& o) const { return p == o.p && q == o.q; }
    bool operator!=(const Direction& o) const { return !(*this == o); }
    // sweep order: by (height, p, q) lexicographically
    bool operator<(const Direction& o) const {
        int c = cmp(height(), o.height());
        if (c != 0) return c < 0;
        c = cmp(p, o.p);
        if (c != 0) return c < 0;
        return cmp(q, o.q) < 0;
    }
    std::string str() const { return p.get_str() + "," + q.get_str(); }
};

// all directions with height <= max_height, in sweep order
inline std::vector<Direction> directions_up_to(long max_height) {
    std::vector<Direction> out;
    for (long h = 1; h <= max_height; ++h) {
        std::vector<Direction> layer;
        if (h == 1) layer.emplace_back(1, 0);
        // remaining reps have q >= 1 and max(|p|,q) == h, primitive
        for (long p = -h; p <= h; ++p)
            if (std::gcd(std::abs(p), h) == 1) layer.emplace_back(p, h);
        for (long q = 1; q < h; ++q)
            for (long p : {-h, h})
                if (std::gcd(h, q) == 1) layer.emplace_back(p, q);
        std::sort(layer.begin(), layer.end());
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

}  // namespace flatgeo
