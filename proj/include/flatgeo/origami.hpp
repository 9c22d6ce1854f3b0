#pragma once
// Square-tiled surfaces from permutation pairs, plus the permutation
// utilities shared with the combinatorial cylinder engine.

#include "flatgeo/surface.hpp"

namespace flatgeo {

using Perm = std::vector<int>;  // 0-based images

inline bool is_permutation(const Perm& p) {
    std::vector<bool> hit(p.size(), false);
    for (int x : p) {
        if (x < 0 || x >= (int)p.size() || hit[x]) return false;
        hit[x] = true;
    }
    return true;
}

inline Perm perm_inverse(const Perm& p) {
    Perm q(p.size());
    for (int i = 0; i < (int)p.size(); ++i) q[p[i]] = i;
    return q;
}

inline Perm perm_mul(const Perm& p, const Perm& q) {  // (p*q)(i) = p(q(i))
    Perm r(p.size());
    for (int i = 0; i < (int)p.size(); ++i) r[i] = p[q[i]];
    return r;
}

inline std::vector<std::vector<int>> perm_cycles(const Perm& p) {
    std::vector<std::vector<int>> cycles;
    std::vector<bool> seen(p.size(), false);
    for (int i = 0; i < (int)p.size(); ++i) {
        if (seen[i]) continue;
        std::vector<int> cyc;
        for (int j = i; !seen[j]; j = p[j]) { seen[j] = true; cyc.push_back(j); }
        cycles.push_back(std::move(cyc));
    }
    return cycles;
}

inline bool transitive(const Perm& h, const Perm& v) {
    size_t n = h.size();
    if (n == 0) return false;
    std::vector<bool> seen(n, false);
    std::vector<int> stack{0};
    seen[0] = true;
    size_t count = 1;
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        // forward images suffice: orbits of <h,v> equal orbits of the forward maps
        for (int j : {h[i], v[i]})
            if (!seen[j]) { seen[j] = true; ++count; stack.push_back(j); }
    }
    return count == n;
}

// marks every regular lattice vertex class not already covered by `marks`
inline void add_lattice_marks(Surface& s) {
    SurfaceInfo info(s);
    std::set<SurfacePoint> taken;
    for (const auto& mk : s.marks) taken.insert(mk.at);
    for (int k = 0; k < (int)info.classes.size(); ++k) {
        const auto& vc = info.classes[k];
        if (vc.angle_pi != 2 || vc.fold_midpoint) continue;
        if (taken.count(vc.rep)) continue;
        s.marks.push_back({vc.rep, "p" + std::to_string(k)});
    }
}

inline Surface square_tiled_from_permutations(long n, const Perm& h, const Perm& v,
                                              std::vector<Mark> marks = {}) {
    if (n < 1) throw Error("origami", "n must be >= 1");
    if ((long)h.size() != n || (long)v.size() != n || !is_permutation(h) || !is_permutation(v))
        throw Error("origami", "h and v must be permutations of {1.." + std::to_string(n) + "}");
    if (!transitive(h, v))
        throw Error("origami", "permutation pair is not transitive: surface would be disconnected");
    Surface s;
    s.kind = Kind::translation;
    for (long i = 0; i < n; ++i) {
        Polygon P;
        P.id = std::to_string(i + 1);
        P.v = {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
        s.polys.push_back(std::move(P));
    }
    // square edges: 0 bottom, 1 right, 2 top, 3 left
    for (long i = 0; i < n; ++i) {
        s.gluings.push_back({{(int)i, 1}, {h[i], 3}, false});
        s.gluings.push_back({{(int)i, 2}, {v[i], 0}, false});
    }
    s.origami = Origami{n, h, v};
    s.marks = std::move(marks);
    {
        SurfaceInfo info(s);
        for (auto& mk : s.marks) mk.at = info.canonical_point(mk.at);
    }
    add_lattice_marks(s);
    ValidationReport r = validate(s);
    if (!r.ok()) throw Error("origami", "constructed origami failed validation");
    return s;
}

}  // namespace flatgeo
