#pragma once
// Hyperelliptic involution: the self-map with derivative -I everywhere and
// exactly 2g+2 fixed points. The search matches polygons across the gluing
// graph (each polygon maps onto another by a point reflection); when the input
// polygonization is not respected by any such isometry, the search reruns on a
// canonical presentation (Delaunay cells, or the lattice parallelogram for an
// unmarked flat torus), whose cells every derivative -I isometry permutes.

#include "flatgeo/delaunay.hpp"

namespace flatgeo {

// Polygon i maps onto polygon poly_img[i] by z -> c[i] - z, carrying vertex k
// to vertex (k + vshift[i]) mod n. The map acts on `domain`; when the search
// had to re-present the input, domain is that re-presentation of the same
// metric surface and `retriangulated` is set.
struct Involution {
    Surface domain;
    bool retriangulated = false;
    std::vector<int> poly_img;
    std::vector<int> vshift;
    std::vector<Vec2> c;

    // image in the chart of the image polygon, not canonicalized
    SurfacePoint map_raw(const SurfacePoint& p) const {
        return {poly_img[p.poly], c[p.poly] - p.pos};
    }
};

// canonicalized image of a point under the involution (info built on t.domain)
inline SurfacePoint involution_image(const SurfaceInfo& info, const Involution& t,
                                     const SurfacePoint& p) {
    return info.canonical_point(t.map_raw(p));
}

struct WeierstrassPoint {
    SurfacePoint at;  // canonical representative on the involution's domain
    enum class Kind { regular, marked, cone } kind = Kind::regular;
    int vclass = -1;  // vertex class when the point is a polygon vertex
};

namespace invdetail {

// reasons are reported for verify_involution; the search only needs pass/fail
inline std::optional<std::string> involution_defect(const Surface& S, const SurfaceInfo& info,
                                                    const Involution& t) {
    int m = (int)S.polys.size();
    if ((int)t.poly_img.size() != m || (int)t.vshift.size() != m || (int)t.c.size() != m)
        return "per-polygon data does not match the polygon count";
    for (int i = 0; i < m; ++i) {
        int j = t.poly_img[i];
        if (j < 0 || j >= m) return "polygon image out of range";
        const Polygon &P = S.polys[i], &W = S.polys[j];
        if (P.size() != W.size()) return "polygon mapped to one of different degree";
        int r = t.vshift[i];
        if (r < 0 || r >= P.size()) return "vertex shift out of range";
        for (int k = 0; k < P.size(); ++k)
            if (t.c[i] - P.vert(k) != W.vert(k + r))
                return "point reflection does not carry polygon " + P.id + " onto " + W.id;
        if (t.poly_img[j] != i) return "polygon map is not an involution";
        if ((t.vshift[i] + t.vshift[j]) % P.size() != 0)
            return "vertex shifts do not compose to the identity";
        if (t.c[j] != t.c[i]) return "reflection centers do not compose to the identity";
    }
    for (const Gluing& g : S.gluings) {
        if (g.flip) return "flip gluings admit no derivative -I self-map";
        int pa = g.a.poly, pb = g.b.poly;
        EdgeRef ia{t.poly_img[pa], (g.a.edge + t.vshift[pa]) % S.polys[pa].size()};
        EdgeRef ib{t.poly_img[pb], (g.b.edge + t.vshift[pb]) % S.polys[pb].size()};
        const Gluing& gi = info.glue_at(ia.poly, ia.edge);
        bool match = (gi.a == ia && gi.b == ib) || (gi.a == ib && gi.b == ia);
        if (!match || gi.flip)
            return "image edges of a glued pair are not glued to each other";
    }
    // the set of marked points is preserved (labels are presentation metadata,
    // assigned automatically when absent, so they do not pin the points)
    std::set<SurfacePoint> markset;
    for (const Mark& mk : S.marks) markset.insert(mk.at);
    for (const Mark& mk : S.marks)
        if (!markset.count(involution_image(info, t, mk.at)))
            return "marked point set is not preserved";
    return std::nullopt;
}

// all fixed points: reflection centers of self-mapped polygons, midpoints of
// edges carried to their own gluing partner, and fixed vertex classes. These
// three families partition the surface, so the enumeration is complete.
inline std::vector<WeierstrassPoint> fixed_points(const Surface& S, const SurfaceInfo& info,
                                                  const Involution& t) {
    std::set<SurfacePoint> markset;
    for (const Mark& mk : S.marks) markset.insert(mk.at);
    std::vector<WeierstrassPoint> out;
    std::set<SurfacePoint> seen;
    auto add = [&](const SurfacePoint& pt, WeierstrassPoint::Kind kind, int vclass) {
        FG_CHECK(seen.insert(pt).second, "fixed point enumerated twice");
        out.push_back({pt, kind, vclass});
    };
    for (int i = 0; i < (int)S.polys.size(); ++i) {
        if (t.poly_img[i] != i) continue;
        SurfacePoint pt{i, t.c[i] * Q(1, 2)};
        FG_CHECK(info.locate(pt) == PointLoc::interior,
                 "reflection center of a self-mapped polygon must be interior");
        add(pt, markset.count(pt) ? WeierstrassPoint::Kind::marked : WeierstrassPoint::Kind::regular,
            -1);
    }
    for (const Gluing& g : S.gluings) {
        int pa = g.a.poly;
        EdgeRef ia{t.poly_img[pa], (g.a.edge + t.vshift[pa]) % S.polys[pa].size()};
        if (!(ia == g.b)) continue;  // the open edge arc maps to a different arc
        const Polygon& P = S.polys[pa];
        Vec2 mid = (P.vert(g.a.edge) + P.vert(g.a.edge + 1)) * Q(1, 2);
        SurfacePoint pt = info.canonical_point({pa, mid});
        FG_CHECK(involution_image(info, t, pt) == pt, "edge midpoint is not actually fixed");
        add(pt, markset.count(pt) ? WeierstrassPoint::Kind::marked : WeierstrassPoint::Kind::regular,
            -1);
    }
    for (int k = 0; k < (int)info.classes.size(); ++k) {
        const VertexClass& vc = info.classes[k];
        FG_CHECK(!vc.fold_midpoint, "translation surfaces have no fold midpoints");
        Corner c0 = vc.corners[0];
        int n = S.polys[c0.poly].size();
        Corner img{t.poly_img[c0.poly], (c0.vtx + t.vshift[c0.poly]) % n};
        if (info.class_of(img) != k) continue;
        auto kind = info.is_singular_class(k) ? WeierstrassPoint::Kind::cone
                    : vc.mark >= 0            ? WeierstrassPoint::Kind::marked
                                              : WeierstrassPoint::Kind::regular;
        add(vc.rep, kind, k);
    }
    std::sort(out.begin(), out.end(),
              [](const WeierstrassPoint& a, const WeierstrassPoint& b) { return a.at < b.at; });
    return out;
}

// grow the correspondence "polygon 0 -> (j0, vertex offset r0)" across the
// gluing graph; returns the involution if everything stays consistent
inline std::optional<Involution> grow_candidate(const Surface& S, const SurfaceInfo& info, int j0,
                                                int r0) {
    int m = (int)S.polys.size();
    Involution t;
    t.poly_img.assign(m, -1);
    t.vshift.assign(m, -1);
    t.c.assign(m, Vec2{});
    auto assign = [&](int i, int j, int r) -> bool {
        const Polygon &P = S.polys[i], &W = S.polys[j];
        if (P.size() != W.size()) return false;
        Vec2 c = W.vert(r) + P.vert(0);
        if (t.poly_img[i] >= 0)
            return t.poly_img[i] == j && t.vshift[i] == r && t.c[i] == c;
        for (int k = 1; k < P.size(); ++k)
            if (c - P.vert(k) != W.vert(k + r)) return false;
        t.poly_img[i] = j;
        t.vshift[i] = r;
        t.c[i] = c;
        return true;
    };
    if (!assign(0, j0, r0)) return std::nullopt;
    std::deque<int> bfs{0};
    std::vector<bool> queued(m, false);
    queued[0] = true;
    while (!bfs.empty()) {
        int i = bfs.front();
        bfs.pop_front();
        int n = S.polys[i].size();
        for (int e = 0; e < n; ++e) {
            const Gluing& g = info.glue_at(i, e);
            if (g.flip) return std::nullopt;
            EdgeRef other = (g.a == EdgeRef{i, e}) ? g.b : g.a;
            EdgeRef img{t.poly_img[i], (e + t.vshift[i]) % n};
            const Gluing& gi = info.glue_at(img.poly, img.edge);
            if (gi.flip) return std::nullopt;
            EdgeRef iother = (gi.a == img) ? gi.b : gi.a;
            int n2 = S.polys[other.poly].size();
            if (S.polys[iother.poly].size() != n2) return std::nullopt;
            int r2 = ((iother.edge - other.edge) % n2 + n2) % n2;
            bool fresh = t.poly_img[other.poly] < 0;
            if (!assign(other.poly, iother.poly, r2)) return std::nullopt;
            if (fresh && !queued[other.poly]) {
                queued[other.poly] = true;
                bfs.push_back(other.poly);
            }
        }
    }
    for (int i = 0; i < m; ++i)
        if (t.poly_img[i] < 0) return std::nullopt;
    if (involution_defect(S, info, t)) return std::nullopt;
    return t;
}

// first involution with 2g+2 fixed points, in seed order (image of polygon 0)
inline std::optional<Involution> search_presentation(const Surface& S) {
    SurfaceInfo info(S);
    long want = 2 * info.genus + 2;
    for (int j0 = 0; j0 < (int)S.polys.size(); ++j0) {
        if (S.polys[j0].size() != S.polys[0].size()) continue;
        for (int r0 = 0; r0 < S.polys[0].size(); ++r0) {
            auto t = grow_candidate(S, info, j0, r0);
            if (!t) continue;
            if ((long)fixed_points(S, info, *t).size() != want) continue;
            t->domain = S;
            return t;
        }
    }
    return std::nullopt;
}

}  // namespace invdetail

// throws Error("domain") unless t is a valid involution of dom
inline void verify_involution(const Surface& dom, const Involution& t) {
    SurfaceInfo info(dom);
    if (auto defect = invdetail::involution_defect(dom, info, t))
        throw Error("domain", "invalid involution: " + *defect);
}

// The hyperelliptic involution of s, if s admits one. The search first tries
// the given polygons; if no point reflection permutes them, it re-presents the
// surface canonically (any derivative -I isometry permutes the intrinsic
// Delaunay cells, and maps a lattice parallelogram to a translate of itself),
// so a second failure proves there is no involution at all. Among involutions
// only those with exactly 2g+2 fixed points qualify (quotient genus zero);
// the first seed in polygon order is returned, which is deterministic.
inline std::optional<Involution> find_involution(const Surface& s) {
    if (s.kind != Kind::translation)
        throw Error("domain", "involution search requires a translation surface");
    if (auto t = invdetail::search_presentation(s)) return t;
    SurfaceInfo info(s);
    bool has_pts = !s.marks.empty();
    for (int k = 0; k < (int)info.classes.size() && !has_pts; ++k)
        has_pts = info.is_singular_class(k);
    Surface dom = has_pts ? dldetail::candidate_from_flag(delaunay_cells(s), 0, 0, 1)
                          : canonical_torus_form(s);
    auto t = invdetail::search_presentation(dom);
    if (t) t->retriangulated = true;
    return t;
}

// All fixed points of t, sorted by canonical representative; exactly 2g+2 of
// them for a valid involution. The points live on t.domain, which is s itself
// unless t.retriangulated is set, in which case s must be the same metric
// surface that was re-presented.
inline std::vector<WeierstrassPoint> weierstrass_points(const Surface& s, const Involution& t) {
    bool same = s.kind == t.domain.kind && s.polys.size() == t.domain.polys.size() &&
                s.gluings.size() == t.domain.gluings.size() &&
                s.marks.size() == t.domain.marks.size();
    for (size_t i = 0; same && i < s.polys.size(); ++i)
        same = s.polys[i].v == t.domain.polys[i].v;
    for (size_t i = 0; same && i < s.gluings.size(); ++i)
        same = s.gluings[i].a == t.domain.gluings[i].a && s.gluings[i].b == t.domain.gluings[i].b &&
               s.gluings[i].flip == t.domain.gluings[i].flip;
    for (size_t i = 0; same && i < s.marks.size(); ++i)
        same = s.marks[i].at == t.domain.marks[i].at;
    if (!same && serialize_flatsurf(canonical_form_geometric(s)) !=
                     serialize_flatsurf(canonical_form_geometric(t.domain)))
        throw Error("domain", "involution does not act on a presentation of this surface");
    verify_involution(t.domain, t);
    SurfaceInfo info(t.domain);
    auto pts = invdetail::fixed_points(t.domain, info, t);
    long want = 2 * info.genus + 2;
    if ((long)pts.size() != want)
        throw Error("domain", "involution has " + std::to_string(pts.size()) +
                                  " fixed points; a hyperelliptic involution needs " +
                                  std::to_string(want));
    return pts;
}

}  // namespace flatgeo
