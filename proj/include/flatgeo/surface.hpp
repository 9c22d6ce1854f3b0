#pragma once
// Surface model: polygons glued edge-to-edge by translations (z -> z + c) or
// flips (z -> -z + c), vertex-class census with exact cone angles, stratum,
// validation. Everything downstream consumes the SurfaceInfo built here.

#include "flatgeo/direction.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace flatgeo {

enum class Kind { translation, half_translation };

struct Polygon {
    std::string id;
    std::vector<Vec2> v;  // ccw
    int size() const { return (int)v.size(); }
    const Vec2& vert(int i) const {
        int n = size();
        return v[((i % n) + n) % n];
    }
    Vec2 edge_vec(int e) const { return vert(e + 1) - vert(e); }
    Q area2() const {  // twice the signed area
        Q s = 0;
        for (int i = 0; i < size(); ++i) s += cross(vert(i), vert(i + 1));
        return s;
    }
};

struct EdgeRef {
    int poly = -1, edge = -1;
    bool valid() const { return poly >= 0; }
    auto operator<=>(const EdgeRef&) const = default;
};

struct Gluing {
    EdgeRef a, b;
    bool flip = false;
    bool is_fold() const { return a == b; }
};

// A point given in the chart of one polygon. Not automatically canonical:
// boundary points have several representatives until canonicalized.
struct SurfacePoint {
    int poly = -1;
    Vec2 pos;
    bool operator==(const SurfacePoint& o) const { return poly == o.poly && pos == o.pos; }
    bool operator!=(const SurfacePoint& o) const { return !(*this == o); }
    bool operator<(const SurfacePoint& o) const {
        if (poly != o.poly) return poly < o.poly;
        return lex_less(pos, o.pos);
    }
};

struct Mark {
    SurfacePoint at;  // canonical representative
    std::string label;
};

struct Origami {
    long n = 0;
    std::vector<int> h, v;  // 0-based: right neighbor, top neighbor
};

struct Surface {
    Kind kind = Kind::translation;
    std::vector<Polygon> polys;
    std::vector<Gluing> gluings;
    std::vector<Mark> marks;
    std::optional<Origami> origami;

    int poly_index(const std::string& id) const {
        for (int i = 0; i < (int)polys.size(); ++i)
            if (polys[i].id == id) return i;
        return -1;
    }
};

// chart transition across a gluing, mapping coordinates of the side-a polygon
// into coordinates of the side-b polygon: z -> sign*z + c
struct ChartMap {
    int sign = 1;
    Vec2 c;
    Vec2 apply(const Vec2& z) const { return sign > 0 ? z + c : c - z; }
    Vec2 apply_dir(const Vec2& d) const { return sign > 0 ? d : -d; }
    ChartMap inverse() const { return sign > 0 ? ChartMap{1, -c} : ChartMap{-1, c}; }
    ChartMap then(const ChartMap& g) const {  // first this, then g
        return {sign * g.sign, g.sign > 0 ? g.c + c : g.c - c};
    }
};

inline ChartMap cross_map(const Polygon& A, int ea, const Polygon& B, int eb, bool flip) {
    if (!flip) return {+1, B.vert(eb + 1) - A.vert(ea)};
    return {-1, B.vert(eb + 1) + A.vert(ea)};
}

struct Corner {  // polygon corner (vertex slot)
    int poly = -1, vtx = -1;
    bool valid() const { return poly >= 0; }
    auto operator<=>(const Corner&) const = default;
};

struct VertexClass {
    std::vector<Corner> corners;  // cyclic walk order (empty for fold midpoints)
    long angle_pi = 0;            // cone angle as an integer multiple of pi
    bool fold_midpoint = false;
    EdgeRef fold_edge;
    SurfacePoint rep;  // canonical representative point
    int mark = -1;     // index into surface.marks if this class is marked
    bool singular(Kind k) const {
        return k == Kind::translation ? angle_pi != 2 : angle_pi != 2;
    }
    long order(Kind k) const {
        return k == Kind::translation ? angle_pi / 2 - 1 : angle_pi - 2;
    }
};

struct Stratum {
    Kind kind = Kind::translation;
    std::vector<long> orders;  // includes 0 entries for marked regular points
    long genus = 0;
    std::string str() const {
        std::vector<long> nonneg, neg;
        for (long o : orders) (o >= 0 ? nonneg : neg).push_back(o);
        std::sort(nonneg.begin(), nonneg.end());
        std::sort(neg.begin(), neg.end(), std::greater<long>());
        std::string s = kind == Kind::translation ? "H(" : "Q(";
        bool first = true;
        for (long o : nonneg) { s += (first ? "" : ",") + std::to_string(o); first = false; }
        for (long o : neg) { s += (first ? "" : ",") + std::to_string(o); first = false; }
        return s + ")";
    }
};

// resolved location of a point on the closed polygon
enum class PointLoc { interior, on_edge, at_vertex };

namespace detail {

// 0 outside, 1 strictly inside, 2 on boundary
inline int point_in_polygon(const Polygon& P, const Vec2& p) {
    int n = P.size();
    for (int i = 0; i < n; ++i) {
        const Vec2 &a = P.vert(i), &b = P.vert(i + 1);
        if (orient(a, b, p) == 0 && sgn(dot(p - a, p - b)) <= 0) return 2;
    }
    // ray casting toward +x, half-open rule on vertex y-coordinates
    bool in = false;
    for (int i = 0; i < n; ++i) {
        const Vec2 &a = P.vert(i), &b = P.vert(i + 1);
        bool a_below = cmp(a.y, p.y) <= 0, b_below = cmp(b.y, p.y) <= 0;
        if (a_below == b_below) continue;
        // edge crosses the horizontal line through p; x of crossing vs p.x
        // crossing x = a.x + (p.y-a.y)*(b.x-a.x)/(b.y-a.y)
        Q lhs = (p.y - a.y) * (b.x - a.x) - (p.x - a.x) * (b.y - a.y);
        int side = sgn(lhs) * sgn(b.y - a.y);
        if (side > 0) in = !in;
    }
    return in ? 1 : 0;
}

inline bool segments_cross_improperly(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    // true if [a,b] and [c,d] intersect in more than a shared endpoint
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4 && o1 * o2 < 0 && o3 * o4 < 0) return true;  // proper cross
    auto on = [](const Vec2& u, const Vec2& v, const Vec2& p) {
        return orient(u, v, p) == 0 && sgn(dot(p - u, p - v)) < 0;  // strictly between
    };
    return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

}  // namespace detail

class SurfaceInfo {
  public:
    const Surface* s = nullptr;
    std::vector<std::vector<int>> edge_glue;    // [poly][edge] -> gluing index
    std::vector<std::vector<int>> corner_cls;   // [poly][vtx] -> class index
    std::vector<VertexClass> classes;
    Q area = 0;
    long genus = 0;
    long total_angle_pi = 0;  // over singular + marked classes (theta, pi units)

    explicit SurfaceInfo(const Surface& surf) : s(&surf) { build(); }

    const Gluing& glue_at(int poly, int edge) const {
        int gi = edge_glue[poly][edge];
        FG_CHECK(gi >= 0, "unglued edge");
        return s->gluings[gi];
    }
    // the other side of the edge (poly,edge), and the chart map across it
    std::pair<EdgeRef, ChartMap> cross(int poly, int edge) const {
        const Gluing& g = glue_at(poly, edge);
        EdgeRef from{poly, edge};
        EdgeRef to = (g.a == from) ? g.b : g.a;
        ChartMap m = cross_map(s->polys[from.poly], from.edge, s->polys[to.poly], to.edge, g.flip);
        return {to, m};
    }
    // corner reached by walking around the vertex across the outgoing edge
    Corner next_around(Corner c) const {
        auto [to, m] = cross(c.poly, c.vtx);
        (void)m;
        return {to.poly, (to.edge + 1) % s->polys[to.poly].size()};
    }
    int class_of(Corner c) const { return corner_cls[c.poly][c.vtx]; }

    Stratum stratum() const {
        Stratum st;
        st.kind = s->kind;
        st.genus = genus;
        for (const auto& vc : classes)
            if (vc.singular(s->kind) || vc.mark >= 0) st.orders.push_back(vc.order(s->kind));
        for (int mi = 0; mi < (int)s->marks.size(); ++mi)
            if (!mark_is_vertex_class_[mi]) st.orders.push_back(0);
        std::sort(st.orders.begin(), st.orders.end(), std::greater<long>());
        return st;
    }

    // canonical representative of an arbitrary point (resolves glued boundary)
    SurfacePoint canonical_point(SurfacePoint pt) const {
        const Polygon& P = s->polys[pt.poly];
        int n = P.size();
        for (int i = 0; i < n; ++i)
            if (pt.pos == P.vert(i)) return classes[corner_cls[pt.poly][i]].rep;
        for (int e = 0; e < n; ++e) {
            const Vec2 &a = P.vert(e), &b = P.vert(e + 1);
            if (orient(a, b, pt.pos) == 0 && sgn(dot(pt.pos - a, pt.pos - b)) < 0) {
                auto [to, m] = cross(pt.poly, e);
                SurfacePoint other{to.poly, m.apply(pt.pos)};
                return pt < other ? pt : other;
            }
        }
        FG_CHECK(detail::point_in_polygon(P, pt.pos) == 1, "point outside its polygon");
        return pt;
    }

    PointLoc locate(const SurfacePoint& pt) const {
        const Polygon& P = s->polys[pt.poly];
        for (int i = 0; i < P.size(); ++i)
            if (pt.pos == P.vert(i)) return PointLoc::at_vertex;
        for (int e = 0; e < P.size(); ++e) {
            const Vec2 &a = P.vert(e), &b = P.vert(e + 1);
            if (orient(a, b, pt.pos) == 0 && sgn(dot(pt.pos - a, pt.pos - b)) < 0)
                return PointLoc::on_edge;
        }
        return PointLoc::interior;
    }

    // class index if pt is a vertex-class point, else -1
    int vertex_class_at(const SurfacePoint& pt) const {
        SurfacePoint c = canonical_point(pt);
        for (int k = 0; k < (int)classes.size(); ++k)
            if (classes[k].rep == c) return k;
        return -1;
    }

    // true zeros: angle != 2pi. marked regular classes are not zeros here.
    bool is_singular_class(int k) const { return classes[k].angle_pi != 2; }

  private:
    std::vector<bool> mark_is_vertex_class_;

    void build() {
        const Surface& S = *s;
        FG_CHECK(!S.polys.empty(), "no polygons");
        edge_glue.assign(S.polys.size(), {});
        for (size_t p = 0; p < S.polys.size(); ++p)
            edge_glue[p].assign(S.polys[p].size(), -1);
        for (size_t gi = 0; gi < S.gluings.size(); ++gi) {
            const Gluing& g = S.gluings[gi];
            for (EdgeRef e : {g.a, g.b}) {
                FG_CHECK(e.poly >= 0 && e.poly < (int)S.polys.size(), "gluing polygon out of range");
                FG_CHECK(e.edge >= 0 && e.edge < S.polys[e.poly].size(), "gluing edge out of range");
                if (g.is_fold() && e == g.b && edge_glue[e.poly][e.edge] == (int)gi) continue;
                FG_CHECK(edge_glue[e.poly][e.edge] == -1, "edge glued twice");
                edge_glue[e.poly][e.edge] = (int)gi;
            }
        }
        for (size_t p = 0; p < S.polys.size(); ++p)
            for (size_t e = 0; e < edge_glue[p].size(); ++e)
                FG_CHECK(edge_glue[p][e] >= 0, "unglued edge");

        // vertex classes by walking
        corner_cls.assign(S.polys.size(), {});
        for (size_t p = 0; p < S.polys.size(); ++p)
            corner_cls[p].assign(S.polys[p].size(), -1);
        for (size_t p = 0; p < S.polys.size(); ++p) {
            for (int vtx = 0; vtx < S.polys[p].size(); ++vtx) {
                if (corner_cls[p][vtx] >= 0) continue;
                int cls = (int)classes.size();
                classes.emplace_back();
                Corner start{(int)p, vtx}, c = start;
                do {
                    FG_CHECK(corner_cls[c.poly][c.vtx] == -1, "vertex walk collision");
                    corner_cls[c.poly][c.vtx] = cls;
                    classes[cls].corners.push_back(c);
                    c = next_around(c);
                } while (c != start);
            }
        }
        // fold midpoints are extra pi-angle classes
        for (const Gluing& g : S.gluings) {
            if (!g.is_fold()) continue;
            FG_CHECK(g.flip, "edge folded onto itself without flip");
            VertexClass vc;
            vc.fold_midpoint = true;
            vc.fold_edge = g.a;
            vc.angle_pi = 1;
            const Polygon& P = S.polys[g.a.poly];
            vc.rep = {g.a.poly, (P.vert(g.a.edge) + P.vert(g.a.edge + 1)) * Q(1, 2)};
            classes.push_back(vc);
        }

        // exact cone angles via generic-direction ray counting
        for (auto& vc : classes) {
            if (vc.fold_midpoint) continue;
            Vec2 xi = generic_direction(vc);
            long count = 0;
            for (Corner c : vc.corners) {
                const Polygon& P = S.polys[c.poly];
                Vec2 u = P.vert(c.vtx + 1) - P.vert(c.vtx);
                Vec2 w = P.vert(c.vtx - 1) - P.vert(c.vtx);
                if (in_wedge_strict(u, w, xi)) ++count;
                if (in_wedge_strict(u, w, -xi)) ++count;
            }
            vc.angle_pi = count;
            FG_CHECK(vc.angle_pi >= 1, "degenerate cone angle");
        }

        // canonical representatives: smallest corner of the class
        for (auto& vc : classes) {
            if (vc.fold_midpoint) continue;
            Corner best = *std::min_element(vc.corners.begin(), vc.corners.end());
            vc.rep = {best.poly, S.polys[best.poly].vert(best.vtx)};
        }

        for (const auto& P : S.polys) area += P.area2() / 2;

        // genus from the Euler characteristic of the glued complex
        long F = (long)S.polys.size();
        long m = 0;
        for (const auto& P : S.polys) m += P.size();
        long folds = 0;
        for (const auto& g : S.gluings) folds += g.is_fold();
        long E = (m + folds) / 2;
        long V = (long)classes.size();  // fold midpoints already included
        long chi = V - E + F;
        FG_CHECK(chi % 2 == 0, "odd euler characteristic");
        genus = (2 - chi) / 2;

        // resolve marks against classes
        mark_is_vertex_class_.assign(S.marks.size(), false);
        for (int mi = 0; mi < (int)S.marks.size(); ++mi) {
            SurfacePoint c = s->marks[mi].at;
            for (int k = 0; k < (int)classes.size(); ++k) {
                if (classes[k].rep == c) {
                    classes[k].mark = mi;
                    mark_is_vertex_class_[mi] = true;
                }
            }
        }

        for (const auto& vc : classes)
            if (vc.singular(S.kind) || vc.mark >= 0)
                total_angle_pi += vc.angle_pi;
        for (int mi = 0; mi < (int)S.marks.size(); ++mi)
            if (!mark_is_vertex_class_[mi]) total_angle_pi += 2;
    }

    Vec2 generic_direction(const VertexClass& vc) const {
        for (long k = 0;; ++k) {
            Vec2 xi{1, k};
            bool ok = true;
            for (Corner c : vc.corners) {
                const Polygon& P = s->polys[c.poly];
                Vec2 u = P.vert(c.vtx + 1) - P.vert(c.vtx);
                Vec2 w = P.vert(c.vtx - 1) - P.vert(c.vtx);
                if (parallel(u, xi) || parallel(w, xi)) { ok = false; break; }
            }
            if (ok) return xi;
        }
    }
};

struct Check {
    std::string name;
    bool pass = true;
    std::string witness;
};

struct ValidationReport {
    std::vector<Check> checks;
    std::optional<Stratum> stratum;
    Q area = 0;
    long genus = 0;
    bool ok() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    void add(std::string name, bool pass, std::string witness = "") {
        checks.push_back({std::move(name), pass, std::move(witness)});
    }
};

namespace detail {
inline bool polygon_simple(const Polygon& P, std::string& why) {
    int n = P.size();
    if (n < 3) { why = "fewer than 3 vertices"; return false; }
    for (int i = 0; i < n; ++i) {
        if (P.vert(i) == P.vert(i + 1)) { why = "zero-length edge"; return false; }
        for (int j = i + 1; j < n; ++j)
            if (P.v[i] == P.v[j]) { why = "repeated vertex"; return false; }
    }
    for (int i = 0; i < n; ++i) {
        Vec2 u = P.vert(i + 1) - P.vert(i), w = P.vert(i - 1) - P.vert(i);
        if (parallel(u, w) && sgn(dot(u, w)) > 0) { why = "zero-angle corner"; return false; }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (detail::segments_cross_improperly(P.vert(i), P.vert(i + 1), P.vert(j), P.vert(j + 1))) {
                why = "edges " + std::to_string(i) + " and " + std::to_string(j) + " intersect";
                return false;
            }
        }
    return true;
}
}  // namespace detail

inline ValidationReport validate(const Surface& S) {
    ValidationReport r;
    bool structural_ok = true;
    for (const auto& P : S.polys) {
        std::string why;
        if (!detail::polygon_simple(P, why)) {
            r.add("polygon-simple", false, "polygon " + P.id + ": " + why);
            structural_ok = false;
        } else if (sgn(P.area2()) <= 0) {
            r.add("polygon-simple", false, "polygon " + P.id + " is not counterclockwise");
            structural_ok = false;
        }
    }
    if (structural_ok) r.add("polygon-simple", true);

    // edge coverage
    {
        std::map<std::pair<int, int>, int> seen;
        std::string bad;
        for (const auto& g : S.gluings) {
            std::vector<EdgeRef> sides = g.is_fold() ? std::vector<EdgeRef>{g.a}
                                                     : std::vector<EdgeRef>{g.a, g.b};
            for (EdgeRef e : sides) {
                if (e.poly < 0 || e.poly >= (int)S.polys.size() ||
                    e.edge < 0 || e.edge >= S.polys[e.poly].size()) {
                    bad += " out-of-range gluing;";
                    continue;
                }
                if (++seen[{e.poly, e.edge}] > 1)
                    bad += " " + S.polys[e.poly].id + ".e" + std::to_string(e.edge) + " glued twice;";
            }
        }
        for (int p = 0; p < (int)S.polys.size(); ++p)
            for (int e = 0; e < S.polys[p].size(); ++e)
                if (!seen.count({p, e}))
                    bad += " " + S.polys[p].id + ".e" + std::to_string(e) + " unglued;";
        r.add("edge-coverage", bad.empty(), bad);
        structural_ok = structural_ok && bad.empty();
    }

    // gluing consistency + kind rules
    {
        std::string bad;
        for (const auto& g : S.gluings) {
            if (g.a.poly < 0 || g.b.poly < 0 || g.a.poly >= (int)S.polys.size() ||
                g.b.poly >= (int)S.polys.size())
                continue;
            Vec2 va = S.polys[g.a.poly].edge_vec(g.a.edge);
            Vec2 vb = S.polys[g.b.poly].edge_vec(g.b.edge);
            if (!g.flip && vb != -va) bad += " translation gluing with non-opposite edge vectors;";
            if (g.flip && vb != va) bad += " flip gluing with unequal edge vectors;";
            if (g.is_fold() && !g.flip) bad += " edge folded onto itself without flip;";
            if (g.flip && S.kind == Kind::translation) bad += " flip gluing on translation-kind surface;";
        }
        r.add("gluing-consistency", bad.empty(), bad);
        structural_ok = structural_ok && bad.empty();
    }

    if (!structural_ok) return r;

    // connectivity of the gluing graph
    {
        std::vector<int> comp(S.polys.size(), -1);
        std::vector<int> stack{0};
        comp[0] = 0;
        SurfaceInfo info(S);  // edge table is valid now
        while (!stack.empty()) {
            int p = stack.back();
            stack.pop_back();
            for (int e = 0; e < S.polys[p].size(); ++e) {
                auto [to, m] = info.cross(p, e);
                if (comp[to.poly] == -1) { comp[to.poly] = 0; stack.push_back(to.poly); }
            }
        }
        bool conn = true;
        std::string bad;
        for (size_t p = 0; p < comp.size(); ++p)
            if (comp[p] == -1) { conn = false; bad += " " + S.polys[p].id; }
        r.add("connected", conn, conn ? "" : "unreachable polygons:" + bad);
        if (!conn) return r;
    }

    SurfaceInfo info(S);
    r.area = info.area;
    r.genus = info.genus;

    // cone angle multiples
    {
        std::string bad;
        for (const auto& vc : info.classes) {
            if (S.kind == Kind::translation && vc.angle_pi % 2 != 0)
                bad += " class at " + S.polys[vc.rep.poly].id + " has odd angle " +
                       std::to_string(vc.angle_pi) + "pi;";
        }
        r.add("cone-angles", bad.empty(), bad);
        if (!bad.empty()) return r;
    }

    // marks: placement and non-singularity
    {
        std::string bad;
        std::set<SurfacePoint> seen;
        for (const auto& mk : S.marks) {
            if (mk.at.poly < 0 || mk.at.poly >= (int)S.polys.size()) {
                bad += " mark " + mk.label + " names a missing polygon;";
                continue;
            }
            if (detail::point_in_polygon(S.polys[mk.at.poly], mk.at.pos) == 0) {
                bad += " mark " + mk.label + " lies outside its polygon;";
                continue;
            }
            int k = info.vertex_class_at(mk.at);
            if (k >= 0 && info.classes[k].angle_pi != 2)
                bad += " mark " + mk.label + " sits on a cone point of angle != 2pi;";
            SurfacePoint c = info.canonical_point(mk.at);
            if (!seen.insert(c).second) bad += " duplicate mark at " + mk.label + ";";
            if (c != mk.at) bad += " mark " + mk.label + " not stored in canonical form;";
        }
        r.add("marks", bad.empty(), bad);
        if (!bad.empty()) return r;
    }

    Stratum st = info.stratum();
    r.stratum = st;

    // Gauss-Bonnet against the Euler-characteristic genus
    {
        long sum = 0;
        for (long o : st.orders) sum += o;
        long want = S.kind == Kind::translation ? 2 * info.genus - 2 : 4 * info.genus - 4;
        bool pass = sum == want;
        r.add("gauss-bonnet", pass,
              pass ? "" : "order sum " + std::to_string(sum) + " vs " + std::to_string(want));
    }

    // empty-stratum guard for half-translation surfaces (Masur-Smillie list)
    if (S.kind == Kind::half_translation) {
        std::vector<long> nz;
        for (long o : st.orders)
            if (o != 0) nz.push_back(o);
        std::sort(nz.begin(), nz.end());
        bool empty_stratum = nz.empty() || nz == std::vector<long>{-1, 1} ||
                             nz == std::vector<long>{1, 3} || nz == std::vector<long>{4};
        r.add("empty-stratum", !empty_stratum,
              empty_stratum ? "claimed stratum " + st.str() +
                                  " is empty: the quadratic differential is necessarily a global "
                                  "square; re-present the surface as translation kind"
                            : "");
    }
    return r;
}

inline SurfaceInfo analyze(const Surface& S) {
    ValidationReport r = validate(S);
    if (!r.ok()) {
        std::string msg = "invalid surface:";
        for (const auto& c : r.checks)
            if (!c.pass) msg += " [" + c.name + "]" + (c.witness.empty() ? "" : " " + c.witness);
        throw Error("invalid-surface", msg);
    }
    return SurfaceInfo(S);
}

inline Q area(const Surface& S) {
    Q a = 0;
    for (const auto& P : S.polys) a += P.area2() / 2;
    return a;
}

inline Surface apply_matrix(const Surface& S, const Mat2& m) {
    Q dt = m.det();
    if (sgn(dt) == 0) throw Error("matrix", "singular matrix");
    Surface out = S;
    out.origami.reset();
    bool ident = m.a == 1 && m.b == 0 && m.c == 0 && m.d == 1;
    if (ident) return S;
    for (auto& P : out.polys)
        for (auto& vv : P.v) vv = m.apply(vv);
    for (auto& mk : out.marks) mk.at.pos = m.apply(mk.at.pos);
    if (sgn(dt) < 0) {
        // restore ccw orientation; edge slots get relabeled e -> n-1-e
        for (auto& P : out.polys) {
            std::vector<Vec2> nv(P.v.size());
            int n = P.size();
            for (int j = 0; j < n; ++j) nv[j] = P.v[(n - j) % n];
            P.v = std::move(nv);
        }
        auto remap = [&](EdgeRef e) {
            int n = out.polys[e.poly].size();
            return EdgeRef{e.poly, (n - 1 - e.edge) % n};
        };
        for (auto& g : out.gluings) { g.a = remap(g.a); g.b = remap(g.b); }
    }
    // canonicalize marks against the new geometry
    SurfaceInfo info(out);
    for (auto& mk : out.marks) mk.at = info.canonical_point(mk.at);
    return out;
}

}  // namespace flatgeo
