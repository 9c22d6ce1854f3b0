#pragma once
// Cylinder decomposition in a rational direction.
//
// Main engine (tracing): every separatrix germ of the direction is traced to
// its terminating cone point / marked point.  The resulting directed saddle
// connections chain into boundary circles: the flat angle on the cylinder
// side of a boundary vertex is exactly pi, so the continuation at a cone
// point is the first parallel germ *clockwise* from the arrival back-ray
// (at a pi-pole that germ is the back-ray itself, i.e. the circle doubles
// back; at a marked regular point it is the straight continuation).  Circles
// are then paired across cylinders by a transverse probe, which also yields
// the height.
//
// Independent cross-checks (compared via affine-invariant profiles):
//   * first-return permutation engine for square-tiled surfaces,
//   * shear-to-horizontal engine (SL(2,Z) change of direction).
//
// All surface data and directions here are rational, so the first-return map
// of the directional flow is an interval exchange with rational lengths --
// every separatrix terminates.  Budgets are therefore off by default and
// exist only for callers that want explicitly bounded searches.

#include "flatgeo/direction.hpp"
#include "flatgeo/trace.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <tuple>

namespace flatgeo {

struct ScRecord {
    SurfacePoint from{-1, Vec2{0, 0}};  // canonical start point
    SurfacePoint to{-1, Vec2{0, 0}};    // canonical end point
    int from_cls = -1, to_cls = -1;     // vertex classes; -1 at a free marked point
    int from_mark = -1, to_mark = -1;   // mark index when the endpoint is marked
    Q T = 0;                            // length in |d| units (Euclidean length = T*|d|)
    SurfacePoint mid{-1, Vec2{0, 0}};   // canonical midpoint: orientation-free identity
    Vec2 hol{0, 0};                     // T*d with the sign fixed lexicographically
    std::vector<Chord> chords;          // forward geometry, chart by chart
};

struct CylinderRec {
    Q t = 0;   // waist length in |d| units (sum of boundary T's)
    Q h = 0;   // transverse height of phi(z) = -q*x + p*y across the cylinder
    Q c2 = 0;  // squared Euclidean circumference = t^2 * |d|^2
    bool fills = false;            // the direction fills the surface (unmarked torus)
    std::vector<int> bottom, top;  // directed sc indices in traversal order
    bool simple() const { return !fills && bottom.size() == 1 && top.size() == 1; }
};

struct CylinderDecomposition {
    Direction dir;
    bool periodic = false;
    bool marks_stop = true;  // whether marked points blocked the flow
    Q budget_len2 = -1;      // the budget that stopped the search, if not periodic
    std::string witness;     // which separatrix outran the budget
    std::vector<ScRecord> scs;              // all directed saddle connections
    std::vector<int> reverse_sc;            // orientation reversal; fixes pole loops
    std::vector<std::vector<int>> circles;  // boundary circles as directed sc lists
    std::vector<int> circle_cyl;            // circle index -> cylinder index
    std::vector<CylinderRec> cylinders;
    Q area = 0;
};

struct CylinderOpts {
    bool marks_stop = true;  // marked points block the flow (order-0 cone points)
    Q budget_len2 = -1;      // <0: trace without a length budget
};

namespace cyldetail {

struct VRay {  // a germ at a vertex, normalized to the corner whose wedge holds it
    MeshCorner mc;
    Vec2 d;
};

// Normalize a germ at the vertex of mc: the result lies strictly inside the
// wedge of its corner or along that corner's outgoing edge u.
inline VRay canon_vray(const Mesh& m, MeshCorner mc, const Vec2& dir) {
    const Cell& c = m.cells[mc.cell];
    Vec2 u = c.edge_vec(mc.k);
    Vec2 w = c.vert(mc.k - 1) - c.vert(mc.k);
    if (same_ray(dir, u) || in_wedge_strict(u, w, dir)) return {mc, dir};
    FG_CHECK(same_ray(dir, w), "germ not incident to this corner");
    int e = (mc.k + c.size() - 1) % c.size();  // the edge along w
    MeshCorner adj{c.nbr[e], c.nbr_slot[e]};
    Vec2 nd = c.map[e].apply_dir(dir);
    FG_CHECK(same_ray(nd, m.cells[adj.cell].edge_vec(adj.k)), "corner walk lost the germ");
    return {adj, nd};
}

// First {d,-d} germ strictly clockwise from `back` around the vertex of mc0.
// After a full turn (pi-pole: back is the only germ) returns back itself.
// The corner fan next_around(...) crosses the u edge, so it sweeps clockwise,
// and each wedge is swept from its w side down to its u side.
inline VRay next_ray_cw(const Mesh& m, MeshCorner mc0, const Vec2& back, const Vec2& dvec) {
    VRay r0 = canon_vray(m, mc0, back);
    const Vec2 nd{-dvec.x, -dvec.y};
    long limit = 0;
    for (const Cell& c : m.cells) limit += c.size();
    MeshCorner cur = r0.mc;
    for (long it = 0; it <= limit + 1; ++it) {
        if (it > 0 && cur == r0.mc) return r0;  // full turn: pole double-back
        const Cell& c = m.cells[cur.cell];
        Vec2 u = c.edge_vec(cur.k);
        Vec2 w = c.vert(cur.k - 1) - c.vert(cur.k);
        const Vec2* on_u = nullptr;      // candidate germ along u
        const Vec2* interior = nullptr;  // candidate germ strictly inside the wedge
        for (const Vec2* g : {&dvec, &nd}) {
            if (same_ray(*g, u)) on_u = g;
            else if (in_wedge_strict(u, w, *g)) interior = g;
        }
        if (it == 0) {
            // only germs strictly clockwise of the back-ray count here; when
            // the back-ray lies on u the whole wedge is behind it
            if (!same_ray(r0.d, u)) {
                if (interior && sgn(cross(*interior, r0.d)) > 0) return {cur, *interior};
                if (on_u) return {cur, *on_u};
            }
        } else {
            if (interior) return {cur, *interior};
            if (on_u) return {cur, *on_u};
        }
        cur = m.next_around(cur);
    }
    throw Error("internal", "vertex fan walk did not close");
}

// Saddle-connection chords in every chart they touch: a chord lying on a glued
// polygon edge is also emitted in the partner chart (fold partners included),
// since a transverse probe can arrive from either side.
struct SigmaChords {
    // per polygon: (directed sc index, a, b)
    std::vector<std::vector<std::tuple<int, Vec2, Vec2>>> by_poly;
};

inline SigmaChords sigma_chords(const Mesh& mesh, const std::vector<ScRecord>& scs) {
    SigmaChords sig;
    sig.by_poly.assign(mesh.s->polys.size(), {});
    for (int j = 0; j < (int)scs.size(); ++j) {
        for (const Chord& ch : scs[j].chords) {
            sig.by_poly[ch.poly].push_back({j, ch.a, ch.b});
            const Polygon& P = mesh.s->polys[ch.poly];
            for (int e = 0; e < P.size(); ++e) {
                const Vec2 &a = P.vert(e), &b = P.vert(e + 1);
                auto on_edge = [&](const Vec2& p) {
                    return orient(a, b, p) == 0 && sgn(dot(p - a, p - b)) <= 0;
                };
                if (on_edge(ch.a) && on_edge(ch.b)) {
                    auto [to, mmap] = mesh.info.cross(ch.poly, e);
                    sig.by_poly[to.poly].push_back({j, mmap.apply(ch.a), mmap.apply(ch.b)});
                    break;
                }
            }
        }
    }
    return sig;
}

// |t| with start + t*d == end (d parallel to end-start)
inline Q param_along(const Vec2& start, const Vec2& d, const Vec2& end) {
    Q t = sgn(d.x) != 0 ? Q((end.x - start.x) / d.x) : Q((end.y - start.y) / d.y);
    return sgn(t) < 0 ? Q(-t) : t;
}

struct CrossPoint {
    Q s_n = 0;      // distance from the probe start, in probe-direction units
    int sc = -1;    // directed sc whose chord was crossed
    int chord = -1;  // index of the probe chord carrying the crossing
    Vec2 at{0, 0};             // crossing point
    Vec2 sc_dir{0, 0};         // direction of the crossed sc chord in that chart
    Vec2 probe_dir{0, 0};      // direction of the probe chord in that chart
};

// Earliest strictly-positive crossing of the probe with the sc chords.
// Endpoint touches count (r,s inclusive): a crossing sitting exactly on a
// chord break or on a re-charted fold image must not be missed.
inline std::optional<CrossPoint> first_crossing(const std::vector<Chord>& probe, const Vec2& pvec,
                                                const SigmaChords& sig) {
    Q acc = 0;
    for (int pi = 0; pi < (int)probe.size(); ++pi) {
        const Chord& pc = probe[pi];
        Vec2 u = pc.b - pc.a;
        Q t_pc = param_along(pc.a, pvec, pc.b);
        std::optional<CrossPoint> best;
        for (const auto& [j, ca, cb] : sig.by_poly[pc.poly]) {
            Vec2 v = cb - ca;
            Q den = cross(u, v);
            FG_CHECK(sgn(den) != 0, "probe chord parallel to a saddle connection");
            Q s = cross(ca - pc.a, v) / den;
            Q r = cross(ca - pc.a, u) / den;
            if (sgn(s) < 0 || s > 1 || sgn(r) < 0 || r > 1) continue;
            Q sn = acc + s * t_pc;
            if (sgn(sn) <= 0) continue;
            if (!best || sn < best->s_n)
                best = CrossPoint{sn, j, pi, pc.a + u * s, v, u};
        }
        if (best) return best;  // s_n grows chord by chord, so the first chord wins
        acc += t_pc;
    }
    return std::nullopt;
}

struct ProbeHit {
    int sc = -1;           // crossed directed sc as recorded
    Vec2 sc_dir{0, 0};     // its chord direction at the crossing, crossing chart
    Vec2 e_hit{0, 0};      // probe travel direction at the crossing, same chart
    Q phi = 0;             // exact transverse (phi) distance from start to crossing
};

// Shoot a transverse ray from a start point and report the first boundary
// crossing.  side*+n is tried first; if the ray runs into a cone point or
// marked point exactly, slanted directions side*(n + k*d) are tried in turn --
// every slant is transverse and phi still advances monotonically along it, so
// the first crossing is the far boundary circle of the same cylinder and its
// phi distance is the height.  phi is accumulated chord by chord because
// charts may flip its sign.  Several starts are accepted because a single
// start can be blocked by every slant at once: when an anchor sits at a purely
// transverse period vector from the start, each slant reaches it exactly at
// the far crossing.  Moving the start along the circle breaks the alignment.
inline ProbeHit transverse_probe(const Mesh& mesh, const TraceOpts& stops, const SigmaChords& sig,
                                 const std::vector<SurfacePoint>& starts, int side,
                                 const Vec2& dvec, const Vec2& ndvec) {
    auto absq = [](Q v) { return sgn(v) < 0 ? Q(-v) : v; };
    for (const SurfacePoint& start : starts) {
        for (int ki = 0; ki < 25; ++ki) {
            long k = (ki % 2) ? (ki + 1) / 2 : -(ki / 2);  // 0, 1, -1, 2, -2, ...
            Vec2 e{ndvec.x + Q(k) * dvec.x, ndvec.y + Q(k) * dvec.y};
            if (side < 0) e = Vec2{-e.x, -e.y};
            Q budget = (norm2(e) + 1) * (mesh.info.area * mesh.info.area + 1) * 4;
            for (int bi = 0; bi < 40; ++bi) {
                TraceOpts po = stops;
                po.record = true;
                po.budget_len2 = budget;
                Tracer tr(mesh, po);
                Trace t = tr.from_point(start, e);
                auto hx = first_crossing(t.chords, e, sig);
                if (hx) {
                    bool stopped =
                        t.hit.kind != HitKind::budget && t.hit.kind != HitKind::closed;
                    if (!(stopped && hx->s_n >= t.hit.T)) {  // crossing at the stop itself: degenerate
                        Q phi = 0;
                        for (int c = 0; c < hx->chord; ++c)
                            phi += absq(cross(dvec, t.chords[c].b - t.chords[c].a));
                        phi += absq(cross(dvec, hx->at - t.chords[hx->chord].a));
                        return {hx->sc, hx->sc_dir, hx->probe_dir, phi};
                    }
                }
                if (t.hit.kind == HitKind::budget && !hx) {
                    budget *= 16;
                    continue;
                }
                if (t.hit.kind == HitKind::closed)
                    FG_CHECK(hx.has_value(), "closed transverse probe missed the boundary");
                break;  // blocked exactly on a stop: try the next slant
            }
        }
    }
    throw Error("internal", "transverse probe exhausted its slants");
}

}  // namespace cyldetail

inline CylinderDecomposition cylinders_in_direction(const Mesh& mesh, const Direction& dir,
                                                    const CylinderOpts& copts = {}) {
    using namespace cyldetail;
    const SurfaceInfo& info = mesh.info;
    CylinderDecomposition dec;
    dec.dir = dir;
    dec.marks_stop = copts.marks_stop;
    dec.area = info.area;
    Vec2 dvec = dir.vec();
    Vec2 ndvec = rot90ccw(dvec);
    Q n2d = norm2(dvec);

    auto germ_sign = [&](const Vec2& g) {
        if (same_ray(g, dvec)) return +1;
        FG_CHECK(same_ray(g, Vec2{-dvec.x, -dvec.y}), "germ transverse to the direction");
        return -1;
    };

    // ---- stop set -----------------------------------------------------------
    TraceOpts topts;
    topts.record = true;
    topts.budget_len2 = copts.budget_len2;
    std::vector<int> pole_classes;
    for (int k = 0; k < (int)info.classes.size(); ++k) {
        const VertexClass& K = info.classes[k];
        if (!(info.is_singular_class(k) || (copts.marks_stop && K.mark >= 0))) continue;
        topts.stop_classes.insert(k);
        if (K.fold_midpoint) pole_classes.push_back(k);
    }
    std::vector<int> free_marks;  // marks at non-vertex points
    if (copts.marks_stop)
        for (int mi = 0; mi < (int)mesh.s->marks.size(); ++mi)
            if (info.vertex_class_at(mesh.s->marks[mi].at) < 0) {
                free_marks.push_back(mi);
                topts.stop_points.push_back(mesh.s->marks[mi].at);
            }

    // ---- no stops: the direction fills the surface (unmarked flat torus) ----
    if (topts.stop_classes.empty() && topts.stop_points.empty()) {
        Tracer free_tracer(mesh, TraceOpts{{}, {}, Q(-1), 20000000, false});
        SurfacePoint base{0, mesh.s->polys[0].vert(0)};
        Trace t = free_tracer.from_point(base, dvec);
        FG_CHECK(t.hit.kind == HitKind::closed, "stop-free surface must close up");
        CylinderRec cyl;
        cyl.fills = true;
        cyl.t = t.hit.T;
        cyl.c2 = t.hit.T * t.hit.T * n2d;
        cyl.h = info.area / t.hit.T;
        dec.cylinders.push_back(cyl);
        dec.periodic = true;
        return dec;
    }

    Tracer tracer(mesh, topts);

    // ---- enumerate and trace every directed separatrix germ -----------------
    // Key space: corner germs (0, cell, k, sign), free-mark germs (1, mark, 0,
    // sign), pole germs (2, class, 0, 0).  Enumeration order fixes sc indices.
    using RayKey = std::tuple<int, long, long, int>;
    std::map<RayKey, int> ray_index;
    struct Arrival {
        int kind = -1;  // 0 vertex (non-pole), 1 free mark, 2 pole
        MeshCorner corner{};
        Vec2 in_dir{0, 0};
        int mark = -1;
    };
    std::vector<Arrival> arrivals;
    std::vector<RayKey> start_keys;

    auto start_of = [&](const RayKey& key) {
        struct Start {
            SurfacePoint at;
            int cls, mark;
        };
        auto [kind, a, b, sg] = key;
        if (kind == 0) {
            int cls = mesh.cells[a].cls[(int)b];
            return Start{info.classes[cls].rep, cls, info.classes[cls].mark};
        }
        if (kind == 1) return Start{mesh.s->marks[a].at, -1, (int)a};
        return Start{info.classes[a].rep, (int)a, info.classes[a].mark};
    };

    auto record_trace = [&](const RayKey& key, const Trace& tr) -> bool {
        auto st = start_of(key);
        if (tr.hit.kind == HitKind::budget) {
            dec.periodic = false;
            dec.budget_len2 = copts.budget_len2;
            dec.witness = "separatrix from poly " + std::to_string(st.at.poly) + " at (" +
                          q_str(st.at.pos.x) + ", " + q_str(st.at.pos.y) + ") exceeded the budget";
            return false;
        }
        ScRecord sc;
        sc.from = st.at;
        sc.from_cls = st.cls;
        sc.from_mark = st.mark;
        sc.T = tr.hit.T;
        sc.chords = tr.chords;
        Arrival arr;
        switch (tr.hit.kind) {
            case HitKind::singular:
            case HitKind::stop_class: {
                sc.to = info.classes[tr.hit.cls].rep;
                sc.to_cls = tr.hit.cls;
                sc.to_mark = info.classes[tr.hit.cls].mark;
                if (info.classes[tr.hit.cls].fold_midpoint)
                    arr = {2, MeshCorner{}, tr.hit.in_dir, sc.to_mark};
                else
                    arr = {0, tr.hit.corner, tr.hit.in_dir, sc.to_mark};
                break;
            }
            case HitKind::stop_point: {
                sc.to = tr.hit.at;
                sc.to_cls = -1;
                for (int mi : free_marks)
                    if (mesh.s->marks[mi].at == tr.hit.at) sc.to_mark = mi;
                FG_CHECK(sc.to_mark >= 0, "stopped at an unknown point");
                arr = {1, MeshCorner{}, tr.hit.in_dir, sc.to_mark};
                break;
            }
            case HitKind::closed: {  // a loop back to a free-mark start
                sc.to = sc.from;
                sc.to_cls = sc.from_cls;
                sc.to_mark = sc.from_mark;
                FG_CHECK(sc.from_mark >= 0 && sc.from_cls < 0, "closed separatrix from a cone");
                arr = {1, MeshCorner{}, Vec2{0, 0}, sc.from_mark};
                break;
            }
            default: FG_CHECK(false, "unexpected trace outcome");
        }
        FG_CHECK(sgn(sc.T) > 0, "zero-length saddle connection");
        FG_CHECK(!sc.chords.empty(), "saddle connection with no recorded chords");
        // canonical midpoint: walk the chords to parameter T/2
        {
            Q half = sc.T / 2, acc = 0;
            bool found = false;
            for (const Chord& ch : sc.chords) {
                Q t_ch = param_along(ch.a, dvec, ch.b);
                if (acc + t_ch >= half) {
                    Q lam = (half - acc) / t_ch;
                    sc.mid = info.canonical_point({ch.poly, ch.a + (ch.b - ch.a) * lam});
                    found = true;
                    break;
                }
                acc += t_ch;
            }
            FG_CHECK(found, "midpoint walk fell off the chord list");
        }
        sc.hol = Vec2{sc.T * dvec.x, sc.T * dvec.y};
        if (sgn(sc.hol.x) < 0 || (sgn(sc.hol.x) == 0 && sgn(sc.hol.y) < 0))
            sc.hol = Vec2{-sc.hol.x, -sc.hol.y};
        ray_index[key] = (int)dec.scs.size();
        start_keys.push_back(key);
        dec.scs.push_back(std::move(sc));
        arrivals.push_back(arr);
        return true;
    };

    // corner germs, in (cell, corner, sign) order
    for (int ci = 0; ci < (int)mesh.cells.size(); ++ci) {
        const Cell& c = mesh.cells[ci];
        for (int k = 0; k < c.size(); ++k) {
            if (!topts.stop_classes.count(c.cls[k])) continue;
            Vec2 u = c.edge_vec(k);
            Vec2 w = c.vert(k - 1) - c.vert(k);
            for (int sg : {-1, +1}) {
                Vec2 dd = sg > 0 ? dvec : Vec2{-dvec.x, -dvec.y};
                if (!(same_ray(dd, u) || in_wedge_strict(u, w, dd))) continue;
                if (!record_trace(RayKey{0, ci, k, sg}, tracer.from_corner_ray({ci, k, dd})))
                    return dec;
            }
        }
    }
    // free-mark germs
    for (int mi : free_marks)
        for (int sg : {-1, +1}) {
            Vec2 dd = sg > 0 ? dvec : Vec2{-dvec.x, -dvec.y};
            if (!record_trace(RayKey{1, mi, 0, sg}, tracer.from_point(mesh.s->marks[mi].at, dd)))
                return dec;
        }
    // pole germs (one per pi-cone)
    for (int cls : pole_classes)
        if (!record_trace(RayKey{2, cls, 0, 0}, tracer.from_pole_ray(cls, dvec))) return dec;

    dec.periodic = true;
    int nsc = (int)dec.scs.size();
    FG_CHECK(nsc > 0, "stops exist but no separatrix was found");

    // ---- orientation reversal via the orientation-free identity (mid, T) ----
    {
        std::map<std::pair<SurfacePoint, Q>, std::vector<int>> groups;
        for (int j = 0; j < nsc; ++j) groups[{dec.scs[j].mid, dec.scs[j].T}].push_back(j);
        dec.reverse_sc.assign(nsc, -1);
        for (auto& [key, g] : groups) {
            if (g.size() == 2) {
                dec.reverse_sc[g[0]] = g[1];
                dec.reverse_sc[g[1]] = g[0];
                FG_CHECK(dec.scs[g[0]].from == dec.scs[g[1]].to &&
                             dec.scs[g[0]].to == dec.scs[g[1]].from,
                         "reverse pair endpoints do not swap");
            } else {
                FG_CHECK(g.size() == 1, "more than two germs share a midpoint");
                int j = g[0];
                // a self-reverse connection only happens as a pole-to-pole loop
                FG_CHECK(std::get<0>(start_keys[j]) == 2 && arrivals[j].kind == 2 &&
                             dec.scs[j].from_cls == dec.scs[j].to_cls,
                         "unpaired separatrix is not a pole loop");
                dec.reverse_sc[j] = j;
            }
        }
    }

    // ---- chain directed sc's into boundary circles ---------------------------
    // continuation after sc j, keeping the cylinder on the left
    auto next_sc = [&](int j) -> int {
        const Arrival& arr = arrivals[j];
        if (arr.kind == 2) return dec.reverse_sc[j];  // pole: double back
        if (arr.kind == 1) {
            // marked regular point: continue straight, i.e. take the germ at
            // the end mark other than our own reverse
            int mi = arr.mark;
            auto itp = ray_index.find(RayKey{1, mi, 0, +1});
            auto itm = ray_index.find(RayKey{1, mi, 0, -1});
            FG_CHECK(itp != ray_index.end() && itm != ray_index.end(), "mark missing a germ");
            int jp = itp->second, jm = itm->second;
            FG_CHECK(dec.reverse_sc[j] == jp || dec.reverse_sc[j] == jm,
                     "reverse germ absent from the end mark");
            return dec.reverse_sc[j] == jp ? jm : jp;
        }
        Vec2 back{-arr.in_dir.x, -arr.in_dir.y};
        VRay vr = next_ray_cw(mesh, arr.corner, back, dvec);
        auto it = ray_index.find(RayKey{0, vr.mc.cell, vr.mc.k, germ_sign(vr.d)});
        FG_CHECK(it != ray_index.end(), "continuation germ was never traced");
        return it->second;
    };

    {
        std::vector<int> used(nsc, 0);
        for (int j0 = 0; j0 < nsc; ++j0) {
            if (used[j0]) continue;
            std::vector<int> cyc;
            int j = j0;
            long guard = 0;
            do {
                FG_CHECK(!used[j], "circle walk re-entered a used germ");
                used[j] = 1;
                cyc.push_back(j);
                j = next_sc(j);
                FG_CHECK(++guard <= 4L * nsc + 4, "circle walk did not close");
            } while (j != j0);
            // a self-reverse pole loop is geometrically traversed twice
            std::vector<int> expanded;
            for (int e : cyc) {
                expanded.push_back(e);
                if (dec.reverse_sc[e] == e) expanded.push_back(e);
            }
            dec.circles.push_back(std::move(expanded));
        }
    }
    int ncirc = (int)dec.circles.size();

    // ---- pair circles across cylinders by transverse probes -----------------
    SigmaChords sig = sigma_chords(mesh, dec.scs);
    std::vector<int> circle_of(nsc, -1);
    for (int c = 0; c < ncirc; ++c)
        for (int j : dec.circles[c]) circle_of[j] = c;

    auto circle_len = [&](int c) {
        Q t = 0;
        for (int j : dec.circles[c]) t += dec.scs[j].T;
        return t;
    };

    dec.circle_cyl.assign(ncirc, -1);
    for (int c = 0; c < ncirc; ++c) {
        if (dec.circle_cyl[c] >= 0) continue;
        // probe into the cylinder this circle keeps on its left, from interior
        // points of the first sc's first chord (several parameters, so one
        // anchor-aligned start cannot block every slant)
        const ScRecord& sc0 = dec.scs[dec.circles[c][0]];
        const Chord& ch0 = sc0.chords[0];
        std::vector<SurfacePoint> starts;
        const std::array<Q, 7> params{Q(1, 2), Q(1, 3), Q(2, 3), Q(1, 5), Q(2, 5), Q(3, 5), Q(4, 5)};
        for (const Q& p : params) starts.push_back({ch0.poly, ch0.a + (ch0.b - ch0.a) * p});
        int side = germ_sign(ch0.b - ch0.a);
        ProbeHit hit = transverse_probe(mesh, topts, sig, starts, side, dvec, ndvec);
        // the crossed directed sc that keeps the probe's origin side on its
        // left satisfies cross(germ, e_hit) < 0
        Q cr = cross(hit.sc_dir, hit.e_hit);
        FG_CHECK(sgn(cr) != 0, "crossed chord parallel to the probe");
        int jx = sgn(cr) < 0 ? hit.sc : dec.reverse_sc[hit.sc];
        int partner = circle_of[jx];
        FG_CHECK(partner != c, "probe landed back on the probed circle");
        FG_CHECK(dec.circle_cyl[partner] < 0, "probe landed on an already-paired circle");
        CylinderRec cyl;
        cyl.h = hit.phi;
        int bottom = c, top = partner;
        if (mesh.s->kind == Kind::translation) {
            // global orientation: the bottom circle travels in +d
            int s0 = 0;
            for (int j : dec.circles[c]) {
                int sj = germ_sign(dec.scs[j].chords[0].b - dec.scs[j].chords[0].a);
                FG_CHECK(s0 == 0 || sj == s0, "mixed germ signs on one circle");
                s0 = sj;
            }
            if (s0 < 0) std::swap(bottom, top);
        }
        cyl.bottom = dec.circles[bottom];
        cyl.top = dec.circles[top];
        cyl.t = circle_len(bottom);
        FG_CHECK(cyl.t == circle_len(top), "boundary circles of one cylinder disagree in length");
        cyl.c2 = cyl.t * cyl.t * n2d;
        dec.circle_cyl[c] = dec.circle_cyl[partner] = (int)dec.cylinders.size();
        dec.cylinders.push_back(std::move(cyl));
    }

    Q total = 0;
    for (const CylinderRec& cyl : dec.cylinders) total += cyl.t * cyl.h;
    FG_CHECK(total == info.area, "cylinder areas do not sum to the surface area");
    return dec;
}

// ---- point location ---------------------------------------------------------

struct PointInCylinder {
    bool on_boundary = false;  // the point lies on a saddle connection or stop
    int sc = -1;               // witness sc when on a connection (smaller of the pair)
    int cyl = -1;
    Q offset = 0;  // phi-distance above the bottom circle, in (0,h); [0,h) if fills
};

// Locate a point relative to a periodic decomposition of the same mesh.
inline PointInCylinder locate_in_cylinders(const Mesh& mesh, const CylinderDecomposition& dec,
                                           const SurfacePoint& raw) {
    using namespace cyldetail;
    FG_CHECK(dec.periodic, "cannot locate points in a non-periodic direction");
    const SurfaceInfo& info = mesh.info;
    SurfacePoint pt = info.canonical_point(raw);
    Vec2 dvec = dec.dir.vec();
    Vec2 ndvec = rot90ccw(dvec);

    if (!dec.scs.empty()) {
        int vc = info.vertex_class_at(pt);
        for (const ScRecord& sc : dec.scs)
            if ((vc >= 0 && (sc.from_cls == vc || sc.to_cls == vc)) || sc.from == pt || sc.to == pt)
                return {true, -1, -1, 0};
        SigmaChords sig = sigma_chords(mesh, dec.scs);
        int hit_sc = -1;
        for (const auto& [j, ca, cb] : sig.by_poly[pt.poly])
            if (orient(ca, cb, pt.pos) == 0 && sgn(dot(pt.pos - ca, pt.pos - cb)) <= 0)
                if (hit_sc < 0 || j < hit_sc) hit_sc = j;
        if (hit_sc >= 0) {
            int r = dec.reverse_sc[hit_sc];
            return {true, r < hit_sc ? r : hit_sc, -1, 0};
        }
        // interior: probe transversally and read off the circle we exit by
        TraceOpts popts;
        for (int k = 0; k < (int)info.classes.size(); ++k)
            if (info.is_singular_class(k) || (dec.marks_stop && info.classes[k].mark >= 0))
                popts.stop_classes.insert(k);
        if (dec.marks_stop)
            for (const Mark& mk : mesh.s->marks)
                if (info.vertex_class_at(mk.at) < 0) popts.stop_points.push_back(mk.at);
        std::vector<int> circle_of(dec.scs.size(), -1);
        for (int c = 0; c < (int)dec.circles.size(); ++c)
            for (int j : dec.circles[c]) circle_of[j] = c;
        ProbeHit hit = transverse_probe(mesh, popts, sig, {pt}, -1, dvec, ndvec);
        Q cr = cross(hit.sc_dir, hit.e_hit);
        FG_CHECK(sgn(cr) != 0, "crossed chord parallel to the probe");
        int jx = sgn(cr) < 0 ? hit.sc : dec.reverse_sc[hit.sc];
        int cc = circle_of[jx];
        int cyl = dec.circle_cyl[cc];
        const CylinderRec& C = dec.cylinders[cyl];
        bool is_bottom = dec.circles[cc] == C.bottom;
        Q off = is_bottom ? hit.phi : C.h - hit.phi;
        FG_CHECK(sgn(off) > 0 && off < C.h, "interior point offset out of range");
        return {false, -1, cyl, off};
    }

    // fills-surface case: offset from the base vertex leaf, computed by
    // developing the chart chain (translation gluings only; phi is then well
    // defined modulo the height)
    FG_CHECK(mesh.s->kind == Kind::translation, "stop-free half-translation surface");
    const CylinderRec& C = dec.cylinders[0];
    auto phi = [&](const Vec2& v) -> Q { return -dvec.y * v.x + dvec.x * v.y; };
    std::vector<std::optional<Vec2>> shift(mesh.s->polys.size());
    shift[0] = Vec2{0, 0};
    std::vector<int> bfs{0};
    for (size_t i = 0; i < bfs.size(); ++i) {
        int p = bfs[i];
        for (int e = 0; e < mesh.s->polys[p].size(); ++e) {
            auto [to, m] = info.cross(p, e);
            if (shift[to.poly]) continue;
            FG_CHECK(m.sign == 1, "flip gluing on a translation surface");
            shift[to.poly] = Vec2{shift[p]->x - m.c.x, shift[p]->y - m.c.y};
            bfs.push_back(to.poly);
        }
    }
    FG_CHECK(shift[pt.poly].has_value(), "disconnected surface");
    Vec2 base = mesh.s->polys[0].vert(0);
    Q off = phi(pt.pos + *shift[pt.poly]) - phi(base);
    Q m = off / C.h;
    Z fl = m.get_num() / m.get_den();  // floor of m
    if (sgn(m.get_num() % m.get_den()) < 0) fl -= 1;
    off -= Q(fl) * C.h;
    FG_CHECK(sgn(off) >= 0 && off < C.h, "fills-surface offset out of range");
    return {false, -1, 0, off};
}

// ---- strip charts: cylinder bodies as convex polygon fragments ---------------

struct StripCell {
    int poly = -1;
    std::vector<Vec2> v;  // ccw convex, polygon coordinates
    int cyl = -1;
};

namespace cyldetail {

// clip a ccw convex polygon to the half-plane f(z) >= 0 (f affine), exactly
template <class F>
inline std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, F f) {
    std::vector<Vec2> out;
    int n = (int)poly.size();
    for (int i = 0; i < n; ++i) {
        const Vec2 &a = poly[i], &b = poly[(i + 1) % n];
        Q fa = f(a), fb = f(b);
        if (sgn(fa) >= 0) out.push_back(a);
        if ((sgn(fa) > 0 && sgn(fb) < 0) || (sgn(fa) < 0 && sgn(fb) > 0))
            out.push_back(a + (b - a) * (fa / (fa - fb)));
    }
    return out;
}

inline Q poly_area2(const std::vector<Vec2>& v) {  // twice the signed area
    Q s = 0;
    for (size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
    return s;
}

}  // namespace cyldetail

// Cut every mesh cell along the saddle-connection chord levels and assign each
// convex fragment to its cylinder. The fragments partition the surface: their
// areas sum to c*h per cylinder (checked). Cutting along the full chord lines
// can only refine the partition, never merge across a boundary.
inline std::vector<StripCell> strip_cells(const Mesh& mesh, const CylinderDecomposition& dec) {
    using namespace cyldetail;
    FG_CHECK(dec.periodic, "no strip cells for a non-periodic direction");
    Vec2 dvec = dec.dir.vec();
    auto lam = [&](const Vec2& z) -> Q { return cross(dvec, z); };
    std::vector<StripCell> out;
    if (dec.scs.empty()) {
        for (const Cell& c : mesh.cells) out.push_back({c.poly, c.v, 0});
    } else {
        SigmaChords sig = sigma_chords(mesh, dec.scs);
        for (const Cell& c : mesh.cells) {
            Q lmin = lam(c.v[0]), lmax = lmin;
            for (const Vec2& vv : c.v) {
                Q l = lam(vv);
                if (l < lmin) lmin = l;
                if (l > lmax) lmax = l;
            }
            std::set<Q> cuts;
            for (const auto& [j, a, b] : sig.by_poly[c.poly]) {
                (void)j;
                (void)b;
                Q l = lam(a);
                if (lmin < l && l < lmax) cuts.insert(l);
            }
            std::vector<Q> ls{lmin};
            ls.insert(ls.end(), cuts.begin(), cuts.end());
            ls.push_back(lmax);
            for (size_t i = 0; i + 1 < ls.size(); ++i) {
                std::vector<Vec2> piece =
                    clip_halfplane(c.v, [&](const Vec2& z) -> Q { return lam(z) - ls[i]; });
                piece = clip_halfplane(piece,
                                       [&](const Vec2& z) -> Q { return ls[i + 1] - lam(z); });
                if (piece.size() < 3 || sgn(poly_area2(piece)) <= 0) continue;
                Vec2 cen{0, 0};
                for (const Vec2& vv : piece) cen = cen + vv;
                cen = cen * (Q(1) / Q((long)piece.size()));
                PointInCylinder loc = locate_in_cylinders(mesh, dec, {c.poly, cen});
                FG_CHECK(!loc.on_boundary, "fragment centroid landed on a boundary");
                out.push_back({c.poly, std::move(piece), loc.cyl});
            }
        }
    }
    std::vector<Q> acc(dec.cylinders.size(), Q(0));
    for (const StripCell& f : out) acc[f.cyl] += poly_area2(f.v);
    for (size_t k = 0; k < acc.size(); ++k)
        FG_CHECK(acc[k] == 2 * dec.cylinders[k].t * dec.cylinders[k].h,
                 "cylinder fragments do not fill the strip");
    return out;
}

// ---- independent engine 1: first-return permutation (square-tiled) ----------

inline bool origami_engine_applicable(const Surface& s) {
    if (!s.origami) return false;
    for (const Mark& mk : s.marks) {
        const Vec2& p = mk.at.pos;
        bool corner = (p == Vec2{0, 0}) || (p == Vec2{1, 0}) || (p == Vec2{1, 1}) ||
                      (p == Vec2{0, 1});
        if (!corner) return false;
    }
    return true;
}

// Cylinder waists of a square-tiled surface in direction (p,q), by cycles of
// the first-return permutation on the n*q bottom-edge intervals. Every
// cylinder of a square-tiled surface in a primitive direction has height 1 in
// phi-units, waist k, and boundary length multisets {1,...,1} (k ones) on both
// sides, so the waist multiset determines the whole profile.
inline std::vector<long> origami_cylinder_ks(const Surface& s, const Direction& dir) {
    FG_CHECK(origami_engine_applicable(s), "first-return engine needs a marked square tiling");
    const Origami& o = *s.origami;
    long n = o.n;
    FG_CHECK(dir.p.fits_slong_p() && dir.q.fits_slong_p(), "direction too large");
    long p = dir.p.get_si(), q = dir.q.get_si();
    std::vector<long> ks;
    if (q == 0) {  // horizontal: cycles of the right-neighbor permutation
        std::vector<char> seen(n, 0);
        for (long i = 0; i < n; ++i) {
            if (seen[i]) continue;
            long len = 0;
            for (long j = i; !seen[j]; j = o.h[j]) {
                seen[j] = 1;
                ++len;
            }
            ks.push_back(len);
        }
    } else {
        std::vector<long> hinv(n);
        for (long i = 0; i < n; ++i) hinv[o.h[i]] = i;
        // state (i,m) is the bottom-edge interval (m/q,(m+1)/q) of square i;
        // the flow re-enters a bottom edge after crossing floor((m+p)/q) right
        // edges (left edges if negative) and one top edge
        std::vector<char> seen(n * q, 0);
        for (long st = 0; st < n * q; ++st) {
            if (seen[st]) continue;
            long len = 0, cur = st;
            while (!seen[cur]) {
                seen[cur] = 1;
                ++len;
                long i = cur / q, m = cur % q;
                long num = m + p;
                long k = num / q - ((num % q != 0 && num < 0) ? 1 : 0);
                long m2 = num - k * q;
                long j = i;
                for (long t = 0; t < k; ++t) j = o.h[j];
                for (long t = 0; t < -k; ++t) j = hinv[j];
                cur = o.v[j] * q + m2;
            }
            FG_CHECK(len % q == 0, "return-map cycle length not divisible by q");
            ks.push_back(len / q);
        }
    }
    std::sort(ks.begin(), ks.end());
    long tot = 0;
    for (long k : ks) tot += k;
    FG_CHECK(tot == n, "return-map cycles do not cover the squares");
    return ks;
}

// ---- independent engine 2: shear to horizontal -------------------------------

// An SL(2,Z) matrix sending dir to (1,0): [[a,b],[-q,p]] with a*p + b*q = 1.
inline Mat2 shear_to_horizontal(const Direction& dir) {
    Z g, a, b;
    mpz_gcdext(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t(), dir.p.get_mpz_t(), dir.q.get_mpz_t());
    FG_CHECK(g == 1, "direction not primitive");
    return Mat2{Q(a), Q(b), Q(-dir.q), Q(dir.p)};
}

// Decompose by shearing the whole surface so that dir becomes horizontal and
// running the tracing engine there. t, h, and the boundary length multisets
// are invariant under the affine change of charts, so profiles must agree.
inline CylinderDecomposition cylinders_sheared(const Surface& s, const Direction& dir,
                                               const CylinderOpts& copts = {}) {
    Surface sh = apply_matrix(s, shear_to_horizontal(dir));
    Mesh m(sh);
    return cylinders_in_direction(m, Direction{1, 0}, copts);
}

// ---- profiles: affine-invariant comparison between engines -------------------

struct CylProfile {
    Q t = 0, h = 0;
    bool fills = false;
    std::vector<Q> bottom_T, top_T;  // sorted; (bottom,top) order normalized

    auto tie() const { return std::tie(t, h, fills, bottom_T, top_T); }
    bool operator==(const CylProfile& o) const { return tie() == o.tie(); }
    bool operator<(const CylProfile& o) const { return tie() < o.tie(); }
};

inline std::vector<CylProfile> profile(const CylinderDecomposition& dec) {
    FG_CHECK(dec.periodic, "profile of a non-periodic direction");
    std::vector<CylProfile> out;
    for (const CylinderRec& c : dec.cylinders) {
        CylProfile pr;
        pr.t = c.t;
        pr.h = c.h;
        pr.fills = c.fills;
        for (int j : c.bottom) pr.bottom_T.push_back(dec.scs[j].T);
        for (int j : c.top) pr.top_T.push_back(dec.scs[j].T);
        std::sort(pr.bottom_T.begin(), pr.bottom_T.end());
        std::sort(pr.top_T.begin(), pr.top_T.end());
        if (pr.top_T < pr.bottom_T) std::swap(pr.bottom_T, pr.top_T);
        out.push_back(std::move(pr));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<CylProfile> profile_from_ks(const std::vector<long>& ks) {
    std::vector<CylProfile> out;
    for (long k : ks) {
        CylProfile pr;
        pr.t = k;
        pr.h = 1;
        pr.bottom_T.assign(k, Q(1));
        pr.top_T.assign(k, Q(1));
        out.push_back(std::move(pr));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace flatgeo
