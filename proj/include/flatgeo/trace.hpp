#pragma once
// Exact straight-line flow on a convex-cell mesh. Directions are rational, so
// every chord is a rational multiple of the trace direction and lengths are
// tracked as the exact sum T of chord parameters (length = T*|d|).

#include "flatgeo/mesh.hpp"

#include <optional>
#include <variant>

namespace flatgeo {

struct TraceOpts {
    std::set<int> stop_classes;             // extra vertex classes that stop the trace
    std::vector<SurfacePoint> stop_points;  // canonical non-vertex stopping points
    Q budget_len2 = Q(-1);                  // stop once T^2*|d|^2 exceeds this (<0: none)
    long max_steps = 20000000;
    bool record = false;                    // keep the chord list
};

enum class HitKind { closed, singular, stop_class, stop_point, budget };

struct TraceHit {
    HitKind kind = HitKind::budget;
    Q T = 0;  // chord-parameter sum at the event
    int cls = -1;
    SurfacePoint at{-1, Vec2{0, 0}};
    MeshCorner corner{};   // arrival corner for singular/stop_class hits
    int cell = -1;         // cell of a stop_point hit
    Vec2 in_dir{0, 0};     // incoming direction in the arrival chart
};

struct Chord {
    int poly;
    Vec2 a, b;
};

struct Trace {
    TraceHit hit;
    std::vector<Chord> chords;
    Q len2(const Vec2& d) const { return hit.T * hit.T * norm2(d); }
};

struct CornerRay {
    int cell = -1, k = -1;
    Vec2 d;
};

class Tracer {
  public:
    Tracer(const Mesh& m, TraceOpts o) : mesh(m), opts(std::move(o)) {
        cell_stops.assign(mesh.cells.size(), {});
        for (const SurfacePoint& q : opts.stop_points) {
            FG_CHECK(mesh.info.vertex_class_at(q) < 0, "vertex stop points must use stop_classes");
            for (auto& [ci, pos] : mesh.realize(q)) cell_stops[ci].push_back({pos, q});
        }
    }

    const Mesh& mesh;
    TraceOpts opts;

    // start anywhere that is not a cone point; d in the chart of start.poly
    Trace from_point(const SurfacePoint& start, const Vec2& d) const {
        FG_CHECK(!d.is_zero(), "zero direction");
        int vc = mesh.info.vertex_class_at(start);
        if (vc >= 0) {
            FG_CHECK(!mesh.info.is_singular_class(vc), "trace started at a cone point");
            // find a mesh corner of this class holding these exact coordinates
            for (int ci : mesh.cells_of_poly[start.poly]) {
                const Cell& c = mesh.cells[ci];
                for (int k = 0; k < c.size(); ++k)
                    if (c.cls[k] == vc && c.v[k] == start.pos) {
                        Outcome nxt = resolve_vertex({ci, k}, d);
                        if (auto* h = std::get_if<TraceHit>(&nxt)) {
                            Trace tr;
                            tr.hit = *h;
                            return tr;
                        }
                        State st = outcome_state(nxt);
                        return run(st, st, std::nullopt, std::nullopt, norm2(d));
                    }
            }
            FG_CHECK(false, "vertex start not realized in mesh");
        }
        State st = initial_state(start, d);
        std::optional<InteriorMark> im;
        std::optional<EdgeMark> em;
        if (auto* si = std::get_if<StI>(&st)) {
            if (mesh.side_of_cell(si->cell, si->p) == 1) im = InteriorMark{si->cell, si->p, si->d};
        } else {
            auto& se = std::get<StE>(st);
            const Cell& c = mesh.cells[se.cell];
            if (se.p != c.vert(se.slot) && se.p != c.vert(se.slot + 1))
                em = EdgeMark{se.cell, se.slot, se.p, se.d};
        }
        return run(st, st, im, em, norm2(d));
    }

    // separatrix start: ray out of a vertex corner (strictly in its wedge or along its outgoing edge)
    Trace from_corner_ray(const CornerRay& r) const {
        const Cell& c = mesh.cells[r.cell];
        Vec2 u = c.edge_vec(r.k);
        Vec2 w = c.vert(r.k - 1) - c.vert(r.k);
        State st;
        if (same_ray(r.d, u)) st = norm_edge(StE{r.cell, r.k, c.vert(r.k), r.d});
        else {
            FG_CHECK(in_wedge_strict(u, w, r.d), "corner ray not in wedge");
            st = StI{r.cell, c.vert(r.k), r.d};
        }
        return run(st, st, std::nullopt, std::nullopt, norm2(r.d));
    }

    // separatrix start at a fold-midpoint pole; the pi-cone there holds exactly one
    // {d,-d} germ, realized on the cell side of the folded edge
    Trace from_pole_ray(int cls, const Vec2& dvec) const {
        const VertexClass& K = mesh.info.classes[cls];
        FG_CHECK(K.fold_midpoint, "not a fold-midpoint class");
        auto [ci, slot] = mesh.bcell[K.fold_edge.poly][K.fold_edge.edge];
        const Cell& c = mesh.cells[ci];
        Vec2 u = c.edge_vec(slot);
        Vec2 mid = (c.vert(slot) + c.vert(slot + 1)) * Q(1, 2);
        int s = sgn(cross(u, dvec));
        State st;
        if (s == 0)
            st = norm_edge(StE{ci, slot, mid, same_ray(dvec, u) ? dvec : Vec2{-dvec.x, -dvec.y}});
        else if (s > 0)
            st = StI{ci, mid, dvec};
        else
            st = StI{ci, mid, Vec2{-dvec.x, -dvec.y}};
        return run(st, st, std::nullopt, std::nullopt, norm2(dvec));
    }

    // all rays of a vertex class in direction dvec (and -dvec when both_signs)
    std::vector<CornerRay> rays_at(int cls, const Vec2& dvec, bool both_signs) const {
        std::vector<CornerRay> out;
        for (int ci = 0; ci < (int)mesh.cells.size(); ++ci) {
            const Cell& c = mesh.cells[ci];
            for (int k = 0; k < c.size(); ++k) {
                if (c.cls[k] != cls) continue;
                Vec2 u = c.edge_vec(k);
                Vec2 w = c.vert(k - 1) - c.vert(k);
                for (int sign = 0; sign < (both_signs ? 2 : 1); ++sign) {
                    Vec2 dd = sign ? Vec2{-dvec.x, -dvec.y} : dvec;
                    if (same_ray(dd, u) || in_wedge_strict(u, w, dd)) out.push_back({ci, k, dd});
                }
            }
        }
        return out;
    }

  private:
    struct StI {
        int cell;
        Vec2 p, d;
    };
    struct StE {
        int cell, slot;
        Vec2 p, d;
    };
    using State = std::variant<StI, StE>;
    using Outcome = std::variant<StI, StE, TraceHit>;
    struct InteriorMark {
        int cell;
        Vec2 p, d;
    };
    struct EdgeMark {
        int cell, slot;
        Vec2 p, d;
    };

    std::vector<std::vector<std::pair<Vec2, SurfacePoint>>> cell_stops;

    static Q solve_param(const Vec2& p, const Vec2& d, const Vec2& x) {
        return sgn(d.x) != 0 ? Q((x.x - p.x) / d.x) : Q((x.y - p.y) / d.y);
    }

    State norm_edge(StE se) const {
        const Cell& c = mesh.cells[se.cell];
        int nc = c.nbr[se.slot], nk = c.nbr_slot[se.slot];
        if (std::pair{nc, nk} < std::pair{se.cell, se.slot}) {
            const ChartMap& m = c.map[se.slot];
            return StE{nc, nk, m.apply(se.p), m.apply_dir(se.d)};
        }
        return se;
    }

    static State outcome_state(const Outcome& oc) {
        if (auto* si = std::get_if<StI>(&oc)) return *si;
        return std::get<StE>(oc);
    }

    static bool state_eq(const State& a, const State& b) {
        if (a.index() != b.index()) return false;
        if (auto* x = std::get_if<StI>(&a)) {
            auto& y = std::get<StI>(b);
            return x->cell == y.cell && x->p == y.p && same_ray(x->d, y.d);
        }
        auto& x = std::get<StE>(a);
        auto& y = std::get<StE>(b);
        return x.cell == y.cell && x.slot == y.slot && x.p == y.p && same_ray(x.d, y.d);
    }

    // resolve motion out of a vertex: walk the corner fan for the wedge containing d
    Outcome resolve_vertex(MeshCorner mc, const Vec2& d) const {
        int cls = mesh.cells[mc.cell].cls[mc.k];
        if (mesh.info.is_singular_class(cls))
            return TraceHit{HitKind::singular, 0, cls, mesh.info.classes[cls].rep, mc, mc.cell, d};
        if (opts.stop_classes.count(cls))
            return TraceHit{HitKind::stop_class, 0, cls, mesh.info.classes[cls].rep, mc, mc.cell, d};
        MeshCorner cur = mc;
        ChartMap M{1, Vec2{0, 0}};
        long limit = 0;
        for (const Cell& c : mesh.cells) limit += c.size();
        for (long it = 0; it <= limit; ++it) {
            const Cell& c = mesh.cells[cur.cell];
            Vec2 dd = M.apply_dir(d);
            Vec2 u = c.edge_vec(cur.k);
            Vec2 w = c.vert(cur.k - 1) - c.vert(cur.k);
            if (same_ray(dd, u)) return as_outcome(norm_edge(StE{cur.cell, cur.k, c.vert(cur.k), dd}));
            if (in_wedge_strict(u, w, dd)) return StI{cur.cell, c.vert(cur.k), dd};
            M = M.then(c.map[cur.k]);
            cur = mesh.next_around(cur);
        }
        FG_CHECK(false, "vertex continuation not found");
        return TraceHit{};
    }

    static Outcome as_outcome(const State& st) {
        if (auto* si = std::get_if<StI>(&st)) return *si;
        return std::get<StE>(st);
    }

    State initial_state(const SurfacePoint& start, const Vec2& d) const {
        struct Cand {
            int poly;
            Vec2 pos, dir;
        };
        std::vector<Cand> cands{{start.poly, start.pos, d}};
        const Polygon& P = mesh.s->polys[start.poly];
        for (int e = 0; e < P.size(); ++e) {
            const Vec2 &a = P.vert(e), &b = P.vert(e + 1);
            if (orient(a, b, start.pos) == 0 && sgn(dot(start.pos - a, start.pos - b)) < 0) {
                auto [to, m] = mesh.info.cross(start.poly, e);
                cands.push_back({to.poly, m.apply(start.pos), m.apply_dir(d)});
            }
        }
        for (const Cand& cd : cands) {
            for (int ci : mesh.cells_of_poly[cd.poly]) {
                int side = mesh.side_of_cell(ci, cd.pos);
                if (side == 0) continue;
                if (side == 1) return StI{ci, cd.pos, cd.dir};
                const Cell& c = mesh.cells[ci];
                for (int k = 0; k < c.size(); ++k) {
                    const Vec2 &a = c.vert(k), &b = c.vert(k + 1);
                    if (orient(a, b, cd.pos) != 0 || sgn(dot(cd.pos - a, cd.pos - b)) >= 0) continue;
                    int cr = sgn(cross(b - a, cd.dir));
                    if (cr > 0) return StI{ci, cd.pos, cd.dir};
                    if (cr == 0) return norm_edge(StE{ci, k, cd.pos, cd.dir});
                }
            }
        }
        FG_CHECK(false, "start point admits no inward chart");
        return StI{};
    }

    Trace run(State cur, const State& key, const std::optional<InteriorMark>& im,
              const std::optional<EdgeMark>& em, const Q& n2d) const {
        Trace tr;
        tr.hit.kind = HitKind::budget;
        Q T = 0;
        for (long steps = 0;; ++steps) {
            FG_CHECK(steps < opts.max_steps, "trace step limit exceeded");
            Outcome next = std::holds_alternative<StI>(cur)
                               ? chord_step(std::get<StI>(cur), T, im, tr)
                               : edge_step(std::get<StE>(cur), T, em, tr);
            if (auto* h = std::get_if<TraceHit>(&next)) {
                tr.hit = *h;
                tr.hit.T = T;  // vertex hits are produced without the running total
                return tr;
            }
            cur = outcome_state(next);
            if (state_eq(cur, key)) {
                tr.hit = {HitKind::closed, T, -1, SurfacePoint{-1, Vec2{0, 0}}};
                return tr;
            }
            if (sgn(opts.budget_len2) >= 0 && T * T * n2d > opts.budget_len2) {
                tr.hit = {HitKind::budget, T, -1, SurfacePoint{-1, Vec2{0, 0}}};
                return tr;
            }
        }
    }

    void push_chord(Trace& tr, int poly, const Vec2& a, const Vec2& b) const {
        if (!opts.record || a == b) return;
        if (!tr.chords.empty()) {
            Chord& L = tr.chords.back();
            if (L.poly == poly && L.b == a && sgn(cross(L.b - L.a, b - a)) == 0 &&
                sgn(dot(L.b - L.a, b - a)) > 0) {
                L.b = b;
                return;
            }
        }
        tr.chords.push_back({poly, a, b});
    }

    Outcome chord_step(const StI& st, Q& T, const std::optional<InteriorMark>& im, Trace& tr) const {
        const Cell& c = mesh.cells[st.cell];
        int n = c.size();
        Q s_exit = -1;
        int e_exit = -1;
        for (int e = 0; e < n; ++e) {
            const Vec2 &a = c.vert(e), &b = c.vert(e + 1);
            Q den = cross(st.d, b - a);
            if (sgn(den) == 0) continue;
            Q s = cross(a - st.p, b - a) / den;
            if (sgn(s) <= 0) continue;
            Vec2 x = st.p + st.d * s;
            if (sgn(dot(x - a, x - b)) > 0) continue;
            if (e_exit < 0 || s < s_exit) {
                s_exit = s;
                e_exit = e;
            }
        }
        FG_CHECK(e_exit >= 0, "ray failed to exit cell");
        Vec2 X = st.p + st.d * s_exit;
        // earliest event on (p, X]: closure beats stop beats crossing
        if (im && im->cell == st.cell && same_ray(st.d, im->d) && sgn(cross(st.d, im->p - st.p)) == 0) {
            Q s0 = solve_param(st.p, st.d, im->p);
            if (sgn(s0) > 0 && s0 < s_exit) {
                push_chord(tr, c.poly, st.p, im->p);
                T += s0;
                return TraceHit{HitKind::closed, T, -1, SurfacePoint{-1, Vec2{0, 0}}, MeshCorner{}, st.cell, st.d};
            }
        }
        Q s_best = s_exit;
        const SurfacePoint* q_hit = nullptr;
        for (auto& [qp, q] : cell_stops[st.cell]) {
            if (sgn(cross(st.d, qp - st.p)) != 0) continue;
            Q sq = solve_param(st.p, st.d, qp);
            if (sgn(sq) > 0 && (sq < s_best || (sq == s_best && !q_hit))) {
                s_best = sq;
                q_hit = &q;
            }
        }
        if (q_hit) {
            Vec2 qp = st.p + st.d * s_best;
            push_chord(tr, c.poly, st.p, qp);
            T += s_best;
            return TraceHit{HitKind::stop_point, T, -1, *q_hit, MeshCorner{}, st.cell, st.d};
        }
        push_chord(tr, c.poly, st.p, X);
        T += s_exit;
        if (X == c.vert(e_exit)) return resolve_vertex({st.cell, e_exit}, st.d);
        if (X == c.vert(e_exit + 1)) return resolve_vertex({st.cell, (e_exit + 1) % n}, st.d);
        if (c.fold_cls[e_exit] >= 0) {
            Vec2 mid = (c.vert(e_exit) + c.vert(e_exit + 1)) * Q(1, 2);
            if (X == mid) {
                int fc = c.fold_cls[e_exit];
                return TraceHit{HitKind::singular, T, fc, mesh.info.classes[fc].rep, MeshCorner{}, st.cell, st.d};
            }
        }
        const ChartMap& m = c.map[e_exit];
        return StI{c.nbr[e_exit], m.apply(X), m.apply_dir(st.d)};
    }

    Outcome edge_step(const StE& st, Q& T, const std::optional<EdgeMark>& em, Trace& tr) const {
        const Cell& c = mesh.cells[st.cell];
        const Vec2 &a = c.vert(st.slot), &b = c.vert(st.slot + 1);
        bool fwd = same_ray(st.d, b - a);
        Vec2 V = fwd ? b : a;
        int jt = fwd ? (st.slot + 1) % c.size() : st.slot;
        Q s_end = solve_param(st.p, st.d, V);
        FG_CHECK(sgn(s_end) > 0, "degenerate edge run");
        Q s_best = s_end;
        int what = 0;  // 0 corner, 1 closure, 2 stop, 3 fold pole
        SurfacePoint q_at{-1, Vec2{0, 0}};
        if (em && em->cell == st.cell && em->slot == st.slot && same_ray(st.d, em->d)) {
            Q s0 = solve_param(st.p, st.d, em->p);
            if (sgn(s0) > 0 && s0 < s_best) {
                s_best = s0;
                what = 1;
            }
        }
        for (auto& [qp, q] : cell_stops[st.cell]) {
            if (sgn(cross(b - a, qp - a)) != 0) continue;
            Q sq = solve_param(st.p, st.d, qp);
            if (sgn(sq) > 0 && sq < s_best) {
                s_best = sq;
                what = 2;
                q_at = q;
            }
        }
        if (c.fold_cls[st.slot] >= 0) {
            Vec2 mid = (a + b) * Q(1, 2);
            Q sm = solve_param(st.p, st.d, mid);
            if (sgn(sm) > 0 && sm < s_best) {
                s_best = sm;
                what = 3;
            }
        }
        Vec2 end = st.p + st.d * s_best;
        push_chord(tr, c.poly, st.p, end);
        T += s_best;
        switch (what) {
            case 1: return TraceHit{HitKind::closed, T, -1, SurfacePoint{-1, Vec2{0, 0}}, MeshCorner{}, st.cell, st.d};
            case 2: return TraceHit{HitKind::stop_point, T, -1, q_at, MeshCorner{}, st.cell, st.d};
            case 3: {
                int fc = c.fold_cls[st.slot];
                return TraceHit{HitKind::singular, T, fc, mesh.info.classes[fc].rep, MeshCorner{}, st.cell, st.d};
            }
            default: return resolve_vertex({st.cell, jt}, st.d);
        }
    }
};

// ---------------------------------------------------------------------------

struct Trajectory {
    enum class End { closes_up, hits_singularity, budget_exhausted };
    End end = End::budget_exhausted;
    Q value2 = 0;  // period^2 / length^2 / squared-length budget
    SurfacePoint hit{-1, Vec2{0, 0}};
    int cls = -1;
    std::vector<Chord> chords;
};

// straight-line trace treating true cone points (and the given extra stops) as
// singular targets
inline Trajectory trace_ray(const Mesh& m, const SurfacePoint& start, const Vec2& d, const Q& budget_len2,
                            TraceOpts opts = {}) {
    opts.budget_len2 = budget_len2;
    Tracer tc(m, std::move(opts));
    Trace t = tc.from_point(m.info.canonical_point(start), d);
    Trajectory out;
    out.chords = std::move(t.chords);
    switch (t.hit.kind) {
        case HitKind::closed:
            out.end = Trajectory::End::closes_up;
            out.value2 = t.hit.T * t.hit.T * norm2(d);
            break;
        case HitKind::singular:
        case HitKind::stop_class:
        case HitKind::stop_point:
            out.end = Trajectory::End::hits_singularity;
            out.value2 = t.hit.T * t.hit.T * norm2(d);
            out.hit = t.hit.at;
            out.cls = t.hit.cls;
            break;
        case HitKind::budget:
            out.end = Trajectory::End::budget_exhausted;
            out.value2 = budget_len2;
            break;
    }
    return out;
}

}  // namespace flatgeo
