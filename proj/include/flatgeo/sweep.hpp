#pragma once
// Closed geodesics through a point, slope sweeps, and bounded saddle-
// connection listings.
//
// Every rational direction on a rational surface is periodic, so the closed
// geodesic through a point either exists (the point lies in the open interior
// of a cylinder and its core circle dodges every blocking mark) or provably
// does not (the point lies on a boundary leaf).  Marked points are
// transparent to the flow here -- they obstruct a geodesic only when passed
// explicitly as blocking labels.  Decompositions are computed with the
// documented search budget; a direction whose separatrix outruns the budget
// is reported as a miss (no geodesic found), never as a hit.
//
// The sweep enumerates all normalized primitive directions of height <= B in
// the fixed order (height, p, q) and classifies each exactly once as
// hit / miss / blocked.  Workers share nothing and write to disjoint
// pre-sized slots, so the merged report is byte-identical for every worker
// count.

#include "flatgeo/cylinder.hpp"

#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace flatgeo {

// Search budget for bounded flow queries: comfortably exceeds the squared
// length of every saddle connection and core circle of the direction on the
// surfaces this library targets (on a square-tiled surface any closing leaf
// has length at most area * |d|, and |d|^2 <= 2 * height(d)^2).
inline Q flow_budget_len2(const Q& area, const Direction& d) {
    Q b = area * Q(d.height());
    return 4 * b * b;
}

struct ClosedGeodesic {
    Direction dir;
    int cyl = -1;  // cylinder index within the direction's decomposition
    Q c2 = 0;      // squared Euclidean length (= squared circumference)
    Q h = 0;       // cylinder height, phi units
    Q offset = 0;  // transverse coordinate above the bottom boundary, in
                   // (0, h); a surface-filling cylinder has no boundary and
                   // admits offset 0 (measured from the reference leaf)
    SurfacePoint base{-1, Vec2{0, 0}};  // canonical base point
};

enum class FlowStatus { hit, miss, blocked };

struct FlowOutcome {
    FlowStatus status = FlowStatus::miss;
    std::string reason;  // blocked only
    std::optional<ClosedGeodesic> geodesic;
};

// Classify one direction.  `pt` must be canonical and not a cone point;
// `blocking` holds mark indices into s.marks.
inline FlowOutcome classify_flow_direction(const Mesh& mesh, const SurfacePoint& pt,
                                           const Direction& d, const std::vector<int>& blocking) {
    CylinderOpts copts;
    copts.marks_stop = false;
    copts.budget_len2 = flow_budget_len2(mesh.info.area, d);
    CylinderDecomposition dec = cylinders_in_direction(mesh, d, copts);
    if (!dec.periodic) return {};
    PointInCylinder loc = locate_in_cylinders(mesh, dec, pt);
    if (loc.on_boundary) return {};
    for (int mi : blocking) {
        PointInCylinder ml = locate_in_cylinders(mesh, dec, mesh.s->marks[mi].at);
        if (!ml.on_boundary && ml.cyl == loc.cyl && ml.offset == loc.offset) {
            const std::string& lbl = mesh.s->marks[mi].label;
            FlowOutcome out;
            out.status = FlowStatus::blocked;
            out.reason = "blocked by mark " + (lbl.empty() ? "#" + std::to_string(mi) : lbl);
            return out;
        }
    }
    FlowOutcome out;
    out.status = FlowStatus::hit;
    ClosedGeodesic g;
    g.dir = d;
    g.cyl = loc.cyl;
    g.c2 = dec.cylinders[loc.cyl].c2;
    g.h = dec.cylinders[loc.cyl].h;
    g.offset = loc.offset;
    g.base = pt;
    out.geodesic = g;
    return out;
}

namespace sweepdetail {

inline SurfacePoint checked_regular_point(const Mesh& mesh, const SurfacePoint& raw) {
    SurfacePoint pt = mesh.info.canonical_point(raw);
    int vc = mesh.info.vertex_class_at(pt);
    if (vc >= 0 && mesh.info.is_singular_class(vc))
        throw Error("domain", "query point is a cone point");
    return pt;
}

// Resolve blocking labels to mark indices; a label may name several marks.
// When drop_pt is set, marks coinciding with pt are silently removed (a
// geodesic through pt trivially passes through it).
inline std::vector<int> resolve_blocking(const Mesh& mesh, const SurfacePoint& pt,
                                         const std::vector<std::string>& labels, bool drop_pt) {
    std::vector<int> out;
    const auto& marks = mesh.s->marks;
    for (const std::string& lbl : labels) {
        bool found = false;
        for (int i = 0; i < (int)marks.size(); ++i) {
            if (marks[i].label != lbl) continue;
            found = true;
            if (drop_pt && marks[i].at == pt) continue;
            out.push_back(i);
        }
        if (!found) throw Error("domain", "no marked point labeled '" + lbl + "'");
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace sweepdetail

inline std::optional<ClosedGeodesic> geodesic_through_point(
    const Mesh& mesh, const SurfacePoint& raw, const Direction& d,
    const std::vector<std::string>& blocking = {}) {
    SurfacePoint pt = sweepdetail::checked_regular_point(mesh, raw);
    std::vector<int> bl = sweepdetail::resolve_blocking(mesh, pt, blocking, false);
    return classify_flow_direction(mesh, pt, d, bl).geodesic;
}

struct SweepReport {
    SurfacePoint point{-1, Vec2{0, 0}};
    long B = 0;
    std::vector<std::pair<Direction, ClosedGeodesic>> hits;
    std::vector<Direction> misses;
    std::vector<std::pair<Direction, std::string>> blocked;
};

inline SweepReport slope_sweep(const Mesh& mesh, const SurfacePoint& raw, long B,
                               const std::vector<std::string>& blocking = {}, int jobs = 1) {
    if (B < 1) throw Error("domain", "sweep height bound must be at least 1");
    SurfacePoint pt = sweepdetail::checked_regular_point(mesh, raw);
    std::vector<int> bl = sweepdetail::resolve_blocking(mesh, pt, blocking, true);
    std::vector<Direction> dirs = directions_up_to(B);

    std::vector<FlowOutcome> slot(dirs.size());
    auto work = [&](int r, int nw) {
        for (size_t i = r; i < dirs.size(); i += nw)
            slot[i] = classify_flow_direction(mesh, pt, dirs[i], bl);
    };
    int nw = std::max(1, jobs);
    if (nw == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> ts;
        std::vector<std::exception_ptr> errs(nw);
        for (int r = 0; r < nw; ++r)
            ts.emplace_back([&, r] {
                try {
                    work(r, nw);
                } catch (...) {
                    errs[r] = std::current_exception();
                }
            });
        for (auto& t : ts) t.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }

    SweepReport rep;
    rep.point = pt;
    rep.B = B;
    for (size_t i = 0; i < dirs.size(); ++i) {
        switch (slot[i].status) {
            case FlowStatus::hit:
                rep.hits.emplace_back(dirs[i], *slot[i].geodesic);
                break;
            case FlowStatus::miss:
                rep.misses.push_back(dirs[i]);
                break;
            case FlowStatus::blocked:
                rep.blocked.emplace_back(dirs[i], slot[i].reason);
                break;
        }
    }
    return rep;
}

// ---- bounded saddle-connection listing ---------------------------------------

struct SaddleConnection {
    Direction dir;                      // primitive direction of the holonomy
    Vec2 hol{0, 0};                     // holonomy, lex-positive representative
    Q len2 = 0;                         // squared Euclidean length
    SurfacePoint from{-1, Vec2{0, 0}};  // endpoints, traced orientation
    SurfacePoint to{-1, Vec2{0, 0}};
};

// lcm of the coordinate denominators of all polygon vertices and marks: every
// saddle-connection holonomy is a Z^2 vector scaled by 1/D.
inline Z coord_denominator(const Surface& s) {
    Z D = 1;
    auto upd = [&](const Q& x) { D = lcm(D, Z(x.get_den())); };
    for (const Polygon& P : s.polys)
        for (const Vec2& v : P.v) {
            upd(v.x);
            upd(v.y);
        }
    for (const Mark& mk : s.marks) {
        upd(mk.at.pos.x);
        upd(mk.at.pos.y);
    }
    return D;
}

// All saddle connections of squared length <= bound, one per orientation
// class.  Holonomies are (1/D)-integral, so a connection in primitive
// direction (p,q) has squared length >= (p^2+q^2)/D^2: enumerating primitive
// directions with p^2+q^2 <= bound*D^2 is exhaustive.
inline std::vector<SaddleConnection> saddle_connections_up_to(const Mesh& mesh, const Q& bound,
                                                              bool marks_stop = true) {
    if (sgn(bound) <= 0) throw Error("domain", "bound must be positive");
    Z D = coord_denominator(*mesh.s);
    Z capz = (bound.get_num() * D * D) / bound.get_den();  // floor(bound * D^2)
    Z hmaxz = sqrt(capz);
    FG_CHECK(hmaxz.fits_slong_p(), "saddle-connection bound too large");
    long hmax = hmaxz.get_si();

    std::vector<SaddleConnection> out;
    for (const Direction& d : directions_up_to(hmax)) {
        Z n2z = d.p * d.p + d.q * d.q;
        if (n2z > capz) continue;
        Q n2d(n2z);
        CylinderOpts copts;
        copts.marks_stop = marks_stop;
        CylinderDecomposition dec = cylinders_in_direction(mesh, d, copts);
        for (int j = 0; j < (int)dec.scs.size(); ++j) {
            if (dec.reverse_sc[j] < j) continue;  // one per orientation class
            const ScRecord& sc = dec.scs[j];
            Q len2 = sc.T * sc.T * n2d;
            if (len2 > bound) continue;
            SaddleConnection rec;
            rec.dir = d;
            rec.hol = sc.hol;
            rec.len2 = len2;
            rec.from = sc.from;
            rec.to = sc.to;
            out.push_back(std::move(rec));
        }
    }
    std::sort(out.begin(), out.end(), [](const SaddleConnection& a, const SaddleConnection& b) {
        if (a.len2 != b.len2) return a.len2 < b.len2;
        if (a.dir != b.dir) return a.dir < b.dir;
        if (!(a.hol == b.hol)) return lex_less(a.hol, b.hol);
        if (a.from != b.from) return a.from < b.from;
        return a.to < b.to;
    });
    return out;
}

}  // namespace flatgeo
