#pragma once
// Canonical presentations of flat surfaces.
//
// canonical_form(s) returns a presentation such that two surfaces are
// isomorphic (as translation respectively half-translation surfaces) iff
// their canonical forms serialize to identical bytes.  Routing:
//   * square-tiled surfaces keep their (h, v) permutation presentation,
//     minimized lexicographically over breadth-first relabelings from every
//     start square (a complete invariant for simultaneous conjugacy);
//   * surfaces with no distinguished points (no cones, no poles, no marks)
//     are flat tori: the holonomy lattice is reduced to Hermite normal form
//     and presented as the corresponding parallelogram;
//   * everything else is cut into its intrinsic Delaunay cell complex over
//     the distinguished points (cone points, poles, marked points), which is
//     unique up to isometry, and the complex is serialized once per starting
//     flag, keeping the lexicographically least result.
//
// The intermediate structures are exposed for reuse: TriMesh corners and
// CellComplex corners index an intrinsic vertex table that maps back to
// points of the input surface, which is what isometry searches need.
//
// Chart-map invariant used throughout (same as Mesh): edge k of a triangle
// or cell runs v[k] -> v[k+1], and map[k] sends the local chart into the
// neighbor's with map[k](v[k]) == nbr.v[nslot[k]+1], map[k](v[k+1]) ==
// nbr.v[nslot[k]].

#include "flatgeo/mesh.hpp"
#include "flatgeo/origami.hpp"
#include "flatgeo/parse.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace flatgeo {

struct IVert {
    SurfacePoint at;    // representative point on the input surface
    int cls = -1;       // input vertex class, or -1 for a free marked point
    int mark = -1;      // index into the input's marks, or -1
    std::string label;  // the mark's label when mark >= 0
};

struct DTri {
    std::array<Vec2, 3> v;
    std::array<int, 3> iv;  // intrinsic vertex id, or a negative flat-corner key
    std::array<int, 3> nbr{{-1, -1, -1}};
    std::array<int, 3> nslot{{-1, -1, -1}};
    std::array<ChartMap, 3> map;
    int src_poly = -1;  // source polygon chart; valid only until flips begin
    bool alive = true;
};

namespace dldetail {

// > 0 iff d lies strictly inside the circumcircle of the ccw triangle (a,b,c),
// 0 iff cocircular.
inline int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    Q ax = a.x - d.x, ay = a.y - d.y;
    Q bx = b.x - d.x, by = b.y - d.y;
    Q cx = c.x - d.x, cy = c.y - d.y;
    Q az = ax * ax + ay * ay;
    Q bz = bx * bx + by * by;
    Q cz = cx * cx + cy * cy;
    Q det = az * (bx * cy - by * cx) - bz * (ax * cy - ay * cx) + cz * (ax * by - ay * bx);
    return sgn(det);
}

inline bool strictly_inside_edge(const Vec2& a, const Vec2& b, const Vec2& p) {
    return orient(a, b, p) == 0 && sgn(dot(p - a, p - b)) < 0;
}

// Ear-clip a simple ccw loop given by positions; returns index triples.
inline std::vector<std::array<int, 3>> ear_clip_loop(const std::vector<Vec2>& pts) {
    int n = (int)pts.size();
    FG_CHECK(n >= 3, "loop with fewer than three vertices");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::array<int, 3>> out;
    while ((int)idx.size() > 3) {
        bool clipped = false;
        for (size_t i = 0; i < idx.size() && !clipped; ++i) {
            size_t m = idx.size();
            int ia = idx[(i + m - 1) % m], ib = idx[i], ic = idx[(i + 1) % m];
            const Vec2 &a = pts[ia], &b = pts[ib], &c = pts[ic];
            if (orient(a, b, c) <= 0) continue;
            bool blocked = false;
            for (int j : idx) {
                if (j == ia || j == ib || j == ic) continue;
                const Vec2& p = pts[j];
                if (orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0) {
                    blocked = true;
                    break;
                }
            }
            if (blocked) continue;
            out.push_back({ia, ib, ic});
            idx.erase(idx.begin() + i);
            clipped = true;
        }
        FG_CHECK(clipped, "ear clipping failed on a simple loop");
    }
    FG_CHECK(orient(pts[idx[0]], pts[idx[1]], pts[idx[2]]) > 0, "degenerate final ear");
    out.push_back({idx[0], idx[1], idx[2]});
    return out;
}

}  // namespace dldetail

class TriMesh {
  public:
    Kind kind = Kind::translation;
    std::vector<DTri> tris;
    std::vector<IVert> verts;
    Q area = 0;

    int check_slot(int t, int e) const {
        const DTri& T = tris[t];
        FG_CHECK(T.alive, "slot check on a dead triangle");
        int u = T.nbr[e], f = T.nslot[e];
        FG_CHECK(u >= 0 && u < (int)tris.size() && tris[u].alive, "edge wired to a dead triangle");
        const DTri& U = tris[u];
        FG_CHECK(U.nbr[f] == t && U.nslot[f] == e, "asymmetric edge wiring");
        FG_CHECK(T.map[e].apply(T.v[e]) == U.v[(f + 1) % 3], "edge start does not match");
        FG_CHECK(T.map[e].apply(T.v[(e + 1) % 3]) == U.v[f], "edge end does not match");
        ChartMap round = T.map[e].then(U.map[f]);
        FG_CHECK(round.sign == 1 && round.c == (Vec2{0, 0}), "edge maps are not inverse");
        FG_CHECK(T.iv[e] == U.iv[(f + 1) % 3] && T.iv[(e + 1) % 3] == U.iv[f],
                 "corner keys disagree across an edge");
        return u;
    }

    void verify() const {
        Q twice = 0;
        for (int t = 0; t < (int)tris.size(); ++t) {
            if (!tris[t].alive) continue;
            const DTri& T = tris[t];
            FG_CHECK(orient(T.v[0], T.v[1], T.v[2]) > 0, "triangle not positively oriented");
            twice += cross(T.v[1] - T.v[0], T.v[2] - T.v[0]);
            for (int e = 0; e < 3; ++e) check_slot(t, e);
            if (kind == Kind::translation)
                for (int e = 0; e < 3; ++e)
                    FG_CHECK(T.map[e].sign == 1, "flipped chart map on a translation surface");
        }
        FG_CHECK(twice == 2 * area, "triangulated area does not match the surface");
    }

    void wire(int a, int sa, int b, int sb, const ChartMap& m) {
        tris[a].nbr[sa] = b;
        tris[a].nslot[sa] = sb;
        tris[a].map[sa] = m;
        tris[b].nbr[sb] = a;
        tris[b].nslot[sb] = sa;
        tris[b].map[sb] = m.inverse();
    }

    void compact() {
        std::vector<int> remap(tris.size(), -1);
        std::vector<DTri> keep;
        for (int t = 0; t < (int)tris.size(); ++t)
            if (tris[t].alive) {
                remap[t] = (int)keep.size();
                keep.push_back(tris[t]);
            }
        for (DTri& T : keep)
            for (int e = 0; e < 3; ++e) {
                FG_CHECK(remap[T.nbr[e]] >= 0, "live edge wired to a dead triangle");
                T.nbr[e] = remap[T.nbr[e]];
            }
        tris = std::move(keep);
    }

    // Flip the diagonal between triangle t (edge e) and its neighbor.  The
    // new triangles reuse the indices of the old pair and both live in t's
    // chart afterwards.
    void flip(int ti, int e) {
        DTri t = tris[ti];
        int ui = t.nbr[e], f = t.nslot[e];
        FG_CHECK(ui != ti, "flip across a self-glued edge");
        DTri u = tris[ui];
        ChartMap M = t.map[e].inverse();  // u chart -> t chart
        int e1 = (e + 1) % 3, e2 = (e + 2) % 3, f1 = (f + 1) % 3, f2 = (f + 2) % 3;
        Vec2 A = t.v[e], B = t.v[e1], C = t.v[e2], P = M.apply(u.v[f2]);
        int ivA = t.iv[e], ivB = t.iv[e1], ivC = t.iv[e2], ivP = u.iv[f2];
        FG_CHECK(orient(A, P, C) > 0 && orient(P, B, C) > 0,
                 "flip would create a degenerate triangle");

        // old half-edge -> new half-edge for the four quad boundary slots
        std::map<std::pair<int, int>, std::pair<int, int>> ren{
            {{ui, f1}, {ti, 0}}, {{ti, e2}, {ti, 2}}, {{ui, f2}, {ui, 0}}, {{ti, e1}, {ui, 1}}};
        struct Side {
            int ot, os;   // provenance: old triangle index and slot
            bool from_u;  // provenance chart was u's
        };
        std::array<Side, 3> sidesT{{{ui, f1, true}, {-1, -1, false}, {ti, e2, false}}};
        std::array<Side, 3> sidesU{{{ui, f2, true}, {ti, e1, false}, {-1, -1, false}}};

        DTri nt, nu;
        nt.v = {A, P, C};
        nt.iv = {ivA, ivP, ivC};
        nu.v = {P, B, C};
        nu.iv = {ivP, ivB, ivC};

        auto resolve = [&](const Side& sd, DTri& mine, int myslot) {
            if (sd.ot < 0) return;  // new diagonal, wired below
            const DTri& src = (sd.ot == ti) ? t : u;
            int tn = src.nbr[sd.os], sn = src.nslot[sd.os];
            ChartMap mm = src.map[sd.os];
            if (sd.from_u) mm = t.map[e].then(mm);  // t chart -> u chart -> ext
            bool ext_was_u = (tn == ui);
            auto it = ren.find({tn, sn});
            if (it != ren.end()) {
                tn = it->second.first;
                sn = it->second.second;
                if (ext_was_u) mm = mm.then(M);  // target chart became t's
            }
            mine.nbr[myslot] = tn;
            mine.nslot[myslot] = sn;
            mine.map[myslot] = mm;
        };
        for (int k = 0; k < 3; ++k) resolve(sidesT[k], nt, k);
        for (int k = 0; k < 3; ++k) resolve(sidesU[k], nu, k);
        tris[ti] = nt;
        tris[ui] = nu;
        wire(ti, 1, ui, 2, ChartMap{1, Vec2{0, 0}});  // new diagonal P->C / C->P
        // restore back-pointers on external neighbors
        const std::array<std::pair<int, int>, 4> outer{{{ti, 0}, {ti, 2}, {ui, 0}, {ui, 1}}};
        for (auto [me, slot] : outer) {
            int tn = tris[me].nbr[slot], sn = tris[me].nslot[slot];
            tris[tn].nbr[sn] = me;
            tris[tn].nslot[sn] = slot;
            tris[tn].map[sn] = tris[me].map[slot].inverse();
        }
        for (int k = 0; k < 3; ++k) {
            check_slot(ti, k);
            check_slot(ui, k);
        }
    }
};

namespace dldetail {

// insert P strictly inside triangle ti as intrinsic vertex ivid
inline void split_tri(TriMesh& tm, int ti, const Vec2& P, int ivid) {
    DTri t = tm.tris[ti];
    FG_CHECK(orient(t.v[0], t.v[1], P) > 0 && orient(t.v[1], t.v[2], P) > 0 &&
                 orient(t.v[2], t.v[0], P) > 0,
             "split point not strictly inside");
    int t2i = (int)tm.tris.size(), t3i = t2i + 1;
    std::map<std::pair<int, int>, std::pair<int, int>> ren{{{ti, 1}, {t2i, 0}},
                                                           {{ti, 2}, {t3i, 0}}};
    DTri n0 = t, n2 = t, n3 = t;
    n0.v = {t.v[0], t.v[1], P};
    n0.iv = {t.iv[0], t.iv[1], ivid};
    n2.v = {t.v[1], t.v[2], P};
    n2.iv = {t.iv[1], t.iv[2], ivid};
    n3.v = {t.v[2], t.v[0], P};
    n3.iv = {t.iv[2], t.iv[0], ivid};
    auto ext = [&](int os, DTri& mine) {
        int tn = t.nbr[os], sn = t.nslot[os];
        auto it = ren.find({tn, sn});
        if (it != ren.end()) {
            tn = it->second.first;
            sn = it->second.second;
        }
        mine.nbr[0] = tn;
        mine.nslot[0] = sn;
        mine.map[0] = t.map[os];
    };
    ext(0, n0);
    ext(1, n2);
    ext(2, n3);
    tm.tris[ti] = n0;
    tm.tris.push_back(n2);
    tm.tris.push_back(n3);
    const std::array<std::pair<int, int>, 3> outer{{{ti, 0}, {t2i, 0}, {t3i, 0}}};
    for (auto [me, slot] : outer) {
        int tn = tm.tris[me].nbr[slot], sn = tm.tris[me].nslot[slot];
        tm.tris[tn].nbr[sn] = me;
        tm.tris[tn].nslot[sn] = slot;
        tm.tris[tn].map[sn] = tm.tris[me].map[slot].inverse();
    }
    tm.wire(ti, 1, t2i, 2, ChartMap{1, Vec2{0, 0}});
    tm.wire(t2i, 1, t3i, 2, ChartMap{1, Vec2{0, 0}});
    tm.wire(t3i, 1, ti, 2, ChartMap{1, Vec2{0, 0}});
    for (int tt : {ti, t2i, t3i})
        for (int k = 0; k < 3; ++k) tm.check_slot(tt, k);
}

// insert P strictly inside edge e of triangle ti as intrinsic vertex ivid
inline void split_edge(TriMesh& tm, int ti, int e, const Vec2& P, int ivid) {
    DTri t = tm.tris[ti];
    int ui = t.nbr[e], f = t.nslot[e];
    FG_CHECK(ui != ti, "mark on a self-glued edge");
    DTri u = tm.tris[ui];
    int e1 = (e + 1) % 3, e2 = (e + 2) % 3, f1 = (f + 1) % 3, f2 = (f + 2) % 3;
    Vec2 A = t.v[e], B = t.v[e1], C = t.v[e2];
    Vec2 Pu = t.map[e].apply(P);
    Vec2 Bu = u.v[f], Au = u.v[f1], D = u.v[f2];
    FG_CHECK(strictly_inside_edge(A, B, P), "split point not on its edge");
    int t2i = (int)tm.tris.size(), u2i = t2i + 1;
    std::map<std::pair<int, int>, std::pair<int, int>> ren{
        {{ti, e1}, {t2i, 1}}, {{ti, e2}, {ti, 2}}, {{ui, f1}, {u2i, 1}}, {{ui, f2}, {ui, 2}}};
    DTri nt, nt2, nu, nu2;
    nt.v = {A, P, C};
    nt.iv = {t.iv[e], ivid, t.iv[e2]};
    nt2.v = {P, B, C};
    nt2.iv = {ivid, t.iv[e1], t.iv[e2]};
    nu.v = {Bu, Pu, D};
    nu.iv = {u.iv[f], ivid, u.iv[f2]};
    nu2.v = {Pu, Au, D};
    nu2.iv = {ivid, u.iv[f1], u.iv[f2]};
    auto ext = [&](const DTri& src, int os, DTri& mine, int myslot) {
        int tn = src.nbr[os], sn = src.nslot[os];
        auto it = ren.find({tn, sn});
        if (it != ren.end()) {
            tn = it->second.first;
            sn = it->second.second;
        }
        mine.nbr[myslot] = tn;
        mine.nslot[myslot] = sn;
        mine.map[myslot] = src.map[os];
    };
    ext(t, e1, nt2, 1);
    ext(t, e2, nt, 2);
    ext(u, f1, nu2, 1);
    ext(u, f2, nu, 2);
    tm.tris[ti] = nt;
    tm.tris[ui] = nu;
    tm.tris.push_back(nt2);
    tm.tris.push_back(nu2);
    const std::array<std::pair<int, int>, 4> outer{{{t2i, 1}, {ti, 2}, {u2i, 1}, {ui, 2}}};
    for (auto [me, slot] : outer) {
        int tn = tm.tris[me].nbr[slot], sn = tm.tris[me].nslot[slot];
        tm.tris[tn].nbr[sn] = me;
        tm.tris[tn].nslot[sn] = slot;
        tm.tris[tn].map[sn] = tm.tris[me].map[slot].inverse();
    }
    tm.wire(ti, 0, u2i, 0, t.map[e]);  // A->P glued to Pu->Au
    tm.wire(t2i, 0, ui, 0, t.map[e]);  // P->B glued to Bu->Pu
    tm.wire(ti, 1, t2i, 2, ChartMap{1, Vec2{0, 0}});
    tm.wire(ui, 1, u2i, 2, ChartMap{1, Vec2{0, 0}});
    for (int tt : {ti, ui, t2i, u2i})
        for (int k = 0; k < 3; ++k) tm.check_slot(tt, k);
}

// ---------- initial triangulation over the intrinsic vertex set ----------

struct SplitPt {
    Vec2 pos;
    int iv;
};

inline TriMesh build_trimesh(const Mesh& mesh) {
    const Surface& S = *mesh.s;
    const SurfaceInfo& info = mesh.info;
    TriMesh tm;
    tm.kind = S.kind;
    tm.area = info.area;

    std::vector<int> iv_of_class(info.classes.size(), -1);
    std::vector<int> iv_of_mark(S.marks.size(), -1);
    for (int k = 0; k < (int)info.classes.size(); ++k) {
        const auto& vc = info.classes[k];
        if (info.is_singular_class(k) || vc.mark >= 0) {
            iv_of_class[k] = (int)tm.verts.size();
            tm.verts.push_back(
                {vc.rep, k, vc.mark, vc.mark >= 0 ? S.marks[vc.mark].label : std::string()});
            if (vc.mark >= 0) iv_of_mark[vc.mark] = iv_of_class[k];
        }
    }
    std::vector<int> free_marks;
    for (int mi = 0; mi < (int)S.marks.size(); ++mi)
        if (iv_of_mark[mi] < 0) {
            iv_of_mark[mi] = (int)tm.verts.size();
            tm.verts.push_back({S.marks[mi].at, -1, mi, S.marks[mi].label});
            free_marks.push_back(mi);
        }
    auto key_of_class = [&](int c) { return iv_of_class[c] >= 0 ? iv_of_class[c] : -2 - c; };

    // split points strictly inside each cell edge: fold midpoints and free
    // marks (own side and the glued side mapped over)
    int nc = (int)mesh.cells.size();
    std::vector<std::vector<std::vector<SplitPt>>> splits(nc);
    for (int ci = 0; ci < nc; ++ci) {
        const Cell& c = mesh.cells[ci];
        splits[ci].resize(c.size());
        for (int e = 0; e < c.size(); ++e) {
            const Vec2 a = c.vert(e), b = c.vert(e + 1);
            auto& list = splits[ci][e];
            if (c.fold_cls[e] >= 0) {
                Vec2 mid = (a + b) * Q(1, 2);
                FG_CHECK(iv_of_class[c.fold_cls[e]] >= 0, "fold midpoint has no intrinsic vertex");
                list.push_back({mid, iv_of_class[c.fold_cls[e]]});
            }
            auto add_marks_of = [&](int cell2, int e2, const ChartMap& into_ours) {
                const Cell& c2 = mesh.cells[cell2];
                const Vec2 a2 = c2.vert(e2), b2 = c2.vert(e2 + 1);
                for (int mi : free_marks) {
                    const SurfacePoint& at = S.marks[mi].at;
                    if (at.poly != c2.poly) continue;
                    if (strictly_inside_edge(a2, b2, at.pos))
                        list.push_back({into_ours.apply(at.pos), iv_of_mark[mi]});
                }
            };
            add_marks_of(ci, e, ChartMap{1, Vec2{0, 0}});
            add_marks_of(c.nbr[e], c.nbr_slot[e], c.map[e].inverse());
            std::sort(list.begin(), list.end(), [&](const SplitPt& x, const SplitPt& y) {
                Q tx = dot(x.pos - a, b - a);
                Q ty = dot(y.pos - a, b - a);
                return tx < ty;
            });
            list.erase(std::unique(list.begin(), list.end(),
                                   [](const SplitPt& x, const SplitPt& y) {
                                       if (!(x.pos == y.pos)) return false;
                                       FG_CHECK(x.iv == y.iv, "conflicting split keys");
                                       return true;
                                   }),
                       list.end());
            for (const SplitPt& sp : list)
                FG_CHECK(strictly_inside_edge(a, b, sp.pos), "split point off its edge");
        }
    }

    // augmented loops, ear-clipped per cell
    std::vector<std::vector<std::pair<int, int>>> sub_tri(nc);  // loop index -> (tri, slot)
    std::vector<std::vector<int>> slot_start(nc);               // cell slot -> first loop index
    for (int ci = 0; ci < nc; ++ci) {
        const Cell& c = mesh.cells[ci];
        std::vector<Vec2> pos;
        std::vector<int> key;
        slot_start[ci].assign(c.size() + 1, 0);
        for (int e = 0; e < c.size(); ++e) {
            slot_start[ci][e] = (int)pos.size();
            pos.push_back(c.v[e]);
            key.push_back(key_of_class(c.cls[e]));
            for (const SplitPt& sp : splits[ci][e]) {
                pos.push_back(sp.pos);
                key.push_back(sp.iv);
            }
        }
        slot_start[ci][c.size()] = (int)pos.size();
        int L = (int)pos.size();
        sub_tri[ci].assign(L, {-1, -1});
        std::map<std::pair<int, int>, std::pair<int, int>> open_diag;
        for (const auto& tr : ear_clip_loop(pos)) {
            DTri T;
            T.src_poly = c.poly;
            for (int k = 0; k < 3; ++k) {
                T.v[k] = pos[tr[k]];
                T.iv[k] = key[tr[k]];
            }
            int tid = (int)tm.tris.size();
            tm.tris.push_back(T);
            for (int k = 0; k < 3; ++k) {
                int a = tr[k], b = tr[(k + 1) % 3];
                if ((a + 1) % L == b) {
                    sub_tri[ci][a] = {tid, k};
                } else {
                    auto kk = std::minmax(a, b);
                    auto it = open_diag.find({kk.first, kk.second});
                    if (it == open_diag.end()) {
                        open_diag[{kk.first, kk.second}] = {tid, k};
                    } else {
                        tm.wire(tid, k, it->second.first, it->second.second,
                                ChartMap{1, Vec2{0, 0}});
                        open_diag.erase(it);
                    }
                }
            }
        }
        FG_CHECK(open_diag.empty(), "unmatched internal diagonal");
    }

    // glue boundary sub-edges across cell adjacencies
    for (int ci = 0; ci < nc; ++ci) {
        const Cell& c = mesh.cells[ci];
        for (int e = 0; e < c.size(); ++e) {
            int cj = c.nbr[e], ej = c.nbr_slot[e];
            bool fold = (cj == ci && ej == e);
            if (!fold && std::tie(ci, e) > std::tie(cj, ej)) continue;
            int sa = slot_start[ci][e], ca_cnt = slot_start[ci][e + 1] - sa;
            int sb = slot_start[cj][ej], cb_cnt = slot_start[cj][ej + 1] - sb;
            FG_CHECK(ca_cnt == cb_cnt, "glued edges subdivided differently");
            if (fold) {
                FG_CHECK(ca_cnt % 2 == 0, "fold edge with an odd sub-edge count");
                for (int i = 0; i * 2 < ca_cnt - 1; ++i) {
                    auto [t1, s1] = sub_tri[ci][sa + i];
                    auto [t2, s2] = sub_tri[ci][sa + (ca_cnt - 1 - i)];
                    tm.wire(t1, s1, t2, s2, c.map[e]);
                }
            } else {
                for (int i = 0; i < ca_cnt; ++i) {
                    auto [t1, s1] = sub_tri[ci][sa + i];
                    auto [t2, s2] = sub_tri[cj][sb + (cb_cnt - 1 - i)];
                    tm.wire(t1, s1, t2, s2, c.map[e]);
                }
            }
        }
    }
    tm.verify();

    // free marks strictly inside a cell: locate and split
    for (int mi : free_marks) {
        int ivid = iv_of_mark[mi];
        bool present = false;
        for (const DTri& T : tm.tris)
            for (int k = 0; k < 3 && !present; ++k) present = T.alive && T.iv[k] == ivid;
        if (present) continue;  // was on a cell edge
        const SurfacePoint& at = S.marks[mi].at;
        int ht = -1, on_edge = -1;
        for (int t = 0; t < (int)tm.tris.size() && ht < 0; ++t) {
            const DTri& T = tm.tris[t];
            if (!T.alive || T.src_poly != at.poly) continue;
            int o0 = orient(T.v[0], T.v[1], at.pos);
            int o1 = orient(T.v[1], T.v[2], at.pos);
            int o2 = orient(T.v[2], T.v[0], at.pos);
            if (o0 < 0 || o1 < 0 || o2 < 0) continue;
            int zeros = (o0 == 0) + (o1 == 0) + (o2 == 0);
            FG_CHECK(zeros <= 1, "free mark at a triangulation corner");
            ht = t;
            on_edge = (o0 == 0) ? 0 : (o1 == 0) ? 1 : (o2 == 0) ? 2 : -1;
        }
        FG_CHECK(ht >= 0, "free mark not located in any triangle");
        if (on_edge < 0)
            split_tri(tm, ht, at.pos, ivid);
        else
            split_edge(tm, ht, on_edge, at.pos, ivid);
    }
    tm.verify();
    return tm;
}

// ---------- removal of flat (regular, unmarked) corners ----------

struct Wedge {
    int t, k;
    ChartMap dev;  // triangle chart -> star chart
};

inline std::vector<Wedge> star_of(const TriMesh& tm, int t0, int k0) {
    std::vector<Wedge> star;
    int t = t0, k = k0;
    ChartMap D{1, Vec2{0, 0}};
    Vec2 center = tm.tris[t0].v[k0];
    do {
        FG_CHECK(star.size() < 10000, "runaway star walk");
        star.push_back({t, k, D});
        FG_CHECK(D.apply(tm.tris[t].v[k]) == center, "star development lost its center");
        int e = (k + 2) % 3;
        int u = tm.tris[t].nbr[e], g = tm.tris[t].nslot[e];
        D = tm.tris[t].map[e].inverse().then(D);
        t = u;
        k = g;
    } while (!(t == t0 && k == k0));
    FG_CHECK(D.sign == 1 && D.c == (Vec2{0, 0}), "nontrivial holonomy around a flat corner");
    FG_CHECK(star.size() >= 3, "flat corner with fewer than three wedges");
    return star;
}

// replace the star of a flat vertex (no copies of it on the link) by an
// ear-clipped triangulation of the developed link polygon
inline void cavity_replace(TriMesh& tm, const std::vector<Wedge>& star) {
    int d = (int)star.size();
    std::vector<Vec2> L(d);
    std::vector<int> LK(d);
    std::map<std::pair<int, int>, int> link_index;  // (tri, slot) of link edges
    for (int i = 0; i < d; ++i) {
        const DTri& T = tm.tris[star[i].t];
        int k1 = (star[i].k + 1) % 3;
        L[i] = star[i].dev.apply(T.v[k1]);
        LK[i] = T.iv[k1];
        link_index[{star[i].t, k1}] = i;
    }
    // boundary descriptors per link edge, maps rebased into the star chart
    struct Outer {
        int nbr = -1, nslot = -1, sym = -1;  // sym: partner link index when glued star-to-star
        ChartMap map;
    };
    std::vector<Outer> outer(d);
    for (int i = 0; i < d; ++i) {
        const DTri& T = tm.tris[star[i].t];
        int k1 = (star[i].k + 1) % 3;
        Outer o;
        o.nbr = T.nbr[k1];
        o.nslot = T.nslot[k1];
        o.map = star[i].dev.inverse().then(T.map[k1]);
        auto it = link_index.find({o.nbr, o.nslot});
        if (it != link_index.end()) {
            FG_CHECK(it->second != i, "link edge glued to itself");
            o.sym = it->second;
            o.map = o.map.then(star[it->second].dev);  // star -> partner tri -> star
        }
        outer[i] = o;
    }
    for (const Wedge& w : star) tm.tris[w.t].alive = false;

    auto triples = ear_clip_loop(L);
    std::vector<int> fresh;
    for (size_t x = 0; x < triples.size(); ++x) {
        DTri T;
        for (int k = 0; k < 3; ++k) {
            T.v[k] = L[triples[x][k]];
            T.iv[k] = LK[triples[x][k]];
        }
        fresh.push_back((int)tm.tris.size());
        tm.tris.push_back(T);
    }
    // wiring: boundary edges by link index, internal diagonals by index pair
    std::vector<std::pair<int, int>> bslot(d, {-1, -1});
    std::map<std::pair<int, int>, std::pair<int, int>> open_diag;
    for (size_t x = 0; x < triples.size(); ++x)
        for (int k = 0; k < 3; ++k) {
            int a = triples[x][k], b = triples[x][(k + 1) % 3];
            if ((a + 1) % d == b) {
                bslot[a] = {fresh[x], k};
            } else {
                auto kk = std::minmax(a, b);
                auto it = open_diag.find({kk.first, kk.second});
                if (it == open_diag.end())
                    open_diag[{kk.first, kk.second}] = {fresh[x], k};
                else {
                    tm.wire(fresh[x], k, it->second.first, it->second.second,
                            ChartMap{1, Vec2{0, 0}});
                    open_diag.erase(it);
                }
            }
        }
    FG_CHECK(open_diag.empty(), "unmatched cavity diagonal");
    std::vector<char> done(d, 0);
    for (int i = 0; i < d; ++i) {
        if (done[i]) continue;
        auto [t1, s1] = bslot[i];
        FG_CHECK(t1 >= 0, "cavity boundary edge missing");
        if (outer[i].sym >= 0) {
            int j = outer[i].sym;
            auto [t2, s2] = bslot[j];
            tm.wire(t1, s1, t2, s2, outer[i].map);
            done[i] = done[j] = 1;
        } else {
            tm.tris[t1].nbr[s1] = outer[i].nbr;
            tm.tris[t1].nslot[s1] = outer[i].nslot;
            tm.tris[t1].map[s1] = outer[i].map;
            tm.tris[outer[i].nbr].nbr[outer[i].nslot] = t1;
            tm.tris[outer[i].nbr].nslot[outer[i].nslot] = s1;
            tm.tris[outer[i].nbr].map[outer[i].nslot] = outer[i].map.inverse();
            done[i] = 1;
        }
    }
    for (int t : fresh)
        for (int k = 0; k < 3; ++k) tm.check_slot(t, k);
}

inline void remove_flat_vertices(TriMesh& tm) {
    long guard = 0;
    for (;;) {
        FG_CHECK(++guard < 100000, "flat-vertex removal did not terminate");
        int ft = -1, fk = -1, key = 0;
        for (int t = 0; t < (int)tm.tris.size() && ft < 0; ++t) {
            if (!tm.tris[t].alive) continue;
            for (int k = 0; k < 3; ++k)
                if (tm.tris[t].iv[k] <= -2) {
                    ft = t;
                    fk = k;
                    key = tm.tris[t].iv[k];
                    break;
                }
        }
        if (ft < 0) break;
        auto star = star_of(tm, ft, fk);
        int d = (int)star.size();
        std::vector<int> LK(d);
        std::vector<Vec2> L(d);
        for (int i = 0; i < d; ++i) {
            const DTri& T = tm.tris[star[i].t];
            int k1 = (star[i].k + 1) % 3;
            LK[i] = T.iv[k1];
            L[i] = star[i].dev.apply(T.v[k1]);
        }
        bool has_copy = false;
        for (int x : LK) has_copy = has_copy || (x == key);
        if (!has_copy) {
            cavity_replace(tm, star);
            continue;
        }
        // a copy of the vertex sits on its own link: flip a radius to shed
        // corners, preferring flips that reduce the corner count the most
        Vec2 center = tm.tris[ft].v[fk];
        int pick = -1, pick_delta = 0;
        for (int i = 0; i < d; ++i) {
            int a = LK[(i + d - 1) % d], w = LK[i], b = LK[(i + 1) % d];
            int delta = -1 - (w == key ? 1 : 0) + (a == key ? 1 : 0) + (b == key ? 1 : 0);
            if (delta >= 0) continue;
            const Vec2 &pa = L[(i + d - 1) % d], &pw = L[i], &pb = L[(i + 1) % d];
            if (!(orient(pa, pw, pb) > 0 && orient(center, pa, pb) > 0)) continue;
            int rt = star[i].t, rk = star[i].k;
            if (tm.tris[rt].nbr[rk] == rt) continue;  // radius glued to its own triangle
            if (pick < 0 || delta < pick_delta) {
                pick = i;
                pick_delta = delta;
            }
        }
        FG_CHECK(pick >= 0, "no legal flip at a flat vertex with loops");
        tm.flip(star[pick].t, star[pick].k);
    }
    tm.compact();
    tm.verify();
    for (const DTri& T : tm.tris)
        for (int k = 0; k < 3; ++k) FG_CHECK(T.iv[k] >= 0, "flat corner survived removal");
}

// ---------- Lawson flips to the Delaunay triangulation ----------

inline int edge_incircle(const TriMesh& tm, int t, int e) {
    const DTri& T = tm.tris[t];
    int u = T.nbr[e], f = T.nslot[e];
    Vec2 P = T.map[e].inverse().apply(tm.tris[u].v[(f + 2) % 3]);
    return incircle(T.v[e], T.v[(e + 1) % 3], T.v[(e + 2) % 3], P);
}

inline void make_delaunay(TriMesh& tm) {
    long flips = 0;
    std::deque<std::pair<int, int>> q;
    for (int t = 0; t < (int)tm.tris.size(); ++t)
        if (tm.tris[t].alive)
            for (int e = 0; e < 3; ++e) q.push_back({t, e});
    for (;;) {
        while (!q.empty()) {
            auto [t, e] = q.front();
            q.pop_front();
            if (!tm.tris[t].alive) continue;
            if (edge_incircle(tm, t, e) <= 0) continue;
            int u = tm.tris[t].nbr[e];
            FG_CHECK(u != t, "non-Delaunay self-glued edge");
            tm.flip(t, e);
            FG_CHECK(++flips < 2000000, "Delaunay flipping did not terminate");
            q.push_back({t, 0});
            q.push_back({t, 2});
            q.push_back({u, 0});
            q.push_back({u, 1});
        }
        bool clean = true;
        for (int t = 0; t < (int)tm.tris.size(); ++t) {
            if (!tm.tris[t].alive) continue;
            for (int e = 0; e < 3; ++e)
                if (edge_incircle(tm, t, e) > 0) {
                    q.push_back({t, e});
                    clean = false;
                }
        }
        if (clean) break;
    }
    tm.verify();
}

}  // namespace dldetail

// ---------- Delaunay cell complex (cocircular triangles merged) ----------

struct FlatCell {
    std::vector<Vec2> v;
    std::vector<int> iv;
    std::vector<int> nbr, nslot;
    std::vector<ChartMap> map;
    int size() const { return (int)v.size(); }
};

struct CellComplex {
    Kind kind = Kind::translation;
    std::vector<FlatCell> cells;
    std::vector<IVert> verts;
    Q area = 0;
};

namespace dldetail {

inline CellComplex build_cells(TriMesh& tm) {
    int n = (int)tm.tris.size();
    std::vector<std::array<char, 3>> soft(n);
    for (int t = 0; t < n; ++t)
        for (int e = 0; e < 3; ++e) soft[t][e] = (edge_incircle(tm, t, e) == 0);
    // union components across soft edges
    std::vector<int> uf(n);
    std::iota(uf.begin(), uf.end(), 0);
    std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
    for (int t = 0; t < n; ++t)
        for (int e = 0; e < 3; ++e)
            if (soft[t][e]) uf[find(t)] = find(tm.tris[t].nbr[e]);
    std::map<int, std::vector<int>> comp;
    for (int t = 0; t < n; ++t) comp[find(t)].push_back(t);
    // each component must be a tree of soft gluings: an inscribed polygon
    for (auto& [r, members] : comp) {
        int half = 0;
        for (int t : members)
            for (int e = 0; e < 3; ++e)
                if (soft[t][e]) ++half;
        FG_CHECK(half == 2 * ((int)members.size() - 1), "cocircular component is not a disk");
    }
    // develop members into the root chart
    std::vector<ChartMap> dev(n);
    std::vector<char> seen(n, 0);
    for (auto& [r, members] : comp) {
        int root = members.front();
        dev[root] = ChartMap{1, Vec2{0, 0}};
        seen[root] = 1;
        std::deque<int> bfs{root};
        while (!bfs.empty()) {
            int t = bfs.front();
            bfs.pop_front();
            for (int e = 0; e < 3; ++e) {
                if (!soft[t][e]) continue;
                int u = tm.tris[t].nbr[e];
                if (seen[u]) continue;
                seen[u] = 1;
                dev[u] = tm.tris[u].map[tm.tris[t].nslot[e]].then(dev[t]);
                bfs.push_back(u);
            }
        }
    }
    // walk each component boundary ccw
    CellComplex cc;
    cc.kind = tm.kind;
    cc.verts = tm.verts;
    cc.area = tm.area;
    std::map<std::pair<int, int>, std::pair<int, int>> slot_of;  // (tri, slot) -> (cell, k)
    for (auto& [r, members] : comp) {
        int t0 = -1, e0 = -1;
        for (int t : members) {
            for (int e = 0; e < 3; ++e)
                if (!soft[t][e]) {
                    t0 = t;
                    e0 = e;
                    break;
                }
            if (t0 >= 0) break;
        }
        FG_CHECK(t0 >= 0, "component without a boundary");
        FlatCell cell;
        int ci = (int)cc.cells.size();
        int t = t0, e = e0;
        long guard = 0;
        do {
            FG_CHECK(++guard < 100000, "runaway cell boundary walk");
            slot_of[{t, e}] = {ci, cell.size()};
            cell.v.push_back(dev[t].apply(tm.tris[t].v[e]));
            cell.iv.push_back(tm.tris[t].iv[e]);
            cell.nbr.push_back(-1);
            cell.nslot.push_back(-1);
            cell.map.push_back(ChartMap{1, Vec2{0, 0}});
            // advance: rotate around the edge's endpoint through soft edges
            int ct = t, ck = (e + 1) % 3;
            while (soft[ct][ck]) {
                int u = tm.tris[ct].nbr[ck], g = tm.tris[ct].nslot[ck];
                ct = u;
                ck = (g + 1) % 3;
            }
            t = ct;
            e = ck;
        } while (!(t == t0 && e == e0));
        int m = cell.size();
        FG_CHECK(m >= 3, "cell with fewer than three sides");
        for (int k = 0; k < m; ++k) {
            const Vec2 &a = cell.v[(k + m - 1) % m], &b = cell.v[k], &c = cell.v[(k + 1) % m];
            FG_CHECK(orient(a, b, c) > 0, "cell boundary is not strictly convex");
        }
        for (int k = 3; k < m; ++k)
            FG_CHECK(incircle(cell.v[0], cell.v[1], cell.v[2], cell.v[k]) == 0,
                     "cell corners are not cocircular");
        cc.cells.push_back(std::move(cell));
    }
    // adjacency between cells
    for (auto& [key, val] : slot_of) {
        auto [t, e] = key;
        auto [ci, k] = val;
        int u = tm.tris[t].nbr[e], f = tm.tris[t].nslot[e];
        auto it = slot_of.find({u, f});
        FG_CHECK(it != slot_of.end(), "hard edge missing from the cell complex");
        auto [cj, k2] = it->second;
        cc.cells[ci].nbr[k] = cj;
        cc.cells[ci].nslot[k] = k2;
        cc.cells[ci].map[k] = dev[t].inverse().then(tm.tris[t].map[e]).then(dev[u]);
    }
    // invariants: matching endpoints, inverse maps, total area
    Q twice = 0;
    for (int ci = 0; ci < (int)cc.cells.size(); ++ci) {
        const FlatCell& c = cc.cells[ci];
        int m = c.size();
        for (int k = 0; k < m; ++k)
            twice += cross(c.v[k] - c.v[0], c.v[(k + 1) % m] - c.v[0]);
        for (int k = 0; k < m; ++k) {
            const FlatCell& o = cc.cells[c.nbr[k]];
            int f = c.nslot[k];
            FG_CHECK(o.nbr[f] == ci && o.nslot[f] == k, "asymmetric cell wiring");
            FG_CHECK(c.map[k].apply(c.v[k]) == o.v[(f + 1) % o.size()], "cell edge start mismatch");
            FG_CHECK(c.map[k].apply(c.v[(k + 1) % m]) == o.v[f], "cell edge end mismatch");
            FG_CHECK(c.iv[k] == o.iv[(f + 1) % o.size()], "cell corner key mismatch");
            ChartMap round = c.map[k].then(o.map[f]);
            FG_CHECK(round.sign == 1 && round.c == (Vec2{0, 0}), "cell maps are not inverse");
        }
    }
    FG_CHECK(twice == 2 * cc.area, "cell areas do not sum to the surface area");
    return cc;
}

}  // namespace dldetail

// intrinsic Delaunay cell complex over cones, poles, and marked points
inline CellComplex delaunay_cells(const Surface& s) {
    Mesh mesh(s);
    TriMesh tm = dldetail::build_trimesh(mesh);
    dldetail::remove_flat_vertices(tm);
    dldetail::make_delaunay(tm);
    return dldetail::build_cells(tm);
}

namespace dldetail {

// rebuild a Surface from the cell complex, rooted at one starting flag
inline Surface candidate_from_flag(const CellComplex& cc, int c0, int s0, int sg0) {
    int n = (int)cc.cells.size();
    std::vector<int> newid(n, -1), start(n, -1), order;
    std::vector<ChartMap> T(n);
    auto anchor = [](int sg, const Vec2& w, const Vec2& target) {
        return ChartMap{sg, sg > 0 ? target - w : target + w};
    };
    T[c0] = anchor(sg0, cc.cells[c0].v[s0], Vec2{0, 0});
    newid[c0] = 0;
    start[c0] = s0;
    order.push_back(c0);
    std::deque<int> bfs{c0};
    while (!bfs.empty()) {
        int x = bfs.front();
        bfs.pop_front();
        const FlatCell& c = cc.cells[x];
        int m = c.size();
        for (int j = 0; j < m; ++j) {
            int s = (start[x] + j) % m;
            int y = c.nbr[s];
            if (newid[y] >= 0) continue;
            const FlatCell& cy = cc.cells[y];
            int sy = (c.nslot[s] + 1) % cy.size();
            int sg = c.map[s].sign * T[x].sign;
            newid[y] = (int)order.size();
            start[y] = sy;
            T[y] = anchor(sg, cy.v[sy], T[x].apply(c.v[s]));
            order.push_back(y);
            bfs.push_back(y);
        }
    }
    FG_CHECK((int)order.size() == n, "cell complex is not connected");

    Surface out;
    out.kind = cc.kind;
    for (int i = 0; i < n; ++i) {
        const FlatCell& c = cc.cells[order[i]];
        Polygon P;
        P.id = "c" + std::to_string(i);
        int m = c.size();
        for (int j = 0; j < m; ++j)
            P.v.push_back(T[order[i]].apply(c.v[(start[order[i]] + j) % m]));
        out.polys.push_back(std::move(P));
    }
    for (int x = 0; x < n; ++x) {
        const FlatCell& c = cc.cells[x];
        int m = c.size();
        for (int s = 0; s < m; ++s) {
            int y = c.nbr[s], t = c.nslot[s];
            int ny = cc.cells[y].size();
            int pa = newid[x], ea = (s - start[x] + m) % m;
            int pb = newid[y], eb = (t - start[y] + ny) % ny;
            if (std::tie(pa, ea) > std::tie(pb, eb)) continue;
            ChartMap eff = T[x].inverse().then(c.map[s]).then(T[y]);
            bool flip = eff.sign < 0;
            ChartMap expect = cross_map(out.polys[pa], ea, out.polys[pb], eb, flip);
            FG_CHECK(expect.sign == eff.sign && expect.c == eff.c,
                     "canonical gluing map does not match the polygons");
            out.gluings.push_back({{pa, ea}, {pb, eb}, flip});
        }
    }
    std::sort(out.gluings.begin(), out.gluings.end(), [](const Gluing& a, const Gluing& b) {
        return std::tie(a.a.poly, a.a.edge) < std::tie(b.a.poly, b.a.edge);
    });
    // marks go to the class representatives of the rebuilt surface so that
    // parse(serialize(out)) reproduces out exactly; one mark per marked
    // intrinsic vertex, discovered in canonical traversal order
    SurfaceInfo oinfo(out);
    std::set<int> seen_iv;
    for (int i = 0; i < n; ++i) {
        int x = order[i];
        const FlatCell& c = cc.cells[x];
        int m = c.size();
        for (int j = 0; j < m; ++j) {
            int ivid = c.iv[(start[x] + j) % m];
            if (cc.verts[ivid].mark < 0 || seen_iv.count(ivid)) continue;
            seen_iv.insert(ivid);
            int k = oinfo.corner_cls[i][j];
            FG_CHECK(k >= 0, "marked corner missing a vertex class");
            out.marks.push_back({oinfo.classes[k].rep, cc.verts[ivid].label});
        }
    }
    return out;
}

}  // namespace dldetail

// canonical presentation via the intrinsic Delaunay cell complex, minimizing
// the serialization over every starting flag (and, on half-translation
// surfaces, over the two chart orientations of the root cell)
inline Surface canonical_delaunay_form(const Surface& s) {
    CellComplex cc = delaunay_cells(s);
    Surface best;
    std::string best_bytes;
    std::vector<int> signs{1};
    if (s.kind == Kind::half_translation) signs.push_back(-1);
    for (int c0 = 0; c0 < (int)cc.cells.size(); ++c0)
        for (int s0 = 0; s0 < cc.cells[c0].size(); ++s0)
            for (int sg0 : signs) {
                Surface cand = dldetail::candidate_from_flag(cc, c0, s0, sg0);
                std::string bytes = serialize_flatsurf(cand);
                if (best_bytes.empty() || bytes < best_bytes) {
                    best_bytes = std::move(bytes);
                    best = std::move(cand);
                }
            }
    FG_CHECK(validate(best).ok(), "canonical presentation failed validation");
    return best;
}

// canonical presentation of a surface with no distinguished points: a flat
// torus, presented as the Hermite-normal-form parallelogram of its holonomy
// lattice, glued opposite-to-opposite
inline Surface canonical_torus_form(const Surface& s) {
    FG_CHECK(s.kind == Kind::translation, "torus form requires trivial holonomy");
    SurfaceInfo info(s);
    FG_CHECK(s.marks.empty(), "torus form requires an unmarked surface");
    for (int k = 0; k < (int)info.classes.size(); ++k)
        FG_CHECK(!info.is_singular_class(k), "torus form requires a flat surface");

    // holonomy lattice: chart shifts along a spanning tree, then loop vectors
    int n = (int)s.polys.size();
    std::vector<ChartMap> shift(n);
    std::vector<char> seen(n, 0);
    std::vector<std::vector<std::pair<int, ChartMap>>> adj(n);
    for (const Gluing& g : s.gluings) {
        ChartMap m = cross_map(s.polys[g.a.poly], g.a.edge, s.polys[g.b.poly], g.b.edge, g.flip);
        FG_CHECK(!g.flip && m.sign == 1, "flip gluing on a holonomy-trivial surface");
        adj[g.a.poly].push_back({g.b.poly, m});
        adj[g.b.poly].push_back({g.a.poly, m.inverse()});
    }
    shift[0] = ChartMap{1, Vec2{0, 0}};
    seen[0] = 1;
    std::deque<int> bfs{0};
    while (!bfs.empty()) {
        int x = bfs.front();
        bfs.pop_front();
        for (auto& [y, m] : adj[x]) {
            if (seen[y]) continue;
            seen[y] = 1;
            shift[y] = m.inverse().then(shift[x]);
            bfs.push_back(y);
        }
    }
    for (int x = 0; x < n; ++x) FG_CHECK(seen[x], "holonomy walk did not reach every polygon");
    std::vector<Vec2> gens;
    for (const Gluing& g : s.gluings) {
        ChartMap m = cross_map(s.polys[g.a.poly], g.a.edge, s.polys[g.b.poly], g.b.edge, g.flip);
        // loop vector: into the b chart, then both charts back to the root
        ChartMap loop = m.then(shift[g.b.poly]).then(shift[g.a.poly].inverse());
        FG_CHECK(loop.sign == 1, "nontrivial holonomy in a gluing loop");
        if (!(loop.c == (Vec2{0, 0}))) gens.push_back(loop.c);
    }
    FG_CHECK(!gens.empty(), "no lattice generators found");

    // clear denominators, then integer Hermite normal form
    Z D = 1;
    for (const Vec2& v : gens) {
        D = lcm(D, v.x.get_den());
        D = lcm(D, v.y.get_den());
    }
    std::vector<std::pair<Z, Z>> ig;
    for (const Vec2& v : gens) {
        Q sx = v.x * D;
        Q sy = v.y * D;
        FG_CHECK(sx.get_den() == 1 && sy.get_den() == 1, "denominator clearing failed");
        ig.push_back({sx.get_num(), sy.get_num()});
    }
    Z g = 0, xl = 0;  // g = gcd of y-components, xl = matching x via Bezout
    for (auto& [x, y] : ig) {
        if (y == 0) continue;
        if (g == 0) {
            g = abs(y);
            xl = (y > 0) ? x : Z(-x);
        } else {
            Z gg, u, w;
            mpz_gcdext(gg.get_mpz_t(), u.get_mpz_t(), w.get_mpz_t(), g.get_mpz_t(),
                       y.get_mpz_t());
            xl = u * xl + w * x;
            g = gg;
        }
    }
    FG_CHECK(g > 0, "holonomy lattice is degenerate");
    Z a = 0;
    for (auto& [x, y] : ig) {
        FG_CHECK(y % g == 0, "lattice reduction failed");
        Z r = x - (y / g) * xl;
        a = gcd(a, r);
    }
    a = abs(a);
    FG_CHECK(a > 0, "holonomy lattice is degenerate");
    Z b = ((xl % a) + a) % a;

    Q qa = Q(a) / Q(D);
    Q qb = Q(b) / Q(D);
    Q qg = Q(g) / Q(D);
    Surface out;
    out.kind = Kind::translation;
    Polygon P;
    P.id = "c0";
    P.v = {Vec2{0, 0}, Vec2{qa, 0}, Vec2{qa + qb, qg}, Vec2{qb, qg}};
    out.polys.push_back(P);
    out.gluings.push_back({{0, 0}, {0, 2}, false});
    out.gluings.push_back({{0, 1}, {0, 3}, false});
    FG_CHECK(validate(out).ok(), "torus presentation failed validation");
    SurfaceInfo oinfo(out);
    FG_CHECK(oinfo.area == info.area, "torus form changed the area");
    return out;
}

// canonical presentation of a square-tiled surface: breadth-first relabeling
// from every start square, keeping the least (h, v, marks) serialization
inline Surface canonical_origami_form(const Surface& s) {
    FG_CHECK(s.origami.has_value(), "not a square-tiled surface");
    const Origami& o = *s.origami;
    int n = (int)o.n;
    // marks not implied by the lattice-point labeling travel with the squares
    std::vector<Mark> extra;
    {
        Surface bare = s;
        bare.marks.clear();
        SurfaceInfo binfo(bare);
        std::set<std::pair<SurfacePoint, std::string>> implied;
        for (int k = 0; k < (int)binfo.classes.size(); ++k) {
            const auto& vc = binfo.classes[k];
            if (vc.fold_midpoint || vc.angle_pi != 2) continue;
            implied.insert({vc.rep, "p" + std::to_string(k)});
        }
        for (const Mark& mk : s.marks)
            if (!implied.count({mk.at, mk.label})) extra.push_back(mk);
    }
    Surface best;
    std::string best_bytes;
    for (int s0 = 0; s0 < n; ++s0) {
        std::vector<int> relab(n, -1);
        relab[s0] = 0;
        int next = 1;
        std::deque<int> bfs{s0};
        while (!bfs.empty()) {
            int x = bfs.front();
            bfs.pop_front();
            for (int y : {o.h[x], o.v[x]})
                if (relab[y] < 0) {
                    relab[y] = next++;
                    bfs.push_back(y);
                }
        }
        FG_CHECK(next == n, "square adjacency is not transitive");
        Perm h2(n), v2(n);
        for (int x = 0; x < n; ++x) {
            h2[relab[x]] = relab[o.h[x]];
            v2[relab[x]] = relab[o.v[x]];
        }
        std::vector<Mark> marks2;
        for (const Mark& mk : extra)
            marks2.push_back({{relab[mk.at.poly], mk.at.pos}, mk.label});
        std::sort(marks2.begin(), marks2.end(), [](const Mark& a, const Mark& b) {
            if (a.at.poly != b.at.poly) return a.at.poly < b.at.poly;
            if (!(a.at.pos == b.at.pos)) return lex_less(a.at.pos, b.at.pos);
            return a.label < b.label;
        });
        Surface cand = square_tiled_from_permutations(n, h2, v2, marks2);
        std::string bytes = serialize(cand);
        if (best_bytes.empty() || bytes < best_bytes) {
            best_bytes = std::move(bytes);
            best = std::move(cand);
        }
    }
    return best;
}

// geometric canonical form, ignoring any square-tiled presentation flag
inline Surface canonical_form_geometric(const Surface& s) {
    SurfaceInfo info(s);
    bool has_iv = !s.marks.empty();
    for (int k = 0; k < (int)info.classes.size() && !has_iv; ++k)
        has_iv = info.is_singular_class(k);
    if (!has_iv) return canonical_torus_form(s);
    return canonical_delaunay_form(s);
}

inline Surface canonical_form(const Surface& s) {
    if (s.origami) return canonical_origami_form(s);
    return canonical_form_geometric(s);
}

inline std::string canonical_bytes(const Surface& s) { return serialize(canonical_form(s)); }

}  // namespace flatgeo
