#pragma once
// Convex-cell mesh over a surface: convex polygons are kept whole, reflex
// polygons are ear-clipped into triangles. All tracing runs on this mesh.
// Cells keep their source polygon's chart, so internal edges carry identity
// chart maps and polygon-boundary edges carry the surface gluing maps.

#include "flatgeo/surface.hpp"

#include <array>
#include <numeric>

namespace flatgeo {

struct Cell {
    int poly = -1;
    std::vector<Vec2> v;        // ccw, convex (straight corners allowed)
    std::vector<int> pvtx;      // polygon vertex index per corner
    std::vector<int> nbr;       // neighbor cell per edge slot
    std::vector<int> nbr_slot;  // matching slot in neighbor
    std::vector<ChartMap> map;  // chart map into the neighbor
    std::vector<int> fold_cls;  // vertex-class id of the fold midpoint, or -1
    std::vector<int> cls;       // surface vertex class per corner

    int size() const { return (int)v.size(); }
    const Vec2& vert(int i) const {
        int n = size();
        return v[((i % n) + n) % n];
    }
    Vec2 edge_vec(int e) const { return vert(e + 1) - vert(e); }
};

struct MeshCorner {
    int cell = -1, k = -1;
    bool valid() const { return cell >= 0; }
    auto operator<=>(const MeshCorner&) const = default;
};

namespace detail {

inline bool polygon_convex(const Polygon& P) {
    for (int i = 0; i < P.size(); ++i)
        if (orient(P.vert(i - 1), P.vert(i), P.vert(i + 1)) < 0) return false;
    return true;
}

inline std::vector<std::array<int, 3>> ear_clip(const Polygon& P) {
    int n = P.size();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::array<int, 3>> out;
    while ((int)idx.size() > 3) {
        bool clipped = false;
        for (size_t i = 0; i < idx.size() && !clipped; ++i) {
            int ia = idx[(i + idx.size() - 1) % idx.size()];
            int ib = idx[i];
            int ic = idx[(i + 1) % idx.size()];
            const Vec2 &a = P.v[ia], &b = P.v[ib], &c = P.v[ic];
            if (orient(a, b, c) <= 0) continue;
            bool blocked = false;
            for (int j : idx) {
                if (j == ia || j == ib || j == ic) continue;
                const Vec2& p = P.v[j];
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
        FG_CHECK(clipped, "ear clipping failed on a simple polygon");
    }
    out.push_back({idx[0], idx[1], idx[2]});
    return out;
}

}  // namespace detail

class Mesh {
  public:
    const Surface* s = nullptr;
    SurfaceInfo info;
    std::vector<Cell> cells;
    std::vector<std::vector<int>> cells_of_poly;
    // polygon boundary edge -> (cell, slot)
    std::vector<std::vector<std::pair<int, int>>> bcell;

    explicit Mesh(const Surface& surf) : s(&surf), info(surf) { build(); }
    Mesh(const Surface& surf, SurfaceInfo in) : s(&surf), info(std::move(in)) { build(); }

    const Cell& cell(int c) const { return cells[c]; }

    MeshCorner next_around(MeshCorner mc) const {
        const Cell& c = cells[mc.cell];
        int nc = c.nbr[mc.k], nk = c.nbr_slot[mc.k];
        return {nc, (nk + 1) % cells[nc].size()};
    }

    // 0 outside, 1 inside, 2 on boundary (convex cell).  With straight corners
    // a supporting line carries several edges, so a point on the line beyond
    // one edge's span may still lie on a collinear neighbor: only the full
    // sweep decides.
    int side_of_cell(int ci, const Vec2& p) const {
        const Cell& c = cells[ci];
        bool boundary = false, on_line_off_span = false;
        for (int e = 0; e < c.size(); ++e) {
            int o = orient(c.vert(e), c.vert(e + 1), p);
            if (o < 0) return 0;
            if (o == 0) {
                if (sgn(dot(p - c.vert(e), p - c.vert(e + 1))) <= 0) boundary = true;
                else on_line_off_span = true;
            }
        }
        if (boundary) return 2;
        return on_line_off_span ? 0 : 1;
    }

    // all (cell, position) representatives of a non-vertex surface point
    std::vector<std::pair<int, Vec2>> realize(const SurfacePoint& pt) const {
        std::vector<std::pair<SurfacePoint, bool>> reps{{pt, true}};
        // a point on a glued polygon edge also lives in the partner chart
        const Polygon& P = s->polys[pt.poly];
        for (int e = 0; e < P.size(); ++e) {
            const Vec2 &a = P.vert(e), &b = P.vert(e + 1);
            if (orient(a, b, pt.pos) == 0 && sgn(dot(pt.pos - a, pt.pos - b)) < 0) {
                auto [to, m] = info.cross(pt.poly, e);
                reps.push_back({{to.poly, m.apply(pt.pos)}, true});
            }
        }
        std::vector<std::pair<int, Vec2>> out;
        for (auto& [rp, ok] : reps)
            for (int ci : cells_of_poly[rp.poly])
                if (side_of_cell(ci, rp.pos) > 0) {
                    bool dup = false;
                    for (auto& [c0, p0] : out)
                        if (c0 == ci && p0 == rp.pos) dup = true;
                    if (!dup) out.push_back({ci, rp.pos});
                }
        FG_CHECK(!out.empty(), "point not found in any cell");
        return out;
    }

  private:
    void build() {
        const Surface& S = *s;
        cells_of_poly.assign(S.polys.size(), {});
        bcell.assign(S.polys.size(), {});
        for (int p = 0; p < (int)S.polys.size(); ++p) {
            const Polygon& P = S.polys[p];
            bcell[p].assign(P.size(), {-1, -1});
            std::vector<std::vector<int>> pieces;
            if (detail::polygon_convex(P)) {
                std::vector<int> all(P.size());
                std::iota(all.begin(), all.end(), 0);
                pieces.push_back(all);
            } else {
                for (auto& t : detail::ear_clip(P)) pieces.push_back({t[0], t[1], t[2]});
            }
            for (auto& piece : pieces) {
                Cell c;
                c.poly = p;
                c.pvtx = piece;
                for (int ix : piece) c.v.push_back(P.v[ix]);
                int n = (int)piece.size();
                c.nbr.assign(n, -1);
                c.nbr_slot.assign(n, -1);
                c.map.assign(n, {});
                c.fold_cls.assign(n, -1);
                c.cls.assign(n, -1);
                for (int k = 0; k < n; ++k) c.cls[k] = info.corner_cls[p][piece[k]];
                cells_of_poly[p].push_back((int)cells.size());
                cells.push_back(std::move(c));
            }
        }
        // match edges: polygon-boundary vs internal diagonals
        std::map<std::pair<long, long>, std::pair<int, int>> open_diag;  // (vi,vj) within poly
        for (int ci = 0; ci < (int)cells.size(); ++ci) {
            Cell& c = cells[ci];
            int n = c.size(), np = s->polys[c.poly].size();
            for (int k = 0; k < n; ++k) {
                int a = c.pvtx[k], b = c.pvtx[(k + 1) % n];
                if ((a + 1) % np == b) {
                    bcell[c.poly][a] = {ci, k};  // boundary edge a of the polygon
                } else {
                    long key_a = (long)c.poly * 1000000 + std::min(a, b);
                    long key_b = std::max(a, b);
                    auto it = open_diag.find({key_a, key_b});
                    if (it == open_diag.end()) {
                        open_diag[{key_a, key_b}] = {ci, k};
                    } else {
                        auto [cj, kj] = it->second;
                        link(ci, k, cj, kj, ChartMap{1, Vec2{0, 0}});
                        open_diag.erase(it);
                    }
                }
            }
        }
        FG_CHECK(open_diag.empty(), "unmatched internal diagonal");
        // wire polygon boundary edges through the surface gluings
        for (const Gluing& g : S.gluings) {
            auto [ca, ka] = bcell[g.a.poly][g.a.edge];
            auto [cb, kb] = bcell[g.b.poly][g.b.edge];
            ChartMap m = cross_map(S.polys[g.a.poly], g.a.edge, S.polys[g.b.poly], g.b.edge, g.flip);
            if (g.is_fold()) {
                Cell& c = cells[ca];
                c.nbr[ka] = ca;
                c.nbr_slot[ka] = ka;
                c.map[ka] = m;
                for (int vc = 0; vc < (int)info.classes.size(); ++vc)
                    if (info.classes[vc].fold_midpoint && info.classes[vc].fold_edge == g.a)
                        c.fold_cls[ka] = vc;
            } else {
                link(ca, ka, cb, kb, m);
            }
        }
        for (const Cell& c : cells)
            for (int k = 0; k < c.size(); ++k) FG_CHECK(c.nbr[k] >= 0, "unwired mesh edge");
    }

    void link(int ci, int ki, int cj, int kj, const ChartMap& m_ij) {
        cells[ci].nbr[ki] = cj;
        cells[ci].nbr_slot[ki] = kj;
        cells[ci].map[ki] = m_ij;
        cells[cj].nbr[kj] = ci;
        cells[cj].nbr_slot[kj] = ki;
        cells[cj].map[kj] = m_ij.inverse();
    }
};

}  // namespace flatgeo
