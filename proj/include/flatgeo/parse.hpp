#pragma once
// Text formats flatsurf/1 and origami/1: parsing with line-numbered errors,
// bit-exact serialization (rationals in lowest terms).

#include "flatgeo/origami.hpp"

#include <sstream>

namespace flatgeo {

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
}

[[noreturn]] inline void perr(int line, const std::string& msg) {
    throw Error("parse", "line " + std::to_string(line) + ": " + msg);
}

// "(x,y)" with rational components
inline Vec2 parse_vec(const std::string& tok, int line) {
    if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')')
        perr(line, "expected (x,y), got '" + tok + "'");
    std::string body = tok.substr(1, tok.size() - 2);
    size_t comma = body.find(',');
    if (comma == std::string::npos) perr(line, "expected (x,y), got '" + tok + "'");
    try {
        return {parse_q(body.substr(0, comma)), parse_q(body.substr(comma + 1))};
    } catch (const Error& e) {
        perr(line, e.what());
    }
}

// "<ID>.e<i>"
inline std::pair<std::string, int> parse_edge_ref(const std::string& tok, int line) {
    size_t dot = tok.rfind(".e");
    if (dot == std::string::npos || dot + 2 >= tok.size())
        perr(line, "expected <ID>.e<i>, got '" + tok + "'");
    std::string id = tok.substr(0, dot);
    std::string num = tok.substr(dot + 2);
    for (char c : num)
        if (!std::isdigit((unsigned char)c)) perr(line, "bad edge index in '" + tok + "'");
    return {id, std::stoi(num)};
}

inline Perm parse_cycles(const std::string& text, long n, int line) {
    Perm p(n);
    for (long i = 0; i < n; ++i) p[i] = (int)i;
    std::vector<bool> used(n, false);
    size_t pos = 0;
    auto skip_ws = [&] { while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos; };
    skip_ws();
    while (pos < text.size()) {
        if (text[pos] != '(') perr(line, "expected '(' in cycle notation");
        ++pos;
        std::vector<long> cyc;
        while (true) {
            skip_ws();
            if (pos >= text.size()) perr(line, "unterminated cycle");
            if (text[pos] == ')') { ++pos; break; }
            size_t start = pos;
            while (pos < text.size() && (std::isdigit((unsigned char)text[pos]))) ++pos;
            if (pos == start) perr(line, "expected integer in cycle");
            long val = std::stol(text.substr(start, pos - start));
            if (val < 1 || val > n) perr(line, "cycle entry " + std::to_string(val) + " out of range 1.." + std::to_string(n));
            if (used[val - 1]) perr(line, "entry " + std::to_string(val) + " appears twice");
            used[val - 1] = true;
            cyc.push_back(val - 1);
        }
        for (size_t i = 0; i < cyc.size(); ++i) p[cyc[i]] = (int)cyc[(i + 1) % cyc.size()];
        skip_ws();
    }
    return p;
}

inline std::string cycles_str(const Perm& p) {
    auto cycles = perm_cycles(p);
    std::string out;
    for (const auto& cyc : cycles) {
        if (cyc.size() == 1) continue;
        out += "(";
        for (size_t i = 0; i < cyc.size(); ++i)
            out += (i ? " " : "") + std::to_string(cyc[i] + 1);
        out += ")";
    }
    if (out.empty()) out = "(1)";  // identity
    return out;
}

}  // namespace detail

inline Surface parse_surface(const std::string& text) {
    using namespace detail;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;

    // statement list: (lineno, line) with comments/blanks stripped
    std::vector<std::pair<int, std::string>> stmts;
    while (std::getline(in, raw)) {
        ++lineno;
        size_t hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        raw = trim(raw);
        if (!raw.empty()) stmts.push_back({lineno, raw});
    }
    if (stmts.empty()) throw Error("parse", "empty surface file");

    auto [l0, first] = stmts[0];
    if (first == "format: flatsurf/1") {
        Surface s;
        bool kind_seen = false;
        std::vector<std::tuple<int, std::string, int, std::string, int, bool>> glue_lines;
        std::vector<std::tuple<int, std::string, Vec2, std::string>> mark_lines;
        for (size_t idx = 1; idx < stmts.size(); ++idx) {
            auto [ln, line] = stmts[idx];
            if (line.rfind("kind:", 0) == 0) {
                std::string k = trim(line.substr(5));
                if (k == "translation") s.kind = Kind::translation;
                else if (k == "half-translation") s.kind = Kind::half_translation;
                else perr(ln, "unknown kind '" + k + "'");
                kind_seen = true;
            } else if (line.rfind("polygon ", 0) == 0) {
                std::string rest = line.substr(8);
                size_t colon = rest.find(':');
                if (colon == std::string::npos) perr(ln, "polygon line missing ':'");
                Polygon P;
                P.id = trim(rest.substr(0, colon));
                if (P.id.empty()) perr(ln, "empty polygon id");
                if (s.poly_index(P.id) >= 0) perr(ln, "duplicate polygon id '" + P.id + "'");
                for (const std::string& tok : split_ws(rest.substr(colon + 1)))
                    P.v.push_back(parse_vec(tok, ln));
                if (P.size() < 3) perr(ln, "polygon needs at least 3 vertices");
                s.polys.push_back(std::move(P));
            } else if (line.rfind("glue ", 0) == 0) {
                auto toks = split_ws(line.substr(5));
                if (toks.size() != 2 && !(toks.size() == 3 && toks[2] == "flip"))
                    perr(ln, "glue line needs two edge refs and an optional 'flip'");
                auto [ida, ea] = parse_edge_ref(toks[0], ln);
                auto [idb, eb] = parse_edge_ref(toks[1], ln);
                glue_lines.push_back({ln, ida, ea, idb, eb, toks.size() == 3});
            } else if (line.rfind("mark ", 0) == 0) {
                auto toks = split_ws(line.substr(5));
                if (toks.size() < 2 || toks.size() > 3) perr(ln, "mark line: mark <ID> (x,y) [label=<name>]");
                std::string label;
                if (toks.size() == 3) {
                    if (toks[2].rfind("label=", 0) != 0) perr(ln, "expected label=<name>");
                    label = toks[2].substr(6);
                    if (label.empty()) perr(ln, "empty mark label");
                }
                mark_lines.push_back({ln, toks[0], parse_vec(toks[1], ln), label});
            } else {
                perr(ln, "unknown statement '" + line + "'");
            }
        }
        if (!kind_seen) throw Error("parse", "missing 'kind:' statement");
        for (auto& [ln, ida, ea, idb, eb, flip] : glue_lines) {
            int pa = s.poly_index(ida), pb = s.poly_index(idb);
            if (pa < 0) perr(ln, "unknown polygon '" + ida + "'");
            if (pb < 0) perr(ln, "unknown polygon '" + idb + "'");
            if (ea >= s.polys[pa].size()) perr(ln, "edge index out of range for '" + ida + "'");
            if (eb >= s.polys[pb].size()) perr(ln, "edge index out of range for '" + idb + "'");
            s.gluings.push_back({{pa, ea}, {pb, eb}, flip});
        }
        int auto_label = 0;
        for (auto& [ln, id, pos, label] : mark_lines) {
            int p = s.poly_index(id);
            if (p < 0) perr(ln, "unknown polygon '" + id + "'");
            s.marks.push_back({{p, pos}, label.empty() ? "m" + std::to_string(auto_label++) : label});
        }
        // structural validation first, then canonicalize marks, then full validation
        {
            Surface probe = s;
            probe.marks.clear();
            ValidationReport r = validate(probe);
            if (!r.ok()) {
                std::string msg = "invalid surface:";
                for (const auto& c : r.checks)
                    if (!c.pass) msg += " [" + c.name + "] " + c.witness;
                throw Error("invalid-surface", msg);
            }
            SurfaceInfo info(probe);
            for (auto& mk : s.marks) {
                if (detail::point_in_polygon(s.polys[mk.at.poly], mk.at.pos) == 0)
                    throw Error("invalid-surface", "mark " + mk.label + " lies outside polygon " +
                                                       s.polys[mk.at.poly].id);
                mk.at = info.canonical_point(mk.at);
            }
        }
        ValidationReport r = validate(s);
        if (!r.ok()) {
            std::string msg = "invalid surface:";
            for (const auto& c : r.checks)
                if (!c.pass) msg += " [" + c.name + "] " + c.witness;
            throw Error("invalid-surface", msg);
        }
        return s;
    }

    if (first == "format: origami/1") {
        long n = -1;
        std::string htext, vtext;
        int hline = 0, vline = 0;
        std::vector<std::tuple<int, std::string, Vec2, std::string>> mark_lines;
        for (size_t idx = 1; idx < stmts.size(); ++idx) {
            auto [ln, line] = stmts[idx];
            if (line.rfind("n:", 0) == 0) {
                std::string t = trim(line.substr(2));
                for (char c : t)
                    if (!std::isdigit((unsigned char)c)) perr(ln, "bad square count '" + t + "'");
                n = std::stol(t);
            } else if (line.rfind("h:", 0) == 0) {
                htext = trim(line.substr(2));
                hline = ln;
            } else if (line.rfind("v:", 0) == 0) {
                vtext = trim(line.substr(2));
                vline = ln;
            } else if (line.rfind("mark ", 0) == 0) {
                auto toks = split_ws(line.substr(5));
                if (toks.size() < 2 || toks.size() > 3) perr(ln, "mark line: mark <square> (x,y) [label=<name>]");
                std::string label;
                if (toks.size() == 3) {
                    if (toks[2].rfind("label=", 0) != 0) perr(ln, "expected label=<name>");
                    label = toks[2].substr(6);
                }
                mark_lines.push_back({ln, toks[0], parse_vec(toks[1], ln), label});
            } else {
                perr(ln, "unknown statement '" + line + "'");
            }
        }
        if (n < 1) throw Error("parse", "missing or bad 'n:' statement");
        if (hline == 0 || vline == 0) throw Error("parse", "origami needs h: and v: statements");
        Perm h = parse_cycles(htext, n, hline);
        Perm v = parse_cycles(vtext, n, vline);
        std::vector<Mark> marks;
        int auto_label = 0;
        for (auto& [ln, sq, pos, label] : mark_lines) {
            for (char c : sq)
                if (!std::isdigit((unsigned char)c)) perr(ln, "bad square index '" + sq + "'");
            long i = std::stol(sq);
            if (i < 1 || i > n) perr(ln, "square index out of range");
            marks.push_back({{(int)(i - 1), pos}, label.empty() ? "m" + std::to_string(auto_label++) : label});
        }
        return square_tiled_from_permutations(n, h, v, std::move(marks));
    }

    throw Error("parse", "line " + std::to_string(l0) +
                             ": first statement must be 'format: flatsurf/1' or 'format: origami/1'");
}

inline std::string vec_str(const Vec2& v) { return "(" + q_str(v.x) + "," + q_str(v.y) + ")"; }

inline std::string serialize_flatsurf(const Surface& s) {
    std::string out = "format: flatsurf/1\n";
    out += std::string("kind: ") + (s.kind == Kind::translation ? "translation" : "half-translation") + "\n";
    for (const auto& P : s.polys) {
        out += "polygon " + P.id + ":";
        for (const auto& vv : P.v) out += " " + vec_str(vv);
        out += "\n";
    }
    for (const auto& g : s.gluings) {
        out += "glue " + s.polys[g.a.poly].id + ".e" + std::to_string(g.a.edge) + " " +
               s.polys[g.b.poly].id + ".e" + std::to_string(g.b.edge) + (g.flip ? " flip" : "") + "\n";
    }
    for (const auto& mk : s.marks)
        out += "mark " + s.polys[mk.at.poly].id + " " + vec_str(mk.at.pos) + " label=" + mk.label + "\n";
    return out;
}

inline std::string serialize_origami(const Surface& s) {
    if (!s.origami) throw Error("serialize", "surface has no origami backing");
    const Origami& o = *s.origami;
    std::string out = "format: origami/1\n";
    out += "n: " + std::to_string(o.n) + "\n";
    out += "h: " + detail::cycles_str(o.h) + "\n";
    out += "v: " + detail::cycles_str(o.v) + "\n";
    // auto lattice marks are implied by the format; write only the rest
    Surface bare = s;
    bare.marks.clear();
    SurfaceInfo info(bare);
    std::set<std::pair<SurfacePoint, std::string>> implied;
    for (int k = 0; k < (int)info.classes.size(); ++k) {
        const auto& vc = info.classes[k];
        if (vc.angle_pi == 2 && !vc.fold_midpoint)
            implied.insert({vc.rep, "p" + std::to_string(k)});
    }
    for (const auto& mk : s.marks) {
        if (implied.count({mk.at, mk.label})) continue;
        out += "mark " + s.polys[mk.at.poly].id + " " + vec_str(mk.at.pos) + " label=" + mk.label + "\n";
    }
    return out;
}

inline std::string serialize(const Surface& s) {
    return s.origami ? serialize_origami(s) : serialize_flatsurf(s);
}

}  // namespace flatgeo
