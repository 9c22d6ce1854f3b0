#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "flatgeo/delaunay.hpp"
#include "flatgeo/origami.hpp"
#include "flatgeo/parse.hpp"

using namespace flatgeo;

namespace {

Surface unit_torus() { return square_tiled_from_permutations(1, {0}, {0}); }

Surface l_origami() { return square_tiled_from_permutations(3, {1, 0, 2}, {2, 1, 0}); }

// the same three-square surface with the squares renamed by the cycle 0->1->2->0
Surface l_origami_relabeled() { return square_tiled_from_permutations(3, {0, 2, 1}, {1, 0, 2}); }

Surface pillowcase() {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: half-translation\n"
        "polygon P: (0,0) (1,0) (1,1) (0,1)\n"
        "glue P.e0 P.e0 flip\n"
        "glue P.e1 P.e1 flip\n"
        "glue P.e2 P.e2 flip\n"
        "glue P.e3 P.e3 flip\n");
}

Surface bare_torus() {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon T: (0,0) (1,0) (1,1) (0,1)\n"
        "glue T.e0 T.e2\n"
        "glue T.e1 T.e3\n");
}

Surface marked_torus(const std::string& mark_line) {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon T: (0,0) (1,0) (1,1) (0,1)\n"
        "glue T.e0 T.e2\n"
        "glue T.e1 T.e3\n" +
        mark_line);
}

Surface two_triangle_torus() {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon A: (0,0) (1,0) (1,1)\n"
        "polygon B: (0,0) (1,1) (0,1)\n"
        "glue A.e0 B.e1\n"
        "glue A.e1 B.e2\n"
        "glue A.e2 B.e0\n");
}

Surface two_square_torus() {
    return parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon A: (0,0) (1,0) (1,1) (0,1)\n"
        "polygon B: (0,0) (1,0) (1,1) (0,1)\n"
        "glue A.e1 B.e3\n"
        "glue B.e1 A.e3\n"
        "glue A.e0 A.e2\n"
        "glue B.e0 B.e2\n");
}

const std::string kSquareTorus =
    "format: flatsurf/1\n"
    "kind: translation\n"
    "polygon c0: (0,0) (1,0) (1,1) (0,1)\n"
    "glue c0.e0 c0.e2\n"
    "glue c0.e1 c0.e3\n";

const std::string kMarkedSquareTorus =
    "format: flatsurf/1\n"
    "kind: translation\n"
    "polygon c0: (0,0) (-1,0) (-1,-1) (0,-1)\n"
    "glue c0.e0 c0.e2\n"
    "glue c0.e1 c0.e3\n"
    "mark c0 (0,0) label=b\n";

}  // namespace

TEST_CASE("torus form: every presentation of the unit torus gives the same bytes") {
    CHECK(canonical_bytes(bare_torus()) == kSquareTorus);
    CHECK(canonical_bytes(two_triangle_torus()) == kSquareTorus);

    // lattice-preserving deformations do not change the canonical presentation
    Mat2 shear{1, 1, 0, 1};
    CHECK(canonical_bytes(apply_matrix(bare_torus(), shear)) == kSquareTorus);
    Mat2 rot{0, -1, 1, 0};
    CHECK(canonical_bytes(apply_matrix(bare_torus(), rot)) == kSquareTorus);
    Mat2 swap{0, 1, 1, 0};  // det -1: exercises the orientation-restoring path
    CHECK(canonical_bytes(apply_matrix(bare_torus(), swap)) == kSquareTorus);

    // multi-polygon presentation of the 2x1 torus
    CHECK(canonical_bytes(two_square_torus()) ==
          "format: flatsurf/1\n"
          "kind: translation\n"
          "polygon c0: (0,0) (2,0) (2,1) (0,1)\n"
          "glue c0.e0 c0.e2\n"
          "glue c0.e1 c0.e3\n");
}

TEST_CASE("torus form: lattice reduction is presentation independent") {
    std::string sheared =
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon c0: (0,0) (2,0) (3,1) (1,1)\n"
        "glue c0.e0 c0.e2\n"
        "glue c0.e1 c0.e3\n";
    CHECK(canonical_bytes(parse_surface(sheared)) == sheared);

    // alternate fundamental domain of the same lattice
    Surface alt = parse_surface(
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon P: (0,0) (3,1) (4,2) (1,1)\n"
        "glue P.e0 P.e2\n"
        "glue P.e1 P.e3\n");
    CHECK(canonical_bytes(alt) == sheared);

    // rational lattice with a common denominator
    std::string half =
        "format: flatsurf/1\n"
        "kind: translation\n"
        "polygon c0: (0,0) (1/2,0) (1/2,1/2) (0,1/2)\n"
        "glue c0.e0 c0.e2\n"
        "glue c0.e1 c0.e3\n";
    CHECK(canonical_bytes(parse_surface(half)) == half);

    // non-integer shear genuinely changes the lattice
    Mat2 m{1, Q(1, 3), 0, 1};
    CHECK(canonical_bytes(apply_matrix(bare_torus(), m)) ==
          "format: flatsurf/1\n"
          "kind: translation\n"
          "polygon c0: (0,0) (1,0) (4/3,1) (1/3,1)\n"
          "glue c0.e0 c0.e2\n"
          "glue c0.e1 c0.e3\n");
}

TEST_CASE("origami form: conjugate permutation presentations agree") {
    std::string l = canonical_bytes(l_origami());
    CHECK(l ==
          "format: origami/1\n"
          "n: 3\n"
          "h: (1 2)\n"
          "v: (1 3)\n");
    CHECK(canonical_bytes(l_origami_relabeled()) == l);
    CHECK(canonical_bytes(unit_torus()) ==
          "format: origami/1\n"
          "n: 1\n"
          "h: (1)\n"
          "v: (1)\n");

    // idempotent, and stable under parse/serialize round trips
    Surface c = canonical_form(l_origami());
    CHECK(canonical_bytes(c) == l);
    CHECK(serialize(parse_surface(l)) == l);
    CHECK(canonical_bytes(parse_surface(l)) == l);
}

TEST_CASE("delaunay form: a marked torus canonicalizes the same from any presentation") {
    Surface edge = marked_torus("mark T (1/2,0) label=b\n");
    Surface center = marked_torus("mark T (1/2,1/2) label=b\n");
    CHECK(canonical_bytes(edge) == kMarkedSquareTorus);
    CHECK(canonical_bytes(center) == kMarkedSquareTorus);

    // the cell complex itself: one square cell over the single marked point
    CellComplex cc = delaunay_cells(edge);
    REQUIRE(cc.cells.size() == 1);
    CHECK(cc.cells[0].size() == 4);
    REQUIRE(cc.verts.size() == 1);
    CHECK(cc.verts[0].label == "b");
    CHECK(cc.area == 1);

    // deformations that preserve the marked lattice preserve the bytes
    for (Mat2 m : {Mat2{1, 1, 0, 1}, Mat2{1, 2, 0, 1}, Mat2{0, -1, 1, 0}, Mat2{-1, 0, 0, -1},
                   Mat2{2, 1, 1, 1}}) {
        CHECK(canonical_bytes(apply_matrix(edge, m)) == kMarkedSquareTorus);
    }

    // a deformation and its inverse restore the bytes even when the
    // intermediate surface is genuinely different
    Mat2 m{1, Q(1, 3), 0, 1};
    Surface mid = apply_matrix(edge, m);
    CHECK(canonical_bytes(mid) != kMarkedSquareTorus);
    CHECK(canonical_bytes(apply_matrix(mid, m.inverse())) == kMarkedSquareTorus);

    // labels take part in the identity
    CHECK(canonical_bytes(marked_torus("mark T (1/2,0) label=c\n")) != kMarkedSquareTorus);

    // a mark at the lattice point itself pins the vertex class
    CHECK(canonical_bytes(marked_torus("mark T (0,0) label=a\n")) ==
          "format: flatsurf/1\n"
          "kind: translation\n"
          "polygon c0: (0,0) (-1,0) (-1,-1) (0,-1)\n"
          "glue c0.e0 c0.e2\n"
          "glue c0.e1 c0.e3\n"
          "mark c0 (0,0) label=a\n");

    // idempotence and round-trip stability
    Surface cform = canonical_form(edge);
    CHECK(canonical_bytes(cform) == kMarkedSquareTorus);
    CHECK(serialize(parse_surface(kMarkedSquareTorus)) == kMarkedSquareTorus);
    CHECK(canonical_bytes(parse_surface(kMarkedSquareTorus)) == kMarkedSquareTorus);
}

TEST_CASE("delaunay form: two marked points, exchanged by a translation") {
    Surface a = marked_torus("mark T (0,0) label=a\nmark T (1/2,0) label=b\n");
    Surface b = marked_torus("mark T (0,0) label=b\nmark T (1/2,0) label=a\n");
    CHECK(canonical_bytes(a) == canonical_bytes(b));

    CellComplex cc = delaunay_cells(a);
    CHECK(cc.cells.size() == 2);
    for (const FlatCell& c : cc.cells) CHECK(c.size() == 4);
    REQUIRE(cc.verts.size() == 2);
    CHECK(cc.area == 1);

    // same label on both points is allowed and still canonicalizes
    Surface twin = marked_torus("mark T (0,0) label=x\nmark T (1/2,0) label=x\n");
    CHECK(canonical_bytes(twin) == canonical_bytes(twin));
    CHECK(canonical_bytes(twin) != canonical_bytes(a));
}

TEST_CASE("delaunay form: pillowcase") {
    Surface p = pillowcase();
    CellComplex cc = delaunay_cells(p);
    CHECK(cc.cells.size() == 2);
    for (const FlatCell& c : cc.cells) CHECK(c.size() == 4);
    REQUIRE(cc.verts.size() == 4);
    SurfaceInfo pinfo(p);
    for (const IVert& v : cc.verts) {
        REQUIRE(v.cls >= 0);
        CHECK(pinfo.classes[v.cls].angle_pi == 1);
    }
    CHECK(cc.area == 1);

    std::string bytes = canonical_bytes(p);
    CHECK(bytes.substr(0, bytes.find("polygon c1")) ==
          "format: flatsurf/1\n"
          "kind: half-translation\n"
          "polygon c0: (0,0) (-1/2,-1/2) (0,-1) (1/2,-1/2)\n");

    // isometries of the pillowcase leave the bytes alone
    for (Mat2 m : {Mat2{-1, 0, 0, -1}, Mat2{0, -1, 1, 0}}) {
        CHECK(canonical_bytes(apply_matrix(p, m)) == bytes);
    }

    // stratum is preserved by canonicalization
    Surface c = canonical_form(p);
    ValidationReport r = validate(c);
    REQUIRE(r.ok());
    REQUIRE(r.stratum.has_value());
    CHECK(r.stratum->str() == "Q(-1,-1,-1,-1)");

    CHECK(canonical_bytes(c) == bytes);
    CHECK(serialize(parse_surface(bytes)) == bytes);
}

TEST_CASE("delaunay form: three-square surface with one cone point") {
    Surface g1 = l_origami();
    g1.origami.reset();
    Surface g2 = l_origami_relabeled();
    g2.origami.reset();

    std::string bytes = canonical_bytes(g1);
    CHECK(canonical_bytes(g2) == bytes);

    CellComplex cc = delaunay_cells(g1);
    REQUIRE(cc.verts.size() == 1);
    SurfaceInfo ginfo(g1);
    CHECK(ginfo.classes[cc.verts[0].cls].angle_pi == 6);
    CHECK(cc.area == 3);

    // the hyperelliptic involution acts by central symmetry
    CHECK(canonical_bytes(apply_matrix(g1, Mat2{-1, 0, 0, -1})) == bytes);

    Surface c = canonical_form(g1);
    ValidationReport r = validate(c);
    REQUIRE(r.ok());
    REQUIRE(r.stratum.has_value());
    CHECK(r.stratum->str() == "H(2)");

    CHECK(canonical_bytes(c) == bytes);
    CHECK(serialize(parse_surface(bytes)) == bytes);
    CHECK(bytes != canonical_bytes(bare_torus()));
}
