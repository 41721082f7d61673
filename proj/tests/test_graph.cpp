#include "phi4/graph.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace phi4;

namespace {

/** Multiset of (deg u, deg v, multiplicity-insensitive) sorted edge keys. */
std::multiset<std::pair<int, int>> edge_shape(const IbpGraph &g) {
    std::multiset<std::pair<int, int>> s;
    for (const auto &e : g.edges()) s.insert(std::minmax(e.u, e.v));
    return s;
}

} // namespace

TEST_SUITE_BEGIN("graph");

TEST_CASE("expansion at order 1 for the 2-point function") {
    Expansion e = expand(2, 1);
    REQUIRE(e.f_terms.size() == 2);
    REQUIRE(e.f_terms[0].size() == 1);
    const Term &t0 = e.f_terms[0][0];
    CHECK(t0.coeff == Rational(1));
    CHECK(t0.lambda_power == 0);
    CHECK(t0.graph.interior_count() == 0);
    REQUIRE(t0.graph.edges().size() == 1);
    CHECK(t0.graph.edges()[0].u == 0);
    CHECK(t0.graph.edges()[0].v == 1);
    CHECK(e.f_terms[1].empty()); // the order-lambda term vanishes
}

TEST_CASE("order 2 yields the sunset diagram with coefficient 6") {
    Expansion e = expand(2, 2);
    CHECK(e.f_terms[1].empty());
    REQUIRE(e.f_terms[2].size() == 1);
    const Term &t = e.f_terms[2][0];
    CHECK(t.coeff == Rational(6));
    CHECK(t.lambda_power == 2);
    const IbpGraph &g = t.graph;
    CHECK(g.boundary_count() == 2);
    CHECK(g.interior_count() == 2);
    CHECK(g.n_phi() == 0);
    CHECK(g.degree(0) == 1);
    CHECK(g.degree(1) == 1);
    CHECK(g.degree(2) == 4);
    CHECK(g.degree(3) == 4);
    auto shape = edge_shape(g);
    CHECK(shape.count({2, 3}) == 3); // triple internal line
    CHECK(shape.count({0, 2}) + shape.count({0, 3}) == 1);
    CHECK(shape.count({1, 2}) + shape.count({1, 3}) == 1);
}

TEST_CASE("order 1 of the 4-point function is -6 times the star") {
    Expansion e = expand(4, 1);
    REQUIRE(e.f_terms[1].size() == 1);
    const Term &t = e.f_terms[1][0];
    CHECK(t.coeff == Rational(-6));
    const IbpGraph &g = t.graph;
    CHECK(g.interior_count() == 1);
    for (int b = 0; b < 4; ++b) CHECK(g.degree(b) == 1);
    CHECK(g.degree(4) == 4);
    auto shape = edge_shape(g);
    for (int b = 0; b < 4; ++b) CHECK(shape.count({b, 4}) == 1);
    // order 0 of the 4-point function: the three Wick pairings
    Expansion e0 = expand(4, 0);
    CHECK(e0.f_terms[0].size() == 3);
    for (const Term &p : e0.f_terms[0]) CHECK(p.coeff == Rational(1));
}

TEST_CASE("odd correlation functions vanish identically") {
    Expansion e = expand(3, 2);
    for (const auto &lvl : e.f_terms) CHECK(lvl.empty());
    // the remainder graphs all keep an odd number of Phi insertions
    for (const Term &t : e.remainder) CHECK(t.graph.n_phi() % 2 == 1);
}

TEST_CASE("red subgraph of every expansion graph is a boundary-rooted forest") {
    Expansion e = expand(2, 2);
    for (const auto &lvl : e.f_terms)
        for (const Term &t : lvl) CHECK(red_forest_check(t.graph));
    for (const Term &t : e.remainder) CHECK(red_forest_check(t.graph));
}

TEST_CASE("red forest check rejects red cycles and unrooted trees") {
    IbpGraph g(2);
    int a = g.add_interior_vertex();
    int b = g.add_interior_vertex();
    g.add_edge(0, a, EdgeColor::Red);
    g.add_edge(1, b, EdgeColor::Red);
    CHECK(red_forest_check(g));
    IbpGraph cyc(2);
    int c = cyc.add_interior_vertex();
    int d = cyc.add_interior_vertex();
    int e = cyc.add_interior_vertex();
    cyc.add_edge(0, c, EdgeColor::Red);
    cyc.add_edge(c, d, EdgeColor::Red);
    cyc.add_edge(d, e, EdgeColor::Red);
    cyc.add_edge(e, c, EdgeColor::Red); // closes a red cycle
    CHECK_FALSE(red_forest_check(cyc));
    IbpGraph orphan(2);
    int z = orphan.add_interior_vertex();
    int w = orphan.add_interior_vertex();
    orphan.add_edge(z, w, EdgeColor::Red); // tree without a boundary root
    CHECK_FALSE(red_forest_check(orphan));
}

TEST_CASE("canonical key identifies interior relabelings only") {
    IbpGraph g1(2), g2(2);
    int a1 = g1.add_interior_vertex(), b1 = g1.add_interior_vertex();
    g1.add_edge(0, a1, EdgeColor::Red);
    g1.add_edge(1, b1, EdgeColor::Red);
    g1.add_edge(a1, b1, EdgeColor::Green);
    // same graph with the two interiors created in the opposite roles
    int a2 = g2.add_interior_vertex(), b2 = g2.add_interior_vertex();
    g2.add_edge(0, b2, EdgeColor::Red);
    g2.add_edge(1, a2, EdgeColor::Red);
    g2.add_edge(a2, b2, EdgeColor::Green);
    CHECK(canonical_key(g1) == canonical_key(g2));
    // swapping which boundary vertex is attached changes the graph
    IbpGraph h1(2), h2(2);
    int z1 = h1.add_interior_vertex();
    h1.add_edge(0, z1, EdgeColor::Red);
    int z2 = h2.add_interior_vertex();
    h2.add_edge(1, z2, EdgeColor::Red);
    CHECK(canonical_key(h1) != canonical_key(h2));
    // color matters
    IbpGraph g4 = g1;
    CHECK(canonical_key(g4) == canonical_key(g1));
    IbpGraph g5(2);
    int a5 = g5.add_interior_vertex(), b5 = g5.add_interior_vertex();
    g5.add_edge(0, a5, EdgeColor::Red);
    g5.add_edge(1, b5, EdgeColor::Red);
    g5.add_edge(a5, b5, EdgeColor::Red);
    CHECK(canonical_key(g5) != canonical_key(g1));
}

TEST_CASE("merge_terms sums coefficients of isomorphic graphs exactly") {
    IbpGraph g1(2), g2(2);
    int a1 = g1.add_interior_vertex(), b1 = g1.add_interior_vertex();
    g1.add_edge(0, a1, EdgeColor::Red);
    g1.add_edge(1, b1, EdgeColor::Red);
    g1.add_edge(a1, b1, EdgeColor::Green);
    int a2 = g2.add_interior_vertex(), b2 = g2.add_interior_vertex();
    g2.add_edge(0, b2, EdgeColor::Red);
    g2.add_edge(1, a2, EdgeColor::Red);
    g2.add_edge(a2, b2, EdgeColor::Green);
    std::vector<Term> ts{{Rational(1, 3), 1, g1}, {Rational(2, 3), 1, g2},
                         {Rational(-1), 1, g1}};
    std::vector<Term> merged = merge_terms(ts);
    CHECK(merged.empty()); // 1/3 + 2/3 - 1 = 0 drops the graph
    ts.pop_back();
    merged = merge_terms(ts);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].coeff == Rational(1));
}

TEST_CASE("ibp_step bookkeeping follows the rewrite rule") {
    IbpGraph g(2); // bare 2-point function, no edges
    Term t{Rational(1), 0, g};
    std::vector<Term> out = ibp_step(t, 0);
    REQUIRE(out.size() == 2);
    // G^- : green edge to the other boundary vertex, coefficient (1 - deg) = 1
    CHECK(out[0].coeff == Rational(1));
    CHECK(out[0].lambda_power == 0);
    CHECK(out[0].graph.edges().size() == 1);
    CHECK(out[0].graph.edges()[0].color == EdgeColor::Green);
    // G^+ : new interior vertex, red edge, factor -1, one more lambda power
    CHECK(out[1].coeff == Rational(-1));
    CHECK(out[1].lambda_power == 1);
    CHECK(out[1].graph.interior_count() == 1);
    CHECK(out[1].graph.edges()[0].color == EdgeColor::Red);
    CHECK(out[1].graph.n_phi() == 4);
    // a saturated vertex cannot be expanded
    CHECK_THROWS(ibp_step(out[0], 0));
}

TEST_CASE("expansion is independent of the vertex selection rule") {
    // rerun the iteration picking the highest eligible vertex instead
    auto expand_alt = [](int k, int N) {
        std::vector<std::vector<Term>> levels(std::size_t(N) + 1);
        std::vector<Term> work{{Rational(1), 0, IbpGraph(k)}}, done;
        while (!work.empty()) {
            Term t = std::move(work.back());
            work.pop_back();
            if (t.graph.n_phi() == 0) {
                levels[std::size_t(t.lambda_power)].push_back(t);
                continue;
            }
            if (t.lambda_power > N) {
                done.push_back(t);
                continue;
            }
            int pick = -1;
            for (int v = 0; v < t.graph.boundary_count(); ++v)
                if (t.graph.degree(v) == 0) pick = v; // highest boundary
            if (pick < 0)
                for (int v = t.graph.boundary_count(); v < t.graph.vertex_count(); ++v)
                    if (t.graph.degree(v) < 4) pick = v; // highest interior
            for (Term &nt : ibp_step(t, pick)) work.push_back(std::move(nt));
        }
        for (auto &lvl : levels) lvl = merge_terms(lvl);
        return levels;
    };
    Expansion ref = expand(2, 2);
    auto alt = expand_alt(2, 2);
    for (int n = 0; n <= 2; ++n) {
        std::map<std::string, Rational> a, b;
        for (const Term &t : ref.f_terms[std::size_t(n)])
            a[canonical_key(t.graph)] = t.coeff;
        for (const Term &t : alt[std::size_t(n)]) b[canonical_key(t.graph)] = t.coeff;
        CHECK(a == b);
    }
}

TEST_CASE("expansion serialization round trip") {
    Expansion e = expand(2, 2);
    std::string text = serialize_expansion(e);
    Expansion p = parse_expansion(text);
    CHECK(p.k == e.k);
    CHECK(p.N == e.N);
    REQUIRE(p.f_terms.size() == e.f_terms.size());
    for (std::size_t n = 0; n < e.f_terms.size(); ++n) {
        REQUIRE(p.f_terms[n].size() == e.f_terms[n].size());
        for (std::size_t i = 0; i < e.f_terms[n].size(); ++i) {
            CHECK(p.f_terms[n][i].coeff == e.f_terms[n][i].coeff);
            CHECK(p.f_terms[n][i].lambda_power == e.f_terms[n][i].lambda_power);
            CHECK(canonical_key(p.f_terms[n][i].graph) ==
                  canonical_key(e.f_terms[n][i].graph));
        }
    }
    CHECK(p.remainder.size() == e.remainder.size());
}

TEST_CASE("dot output marks boundary vertices and lists every edge") {
    Expansion e = expand(2, 2);
    std::string dot = to_dot(e.f_terms[2][0].graph, "sunset");
    CHECK(dot.find("graph sunset") != std::string::npos);
    CHECK(dot.find("shape=box") != std::string::npos);
    CHECK(std::count(dot.begin(), dot.end(), '-') >= 5);
}

TEST_CASE("graph invariants") {
    IbpGraph g(2);
    CHECK_THROWS(g.add_edge(0, 0, EdgeColor::Green)); // self loop
    int z = g.add_interior_vertex();
    g.add_edge(0, z, EdgeColor::Red);
    CHECK_THROWS(g.add_edge(0, z, EdgeColor::Green)); // boundary degree cap
    CHECK(g.n_phi() == 4);
    CHECK(g.free_degree(z) == 3);
    CHECK(g.valid());
}

TEST_SUITE_END();
