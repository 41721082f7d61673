#ifndef PHI4_GRAPH_HPP
#define PHI4_GRAPH_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace phi4 {

using Rational = boost::multiprecision::cpp_rational;

enum class EdgeColor : std::uint8_t { Red, Green };

/**
 * Colored multigraph with k boundary vertices u*_1..u*_k (indices 0..k-1)
 * and interior vertices (indices k..k+ell-1).  No self-loops; boundary
 * degree in {0,1}, interior degree in {1,2,3,4}.
 *
 * Red edges are the ones created together with a new interior vertex,
 * green edges connect two already existing vertices.
 */
class IbpGraph {
  public:
    struct Edge {
        int u, v; // u < v
        EdgeColor color;
        bool operator==(const Edge &) const = default;
    };

    IbpGraph() : k_(0) {}
    /** Edgeless graph with k boundary vertices. */
    explicit IbpGraph(int k) : k_(k), deg_(std::size_t(k), 0) {}

    int boundary_count() const { return k_; }
    int interior_count() const { return int(deg_.size()) - k_; }
    int vertex_count() const { return int(deg_.size()); }
    bool is_boundary(int v) const { return v < k_; }
    int degree(int v) const { return deg_[std::size_t(v)]; }
    const std::vector<Edge> &edges() const { return edges_; }

    /** Max extra degree a Phi insertion could still fill at v. */
    int free_degree(int v) const {
        return (is_boundary(v) ? 1 : 4) - deg_[std::size_t(v)];
    }

    void add_edge(int u, int v, EdgeColor color);
    /** Appends an interior vertex, returns its index. */
    int add_interior_vertex();

    /** n_Phi = 4*ell + k - sum_v deg(v); the residual field-insertion count. */
    int n_phi() const;

    /** True iff every graph invariant (degree bounds, no self-loops) holds. */
    bool valid() const;

    bool operator==(const IbpGraph &) const = default;

  private:
    int k_;
    std::vector<int> deg_;
    std::vector<Edge> edges_;
};

/** True iff the red subgraph is a forest of exactly k trees, one boundary
 *  vertex per tree. */
bool red_forest_check(const IbpGraph &g);

/** Key invariant under interior relabeling only; boundary identity, edge
 *  colors and multiplicities all distinguish keys. */
std::string canonical_key(const IbpGraph &g);

/** Graphviz text; boundary vertices boxed, deterministic ordering. */
std::string to_dot(const IbpGraph &g, const std::string &name = "G");

/** coeff * lambda^lambda_power * I_graph. */
struct Term {
    Rational coeff;
    int lambda_power = 0;
    IbpGraph graph;
};

/**
 * One application of the IBP rewrite at vertex x:
 *   I_G = sum_z (avail z) I_{G-_{xz}}  -  lambda I_{G+_{xz}}
 * G- terms get a green edge {x,z} and coefficient factor (1-deg z) for
 * boundary z resp. (4-deg z) for interior z; the G+ term gets a fresh
 * interior vertex, a red edge, factor -1 and one more power of lambda.
 *
 * Throws if x has no available insertion (caller logic bug).
 */
std::vector<Term> ibp_step(const Term &t, int x);

/** Groups by (canonical key, lambda_power), sums coefficients exactly,
 *  drops zeros.  Deterministic output order. */
std::vector<Term> merge_terms(const std::vector<Term> &terms);

/**
 * S^k = sum_{n<=N} lambda^n/n! F_n + lambda^{N+1} R_{N+1}.
 * f_terms[n] stores the raw merged coefficients r'_G, i.e.
 * S^k = sum_n lambda^n sum r'_G I_G and F_n = n! * sum r'_G I_G.
 */
struct Expansion {
    int k = 0;
    int N = 0;
    std::vector<std::vector<Term>> f_terms; // index n = 0..N, graphs in G_n^k
    std::vector<Term> remainder;            // graphs in H_{N+1}^k
};

/**
 * Full Dyson-Schwinger expansion of the k-point correlation to order N.
 * Deterministic: the rewrite always picks the lowest-indexed boundary
 * vertex of degree 0, else the lowest-indexed interior vertex of degree
 * < 4.  merge=false keeps the raw labeled terms (debugging).
 */
Expansion expand(int k, int N, bool merge = true, std::size_t term_budget = 200000);

std::string format_rational(const Rational &r);

/** Human-readable structured text serialization of an Expansion. */
std::string serialize_expansion(const Expansion &e);
Expansion parse_expansion(const std::string &text);

} // namespace phi4

#endif
