#include "phi4/graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace phi4 {

// ------------------------------------------------------------- IbpGraph

void IbpGraph::add_edge(int u, int v, EdgeColor color) {
    if (u == v) throw std::invalid_argument("IbpGraph: self-loops are not allowed");
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= vertex_count())
        throw std::invalid_argument("IbpGraph: bad vertex index");
    for (int w : {u, v})
        if (deg_[std::size_t(w)] >= (is_boundary(w) ? 1 : 4))
            throw std::invalid_argument("IbpGraph: vertex degree cap exceeded");
    edges_.push_back({u, v, color});
    ++deg_[std::size_t(u)];
    ++deg_[std::size_t(v)];
}

int IbpGraph::add_interior_vertex() {
    deg_.push_back(0);
    return vertex_count() - 1;
}

int IbpGraph::n_phi() const {
    int s = 4 * interior_count() + k_;
    for (int d : deg_) s -= d;
    return s;
}

bool IbpGraph::valid() const {
    for (int v = 0; v < vertex_count(); ++v) {
        int d = degree(v);
        if (is_boundary(v) ? (d < 0 || d > 1) : (d < 0 || d > 4)) return false;
    }
    for (const Edge &e : edges_)
        if (e.u == e.v) return false;
    return n_phi() >= 0;
}

bool red_forest_check(const IbpGraph &g) {
    const int n = g.vertex_count();
    std::vector<int> parent(static_cast<std::size_t>(n), 0);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[std::size_t(v)] != v) {
            parent[std::size_t(v)] = parent[std::size_t(parent[std::size_t(v)])];
            v = parent[std::size_t(v)];
        }
        return v;
    };
    int components = n;
    for (const auto &e : g.edges()) {
        if (e.color != EdgeColor::Red) continue;
        int a = find(e.u), b = find(e.v);
        if (a == b) return false; // red cycle
        parent[std::size_t(a)] = b;
        --components;
    }
    if (components != g.boundary_count()) return false;
    // every component must contain exactly one boundary vertex
    std::map<int, int> boundary_per_comp;
    for (int v = 0; v < n; ++v)
        if (g.is_boundary(v)) ++boundary_per_comp[find(v)];
    if (int(boundary_per_comp.size()) != g.boundary_count()) return false;
    for (auto &[root, cnt] : boundary_per_comp)
        if (cnt != 1) return false;
    return true;
}

namespace {

std::string encode_with_perm(const IbpGraph &g, const std::vector<int> &interior_slot) {
    const int k = g.boundary_count();
    auto slot = [&](int v) {
        return v < k ? v : k + interior_slot[std::size_t(v - k)];
    };
    std::vector<std::tuple<int, int, int>> es;
    es.reserve(g.edges().size());
    for (const auto &e : g.edges()) {
        int a = slot(e.u), b = slot(e.v);
        if (a > b) std::swap(a, b);
        es.emplace_back(a, b, int(e.color));
    }
    std::sort(es.begin(), es.end());
    std::ostringstream os;
    os << "k" << k << ";l" << g.interior_count() << ";";
    for (auto &[a, b, c] : es)
        os << a << "-" << b << (c == int(EdgeColor::Red) ? "r" : "g") << ";";
    return os.str();
}

} // namespace

std::string canonical_key(const IbpGraph &g) {
    const int k = g.boundary_count();
    const int l = g.interior_count();
    if (l == 0) return encode_with_perm(g, {});

    // only degree-preserving interior relabelings can realize an isomorphism
    std::vector<int> order(static_cast<std::size_t>(l), 0);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return g.degree(k + a) < g.degree(k + b);
    });

    std::string best;
    std::vector<int> perm = order; // perm[i] = original interior put into slot i
    do {
        bool degree_ok = true;
        for (std::size_t i = 0; i < perm.size(); ++i)
            if (g.degree(k + perm[i]) != g.degree(k + order[i])) {
                degree_ok = false;
                break;
            }
        if (!degree_ok) continue;
        std::vector<int> slot_of(static_cast<std::size_t>(l), 0);
        for (int i = 0; i < l; ++i) slot_of[std::size_t(perm[std::size_t(i)])] = i;
        std::string enc = encode_with_perm(g, slot_of);
        if (best.empty() || enc < best) best = std::move(enc);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::string to_dot(const IbpGraph &g, const std::string &name) {
    std::ostringstream os;
    os << "graph " << name << " {\n";
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (g.is_boundary(v))
            os << "  b" << v << " [shape=box];\n";
        else
            os << "  i" << v << " [shape=circle];\n";
    }
    auto nm = [&](int v) {
        return (g.is_boundary(v) ? "b" : "i") + std::to_string(v);
    };
    std::vector<IbpGraph::Edge> es = g.edges();
    std::sort(es.begin(), es.end(), [](const auto &a, const auto &b) {
        return std::tie(a.u, a.v, a.color) < std::tie(b.u, b.v, b.color);
    });
    for (const auto &e : es)
        os << "  " << nm(e.u) << " -- " << nm(e.v) << " [color="
           << (e.color == EdgeColor::Red ? "red" : "green") << "];\n";
    os << "}\n";
    return os.str();
}

// ------------------------------------------------------------- rewrite

std::vector<Term> ibp_step(const Term &t, int x) {
    const IbpGraph &g = t.graph;
    if (g.free_degree(x) <= 0)
        throw std::logic_error("ibp_step: vertex has no available Phi insertion");

    std::vector<Term> out;
    for (int z = 0; z < g.vertex_count(); ++z) {
        if (z == x) continue;
        int avail = g.free_degree(z);
        if (avail <= 0) continue;
        Term nt;
        nt.coeff = t.coeff * avail; // (1-deg z) boundary, (4-deg z) interior
        nt.lambda_power = t.lambda_power;
        nt.graph = g;
        nt.graph.add_edge(x, z, EdgeColor::Green);
        out.push_back(std::move(nt));
    }
    Term plus;
    plus.coeff = -t.coeff;
    plus.lambda_power = t.lambda_power + 1;
    plus.graph = g;
    int z = plus.graph.add_interior_vertex();
    plus.graph.add_edge(x, z, EdgeColor::Red);
    out.push_back(std::move(plus));
    return out;
}

std::vector<Term> merge_terms(const std::vector<Term> &terms) {
    std::map<std::pair<std::string, int>, Term> acc;
    for (const Term &t : terms) {
        auto key = std::make_pair(canonical_key(t.graph), t.lambda_power);
        auto it = acc.find(key);
        if (it == acc.end())
            acc.emplace(std::move(key), t);
        else
            it->second.coeff += t.coeff;
    }
    std::vector<Term> out;
    out.reserve(acc.size());
    for (auto &[k, t] : acc)
        if (t.coeff != 0) out.push_back(std::move(t));
    return out;
}

Expansion expand(int k, int N, bool merge, std::size_t term_budget) {
    if (k < 1 || N < -1) throw std::invalid_argument("expand: need k >= 1, N >= -1");

    Expansion e;
    e.k = k;
    e.N = N;
    e.f_terms.assign(std::size_t(std::max(N + 1, 0)), {});

    std::vector<std::vector<Term>> level(std::size_t(N + 2));
    Term seed;
    seed.coeff = 1;
    seed.lambda_power = 0;
    seed.graph = IbpGraph(k);
    level[0].push_back(std::move(seed));

    std::size_t work = 0;
    for (int n = 0; n <= N; ++n) {
        std::vector<Term> queue = std::move(level[std::size_t(n)]);
        std::vector<Term> done;
        while (!queue.empty()) {
            Term t = std::move(queue.back());
            queue.pop_back();
            if (t.graph.n_phi() == 0) {
                done.push_back(std::move(t));
                continue;
            }
            // deterministic vertex selection
            int x = -1;
            for (int v = 0; v < k && x < 0; ++v)
                if (t.graph.degree(v) == 0) x = v;
            for (int v = k; v < t.graph.vertex_count() && x < 0; ++v)
                if (t.graph.degree(v) < 4) x = v;
            if (++work > term_budget)
                throw std::runtime_error("expand: term budget exceeded");
            for (Term &o : ibp_step(t, x)) {
                if (o.lambda_power == n)
                    queue.push_back(std::move(o));
                else
                    level[std::size_t(n + 1)].push_back(std::move(o));
            }
            if (queue.size() > term_budget)
                throw std::runtime_error("expand: term budget exceeded");
        }
        e.f_terms[std::size_t(n)] = merge ? merge_terms(done) : std::move(done);
        if (merge) level[std::size_t(n + 1)] = merge_terms(level[std::size_t(n + 1)]);
    }
    e.remainder = merge ? merge_terms(level[std::size_t(N + 1)])
                        : std::move(level[std::size_t(N + 1)]);
    return e;
}

// --------------------------------------------------------- serialization

std::string format_rational(const Rational &r) {
    std::ostringstream os;
    os << numerator(r) << "/" << denominator(r);
    return os.str();
}

namespace {

void write_term(std::ostringstream &os, const Term &t) {
    os << "term lambda_power=" << t.lambda_power << " coeff="
       << format_rational(t.coeff) << "\n";
    os << "vertices";
    for (int v = 0; v < t.graph.vertex_count(); ++v)
        os << " " << (t.graph.is_boundary(v) ? "b" : "i") << v;
    os << "\n";
    for (const auto &e : t.graph.edges())
        os << "edge " << e.u << " " << e.v << " "
           << (e.color == EdgeColor::Red ? "red" : "green") << "\n";
    os << "endterm\n";
}

} // namespace

std::string serialize_expansion(const Expansion &e) {
    std::ostringstream os;
    os << "phi4-expansion 1\n";
    os << "k " << e.k << "\n";
    os << "N " << e.N << "\n";
    for (std::size_t n = 0; n < e.f_terms.size(); ++n) {
        os << "section f " << n << "\n";
        for (const Term &t : e.f_terms[n]) write_term(os, t);
    }
    os << "section remainder\n";
    for (const Term &t : e.remainder) write_term(os, t);
    os << "end\n";
    return os.str();
}

Expansion parse_expansion(const std::string &text) {
    std::istringstream is(text);
    std::string line;
    Expansion e;
    std::vector<Term> *bucket = nullptr;
    if (!std::getline(is, line) || line != "phi4-expansion 1")
        throw std::runtime_error("parse_expansion: bad header");
    Term cur;
    bool in_term = false;
    int interior_seen = 0;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "k") {
            ls >> e.k;
        } else if (tok == "N") {
            ls >> e.N;
            e.f_terms.assign(std::size_t(std::max(e.N + 1, 0)), {});
        } else if (tok == "section") {
            std::string kind;
            ls >> kind;
            if (kind == "f") {
                std::size_t n;
                ls >> n;
                bucket = &e.f_terms.at(n);
            } else {
                bucket = &e.remainder;
            }
        } else if (tok == "term") {
            std::string a, b;
            ls >> a >> b;
            cur = Term{};
            cur.lambda_power = std::stoi(a.substr(a.find('=') + 1));
            std::string pq = b.substr(b.find('=') + 1);
            auto slash = pq.find('/');
            cur.coeff = Rational(boost::multiprecision::cpp_int(pq.substr(0, slash)),
                                 boost::multiprecision::cpp_int(pq.substr(slash + 1)));
            cur.graph = IbpGraph(e.k);
            in_term = true;
            interior_seen = 0;
        } else if (tok == "vertices" && in_term) {
            std::string v;
            while (ls >> v)
                if (v[0] == 'i') ++interior_seen;
            for (int i = 0; i < interior_seen; ++i) cur.graph.add_interior_vertex();
        } else if (tok == "edge" && in_term) {
            int u, v;
            std::string c;
            ls >> u >> v >> c;
            cur.graph.add_edge(u, v, c == "red" ? EdgeColor::Red : EdgeColor::Green);
        } else if (tok == "endterm" && in_term) {
            if (!bucket) throw std::runtime_error("parse_expansion: term outside section");
            bucket->push_back(cur);
            in_term = false;
        } else if (tok == "end") {
            return e;
        }
    }
    throw std::runtime_error("parse_expansion: missing end marker");
}

} // namespace phi4
