#include "phi4/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace phi4 {

namespace {

// ------------------------------------------------- contraction engine
//
// Interior vertices carry weight fields, edges carry even kernels built
// from products of Green factors.  Degree-1 vertices and degree-2
// vertices with unit weight reduce to FFT convolutions; whatever is left
// (the loop core) is summed directly.

struct EvNode {
    bool active = false;
    bool free_boundary = false;
    bool unit = true;
    Field w;
};

struct EvEdge {
    int u, v;
    Field kernel;
};

struct Engine {
    const TorusLattice *lat;
    double scalar = 1.0;
    std::vector<EvNode> nodes;
    std::vector<EvEdge> edges;

    Field &weight(int v) {
        EvNode &n = nodes[std::size_t(v)];
        if (n.unit) {
            n.w = Field(*lat, 1.0);
            n.unit = false;
        }
        return n.w;
    }

    void merge_parallel_edges() {
        std::map<std::pair<int, int>, std::size_t> seen;
        std::vector<EvEdge> merged;
        for (EvEdge &e : edges) {
            auto key = std::minmax(e.u, e.v);
            auto it = seen.find(key);
            if (it == seen.end()) {
                seen[key] = merged.size();
                merged.push_back(std::move(e));
            } else {
                merged[it->second].kernel *= e.kernel;
            }
        }
        edges = std::move(merged);
    }

    int degree(int v) const {
        int d = 0;
        for (const EvEdge &e : edges)
            if (e.u == v || e.v == v) ++d;
        return d;
    }

    double weighted_sum(const EvNode &n) const {
        double eps = lat->spacing();
        if (n.unit) return eps * eps * double(lat->n_sites());
        double s = 0;
        for (std::size_t i = 0; i < n.w.size(); ++i) s += n.w[i];
        return eps * eps * s;
    }

    /** One pass of eliminations; returns true if something changed. */
    bool eliminate_once() {
        merge_parallel_edges();
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            EvNode &nv = nodes[v];
            if (!nv.active || nv.free_boundary) continue;
            std::vector<std::size_t> inc;
            for (std::size_t ei = 0; ei < edges.size(); ++ei)
                if (edges[ei].u == int(v) || edges[ei].v == int(v)) inc.push_back(ei);
            if (inc.size() == 0) {
                scalar *= weighted_sum(nv);
                nv.active = false;
                return true;
            }
            if (inc.size() == 1) {
                EvEdge &e = edges[inc[0]];
                int u = e.u == int(v) ? e.v : e.u;
                Field conv = nv.unit ? convolve(e.kernel, Field(*lat, 1.0))
                                     : convolve(e.kernel, nv.w);
                weight(u) *= conv;
                nv.active = false;
                edges.erase(edges.begin() + std::ptrdiff_t(inc[0]));
                return true;
            }
            if (inc.size() == 2 && nv.unit) {
                EvEdge e1 = edges[inc[0]], e2 = edges[inc[1]];
                int u1 = e1.u == int(v) ? e1.v : e1.u;
                int u2 = e2.u == int(v) ? e2.v : e2.u;
                if (u1 != u2) {
                    Field k = convolve(e1.kernel, e2.kernel);
                    edges.erase(edges.begin() + std::ptrdiff_t(inc[1]));
                    edges.erase(edges.begin() + std::ptrdiff_t(inc[0]));
                    edges.push_back({u1, u2, std::move(k)});
                    nv.active = false;
                    return true;
                }
            }
        }
        return false;
    }

    /** Remaining interior nodes after elimination, excluding free boundary. */
    std::vector<int> residual() const {
        std::vector<int> r;
        for (std::size_t v = 0; v < nodes.size(); ++v)
            if (nodes[v].active && !nodes[v].free_boundary) r.push_back(int(v));
        return r;
    }

    double node_weight_at(int v, std::size_t site) const {
        const EvNode &n = nodes[std::size_t(v)];
        return n.unit ? 1.0 : n.w[site];
    }

    /** Brute-force the residual core; free < 0 means no free vertex. */
    void brute_force(int free, Field *out, const EvalOptions &opt) {
        while (eliminate_once()) {}
        std::vector<int> core = residual();
        const std::size_t ns = lat->n_sites();
        const int n = lat->n();
        double cost = double(free >= 0 ? ns : 1);
        for (std::size_t i = 0; i < core.size(); ++i) cost *= double(ns);
        if (cost > opt.cost_budget)
            throw std::runtime_error("diagram eval: residual core exceeds cost budget");

        const double eps2 = lat->spacing() * lat->spacing();
        auto kernel_at = [&](const Field &K, std::size_t su, std::size_t sv) {
            int ux = int(su) % n, uy = int(su) / n;
            int vx = int(sv) % n, vy = int(sv) / n;
            return K[lat->site(ux - vx, uy - vy)];
        };

        std::vector<std::size_t> pos(core.size(), 0);
        std::vector<std::size_t> free_positions(free >= 0 ? ns : 1, 0);
        if (free >= 0)
            for (std::size_t i = 0; i < ns; ++i) free_positions[i] = i;

        for (std::size_t fp : free_positions) {
            double total = 0;
            std::fill(pos.begin(), pos.end(), 0);
            bool done = core.empty();
            bool first = true;
            while (first || !done) {
                first = false;
                double prod = 1.0;
                auto site_of = [&](int v) -> std::size_t {
                    if (v == free) return fp;
                    for (std::size_t i = 0; i < core.size(); ++i)
                        if (core[i] == v) return pos[i];
                    throw std::logic_error("diagram eval: dangling edge endpoint");
                };
                for (const EvEdge &e : edges)
                    prod *= kernel_at(e.kernel, site_of(e.u), site_of(e.v));
                for (std::size_t i = 0; i < core.size(); ++i)
                    prod *= node_weight_at(core[i], pos[i]) * eps2;
                total += prod;
                // odometer
                std::size_t d = 0;
                for (; d < pos.size(); ++d) {
                    if (++pos[d] < ns) break;
                    pos[d] = 0;
                }
                if (d == pos.size()) done = true;
                if (core.empty()) done = true;
            }
            if (free >= 0) {
                double w = nodes[std::size_t(free)].unit ? 1.0 : nodes[std::size_t(free)].w[fp];
                (*out)[fp] = scalar * total * w;
            } else {
                scalar *= total;
            }
        }
    }
};

/** Builds the engine for I_G.  pinned[i] gives the site of boundary vertex
 *  i; free_vertex >= 0 marks one boundary vertex left free.  weights, when
 *  non-null, supplies interior weight fields (indexed by graph vertex). */
Engine build_engine(const IbpGraph &g, const TorusLattice &lat,
                    std::span<const Point> pinned, int free_vertex,
                    const std::vector<Field> *weights) {
    Engine eng;
    eng.lat = &lat;
    const int k = g.boundary_count();
    eng.nodes.resize(std::size_t(g.vertex_count()));
    for (int v = k; v < g.vertex_count(); ++v) {
        eng.nodes[std::size_t(v)].active = true;
        if (weights && !(*weights)[std::size_t(v)].empty()) {
            eng.nodes[std::size_t(v)].unit = false;
            eng.nodes[std::size_t(v)].w = (*weights)[std::size_t(v)];
        }
    }
    if (free_vertex >= 0) {
        eng.nodes[std::size_t(free_vertex)].active = true;
        eng.nodes[std::size_t(free_vertex)].free_boundary = true;
    }
    const Field &C = lat.green();
    auto site_of_boundary = [&](int b) {
        return lat.site(pinned[std::size_t(b)].ix, pinned[std::size_t(b)].iy);
    };
    for (const auto &e : g.edges()) {
        bool ub = g.is_boundary(e.u) && e.u != free_vertex;
        bool vb = g.is_boundary(e.v) && e.v != free_vertex;
        if (ub && vb) {
            const Point &a = pinned[std::size_t(e.u)];
            const Point &b = pinned[std::size_t(e.v)];
            eng.scalar *= C[lat.site(a.ix - b.ix, a.iy - b.iy)];
        } else if (ub || vb) {
            int bdry = ub ? e.u : e.v;
            int other = ub ? e.v : e.u;
            const Point &p = pinned[std::size_t(bdry)];
            eng.weight(other) *= shift(C, p.ix, p.iy);
        } else {
            eng.edges.push_back({e.u, e.v, C});
        }
    }
    (void)site_of_boundary;
    return eng;
}

} // namespace

double eval_pure_at(const IbpGraph &g, const TorusLattice &lat,
                    std::span<const Point> points, const EvalOptions &opt) {
    if (g.n_phi() != 0)
        throw std::invalid_argument("eval_pure_at: graph has Phi insertions");
    if (int(points.size()) != g.boundary_count())
        throw std::invalid_argument("eval_pure_at: wrong number of boundary points");
    Engine eng = build_engine(g, lat, points, -1, nullptr);
    eng.brute_force(-1, nullptr, opt);
    return eng.scalar;
}

Field eval_pure_field2(const IbpGraph &g, const TorusLattice &lat,
                       const EvalOptions &opt) {
    if (g.boundary_count() != 2 || g.n_phi() != 0)
        throw std::invalid_argument("eval_pure_field2: need a pure 2-point graph");
    std::array<Point, 2> pts{Point{0, 0}, Point{0, 0}}; // vertex 1 pinned at origin
    Engine eng = build_engine(g, lat, pts, 0, nullptr);
    Field out(lat);
    eng.brute_force(0, &out, opt);
    return out;
}

Field partial_sum_field2(const Expansion &e, const TorusLattice &lat, double lambda,
                         int N, const EvalOptions &opt) {
    Field acc(lat);
    for (int n = 0; n <= N && n < int(e.f_terms.size()); ++n) {
        for (const Term &t : e.f_terms[std::size_t(n)]) {
            Field f = eval_pure_field2(t.graph, lat, opt);
            acc += (t.coeff.convert_to<double>() * std::pow(lambda, n)) * f;
        }
    }
    return acc;
}

DiagramValue eval_mixed(const IbpGraph &g, const TorusLattice &lat,
                        std::span<const Point> points, std::span<const Field> samples,
                        double wick_a, int n_batches, const EvalOptions &opt) {
    if (int(points.size()) != g.boundary_count())
        throw std::invalid_argument("eval_mixed: wrong number of boundary points");
    if (n_batches < opt.min_batches || std::size_t(n_batches) > samples.size())
        throw std::invalid_argument("eval_mixed: insufficient batches for an error bar");

    const int k = g.boundary_count();
    std::vector<double> per_sample;
    per_sample.reserve(samples.size());
    for (const Field &phi : samples) {
        std::vector<Field> weights(std::size_t(g.vertex_count()));
        for (int v = k; v < g.vertex_count(); ++v) {
            int j = 4 - g.degree(v);
            if (j > 0) weights[std::size_t(v)] = wick_power(phi, j, wick_a);
        }
        Engine eng = build_engine(g, lat, points, -1, &weights);
        for (int b = 0; b < k; ++b)
            if (g.degree(b) == 0)
                eng.scalar *= phi[lat.site(points[std::size_t(b)].ix,
                                           points[std::size_t(b)].iy)];
        eng.brute_force(-1, nullptr, opt);
        per_sample.push_back(eng.scalar);
    }

    // batch means
    std::size_t bs = per_sample.size() / std::size_t(n_batches);
    std::vector<double> bm(std::size_t(n_batches), 0.0);
    for (int b = 0; b < n_batches; ++b) {
        for (std::size_t i = 0; i < bs; ++i)
            bm[std::size_t(b)] += per_sample[std::size_t(b) * bs + i];
        bm[std::size_t(b)] /= double(bs);
    }
    double mean = 0;
    for (double x : bm) mean += x;
    mean /= double(n_batches);
    double var = 0;
    for (double x : bm) var += (x - mean) * (x - mean);
    var /= double(n_batches - 1);
    DiagramValue dv;
    dv.values = {mean};
    dv.stderrs = {std::sqrt(var / double(n_batches))};
    return dv;
}

// ------------------------------------------------------------- oracle

namespace {

/** Gauss-Hermite abscissas/weights for weight exp(-x^2) (Numerical
 *  Recipes style Newton iteration on orthonormal Hermite polynomials). */
void gauss_hermite(int n, std::vector<double> &x, std::vector<double> &w) {
    x.assign(std::size_t(n), 0.0);
    w.assign(std::size_t(n), 0.0);
    const double eps = 3e-14;
    const int m = (n + 1) / 2;
    double z = 0, pp = 0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(double(2 * n + 1)) - 1.85575 * std::pow(double(2 * n + 1), -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(double(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[std::size_t(i - 2)];
        for (int it = 0; it < 200; ++it) {
            double p1 = 0.7511255444649425; // pi^{-1/4}
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 -
                     std::sqrt(double(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= eps) break;
        }
        x[std::size_t(i)] = z;
        x[std::size_t(n - 1 - i)] = -z;
        w[std::size_t(i)] = 2.0 / (pp * pp);
        w[std::size_t(n - 1 - i)] = w[std::size_t(i)];
    }
}

} // namespace

QuadratureOracle::QuadratureOracle(const TorusLattice &lat, double lambda, int nodes,
                                   double rel_tol)
    : lat_(&lat), lambda_(lambda), a_(lat.wick_constant()), rel_tol_(rel_tol),
      nodes_(nodes), n_sites_(lat.n_sites()) {
    if (n_sites_ > 9)
        throw std::invalid_argument("QuadratureOracle: n_sites must be <= 9");
    double cost = std::pow(double(nodes + 10), double(n_sites_));
    if (cost > 2e7)
        throw std::runtime_error("QuadratureOracle: tensor grid exceeds budget");
    main_ = make_grid(nodes_);
    check_ = make_grid(nodes_ + 10);
}

QuadratureOracle::Grid QuadratureOracle::make_grid(int nodes) const {
    Grid g;
    g.nodes = nodes;
    std::vector<double> t, w;
    gauss_hermite(nodes, t, w);

    const double eps = lat_->spacing();
    const double eps2 = eps * eps;
    const double m = lat_->mass();
    const int n = lat_->n();
    // per-site scaling adapted to the diagonal of the quadratic form
    const double c = eps2 * m + 4.0;
    const double scale = 1.0 / std::sqrt(c);
    g.x.resize(std::size_t(nodes));
    g.logw.resize(std::size_t(nodes));
    for (int i = 0; i < nodes; ++i) {
        g.x[std::size_t(i)] = t[std::size_t(i)] * scale;
        g.logw[std::size_t(i)] = std::log(w[std::size_t(i)]);
    }

    std::size_t total = 1;
    for (std::size_t s = 0; s < n_sites_; ++s) total *= std::size_t(nodes);
    g.density.resize(total);
    g.z = 0;

    std::vector<double> phi(n_sites_);
    std::vector<std::size_t> idx(n_sites_, 0);
    const double mass_coef = m - 1.5 * lambda_ * a_;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t r = flat;
        double logw_sum = 0, t2 = 0;
        for (std::size_t s = 0; s < n_sites_; ++s) {
            idx[s] = r % std::size_t(nodes);
            r /= std::size_t(nodes);
            phi[s] = g.x[idx[s]];
            logw_sum += g.logw[idx[s]];
            double ts = t[idx[s]];
            t2 += ts * ts;
        }
        double action = 0;
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                double p = phi[lat_->site(ix, iy)];
                double gx = (phi[lat_->site(ix + 1, iy)] - p) / eps;
                double gy = (phi[lat_->site(ix, iy + 1)] - p) / eps;
                action += eps2 * (0.25 * lambda_ * p * p * p * p +
                                  mass_coef * p * p + gx * gx + gy * gy);
            }
        }
        double val = std::exp(-action + t2 + logw_sum);
        g.density[flat] = val;
        g.z += val;
    }
    return g;
}

double QuadratureOracle::grid_moment(const Grid &g, const std::vector<int> &e) const {
    const std::size_t nodes = std::size_t(g.nodes);
    std::size_t total = g.density.size();
    double acc = 0;
    std::vector<std::size_t> idx(n_sites_);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t r = flat;
        double p = g.density[flat];
        for (std::size_t s = 0; s < n_sites_; ++s) {
            std::size_t i = r % nodes;
            r /= nodes;
            int ex = e[s];
            double xv = g.x[i];
            while (ex-- > 0) p *= xv;
        }
        acc += p;
    }
    return acc / g.z;
}

double QuadratureOracle::moment(const std::vector<int> &exponents) const {
    if (exponents.size() != n_sites_)
        throw std::invalid_argument("oracle moment: exponent list must cover all sites");
    int total_deg = 0;
    for (int e : exponents) {
        if (e < 0) throw std::invalid_argument("oracle moment: negative exponent");
        total_deg += e;
    }
    if (total_deg % 2 == 1) return 0.0; // Phi -> -Phi symmetry of the density
    for (const auto &[e, v] : cache_)
        if (e == exponents) return v;

    double v1 = grid_moment(main_, exponents);
    double v2 = grid_moment(check_, exponents);
    double scale = std::max({std::abs(v1), std::abs(v2), 1e-300});
    if (std::abs(v1 - v2) / scale > 100 * rel_tol_ && std::abs(v1 - v2) > 1e-12)
        throw std::runtime_error("QuadratureOracle: quadrature did not converge");
    cache_.emplace_back(exponents, v2);
    return v2;
}

double QuadratureOracle::wick_moment(
    const std::vector<std::pair<std::size_t, int>> &factors) const {
    // expand the product of Wick powers into monomials
    struct Mono {
        std::vector<int> e;
        double c;
    };
    std::vector<Mono> monos{{std::vector<int>(n_sites_, 0), 1.0}};
    for (const auto &[site, j] : factors) {
        std::vector<std::pair<int, double>> poly; // (power, coeff) of :phi^j:
        switch (j) {
        case 0: poly = {{0, 1.0}}; break;
        case 1: poly = {{1, 1.0}}; break;
        case 2: poly = {{2, 1.0}, {0, -a_}}; break;
        case 3: poly = {{3, 1.0}, {1, -3.0 * a_}}; break;
        case 4: poly = {{4, 1.0}, {2, -6.0 * a_}, {0, 3.0 * a_ * a_}}; break;
        default: throw std::invalid_argument("wick_moment: order must be 0..4");
        }
        std::vector<Mono> next;
        for (const Mono &mn : monos)
            for (const auto &[p, c] : poly) {
                Mono m2 = mn;
                m2.e[site] += p;
                m2.c *= c;
                next.push_back(std::move(m2));
            }
        monos = std::move(next);
    }
    double acc = 0;
    for (const Mono &mn : monos) acc += mn.c * moment(mn.e);
    return acc;
}

double QuadratureOracle::two_point(std::size_t sx, std::size_t sy) const {
    std::vector<int> e(n_sites_, 0);
    ++e[sx];
    ++e[sy];
    return moment(e);
}

double QuadratureOracle::green_cubic_term(
    std::size_t site, const std::vector<std::pair<std::size_t, int>> &factors) const {
    const Field &C = lat_->green();
    const int n = lat_->n();
    const double eps2 = lat_->spacing() * lat_->spacing();
    int sx = int(site) % n, sy = int(site) / n;
    double acc = 0;
    for (std::size_t z = 0; z < n_sites_; ++z) {
        int zx = int(z) % n, zy = int(z) / n;
        auto f = factors;
        f.emplace_back(z, 3);
        acc += C[lat_->site(sx - zx, sy - zy)] * wick_moment(f);
    }
    return eps2 * acc;
}

double QuadratureOracle::eval_graph(const IbpGraph &g, std::span<const Point> points) const {
    if (int(points.size()) != g.boundary_count())
        throw std::invalid_argument("oracle eval_graph: wrong number of points");
    const Field &C = lat_->green();
    const int k = g.boundary_count();
    const int ell = g.interior_count();
    const double eps2 = lat_->spacing() * lat_->spacing();

    std::vector<std::size_t> pos(std::size_t(g.vertex_count()));
    for (int b = 0; b < k; ++b)
        pos[std::size_t(b)] = lat_->site(points[std::size_t(b)].ix, points[std::size_t(b)].iy);

    const int n = lat_->n();
    auto c_at = [&](std::size_t su, std::size_t sv) {
        int ux = int(su) % n, uy = int(su) / n;
        int vx = int(sv) % n, vy = int(sv) / n;
        return C[lat_->site(ux - vx, uy - vy)];
    };

    std::vector<std::size_t> zpos(std::size_t(ell), 0);
    double total = 0;
    bool done = false;
    while (!done) {
        for (int i = 0; i < ell; ++i) pos[std::size_t(k + i)] = zpos[std::size_t(i)];
        double prod = 1.0;
        for (const auto &e : g.edges())
            prod *= c_at(pos[std::size_t(e.u)], pos[std::size_t(e.v)]);
        std::vector<std::pair<std::size_t, int>> factors;
        for (int b = 0; b < k; ++b)
            if (g.degree(b) == 0) factors.emplace_back(pos[std::size_t(b)], 1);
        for (int i = 0; i < ell; ++i) {
            int j = 4 - g.degree(k + i);
            if (j > 0) factors.emplace_back(pos[std::size_t(k + i)], j);
        }
        if (prod != 0) total += prod * (factors.empty() ? 1.0 : wick_moment(factors));

        if (ell == 0) break;
        std::size_t d = 0;
        for (; d < zpos.size(); ++d) {
            if (++zpos[d] < n_sites_) break;
            zpos[d] = 0;
        }
        if (d == zpos.size()) done = true;
    }
    double measure = 1.0;
    for (int i = 0; i < ell; ++i) measure *= eps2;
    return measure * total;
}

double QuadratureOracle::eval_term(const Term &t, std::span<const Point> points) const {
    return t.coeff.convert_to<double>() * std::pow(lambda_, t.lambda_power) *
           eval_graph(t.graph, points);
}

} // namespace phi4
