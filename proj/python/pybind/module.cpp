#include "phi4/besov.hpp"
#include "phi4/diagram.hpp"
#include "phi4/graph.hpp"
#include "phi4/harness.hpp"
#include "phi4/langevin.hpp"
#include "phi4/lattice.hpp"
#include "phi4/toy.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace phi4;

PYBIND11_MODULE(_phi4, m) {
    m.doc() = "lattice phi^4 perturbation-theory laboratory";

    py::class_<TorusLattice, std::shared_ptr<TorusLattice>>(m, "TorusLattice")
        .def(py::init<double, double, double>(), py::arg("side_length"),
             py::arg("spacing"), py::arg("mass"))
        .def_property_readonly("n", &TorusLattice::n)
        .def_property_readonly("spacing", &TorusLattice::spacing)
        .def_property_readonly("mass", &TorusLattice::mass)
        .def("wick_constant", &TorusLattice::wick_constant)
        .def("green", [](const TorusLattice &l) { return l.green().data(); })
        .def("multiplier", &TorusLattice::multiplier);

    py::class_<Field>(m, "Field")
        .def("__len__", &Field::size)
        .def("__getitem__", [](const Field &f, std::size_t i) {
            if (i >= f.size()) throw py::index_error();
            return f[i];
        })
        .def("data", [](const Field &f) { return f.data(); })
        .def("max_abs", &Field::max_abs);

    m.def("green_function", &green_function, py::keep_alive<0, 1>());
    m.def(
        "apply_green",
        [](const TorusLattice &lat, const std::vector<double> &v) {
            Field f(lat);
            f.data() = v;
            return apply_green(f).data();
        },
        py::arg("lattice"), py::arg("values"));
    m.def(
        "convolve",
        [](const TorusLattice &lat, const std::vector<double> &a,
           const std::vector<double> &b) {
            Field fa(lat), fb(lat);
            fa.data() = a;
            fb.data() = b;
            return convolve(fa, fb).data();
        },
        py::arg("lattice"), py::arg("a"), py::arg("b"));

    py::class_<Expansion>(m, "Expansion")
        .def_readonly("k", &Expansion::k)
        .def_readonly("N", &Expansion::N)
        .def("n_terms",
             [](const Expansion &e, int n) {
                 return e.f_terms.at(std::size_t(n)).size();
             })
        .def("remainder_size", [](const Expansion &e) { return e.remainder.size(); })
        .def("serialize", [](const Expansion &e) { return serialize_expansion(e); });
    m.def("expand", [](int k, int n) { return expand(k, n); }, py::arg("k"),
          py::arg("n"));

    m.def(
        "sunset_field",
        [](const TorusLattice &lat, double lam) {
            Expansion e = expand(2, 2);
            return partial_sum_field2(e, lat, lam, 2).data();
        },
        py::arg("lattice"), py::arg("lam"),
        "order-2 partial sum of the 2-point expansion as a field over r");

    py::class_<ToyReport>(m, "ToyReport")
        .def_readonly("lambda_", &ToyReport::lambda)
        .def_readonly("z_quad", &ToyReport::z_quad)
        .def_readonly("terms", &ToyReport::terms)
        .def_readonly("partial_sums", &ToyReport::partial_sums)
        .def_readonly("crossover", &ToyReport::crossover);
    m.def("run_toy", &run_toy, py::arg("lam"), py::arg("n_terms"));

    m.def(
        "besov_norm",
        [](const TorusLattice &lat, const std::vector<double> &v, double alpha,
           double p, double q) {
            Field f(lat);
            f.data() = v;
            return besov_norm(f, alpha, p, q);
        },
        py::arg("lattice"), py::arg("values"), py::arg("alpha"), py::arg("p"),
        py::arg("q"));
    m.attr("inf") = kInfinity;

    m.def(
        "run_free_chain",
        [](const TorusLattice &lat, double lam, double dt, long long burn_in,
           long long n_samples, int thinning, std::uint64_t seed) {
            SimConfig cfg;
            cfg.lattice = &lat;
            cfg.lambda = lam;
            cfg.dt = dt;
            cfg.burn_in = burn_in;
            cfg.n_samples = n_samples;
            cfg.thinning = thinning;
            cfg.seed = seed;
            MeasurementSet ms = run_chain(cfg);
            return py::make_tuple(ms.s2_mean().data(), ms.s2_stderr().data());
        },
        py::arg("lattice"), py::arg("lam"), py::arg("dt") = 0.05,
        py::arg("burn_in") = 2000, py::arg("n_samples") = 20000,
        py::arg("thinning") = 2, py::arg("seed") = 1,
        "run a Langevin chain, returning (S2 mean, S2 stderr) over separations");
}
