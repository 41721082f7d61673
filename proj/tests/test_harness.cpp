#include "phi4/harness.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace phi4;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string &tag)
        : path(std::filesystem::temp_directory_path() / tag) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("config parsing") {
    std::istringstream in("kind = two_point  # experiment\n"
                          "M=16\n"
                          "eps = 1\n"
                          "lambda_grid = 0.05, 0.1, 0.2\n"
                          "n_samples = 5000\n"
                          "seed=99\n"
                          "\n"
                          "# full-line comment\n"
                          "output_dir = out\n");
    ExperimentSpec s = parse_spec(in);
    CHECK(s.kind == "two_point");
    CHECK(s.M == 16);
    CHECK(s.lambda_grid == std::vector<double>{0.05, 0.1, 0.2});
    CHECK(s.n_samples == 5000);
    CHECK(s.seed == 99);
    CHECK(s.output_dir == "out");
    CHECK(s.m == 1); // default survives

    std::istringstream bad1("massively_unknown = 1\n");
    CHECK_THROWS(parse_spec(bad1));
    std::istringstream bad2("lambda_grid = 0.2, 0.1\n");
    CHECK_THROWS(parse_spec(bad2));
    CHECK_THROWS(load_spec("/nonexistent/spec.cfg"));
}

TEST_CASE("single lambda key shrinks the grid to one point") {
    std::istringstream in("lambda = 0.1\n");
    CHECK(parse_spec(in).lambda_grid == std::vector<double>{0.1});
}

TEST_CASE("toy experiment rows and artifacts") {
    TempDir dir("phi4_harness_toy");
    ExperimentSpec spec;
    spec.toy_lambda = 0.01;
    spec.toy_terms = 80;
    spec.output_dir = dir.path.string();
    Report rep = run_toy_experiment(spec);
    REQUIRE(rep.rows.size() == 6);
    CHECK(rep.rows[0].name == "Z_quadrature");
    CHECK(rep.rows[0].value == doctest::Approx(1.7597).epsilon(1e-4));
    CHECK(rep.rows[1].value == doctest::Approx(1.7725).epsilon(5e-4));
    CHECK(rep.rows[2].value == doctest::Approx(-0.0133).epsilon(5e-2));
    CHECK(rep.rows[4].value > 0.8);
    CHECK(rep.rows[4].value < 1.0);
    CHECK(rep.passed());
    CHECK(std::filesystem::exists(dir.path / "toy.csv"));
    CHECK(std::filesystem::exists(dir.path / "toy.gp"));
}

TEST_CASE("expand experiment writes the serialized expansion and DOT files") {
    TempDir dir("phi4_harness_expand");
    ExperimentSpec spec;
    spec.expand_k = 2;
    spec.expand_n = 3;
    spec.output_dir = dir.path.string();
    spec.dot_dir = (dir.path / "graphs").string();
    Report rep = run_expand_experiment(spec);
    CHECK(rep.passed());
    auto file = dir.path / "exp_k2_n3.txt";
    REQUIRE(std::filesystem::exists(file));
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    Expansion e = parse_expansion(buf.str());
    CHECK(e.k == 2);
    CHECK(e.N == 3);
    CHECK(e.f_terms[2].size() == 1);
    CHECK(e.f_terms[2][0].coeff == Rational(6));
    int dots = 0;
    for (const auto &entry : std::filesystem::directory_iterator(dir.path / "graphs"))
        if (entry.path().extension() == ".dot") ++dots;
    CHECK(dots > 0);
}

TEST_CASE("oracle suite passes on a representative coupling") {
    Report rep = run_oracle_suite({0.1});
    REQUIRE(rep.rows.size() == 7);
    for (const auto &r : rep.rows) {
        INFO(r.name, " residual ", r.value);
        CHECK(r.pass);
    }
}

TEST_CASE("report csv format") {
    TempDir dir("phi4_harness_report");
    Report rep{"demo", {{"alpha", 1.5, 0.1, true, "ok"}, {"beta", -2, 0, false, ""}}};
    auto path = (dir.path / "report.csv").string();
    write_report_csv(path, rep);
    std::ifstream in(path);
    std::string l0, l1, l2;
    std::getline(in, l0);
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(l0 == "name,value,stderr,pass,note");
    CHECK(l1 == "alpha,1.5,0.1,1,ok");
    CHECK(l2 == "beta,-2,0,0,");
    CHECK_FALSE(rep.passed());
}

TEST_CASE("parallel_for covers every index once and propagates errors") {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(257, 4, [&](int i) { hits[std::size_t(i)]++; });
    for (const auto &h : hits) CHECK(h.load() == 1);
    CHECK_THROWS(parallel_for(8, 3, [](int i) {
        if (i == 5) throw std::runtime_error("boom");
    }));
}

TEST_CASE("simulate experiment produces measurements and a checkpoint") {
    TempDir dir("phi4_harness_sim");
    ExperimentSpec spec;
    spec.kind = "simulate";
    spec.M = 4;
    spec.lambda_grid = {0.1};
    spec.dt = 0.1;
    spec.burn_in = 100;
    spec.n_samples = 400;
    spec.thinning = 1;
    spec.n_batches = 8;
    spec.seed = 7;
    spec.output_dir = dir.path.string();
    Report rep = run_simulate(spec);
    CHECK(rep.passed());
    REQUIRE(std::filesystem::exists(dir.path / "measurements.csv"));
    REQUIRE(std::filesystem::exists(dir.path / "chain.ckpt"));
    TorusLattice lat(4.0, 1.0, 1.0);
    ChainState st = load_checkpoint((dir.path / "chain.ckpt").string(), lat);
    CHECK(st.step_count > 0);
    std::ifstream in(dir.path / "measurements.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "observable,config_id,value,stderr,n_batches");
}

TEST_SUITE_END();
