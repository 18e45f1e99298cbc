#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgp/experiment.hpp"

using namespace sgp;
namespace fs = std::filesystem;

namespace {

ExperimentConfig frozen_toy_config() {
    ExperimentConfig c;
    c.runs = 1;
    c.steps = 200;
    c.step = 0.01;
    c.record_thinning = 50;
    c.problem.kind = ProblemBlock::Kind::Toy;
    MethodBlock m;
    m.name = "frozen";
    m.kind = MethodKind::Sgpc;
    m.index = IndexProcessSpec{JumpUniformSpec{0.0}};  // frozen at the initial index
    m.eps = 1.0;
    c.methods = {m};
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("emit_csv: line counts and round trip") {
    TempDir dir("sgp_csv_test");
    CsvTable t;
    t.header = {"a", "b"};
    t.rows.push_back({1.0 / 3.0, std::string("x")});
    t.rows.push_back({-2.5e-17, std::string("y")});
    auto path = (dir.path / "t.csv").string();
    emit_csv(t, path);

    std::string content = slurp(path);
    CHECK(std::count(content.begin(), content.end(), '\n') == 3);  // header + 2 rows
    CHECK(content.find('\r') == std::string::npos);

    auto back = read_csv(path);
    REQUIRE(back.header == t.header);
    REQUIRE(back.rows.size() == 2);
    CHECK(std::get<double>(back.rows[0][0]) == 1.0 / 3.0);  // 17 digits round-trip exactly
    CHECK(std::get<double>(back.rows[1][0]) == -2.5e-17);
    CHECK(std::get<std::string>(back.rows[0][1]) == "x");

    CsvTable empty;
    empty.header = {"only"};
    emit_csv(empty, (dir.path / "e.csv").string());
    CHECK(slurp(dir.path / "e.csv") == "only\n");

    CHECK_THROWS_AS(emit_csv(t, (dir.path / "no_dir" / "t.csv").string()), std::runtime_error);
}

TEST_CASE("run_experiment: J=1 frozen toy summary") {
    auto out = run_experiment(frozen_toy_config(), ExecutionPolicy::Serial);
    REQUIRE(out.results.size() == 1);
    REQUIRE(out.summaries.size() == 1);
    CHECK_FALSE(out.any_failed);
    CHECK(out.summaries[0].mean == out.results[0].terminal_metric);
    CHECK_FALSE(out.summaries[0].std_dev.has_value());
    // frozen at V = 0: flow of f(., 0) relaxes theta toward 0, so the terminal
    // distance to theta* = 1/3 is |0.5 e^{-T} - 1/3| at T = 2
    CHECK(out.results[0].terminal_metric ==
          doctest::Approx(std::abs(0.5 * std::exp(-2.0) - 1.0 / 3.0)).epsilon(1e-3));
}

TEST_CASE("run_experiment: rerun produces byte-identical CSV outputs") {
    auto config = frozen_toy_config();
    config.runs = 3;
    auto m2 = config.methods[0];
    m2.name = "jumpy";
    m2.index = IndexProcessSpec{JumpUniformSpec{1.0}};
    config.methods.push_back(m2);

    TempDir a("sgp_out_a"), b("sgp_out_b");
    write_outputs(config, run_experiment(config, ExecutionPolicy::Serial), a.path.string());
    write_outputs(config, run_experiment(config, ExecutionPolicy::Serial), b.path.string());
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(a.path)) {
        auto name = entry.path().filename();
        CHECK(slurp(entry.path()) == slurp(b.path / name));
        ++compared;
    }
    CHECK(compared >= 4);  // runs, summary, loss_*, traj_*
}

TEST_CASE("run_experiment: seeds are invariant under method reordering") {
    auto config = frozen_toy_config();
    config.runs = 2;
    auto m2 = config.methods[0];
    m2.name = "jumpy";
    m2.index = IndexProcessSpec{JumpUniformSpec{1.0}};
    config.methods.push_back(m2);

    auto fwd = run_experiment(config, ExecutionPolicy::Serial);
    std::swap(config.methods[0], config.methods[1]);
    auto rev = run_experiment(config, ExecutionPolicy::Serial);

    for (const auto& r : fwd.results) {
        bool found = false;
        for (const auto& s : rev.results)
            if (s.method == r.method && s.run_index == r.run_index) {
                CHECK(s.seed == r.seed);
                CHECK(s.terminal_metric == r.terminal_metric);
                found = true;
            }
        CHECK(found);
    }
    CHECK(derive_run_seed(1, "a", 0) != derive_run_seed(1, "b", 0));
    CHECK(derive_run_seed(1, "a", 0) != derive_run_seed(2, "a", 0));
    CHECK(derive_run_seed(1, "a", 0) != derive_run_seed(1, "a", 1));
}

TEST_CASE("run_experiment: serial and parallel policies agree exactly") {
    auto config = frozen_toy_config();
    config.runs = 4;
    config.methods[0].index = IndexProcessSpec{JumpUniformSpec{2.0}};
    auto serial = run_experiment(config, ExecutionPolicy::Serial);
    auto parallel = run_experiment(config, ExecutionPolicy::OpenMP);
    REQUIRE(serial.results.size() == parallel.results.size());
    for (std::size_t i = 0; i < serial.results.size(); ++i) {
        CHECK(serial.results[i].seed == parallel.results[i].seed);
        CHECK(serial.results[i].terminal_metric == parallel.results[i].terminal_metric);
    }
}

TEST_CASE("load_config: strict parsing") {
    TempDir dir("sgp_cfg_test");
    auto write_cfg = [&](const std::string& name, const std::string& body) {
        std::ofstream out(dir.path / name);
        out << body;
        return (dir.path / name).string();
    };

    auto good = write_cfg("good.json", R"({
        "schema_version": 1,
        "runs": 2,
        "steps": 100,
        "step": 0.05,
        "problem": {"kind": "toy"},
        "methods": [
            {"name": "sgd", "kind": "sgd_euler", "eta": 0.1},
            {"name": "c", "kind": "sgpc", "eps": 0.5,
             "index": {"kind": "jump_uniform", "rate": 1.0}},
            {"name": "d", "kind": "sgpd",
             "index": {"kind": "reflected_brownian", "sigma": 0.5},
             "mu": {"family": "power_log", "c": 100.0, "p": 0.3}}
        ]
    })");
    auto config = load_config(good);
    CHECK(config.runs == 2);
    REQUIRE(config.methods.size() == 3);
    CHECK(config.methods[1].kind == MethodKind::Sgpc);
    CHECK(config.methods[2].mu.has_value());

    auto unknown = write_cfg("unknown.json", R"({"problem": {"kind": "toy"}, "typo_key": 1,
        "methods": [{"name": "s", "kind": "sgd_euler", "eta": 0.1}]})");
    CHECK_THROWS_WITH_AS(load_config(unknown), doctest::Contains("typo_key"), std::runtime_error);

    auto badkind = write_cfg("badkind.json", R"({"problem": {"kind": "toy"},
        "methods": [{"name": "s", "kind": "warp", "eta": 0.1}]})");
    CHECK_THROWS_AS(load_config(badkind), std::runtime_error);

    auto dup = write_cfg("dup.json", R"({"problem": {"kind": "toy"},
        "methods": [{"name": "s", "kind": "sgd_euler", "eta": 0.1},
                    {"name": "s", "kind": "sgd_euler", "eta": 0.2}]})");
    CHECK_THROWS_AS(load_config(dup), std::runtime_error);

    auto badeta = write_cfg("badeta.json", R"({"problem": {"kind": "toy"},
        "methods": [{"name": "s", "kind": "sgd_euler", "eta": -0.1}]})");
    CHECK_THROWS_AS(load_config(badeta), std::runtime_error);

    CHECK_THROWS_AS(load_config((dir.path / "missing.json").string()), std::runtime_error);
}

TEST_CASE("reference_study_config: layout of the shipped setup") {
    auto c = reference_study_config();
    CHECK(c.runs == 100);
    CHECK(c.steps == 50000);
    CHECK(c.step == 0.1);
    CHECK(c.index_substep == 1e-2);
    CHECK(c.theta0 == 0.5);
    CHECK(c.initial_index == 0.0);
    CHECK(c.problem.kind == ProblemBlock::Kind::PolyRegression);
    REQUIRE(c.methods.size() == 9);
    int rbm = 0, mjp = 0, sgd = 0;
    for (const auto& m : c.methods) {
        if (m.kind == MethodKind::SgdEuler || m.kind == MethodKind::SgdMidpoint) ++sgd;
        if (m.kind == MethodKind::Sgpc &&
            std::holds_alternative<ReflectedBrownianSpec>(m.index.v))
            ++rbm;
        if (m.kind == MethodKind::Sgpc && std::holds_alternative<JumpUniformSpec>(m.index.v))
            ++mjp;
    }
    CHECK(sgd == 2);
    CHECK(rbm == 3);
    CHECK(mjp == 4);
}

TEST_CASE("run_experiment: per-run failures are recorded, the rest completes") {
    auto config = frozen_toy_config();
    config.runs = 2;
    ImplicitMidpoint mp;
    mp.solver = ImplicitMidpoint::Solver::FixedPoint;
    mp.max_iterations = 1;
    mp.tolerance = 1e-16;  // unattainable in one sweep: every run fails
    config.methods[0].integrator = mp;
    config.methods[0].index = IndexProcessSpec{JumpUniformSpec{1.0}};

    MethodBlock ok;
    ok.name = "ok";
    ok.kind = MethodKind::Sgpc;
    ok.index = IndexProcessSpec{JumpUniformSpec{1.0}};
    ok.eps = 1.0;
    config.methods.push_back(ok);

    auto out = run_experiment(config, ExecutionPolicy::Serial);
    CHECK(out.any_failed);
    int failed = 0, passed = 0;
    for (const auto& r : out.results) (r.failed ? failed : passed)++;
    CHECK(failed == 2);
    CHECK(passed == 2);
}
