#include "sgp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sgp {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Precomputed rel_err machinery for the regression metric.
struct RelErrEvaluator {
    Eigen::MatrixXd basis;      // L x K
    Eigen::VectorXd truth_vals; // L
    double denom = 0.0;

    RelErrEvaluator(const PolyRegression& problem, const std::vector<double>& grid) {
        auto L = static_cast<int>(grid.size());
        int K = problem.dim();
        basis.resize(L, K);
        truth_vals.resize(L);
        for (int l = 0; l < L; ++l) {
            basis.row(l) = problem.basis(grid[l]).transpose();
            truth_vals(l) = problem.truth(grid[l]);
        }
        denom = truth_vals.squaredNorm();
    }

    double operator()(const ParameterVector& theta) const {
        return (truth_vals - basis * theta).squaredNorm() / denom;
    }
};

struct MethodRunOutput {
    RunResult result;
    std::vector<double> metric_series;
    std::optional<Trajectory> trajectory;  // kept for run 0 only
};

MethodRunOutput run_one(const ExperimentConfig& config, const MethodBlock& method, int run,
                        const std::shared_ptr<const Problem>& problem,
                        const RelErrEvaluator* rel, const ParameterVector& minimizer) {
    MethodRunOutput out;
    out.result.method = method.name;
    out.result.run_index = run;
    out.result.seed = derive_run_seed(config.master_seed, method.name, run);
    auto start = std::chrono::steady_clock::now();
    try {
        ParameterVector theta0 = ParameterVector::Constant(problem->dim(), config.theta0);
        double horizon = static_cast<double>(config.steps) * config.step;
        Trajectory traj;
        switch (method.kind) {
            case MethodKind::SgdEuler:
                traj = run_sgd(*problem, theta0, config.steps, method.eta, ExplicitEuler{},
                               out.result.seed, config.record_thinning);
                break;
            case MethodKind::SgdMidpoint:
                traj = run_sgd(*problem, theta0, config.steps, method.eta, method.integrator,
                               out.result.seed, config.record_thinning);
                break;
            case MethodKind::Sgpc:
            case MethodKind::Sgpd: {
                RunConfig rc;
                rc.problem = problem;
                rc.index_spec = method.index;
                rc.integrator = method.integrator;
                rc.horizon = horizon;
                rc.step = config.step;
                rc.index_substep = config.index_substep;
                rc.minibatch = config.minibatch;
                rc.theta0 = theta0;
                rc.seed = out.result.seed;
                rc.record_thinning = config.record_thinning;
                if (!config.initial_index_stationary)
                    rc.initial_index = IndexValue::continuous(config.initial_index);
                if (method.kind == MethodKind::Sgpc) {
                    rc.dilation = TimeDilation::constant_rate(method.eps);
                } else {
                    if (!method.mu) throw std::runtime_error("sgpd method without mu family");
                    rc.dilation = TimeDilation::smooth(*method.mu, horizon, config.step);
                }
                traj = run_sgp(rc);
                break;
            }
        }
        out.metric_series.reserve(traj.states.size());
        for (const auto& state : traj.states) {
            double m = rel ? (*rel)(state) : (state - minimizer).norm();
            out.metric_series.push_back(m);
        }
        out.result.terminal = traj.terminal;
        out.result.terminal_metric = out.metric_series.back();
        if (run == 0) out.trajectory = std::move(traj);
    } catch (const std::exception& e) {
        out.result.failed = true;
        out.result.error = e.what();
    }
    out.result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace

std::uint64_t derive_run_seed(std::uint64_t master, const std::string& method_name, int run) {
    std::uint64_t h = mix_u64(master);
    h = mix_u64(h ^ fnv1a(method_name));
    h = mix_u64(h ^ static_cast<std::uint64_t>(run));
    return h;
}

std::shared_ptr<const Problem> build_problem(const ProblemBlock& block) {
    if (block.kind == ProblemBlock::Kind::Toy) return std::make_shared<QuadraticToy>();
    return std::make_shared<PolyRegression>(block.poly);
}

ExperimentOutput run_experiment(const ExperimentConfig& config, ExecutionPolicy policy) {
    if (config.runs < 1) throw std::runtime_error("run_experiment: runs >= 1 required");
    if (config.methods.empty()) throw std::runtime_error("run_experiment: no methods");
    auto problem = build_problem(config.problem);
    std::unique_ptr<RelErrEvaluator> rel;
    if (config.problem.kind == ProblemBlock::Kind::PolyRegression) {
        auto poly = std::static_pointer_cast<const PolyRegression>(problem);
        rel = std::make_unique<RelErrEvaluator>(*poly, equispaced_grid(1000));
    }
    ParameterVector minimizer = problem->minimizer();

    auto n_methods = config.methods.size();
    auto total = n_methods * static_cast<std::size_t>(config.runs);
    std::vector<MethodRunOutput> slots(total);

    auto run_task = [&](std::size_t idx) {
        std::size_t m = idx / static_cast<std::size_t>(config.runs);
        int j = static_cast<int>(idx % static_cast<std::size_t>(config.runs));
        slots[idx] = run_one(config, config.methods[m], j, problem, rel.get(), minimizer);
    };

    if (policy == ExecutionPolicy::OpenMP) {
#pragma omp parallel for schedule(dynamic)
        for (long idx = 0; idx < static_cast<long>(total); ++idx)
            run_task(static_cast<std::size_t>(idx));
    } else {
        for (std::size_t idx = 0; idx < total; ++idx) run_task(idx);
    }

    // Merge in deterministic config-then-seed order.
    ExperimentOutput out;
    out.results.reserve(total);
    for (std::size_t m = 0; m < n_methods; ++m) {
        const auto& method = config.methods[m];
        std::vector<std::vector<double>> series;
        std::vector<double> terminals;
        for (int j = 0; j < config.runs; ++j) {
            auto& slot = slots[m * static_cast<std::size_t>(config.runs) + j];
            out.results.push_back(slot.result);
            if (slot.result.failed) {
                out.any_failed = true;
                continue;
            }
            terminals.push_back(slot.result.terminal_metric);
            series.push_back(std::move(slot.metric_series));
            if (slot.trajectory) {
                out.metric_times[method.name] = slot.trajectory->times;
                out.first_trajectory[method.name] = std::move(*slot.trajectory);
            }
        }
        MethodSummary summary;
        summary.method = method.name;
        summary.runs = static_cast<int>(terminals.size());
        if (!terminals.empty()) {
            double mean = 0.0;
            for (double t : terminals) mean += t;
            mean /= static_cast<double>(terminals.size());
            summary.mean = mean;
            if (terminals.size() >= 2) {
                double v = 0.0;
                for (double t : terminals) v += (t - mean) * (t - mean);
                summary.std_dev = std::sqrt(v / (static_cast<double>(terminals.size()) - 1.0));
            }
        }
        out.summaries.push_back(summary);
        out.metric_series[method.name] = std::move(series);
    }
    return out;
}

void write_outputs(const ExperimentConfig& config, const ExperimentOutput& output,
                   const std::string& output_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(output_dir);
    auto path = [&](const std::string& name) { return (fs::path(output_dir) / name).string(); };

    // wall-clock runtimes stay in-memory only: emitted files must be
    // byte-identical across reruns of the same config
    CsvTable runs;
    runs.header = {"method", "run", "seed", "terminal_metric"};
    for (const auto& r : output.results) {
        if (r.failed) {
            runs.rows.push_back({r.method, static_cast<long>(r.run_index),
                                 std::to_string(r.seed), std::string("failed:" + r.error)});
        } else {
            runs.rows.push_back({r.method, static_cast<long>(r.run_index),
                                 std::to_string(r.seed), r.terminal_metric});
        }
    }
    emit_csv(runs, path("runs.csv"));

    CsvTable summary;
    summary.header = {"method", "runs", "mean", "std"};
    for (const auto& s : output.summaries) {
        CsvCell std_cell = s.std_dev ? CsvCell{*s.std_dev} : CsvCell{std::string("")};
        summary.rows.push_back({s.method, static_cast<long>(s.runs), s.mean, std_cell});
    }
    emit_csv(summary, path("summary.csv"));

    auto problem = build_problem(config.problem);
    const auto* poly = dynamic_cast<const PolyRegression*>(problem.get());

    for (const auto& method : config.methods) {
        auto series_it = output.metric_series.find(method.name);
        auto times_it = output.metric_times.find(method.name);
        if (series_it == output.metric_series.end() || times_it == output.metric_times.end())
            continue;
        const auto& series = series_it->second;
        const auto& times = times_it->second;
        if (series.empty()) continue;

        // metric over time: mean and (for J >= 2) StD band
        CsvTable loss;
        loss.header = {"t", "mean", "std"};
        if (series.size() >= 2) {
            EnsembleSummary es = ensemble_stats(series, times, "metric");
            for (std::size_t i = 0; i < times.size(); ++i)
                loss.rows.push_back({times[i], es.mean[i], es.std_dev[i]});
        } else {
            for (std::size_t i = 0; i < times.size(); ++i)
                loss.rows.push_back({times[i], series[0][i], std::string("")});
        }
        emit_csv(loss, path("loss_" + method.name + ".csv"));

        // first-run trajectory (thinned)
        auto traj_it = output.first_trajectory.find(method.name);
        if (traj_it != output.first_trajectory.end()) {
            const Trajectory& traj = traj_it->second;
            CsvTable tcsv;
            tcsv.header = {"t"};
            for (int k = 0; k < traj.states.front().size(); ++k)
                tcsv.header.push_back("theta_" + std::to_string(k));
            for (std::size_t i = 0; i < traj.times.size(); ++i) {
                std::vector<CsvCell> row{traj.times[i]};
                for (int k = 0; k < traj.states[i].size(); ++k) row.emplace_back(traj.states[i](k));
                tcsv.rows.push_back(std::move(row));
            }
            emit_csv(tcsv, path("traj_" + method.name + "_run0.csv"));
        }

        if (poly) {
            // terminal abs_err profile and fitted curve on the evaluation grid
            std::vector<ParameterVector> terminals;
            for (const auto& r : output.results)
                if (!r.failed && r.method == method.name) terminals.push_back(r.terminal);
            if (terminals.empty()) continue;
            auto grid = equispaced_grid(1000);
            auto truth = [&](double x) { return poly->truth(x); };
            CsvTable prof, fit;
            prof.header = {"x", "mean", "std"};
            fit.header = {"x", "truth", "fit_mean"};
            auto J = static_cast<double>(terminals.size());
            for (double x : grid) {
                double mean = 0.0, mean_fit = 0.0;
                std::vector<double> vals;
                vals.reserve(terminals.size());
                for (const auto& th : terminals) {
                    double a = abs_err(th, truth, x);
                    vals.push_back(a);
                    mean += a;
                    mean_fit += th.dot(poly->basis(x));
                }
                mean /= J;
                mean_fit /= J;
                double v = 0.0;
                for (double a : vals) v += (a - mean) * (a - mean);
                CsvCell std_cell = terminals.size() >= 2
                                       ? CsvCell{std::sqrt(v / (J - 1.0))}
                                       : CsvCell{std::string("")};
                prof.rows.push_back({x, mean, std_cell});
                fit.rows.push_back({x, truth(x), mean_fit});
            }
            emit_csv(prof, path("abs_err_" + method.name + ".csv"));
            emit_csv(fit, path("fit_" + method.name + ".csv"));
        }
    }
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

IndexProcessSpec parse_index(const json& j) {
    check_keys(j, {"kind", "rate", "sigma", "lo", "hi", "n_states", "components"}, "index");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "jump_uniform") {
        JumpUniformSpec s;
        s.rate = j.at("rate").get<double>();
        s.lo = j.value("lo", -1.0);
        s.hi = j.value("hi", 1.0);
        return IndexProcessSpec{s};
    }
    if (kind == "reflected_brownian") {
        ReflectedBrownianSpec s;
        s.sigma = j.at("sigma").get<double>();
        s.lo = j.value("lo", -1.0);
        s.hi = j.value("hi", 1.0);
        return IndexProcessSpec{s};
    }
    if (kind == "finite_jump") {
        FiniteJumpSpec s;
        s.rate = j.at("rate").get<double>();
        s.n_states = j.at("n_states").get<int>();
        return IndexProcessSpec{s};
    }
    if (kind == "countable_jump") {
        CountableJumpSpec s;
        s.rate = j.value("rate", 1.0);
        return IndexProcessSpec{s};
    }
    if (kind == "product") {
        ProductSpec s;
        for (const auto& c : j.at("components")) s.components.push_back(parse_index(c));
        return IndexProcessSpec{s};
    }
    throw std::runtime_error("config: unknown index kind '" + kind + "'");
}

MuFamily parse_mu(const json& j) {
    check_keys(j, {"family", "c", "p", "a", "b"}, "mu");
    std::string family = j.at("family").get<std::string>();
    if (family == "power_log") return PowerLogMu{j.at("c").get<double>(), j.at("p").get<double>()};
    if (family == "affine") return AffineMu{j.at("a").get<double>(), j.at("b").get<double>()};
    throw std::runtime_error("config: unknown mu family '" + family + "'");
}

IntegratorSpec parse_integrator(const json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "explicit_euler") return ExplicitEuler{};
        if (s == "implicit_midpoint") return ImplicitMidpoint{};
        throw std::runtime_error("config: unknown integrator '" + s + "'");
    }
    check_keys(j, {"kind", "tolerance", "max_iterations", "solver"}, "integrator");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "explicit_euler") return ExplicitEuler{};
    if (kind != "implicit_midpoint")
        throw std::runtime_error("config: unknown integrator '" + kind + "'");
    ImplicitMidpoint mp;
    mp.tolerance = j.value("tolerance", 1e-10);
    mp.max_iterations = j.value("max_iterations", 100);
    std::string solver = j.value("solver", "auto");
    if (solver == "auto")
        mp.solver = ImplicitMidpoint::Solver::Auto;
    else if (solver == "fixed_point")
        mp.solver = ImplicitMidpoint::Solver::FixedPoint;
    else if (solver == "linear_exact")
        mp.solver = ImplicitMidpoint::Solver::LinearExact;
    else
        throw std::runtime_error("config: unknown midpoint solver '" + solver + "'");
    return mp;
}

MethodBlock parse_method(const json& j) {
    check_keys(j, {"name", "kind", "eta", "index", "eps", "mu", "integrator"}, "method");
    MethodBlock m;
    m.name = j.at("name").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "sgd_euler")
        m.kind = MethodKind::SgdEuler;
    else if (kind == "sgd_midpoint")
        m.kind = MethodKind::SgdMidpoint;
    else if (kind == "sgpc")
        m.kind = MethodKind::Sgpc;
    else if (kind == "sgpd")
        m.kind = MethodKind::Sgpd;
    else
        throw std::runtime_error("config: unknown method kind '" + kind + "'");
    if (j.contains("eta")) m.eta = j.at("eta").get<double>();
    if (j.contains("index")) m.index = parse_index(j.at("index"));
    if (j.contains("eps")) m.eps = j.at("eps").get<double>();
    if (j.contains("mu")) m.mu = parse_mu(j.at("mu"));
    if (j.contains("integrator")) m.integrator = parse_integrator(j.at("integrator"));
    if ((m.kind == MethodKind::Sgpc || m.kind == MethodKind::Sgpd) && !j.contains("index"))
        throw std::runtime_error("config: method '" + m.name + "' needs an index block");
    if (m.kind == MethodKind::Sgpd && !m.mu)
        throw std::runtime_error("config: method '" + m.name + "' needs a mu block");
    return m;
}

ProblemBlock parse_problem(const json& j) {
    check_keys(j, {"kind", "alpha", "basis_size", "noise_seed", "modes", "quadrature_intervals"},
               "problem");
    ProblemBlock p;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "toy") {
        p.kind = ProblemBlock::Kind::Toy;
        return p;
    }
    if (kind != "poly_regression")
        throw std::runtime_error("config: unknown problem kind '" + kind + "'");
    p.kind = ProblemBlock::Kind::PolyRegression;
    p.poly.alpha = j.value("alpha", 1e-4);
    p.poly.basis_size = j.value("basis_size", 9);
    p.poly.noise.modes = j.value("modes", 200);
    p.poly.noise.seed = j.value("noise_seed", std::uint64_t{0});
    p.poly.quad_intervals = j.value("quadrature_intervals", 2048);
    return p;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: parse error: ") + e.what());
    }
    check_keys(j,
               {"schema_version", "output_dir", "master_seed", "runs", "steps", "step",
                "index_substep", "theta0", "initial_index", "initial_index_stationary",
                "minibatch", "record_thinning", "problem", "methods"},
               "top level");
    ExperimentConfig c;
    c.schema_version = j.value("schema_version", 1);
    if (c.schema_version != 1) throw std::runtime_error("config: unsupported schema_version");
    c.output_dir = j.value("output_dir", std::string("out"));
    c.master_seed = j.value("master_seed", std::uint64_t{1});
    c.runs = j.value("runs", 1);
    c.steps = j.value("steps", 1000L);
    c.step = j.value("step", 0.1);
    c.index_substep = j.value("index_substep", 1e-2);
    c.theta0 = j.value("theta0", 0.5);
    c.initial_index = j.value("initial_index", 0.0);
    c.initial_index_stationary = j.value("initial_index_stationary", false);
    c.minibatch = j.value("minibatch", 1);
    c.record_thinning = j.value("record_thinning", 100);
    c.problem = parse_problem(j.at("problem"));
    std::set<std::string> names;
    for (const auto& mj : j.at("methods")) {
        MethodBlock m = parse_method(mj);
        if (!names.insert(m.name).second)
            throw std::runtime_error("config: duplicate method name '" + m.name + "'");
        c.methods.push_back(std::move(m));
    }
    if (c.runs < 1) throw std::runtime_error("config: runs >= 1 required");
    if (c.steps < 1 || c.step <= 0.0) throw std::runtime_error("config: bad steps/step");
    if (c.minibatch < 1) throw std::runtime_error("config: minibatch >= 1 required");
    // validate method parameters against module preconditions now, not mid-run
    for (const auto& m : c.methods) {
        if (m.kind == MethodKind::Sgpc || m.kind == MethodKind::Sgpd) validate(m.index);
        if (m.kind == MethodKind::Sgpc && m.eps <= 0.0)
            throw std::runtime_error("config: eps > 0 required for method '" + m.name + "'");
        if ((m.kind == MethodKind::SgdEuler || m.kind == MethodKind::SgdMidpoint) && m.eta <= 0.0)
            throw std::runtime_error("config: eta > 0 required for method '" + m.name + "'");
    }
    return c;
}

ExperimentConfig reference_study_config() {
    ExperimentConfig c;
    c.output_dir = "out";
    c.master_seed = 1;
    c.runs = 100;
    c.steps = 50000;
    c.step = 0.1;
    c.index_substep = 1e-2;
    c.theta0 = 0.5;
    c.initial_index = 0.0;
    c.record_thinning = 100;
    c.problem.kind = ProblemBlock::Kind::PolyRegression;
    c.problem.poly = PolyRegressionSpec{};

    // the subsampled gradients are linear in theta, so the exact linear
    // midpoint solve is both cheaper and tighter than fixed-point iteration
    ImplicitMidpoint midpoint;
    midpoint.solver = ImplicitMidpoint::Solver::LinearExact;
    auto sgpc = [&](std::string name, IndexProcessSpec index) {
        MethodBlock m;
        m.name = std::move(name);
        m.kind = MethodKind::Sgpc;
        m.index = std::move(index);
        m.eps = 1.0;
        m.integrator = midpoint;
        return m;
    };
    MethodBlock sgd;
    sgd.name = "sgd";
    sgd.kind = MethodKind::SgdEuler;
    sgd.eta = 0.1;
    MethodBlock sgd_mp;
    sgd_mp.name = "sgd_implicit";
    sgd_mp.kind = MethodKind::SgdMidpoint;
    sgd_mp.eta = 0.1;
    sgd_mp.integrator = midpoint;
    c.methods = {
        sgd,
        sgd_mp,
        sgpc("sgpc_rbm_5", IndexProcessSpec{ReflectedBrownianSpec{5.0}}),
        sgpc("sgpc_rbm_0.5", IndexProcessSpec{ReflectedBrownianSpec{0.5}}),
        sgpc("sgpc_rbm_0.05", IndexProcessSpec{ReflectedBrownianSpec{0.05}}),
        sgpc("sgpc_mjp_10", IndexProcessSpec{JumpUniformSpec{10.0}}),
        sgpc("sgpc_mjp_1", IndexProcessSpec{JumpUniformSpec{1.0}}),
        sgpc("sgpc_mjp_0.1", IndexProcessSpec{JumpUniformSpec{0.1}}),
        sgpc("sgpc_mjp_0.01", IndexProcessSpec{JumpUniformSpec{0.01}}),
    };
    return c;
}

}  // namespace sgp
