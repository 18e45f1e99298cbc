#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgp/csv.hpp"
#include "sgp/diagnostics.hpp"
#include "sgp/flow.hpp"
#include "sgp/problems.hpp"
#include "sgp/schedules.hpp"

namespace sgp {

enum class MethodKind { SgdEuler, SgdMidpoint, Sgpc, Sgpd };

struct MethodBlock {
    std::string name;  // method identity; run seeds derive from it, not position
    MethodKind kind = MethodKind::Sgpc;
    double eta = 0.1;                 // sgd learning rate
    IndexProcessSpec index;           // sgpc/sgpd index process
    double eps = 1.0;                 // sgpc clock: beta(t) = t / eps
    std::optional<MuFamily> mu;       // sgpd clock speed
    IntegratorSpec integrator = ImplicitMidpoint{};
};

struct ProblemBlock {
    enum class Kind { Toy, PolyRegression } kind = Kind::PolyRegression;
    PolyRegressionSpec poly;  // used for Kind::PolyRegression
};

struct ExperimentConfig {
    int schema_version = 1;
    std::string output_dir = "out";
    std::uint64_t master_seed = 1;
    int runs = 1;              // J
    long steps = 1000;         // N optimizer steps
    double step = 0.1;         // h
    double index_substep = 1e-2;
    double theta0 = 0.5;       // broadcast over all coordinates
    double initial_index = 0.0;
    bool initial_index_stationary = false;
    int minibatch = 1;
    int record_thinning = 100;
    ProblemBlock problem;
    std::vector<MethodBlock> methods;
};

// Strict parse: unknown keys are errors. Throws std::runtime_error with a
// message naming the offending key or value.
ExperimentConfig load_config(const std::string& path);

// The shipped reference-study setup: 9 methods, J = 100, N = 5*10^4,
// h = 0.1, index substep 10^-2, theta0 = 0.5, V(0) = 0.
ExperimentConfig reference_study_config();

struct RunResult {
    std::string method;
    int run_index = 0;
    std::uint64_t seed = 0;
    double terminal_metric = 0.0;  // rel_err (regression) or ||theta - theta*|| (toy)
    ParameterVector terminal;
    double runtime_seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct MethodSummary {
    std::string method;
    int runs = 0;
    double mean = 0.0;
    std::optional<double> std_dev;  // absent for J = 1
};

struct ExperimentOutput {
    std::vector<RunResult> results;  // deterministic config-then-seed order
    std::vector<MethodSummary> summaries;
    // per method: thinned time grid and per-run metric series
    std::map<std::string, std::vector<double>> metric_times;
    std::map<std::string, std::vector<std::vector<double>>> metric_series;
    // first-run thinned trajectory per method
    std::map<std::string, Trajectory> first_trajectory;
    bool any_failed = false;
};

enum class ExecutionPolicy { Serial, OpenMP };

// Stable rule: seed for run j of method m is derived from (master, name, j),
// invariant under reordering of the method blocks.
std::uint64_t derive_run_seed(std::uint64_t master, const std::string& method_name, int run);

// Executes every (method, seed) pair. Run failures are recorded and the
// remaining runs still execute. Output is independent of the policy.
ExperimentOutput run_experiment(const ExperimentConfig& config,
                                ExecutionPolicy policy = ExecutionPolicy::OpenMP);

// Emit runs/summary/series/profile CSVs into output_dir.
void write_outputs(const ExperimentConfig& config, const ExperimentOutput& output,
                   const std::string& output_dir);

std::shared_ptr<const Problem> build_problem(const ProblemBlock& block);

}  // namespace sgp
