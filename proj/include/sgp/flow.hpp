#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "sgp/index_process.hpp"
#include "sgp/problems.hpp"
#include "sgp/schedules.hpp"

namespace sgp {

struct ExplicitEuler {};

struct ImplicitMidpoint {
    double tolerance = 1e-10;
    int max_iterations = 100;
    // Fixed point requires h*L/2 < 1. When the problem violates that bound
    // the step falls back to the exact linear solve (both built-ins have
    // gradients linear in theta).
    enum class Solver { Auto, FixedPoint, LinearExact };
    Solver solver = Solver::Auto;
};

using IntegratorSpec = std::variant<ExplicitEuler, ImplicitMidpoint>;

struct Trajectory {
    std::vector<double> times;
    std::vector<ParameterVector> states;
    ParameterVector terminal;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

struct RunConfig {
    std::shared_ptr<const Problem> problem;
    IndexProcessSpec index_spec;
    TimeDilation dilation = TimeDilation::constant_rate(1.0);
    IntegratorSpec integrator = ImplicitMidpoint{};
    double horizon = 1.0;       // T
    double step = 1e-2;         // optimizer step h
    double index_substep = 0.0; // chain step on the index-process clock; 0 -> step/10
    int minibatch = 1;          // M independent index processes, gradients averaged
    ParameterVector theta0;
    std::optional<IndexValue> initial_index;  // nullopt: draw from pi
    std::uint64_t seed = 0;
    int record_thinning = 1;    // record every n-th step
};

// One explicit Euler step: theta - h grad(theta).
ParameterVector explicit_euler_step(const std::function<ParameterVector(const ParameterVector&)>& grad,
                                    const ParameterVector& theta, double h);

// Fixed point of theta+ = theta - (h/2)(grad(theta+) + grad(theta)), iterated
// to tolerance. Throws std::runtime_error carrying the residual on
// non-convergence.
ParameterVector midpoint_step_fixed_point(
    const std::function<ParameterVector(const ParameterVector&)>& grad,
    const ParameterVector& theta, double h, double tolerance, int max_iterations);

// Exact midpoint step for a gradient of the form A theta - r:
// (I + h/2 A) theta+ = (I - h/2 A) theta + h r.
ParameterVector midpoint_step_linear(const Eigen::MatrixXd& curvature, const Eigen::VectorXd& offset,
                                     const ParameterVector& theta, double h);

// Single step of the configured integrator with the index value frozen.
ParameterVector integrator_step(const Problem& problem, const ParameterVector& theta,
                                const IndexValue& y, double h, const IntegratorSpec& spec);

// Stochastic gradient process: index path on the dilated clock, integrator
// steps using the index value at each step's start time.
Trajectory run_sgp(const RunConfig& config);

// Same driver, but the index value per optimizer step is supplied by the
// caller (step k runs on values[k]); used for shared-noise couplings.
Trajectory run_sgp_on_values(const RunConfig& config,
                             const std::vector<IndexValue>& values_at_steps);

// Deterministic full gradient flow driven by the pi-averaged gradient.
Trajectory run_full_flow(const Problem& problem, const ParameterVector& theta0, double horizon,
                         double step, const IntegratorSpec& integrator, int record_thinning = 1);

// Discrete-time stochastic gradient descent with i.i.d. pi draws, learning
// rate eta per step (forward Euler or implicit midpoint update).
Trajectory run_sgd(const Problem& problem, const ParameterVector& theta0, long steps, double eta,
                   const IntegratorSpec& integrator, std::uint64_t seed, int record_thinning = 1);

}  // namespace sgp
