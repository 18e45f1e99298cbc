#include "sgp/flow.hpp"

#include <cmath>
#include <cstring>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace sgp {

namespace {

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) { return mix_u64(h ^ mix_u64(v)); }

std::uint64_t hash_double(double d) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(d));
    std::memcpy(&bits, &d, sizeof(bits));
    return bits;
}

std::uint64_t config_hash(const RunConfig& c) {
    std::uint64_t h = 0x6b6f7261ULL;
    h = hash_combine(h, hash_double(c.horizon));
    h = hash_combine(h, hash_double(c.step));
    h = hash_combine(h, hash_double(c.index_substep));
    h = hash_combine(h, static_cast<std::uint64_t>(c.minibatch));
    h = hash_combine(h, c.seed);
    for (int i = 0; i < c.theta0.size(); ++i) h = hash_combine(h, hash_double(c.theta0(i)));
    return h;
}

bool fixed_point_contracts(const Problem& problem, double h) {
    return h * problem.lipschitz_bound() / 2.0 < 1.0;
}

// Averaged linear structure over the (possibly product) index value.
SubsampledGradient averaged_linear(const Problem& problem, const IndexValue& y) {
    if (y.kind() != IndexValue::Kind::Product) return problem.linear_gradient(y);
    const auto& comps = y.components();
    SubsampledGradient acc = problem.linear_gradient(comps[0]);
    for (std::size_t i = 1; i < comps.size(); ++i) {
        SubsampledGradient g = problem.linear_gradient(comps[i]);
        acc.curvature += g.curvature;
        acc.offset += g.offset;
    }
    double inv = 1.0 / static_cast<double>(comps.size());
    acc.curvature *= inv;
    acc.offset *= inv;
    return acc;
}

ParameterVector averaged_gradient(const Problem& problem, const ParameterVector& theta,
                                  const IndexValue& y) {
    if (y.kind() != IndexValue::Kind::Product) return problem.gradient(theta, y);
    const auto& comps = y.components();
    ParameterVector acc = problem.gradient(theta, comps[0]);
    for (std::size_t i = 1; i < comps.size(); ++i) acc += problem.gradient(theta, comps[i]);
    return acc / static_cast<double>(comps.size());
}

// One step with the index value frozen; uses the exact linear solve for the
// midpoint rule when fixed point would not contract (or when requested).
ParameterVector step_frozen(const Problem& problem, const ParameterVector& theta,
                            const IndexValue& y, double h, const IntegratorSpec& spec,
                            bool warned_contraction[1]) {
    if (std::holds_alternative<ExplicitEuler>(spec)) {
        return theta - h * averaged_gradient(problem, theta, y);
    }
    const auto& mp = std::get<ImplicitMidpoint>(spec);
    bool contracts = fixed_point_contracts(problem, h);
    bool use_linear = mp.solver == ImplicitMidpoint::Solver::LinearExact ||
                      (mp.solver == ImplicitMidpoint::Solver::Auto && !contracts);
    if (mp.solver == ImplicitMidpoint::Solver::FixedPoint && !contracts &&
        !warned_contraction[0]) {
        std::cerr << "warning: fixed-point midpoint solve outside the contraction regime "
                     "(h*L/2 >= 1)\n";
        warned_contraction[0] = true;
    }
    if (use_linear) {
        SubsampledGradient lg = averaged_linear(problem, y);
        return midpoint_step_linear(lg.curvature, lg.offset, theta, h);
    }
    auto grad = [&](const ParameterVector& th) { return averaged_gradient(problem, th, y); };
    return midpoint_step_fixed_point(grad, theta, h, mp.tolerance, mp.max_iterations);
}

}  // namespace

ParameterVector explicit_euler_step(
    const std::function<ParameterVector(const ParameterVector&)>& grad,
    const ParameterVector& theta, double h) {
    if (h <= 0.0) throw std::domain_error("explicit_euler_step: h > 0 required");
    return theta - h * grad(theta);
}

ParameterVector midpoint_step_fixed_point(
    const std::function<ParameterVector(const ParameterVector&)>& grad,
    const ParameterVector& theta, double h, double tolerance, int max_iterations) {
    if (h <= 0.0) throw std::domain_error("midpoint_step_fixed_point: h > 0 required");
    if (tolerance <= 0.0 || max_iterations < 1)
        throw std::domain_error("midpoint_step_fixed_point: bad solver parameters");
    ParameterVector g0 = grad(theta);
    ParameterVector next = theta - h * g0;  // Euler predictor
    double residual = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        ParameterVector candidate = theta - 0.5 * h * (grad(next) + g0);
        residual = (candidate - next).norm();
        next = std::move(candidate);
        if (residual <= tolerance) return next;
    }
    std::ostringstream msg;
    msg << "implicit midpoint fixed point did not converge: residual " << residual
        << " after " << max_iterations << " iterations";
    throw std::runtime_error(msg.str());
}

ParameterVector midpoint_step_linear(const Eigen::MatrixXd& curvature,
                                     const Eigen::VectorXd& offset, const ParameterVector& theta,
                                     double h) {
    if (h <= 0.0) throw std::domain_error("midpoint_step_linear: h > 0 required");
    Eigen::MatrixXd lhs = 0.5 * h * curvature;
    lhs.diagonal().array() += 1.0;
    Eigen::VectorXd rhs = theta - 0.5 * h * (curvature * theta) + h * offset;
    return lhs.ldlt().solve(rhs);
}

ParameterVector integrator_step(const Problem& problem, const ParameterVector& theta,
                                const IndexValue& y, double h, const IntegratorSpec& spec) {
    bool warned[1] = {true};  // single-step entry: no warning spam
    return step_frozen(problem, theta, y, h, spec, warned);
}

namespace {

Trajectory drive(const RunConfig& config,
                 const std::function<const IndexValue&(long)>& index_at_step) {
    if (!config.problem) throw std::domain_error("run_sgp: problem required");
    if (config.step <= 0.0 || config.step > config.horizon)
        throw std::domain_error("run_sgp: 0 < h <= T required");
    if (config.minibatch < 1) throw std::domain_error("run_sgp: minibatch >= 1 required");
    if (config.record_thinning < 1) throw std::domain_error("run_sgp: thinning >= 1 required");
    if (config.theta0.size() != config.problem->dim())
        throw std::domain_error("run_sgp: theta0 dimension mismatch");
    if (config.dilation.horizon() < config.horizon)
        throw std::domain_error("run_sgp: dilation does not cover [0, T]");

    auto steps = static_cast<long>(std::llround(config.horizon / config.step));
    Trajectory traj;
    traj.config_hash = config_hash(config);
    traj.seed = config.seed;
    traj.times.reserve(steps / config.record_thinning + 2);
    traj.states.reserve(steps / config.record_thinning + 2);
    ParameterVector theta = config.theta0;
    traj.times.push_back(0.0);
    traj.states.push_back(theta);
    bool warned[1] = {false};
    for (long k = 0; k < steps; ++k) {
        double t = static_cast<double>(k) * config.step;
        const IndexValue& y = index_at_step(k);
        try {
            theta = step_frozen(*config.problem, theta, y, config.step, config.integrator, warned);
        } catch (const std::runtime_error& e) {
            std::ostringstream msg;
            msg << e.what() << " (at t = " << t << ")";
            throw std::runtime_error(msg.str());
        }
        if ((k + 1) % config.record_thinning == 0 || k + 1 == steps) {
            traj.times.push_back(static_cast<double>(k + 1) * config.step);
            traj.states.push_back(theta);
        }
    }
    traj.terminal = theta;
    return traj;
}

}  // namespace

Trajectory run_sgp(const RunConfig& config) {
    IndexProcessSpec spec = config.index_spec;
    validate(spec);
    if (config.minibatch > 1) {
        ProductSpec prod;
        prod.components.assign(config.minibatch, config.index_spec);
        spec = IndexProcessSpec{std::move(prod)};
    }
    double substep = config.index_substep > 0.0 ? config.index_substep : config.step / 10.0;

    std::optional<IndexSampler> sampler;
    if (config.initial_index) {
        IndexValue init = *config.initial_index;
        if (config.minibatch > 1 && init.kind() != IndexValue::Kind::Product)
            init = IndexValue::product(std::vector<IndexValue>(config.minibatch, init));
        if (!compatible(init, spec))
            throw std::domain_error("run_sgp: initial index incompatible with spec");
        sampler.emplace(spec, init, config.seed, substep);
    } else {
        sampler.emplace(IndexSampler::from_stationary(spec, config.seed, substep));
    }

    IndexValue current = sampler->value();
    auto at_step = [&](long k) -> const IndexValue& {
        double t = static_cast<double>(k) * config.step;
        sampler->advance_to(config.dilation.beta(t));
        current = sampler->value();
        return current;
    };
    return drive(config, at_step);
}

Trajectory run_sgp_on_values(const RunConfig& config,
                             const std::vector<IndexValue>& values_at_steps) {
    auto steps = static_cast<long>(std::llround(config.horizon / config.step));
    if (static_cast<long>(values_at_steps.size()) < steps)
        throw std::domain_error("run_sgp_on_values: not enough index values");
    auto at_step = [&](long k) -> const IndexValue& {
        return values_at_steps[static_cast<std::size_t>(k)];
    };
    return drive(config, at_step);
}

Trajectory run_full_flow(const Problem& problem, const ParameterVector& theta0, double horizon,
                         double step, const IntegratorSpec& integrator, int record_thinning) {
    if (step <= 0.0 || step > horizon) throw std::domain_error("run_full_flow: 0 < h <= T required");
    auto steps = static_cast<long>(std::llround(horizon / step));
    Trajectory traj;
    ParameterVector theta = theta0;
    traj.times.push_back(0.0);
    traj.states.push_back(theta);
    SubsampledGradient mean = problem.mean_linear_gradient();
    for (long k = 0; k < steps; ++k) {
        if (std::holds_alternative<ExplicitEuler>(integrator)) {
            theta = theta - step * problem.mean_gradient(theta);
        } else {
            const auto& mp = std::get<ImplicitMidpoint>(integrator);
            bool use_linear = mp.solver != ImplicitMidpoint::Solver::FixedPoint;
            if (use_linear) {
                theta = midpoint_step_linear(mean.curvature, mean.offset, theta, step);
            } else {
                auto grad = [&](const ParameterVector& th) { return problem.mean_gradient(th); };
                theta = midpoint_step_fixed_point(grad, theta, step, mp.tolerance,
                                                  mp.max_iterations);
            }
        }
        if ((k + 1) % record_thinning == 0 || k + 1 == steps) {
            traj.times.push_back(static_cast<double>(k + 1) * step);
            traj.states.push_back(theta);
        }
    }
    traj.terminal = theta;
    return traj;
}

Trajectory run_sgd(const Problem& problem, const ParameterVector& theta0, long steps, double eta,
                   const IntegratorSpec& integrator, std::uint64_t seed, int record_thinning) {
    if (eta <= 0.0 || steps < 1) throw std::domain_error("run_sgd: eta > 0 and steps >= 1 required");
    Rng rng(seed);
    Trajectory traj;
    traj.seed = seed;
    ParameterVector theta = theta0;
    traj.times.push_back(0.0);
    traj.states.push_back(theta);
    bool warned[1] = {false};
    for (long k = 0; k < steps; ++k) {
        IndexValue y = problem.sample_index(rng);
        theta = step_frozen(problem, theta, y, eta, integrator, warned);
        if ((k + 1) % record_thinning == 0 || k + 1 == steps) {
            traj.times.push_back(static_cast<double>(k + 1) * eta);
            traj.states.push_back(theta);
        }
    }
    traj.terminal = theta;
    return traj;
}

}  // namespace sgp
