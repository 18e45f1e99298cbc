#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include "sgp/rng.hpp"

namespace sgp {

// A point of the index space S. Scalar kinds carry a single value; product
// values carry one component per factor process.
class IndexValue {
public:
    enum class Kind { Continuous, FiniteState, CountableState, Product };

    static IndexValue continuous(double v) { return IndexValue(Kind::Continuous, v); }
    static IndexValue finite_state(int s) { return IndexValue(Kind::FiniteState, s); }
    static IndexValue countable_state(long s) {
        if (s < 0) throw std::invalid_argument("countable state must be nonnegative");
        return IndexValue(Kind::CountableState, static_cast<double>(s));
    }
    static IndexValue product(std::vector<IndexValue> comps) {
        IndexValue v(Kind::Product, 0.0);
        v.components_ = std::move(comps);
        return v;
    }

    Kind kind() const { return kind_; }
    double as_real() const { return scalar_; }
    int as_state() const { return static_cast<int>(scalar_); }
    long as_count() const { return static_cast<long>(scalar_); }
    const std::vector<IndexValue>& components() const { return components_; }

    bool operator==(const IndexValue& o) const {
        return kind_ == o.kind_ && scalar_ == o.scalar_ && components_ == o.components_;
    }

private:
    IndexValue(Kind k, double v) : kind_(k), scalar_(v) {}
    Kind kind_;
    double scalar_;
    std::vector<IndexValue> components_;
};

// Process families. All rates are per unit of index-process time.
struct JumpUniformSpec {
    double rate;  // > 0 (0 allowed: frozen path)
    double lo = -1.0;
    double hi = 1.0;
};

struct ReflectedBrownianSpec {
    double sigma;  // >= 0
    double lo = -1.0;
    double hi = 1.0;
};

struct FiniteJumpSpec {
    double rate;   // lambda > 0; kernel relaxes at rate lambda * n_states
    int n_states;  // N >= 2, states {1..N}
};

struct CountableJumpSpec {
    double rate = 1.0;
};

struct IndexProcessSpec;

struct ProductSpec {
    std::vector<IndexProcessSpec> components;
};

struct IndexProcessSpec {
    std::variant<JumpUniformSpec, ReflectedBrownianSpec, FiniteJumpSpec,
                 CountableJumpSpec, ProductSpec>
        v;
};

void validate(const IndexProcessSpec& spec);

// A realized cadlag sample path on a strictly increasing grid starting at 0.
struct IndexPath {
    std::vector<double> grid;
    std::vector<IndexValue> values;
};

// Deterministic single-step kernels. The *_with variants take the noise
// explicitly and are the tested cores; the rng overloads document their
// draw counts.

// Markov pure jump kernel over a gap dt: stay with probability
// exp(-rate*dt), otherwise redraw uniformly. Exact for any dt (the
// post-jump law is the same uniform regardless of how many jumps the gap
// contains). Consumes 1 draw on a stay, 2 on a jump.
IndexValue mjp_step(const IndexValue& state, double dt, const JumpUniformSpec& spec, Rng& rng);

// Euler-Maruyama step with projection back to [lo, hi].
// clamp(state + sigma*sqrt(dt)*psi). Consumes 2 draws (one normal).
IndexValue rbm_step(const IndexValue& state, double dt, const ReflectedBrownianSpec& spec, Rng& rng);
IndexValue rbm_step_with_noise(const IndexValue& state, double dt,
                               const ReflectedBrownianSpec& spec, double psi);

// Finite-state analogue of mjp_step: stay with probability
// exp(-rate*N*dt), otherwise redraw uniformly on {1..N}. Exact kernel.
IndexValue finite_step(const IndexValue& state, double dt, const FiniteJumpSpec& spec, Rng& rng);

// Countable-state process: from k >= 1 the next jump goes to 0; from 0 it
// goes to i >= 1 with probability 2^-i. Consecutive jumps do not commute,
// so the gap is resolved by exact exponential jump-time simulation.
IndexValue countable_step(const IndexValue& state, double dt, const CountableJumpSpec& spec, Rng& rng);

// Dispatch on the spec variant (product advances components on independent
// substreams; see IndexSampler for the stateful streaming version).
IndexValue step_index(const IndexValue& state, double dt, const IndexProcessSpec& spec, Rng& rng);

// One exact draw from the invariant law pi of the spec.
IndexValue stationary_sample(const IndexProcessSpec& spec, Rng& rng);

// Default (arbitrary but fixed) initial state used when a caller asks for a
// concrete point: midpoint for continuous kinds, state 1 / 0 for discrete.
IndexValue default_init(const IndexProcessSpec& spec);

bool compatible(const IndexValue& v, const IndexProcessSpec& spec);

// Streaming sampler: owns the chain state and its rng. Jump families are
// advanced exactly over arbitrary gaps; reflected Brownian gaps are
// subdivided so that no Euler-Maruyama step exceeds max_step.
class IndexSampler {
public:
    IndexSampler(IndexProcessSpec spec, IndexValue init, std::uint64_t seed,
                 double max_step = 1e-2);

    // Initialize from the invariant law.
    static IndexSampler from_stationary(IndexProcessSpec spec, std::uint64_t seed,
                                        double max_step = 1e-2);

    // Advance the chain to the given (non-decreasing) index-process time.
    void advance_to(double t);
    const IndexValue& value() const { return state_; }
    double time() const { return time_; }

private:
    IndexProcessSpec spec_;
    IndexValue state_;
    double time_ = 0.0;
    double max_step_;
    Rng stream_;
    std::vector<IndexSampler> children_;  // product components, substreams
};

// Sample a full path on a strictly increasing grid starting at 0.
IndexPath sample_path(const IndexProcessSpec& spec, const std::vector<double>& grid,
                      const IndexValue& init, std::uint64_t seed, double max_step = 1e-2);

// init drawn from the invariant law.
IndexPath sample_path_stationary(const IndexProcessSpec& spec, const std::vector<double>& grid,
                                 std::uint64_t seed, double max_step = 1e-2);

}  // namespace sgp
