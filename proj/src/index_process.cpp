#include "sgp/index_process.hpp"

#include <algorithm>
#include <cmath>

namespace sgp {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::domain_error(msg);
}

}  // namespace

void validate(const IndexProcessSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, JumpUniformSpec>) {
                require(s.rate >= 0.0, "jump_uniform: rate must be >= 0");
                require(s.lo < s.hi, "jump_uniform: lo < hi required");
            } else if constexpr (std::is_same_v<T, ReflectedBrownianSpec>) {
                require(s.sigma >= 0.0, "reflected_brownian: sigma must be >= 0");
                require(s.lo < s.hi, "reflected_brownian: lo < hi required");
            } else if constexpr (std::is_same_v<T, FiniteJumpSpec>) {
                require(s.rate > 0.0, "finite_jump: rate must be > 0");
                require(s.n_states >= 2, "finite_jump: N >= 2 required");
            } else if constexpr (std::is_same_v<T, CountableJumpSpec>) {
                require(s.rate > 0.0, "countable_jump: rate must be > 0");
            } else {
                require(!s.components.empty(), "product: no components");
                for (const auto& c : s.components) validate(c);
            }
        },
        spec.v);
}

IndexValue mjp_step(const IndexValue& state, double dt, const JumpUniformSpec& spec, Rng& rng) {
    require(dt >= 0.0, "mjp_step: negative dt");
    require(state.kind() == IndexValue::Kind::Continuous, "mjp_step: continuous state required");
    require(state.as_real() >= spec.lo && state.as_real() <= spec.hi,
            "mjp_step: state outside [lo, hi]");
    double u = rng.uniform01();
    if (u <= std::exp(-spec.rate * dt)) return state;
    return IndexValue::continuous(rng.uniform(spec.lo, spec.hi));
}

IndexValue rbm_step_with_noise(const IndexValue& state, double dt,
                               const ReflectedBrownianSpec& spec, double psi) {
    require(dt >= 0.0, "rbm_step: negative dt");
    require(state.kind() == IndexValue::Kind::Continuous, "rbm_step: continuous state required");
    require(state.as_real() >= spec.lo && state.as_real() <= spec.hi,
            "rbm_step: state outside [lo, hi]");
    double v = state.as_real() + spec.sigma * std::sqrt(dt) * psi;
    return IndexValue::continuous(std::clamp(v, spec.lo, spec.hi));
}

IndexValue rbm_step(const IndexValue& state, double dt, const ReflectedBrownianSpec& spec,
                    Rng& rng) {
    return rbm_step_with_noise(state, dt, spec, rng.normal());
}

IndexValue finite_step(const IndexValue& state, double dt, const FiniteJumpSpec& spec, Rng& rng) {
    require(dt >= 0.0, "finite_step: negative dt");
    require(state.kind() == IndexValue::Kind::FiniteState, "finite_step: finite state required");
    require(state.as_state() >= 1 && state.as_state() <= spec.n_states,
            "finite_step: state outside {1..N}");
    double u = rng.uniform01();
    if (u <= std::exp(-spec.rate * spec.n_states * dt)) return state;
    int s = 1 + static_cast<int>(rng.uniform01() * spec.n_states);
    return IndexValue::finite_state(std::min(s, spec.n_states));
}

namespace {

// P(i) = 2^-i for i >= 1.
long geometric_half(Rng& rng) {
    double u = rng.uniform01();
    while (u == 0.0) u = rng.uniform01();
    return 1 + static_cast<long>(std::floor(-std::log2(u)));
}

}  // namespace

IndexValue countable_step(const IndexValue& state, double dt, const CountableJumpSpec& spec,
                          Rng& rng) {
    require(dt >= 0.0, "countable_step: negative dt");
    require(state.kind() == IndexValue::Kind::CountableState,
            "countable_step: countable state required");
    long s = state.as_count();
    // Exact jump-time simulation: consecutive jumps do not commute here.
    double remaining = dt;
    for (;;) {
        double u = rng.uniform01();
        while (u == 0.0) u = rng.uniform01();
        double wait = -std::log(u) / spec.rate;
        if (wait > remaining) break;
        remaining -= wait;
        s = (s >= 1) ? 0 : geometric_half(rng);
    }
    return IndexValue::countable_state(s);
}

IndexValue step_index(const IndexValue& state, double dt, const IndexProcessSpec& spec, Rng& rng) {
    return std::visit(
        [&](const auto& s) -> IndexValue {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, JumpUniformSpec>) {
                return mjp_step(state, dt, s, rng);
            } else if constexpr (std::is_same_v<T, ReflectedBrownianSpec>) {
                return rbm_step(state, dt, s, rng);
            } else if constexpr (std::is_same_v<T, FiniteJumpSpec>) {
                return finite_step(state, dt, s, rng);
            } else if constexpr (std::is_same_v<T, CountableJumpSpec>) {
                return countable_step(state, dt, s, rng);
            } else {
                require(state.kind() == IndexValue::Kind::Product,
                        "step_index: product state required");
                require(state.components().size() == s.components.size(),
                        "step_index: component count mismatch");
                // Note: this stateless entry advances all components from one
                // stream; IndexSampler is the substream-split version.
                std::vector<IndexValue> out;
                out.reserve(s.components.size());
                for (std::size_t i = 0; i < s.components.size(); ++i)
                    out.push_back(step_index(state.components()[i], dt, s.components[i], rng));
                return IndexValue::product(std::move(out));
            }
        },
        spec.v);
}

IndexValue stationary_sample(const IndexProcessSpec& spec, Rng& rng) {
    return std::visit(
        [&](const auto& s) -> IndexValue {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, JumpUniformSpec>) {
                return IndexValue::continuous(rng.uniform(s.lo, s.hi));
            } else if constexpr (std::is_same_v<T, ReflectedBrownianSpec>) {
                return IndexValue::continuous(rng.uniform(s.lo, s.hi));
            } else if constexpr (std::is_same_v<T, FiniteJumpSpec>) {
                int st = 1 + static_cast<int>(rng.uniform01() * s.n_states);
                return IndexValue::finite_state(std::min(st, s.n_states));
            } else if constexpr (std::is_same_v<T, CountableJumpSpec>) {
                // pi({i}) = 2^-(i+1)
                return IndexValue::countable_state(geometric_half(rng) - 1);
            } else {
                std::vector<IndexValue> out;
                out.reserve(s.components.size());
                for (const auto& c : s.components) out.push_back(stationary_sample(c, rng));
                return IndexValue::product(std::move(out));
            }
        },
        spec.v);
}

IndexValue default_init(const IndexProcessSpec& spec) {
    return std::visit(
        [](const auto& s) -> IndexValue {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, JumpUniformSpec>) {
                return IndexValue::continuous(0.5 * (s.lo + s.hi));
            } else if constexpr (std::is_same_v<T, ReflectedBrownianSpec>) {
                return IndexValue::continuous(0.5 * (s.lo + s.hi));
            } else if constexpr (std::is_same_v<T, FiniteJumpSpec>) {
                return IndexValue::finite_state(1);
            } else if constexpr (std::is_same_v<T, CountableJumpSpec>) {
                return IndexValue::countable_state(0);
            } else {
                std::vector<IndexValue> out;
                out.reserve(s.components.size());
                for (const auto& c : s.components) out.push_back(default_init(c));
                return IndexValue::product(std::move(out));
            }
        },
        spec.v);
}

bool compatible(const IndexValue& v, const IndexProcessSpec& spec) {
    return std::visit(
        [&](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, JumpUniformSpec>) {
                return v.kind() == IndexValue::Kind::Continuous && v.as_real() >= s.lo &&
                       v.as_real() <= s.hi;
            } else if constexpr (std::is_same_v<T, ReflectedBrownianSpec>) {
                return v.kind() == IndexValue::Kind::Continuous && v.as_real() >= s.lo &&
                       v.as_real() <= s.hi;
            } else if constexpr (std::is_same_v<T, FiniteJumpSpec>) {
                return v.kind() == IndexValue::Kind::FiniteState && v.as_state() >= 1 &&
                       v.as_state() <= s.n_states;
            } else if constexpr (std::is_same_v<T, CountableJumpSpec>) {
                return v.kind() == IndexValue::Kind::CountableState && v.as_count() >= 0;
            } else {
                if (v.kind() != IndexValue::Kind::Product ||
                    v.components().size() != s.components.size())
                    return false;
                for (std::size_t i = 0; i < s.components.size(); ++i)
                    if (!compatible(v.components()[i], s.components[i])) return false;
                return true;
            }
        },
        spec.v);
}

IndexSampler::IndexSampler(IndexProcessSpec spec, IndexValue init, std::uint64_t seed,
                           double max_step)
    : spec_(std::move(spec)), state_(std::move(init)), max_step_(max_step), stream_(seed) {
    validate(spec_);
    if (!compatible(state_, spec_)) throw std::domain_error("IndexSampler: init incompatible with spec");
    if (const auto* prod = std::get_if<ProductSpec>(&spec_.v)) {
        children_.reserve(prod->components.size());
        for (std::size_t i = 0; i < prod->components.size(); ++i)
            children_.emplace_back(prod->components[i], state_.components()[i],
                                   derive_substream(seed, i), max_step);
    }
}

IndexSampler IndexSampler::from_stationary(IndexProcessSpec spec, std::uint64_t seed,
                                           double max_step) {
    // The init draw uses a dedicated substream so the path stream is
    // unaffected by whether the start was fixed or stationary.
    Rng init_rng(derive_substream(seed, ~std::uint64_t{0}));
    IndexValue init = stationary_sample(spec, init_rng);
    return IndexSampler(std::move(spec), std::move(init), seed, max_step);
}

void IndexSampler::advance_to(double t) {
    if (t < time_) throw std::domain_error("IndexSampler: time must be non-decreasing");
    if (!children_.empty()) {
        std::vector<IndexValue> out;
        out.reserve(children_.size());
        for (auto& c : children_) {
            c.advance_to(t);
            out.push_back(c.value());
        }
        state_ = IndexValue::product(std::move(out));
        time_ = t;
        return;
    }
    double gap = t - time_;
    if (const auto* rbm = std::get_if<ReflectedBrownianSpec>(&spec_.v)) {
        // Subdivide so each Euler-Maruyama step is at most max_step_.
        if (gap > 0.0) {
            auto n = static_cast<long>(std::ceil(gap / max_step_));
            double dt = gap / static_cast<double>(n);
            for (long i = 0; i < n; ++i) state_ = rbm_step(state_, dt, *rbm, stream_);
        }
    } else {
        // Jump kernels are exact over arbitrary gaps.
        state_ = step_index(state_, gap, spec_, stream_);
    }
    time_ = t;
}

namespace {

IndexPath sample_path_impl(IndexSampler sampler, const std::vector<double>& grid) {
    if (grid.empty() || grid.front() != 0.0)
        throw std::domain_error("sample_path: grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw std::domain_error("sample_path: grid not increasing");
    IndexPath path;
    path.grid = grid;
    path.values.reserve(grid.size());
    path.values.push_back(sampler.value());
    for (std::size_t i = 1; i < grid.size(); ++i) {
        sampler.advance_to(grid[i]);
        path.values.push_back(sampler.value());
    }
    return path;
}

}  // namespace

IndexPath sample_path(const IndexProcessSpec& spec, const std::vector<double>& grid,
                      const IndexValue& init, std::uint64_t seed, double max_step) {
    return sample_path_impl(IndexSampler(spec, init, seed, max_step), grid);
}

IndexPath sample_path_stationary(const IndexProcessSpec& spec, const std::vector<double>& grid,
                                 std::uint64_t seed, double max_step) {
    return sample_path_impl(IndexSampler::from_stationary(spec, seed, max_step), grid);
}

}  // namespace sgp
