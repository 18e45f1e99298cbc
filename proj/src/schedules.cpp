#include "sgp/schedules.hpp"

#include <algorithm>
#include <limits>

namespace sgp {

double mu_value(const MuFamily& mu, double t) {
    return std::visit([&](const auto& m) { return m.value(t); }, mu);
}

double mu_derivative(const MuFamily& mu, double t) {
    return std::visit([&](const auto& m) { return m.derivative(t); }, mu);
}

bool mu_diverges(const MuFamily& mu) {
    return std::visit([](const auto& m) { return m.diverges(); }, mu);
}

double beta_piecewise(double t, const std::vector<double>& eta) {
    if (t < 0.0) throw std::domain_error("beta_piecewise: t must be >= 0");
    for (std::size_t n = 0; n < eta.size(); ++n) {
        if (eta[n] <= 0.0) throw std::domain_error("beta_piecewise: eta must be positive");
        if (n > 0 && eta[n] > eta[n - 1])
            throw std::domain_error("beta_piecewise: eta must be non-increasing");
    }
    double H = 0.0;
    for (std::size_t n = 0; n < eta.size(); ++n) {
        double H_next = H + eta[n];
        if (t < H_next || (n + 1 == eta.size() && t == H_next))
            return static_cast<double>(n) + (t - H) / eta[n];
        H = H_next;
    }
    throw std::range_error("beta_piecewise: t beyond the horizon of the eta sequence");
}

MuAdmissibility mu_admissibility(const MuFamily& mu, const std::vector<double>& probe_grid) {
    if (probe_grid.empty()) throw std::domain_error("mu_admissibility: empty probe grid");
    for (std::size_t i = 0; i < probe_grid.size(); ++i) {
        if (probe_grid[i] <= 0.0) throw std::domain_error("mu_admissibility: grid must be positive");
        if (i > 0 && probe_grid[i] <= probe_grid[i - 1])
            throw std::domain_error("mu_admissibility: grid must be increasing");
    }
    MuAdmissibility out{0.0, mu_diverges(mu)};
    std::size_t start = probe_grid.size() / 2;
    for (std::size_t i = start; i < probe_grid.size(); ++i) {
        double t = probe_grid[i];
        double ratio = mu_derivative(mu, t) * t / mu_value(mu, t);
        out.max_tail_ratio = std::max(out.max_tail_ratio, ratio);
    }
    return out;
}

TimeDilation TimeDilation::constant_rate(double eps) {
    if (eps <= 0.0) throw std::domain_error("TimeDilation: eps must be > 0");
    TimeDilation d;
    d.v_ = Constant{eps};
    return d;
}

TimeDilation TimeDilation::piecewise(std::vector<double> eta) {
    if (eta.empty()) throw std::domain_error("TimeDilation: empty eta sequence");
    Piecewise pw;
    pw.cumulative.reserve(eta.size());
    double H = 0.0;
    for (std::size_t n = 0; n < eta.size(); ++n) {
        if (eta[n] <= 0.0) throw std::domain_error("TimeDilation: eta must be positive");
        if (n > 0 && eta[n] > eta[n - 1])
            throw std::domain_error("TimeDilation: eta must be non-increasing");
        H += eta[n];
        pw.cumulative.push_back(H);
    }
    pw.eta = std::move(eta);
    TimeDilation d;
    d.v_ = std::move(pw);
    return d;
}

TimeDilation TimeDilation::smooth(MuFamily mu, double horizon, double step) {
    if (horizon <= 0.0 || step <= 0.0)
        throw std::domain_error("TimeDilation: horizon and step must be > 0");
    Smooth sm;
    sm.mu = mu;
    sm.step = step;
    auto n = static_cast<std::size_t>(std::ceil(horizon / step)) + 1;
    sm.cache.resize(n + 1);
    sm.cache[0] = 0.0;
    double prev = mu_value(mu, 0.0);
    if (prev <= 0.0) throw std::domain_error("TimeDilation: mu must be positive");
    for (std::size_t i = 1; i <= n; ++i) {
        double cur = mu_value(mu, static_cast<double>(i) * step);
        if (cur <= 0.0) throw std::domain_error("TimeDilation: mu must be positive");
        sm.cache[i] = sm.cache[i - 1] + 0.5 * step * (prev + cur);
        prev = cur;
    }
    TimeDilation d;
    d.v_ = std::move(sm);
    return d;
}

double TimeDilation::beta(double t) const {
    if (t < 0.0) throw std::domain_error("TimeDilation: t must be >= 0");
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return t / s.eps;
            } else if constexpr (std::is_same_v<T, Piecewise>) {
                auto it = std::upper_bound(s.cumulative.begin(), s.cumulative.end(), t);
                auto n = static_cast<std::size_t>(it - s.cumulative.begin());
                if (n == s.cumulative.size()) {
                    if (t == s.cumulative.back()) return static_cast<double>(n);
                    throw std::range_error("TimeDilation: t beyond the piecewise horizon");
                }
                double H_prev = (n == 0) ? 0.0 : s.cumulative[n - 1];
                return static_cast<double>(n) + (t - H_prev) / s.eta[n];
            } else {
                double pos = t / s.step;
                auto i = static_cast<std::size_t>(pos);
                if (i + 1 >= s.cache.size()) {
                    if (t <= (static_cast<double>(s.cache.size() - 1)) * s.step &&
                        i + 1 == s.cache.size())
                        return s.cache[i];
                    throw std::range_error("TimeDilation: t beyond the cached horizon");
                }
                // trapezoid inside the cell keeps beta consistent with the cache
                double t0 = static_cast<double>(i) * s.step;
                double frac = t - t0;
                double m0 = mu_value(s.mu, t0);
                double m1 = mu_value(s.mu, t);
                return s.cache[i] + 0.5 * frac * (m0 + m1);
            }
        },
        v_);
}

double TimeDilation::horizon() const {
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return std::numeric_limits<double>::infinity();
            } else if constexpr (std::is_same_v<T, Piecewise>) {
                return s.cumulative.back();
            } else {
                return static_cast<double>(s.cache.size() - 1) * s.step;
            }
        },
        v_);
}

}  // namespace sgp
