#pragma once

#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

namespace sgp {

// Smooth speed families. The catalog is closed so admissibility can be
// checked with closed-form derivatives.
struct PowerLogMu {
    double c;  // scale, > 0
    double p;  // exponent in (0, 1]
    double value(double t) const { return c * std::pow(std::log(t + 2.0), p); }
    double derivative(double t) const {
        return c * p * std::pow(std::log(t + 2.0), p - 1.0) / (t + 2.0);
    }
    bool diverges() const { return true; }
};

struct AffineMu {
    double a;  // slope, >= 0
    double b;  // intercept, > 0
    double value(double t) const { return a * t + b; }
    double derivative(double) const { return a; }
    bool diverges() const { return a > 0.0; }
};

using MuFamily = std::variant<PowerLogMu, AffineMu>;

double mu_value(const MuFamily& mu, double t);
double mu_derivative(const MuFamily& mu, double t);
bool mu_diverges(const MuFamily& mu);

// Continuous piecewise-linear clock built from a finite learning-rate
// sequence: beta(H_{n-1}) = n-1 and slope 1/eta_n on [H_{n-1}, H_n), with
// H_n the partial sums of eta.
double beta_piecewise(double t, const std::vector<double>& eta);

struct MuAdmissibility {
    double max_tail_ratio;  // sup over the tail half of mu'(t) t / mu(t)
    bool diverges;          // structural mu(t) -> infinity
};

MuAdmissibility mu_admissibility(const MuFamily& mu, const std::vector<double>& probe_grid);

// Monotone clock map from optimizer time to index-process time.
class TimeDilation {
public:
    // beta(t) = t / eps.
    static TimeDilation constant_rate(double eps);
    // beta from a positive non-increasing learning-rate sequence.
    static TimeDilation piecewise(std::vector<double> eta);
    // beta(t) = int_0^t mu, composite trapezoid on a cached grid covering
    // [0, horizon] with the given step.
    static TimeDilation smooth(MuFamily mu, double horizon, double step);

    double beta(double t) const;
    double horizon() const;  // largest t the dilation covers

private:
    TimeDilation() = default;

    struct Constant {
        double eps;
    };
    struct Piecewise {
        std::vector<double> eta;
        std::vector<double> cumulative;  // H_n
    };
    struct Smooth {
        MuFamily mu;
        double step;
        std::vector<double> cache;  // cache[i] = beta(i * step)
    };
    std::variant<Constant, Piecewise, Smooth> v_;
};

}  // namespace sgp
