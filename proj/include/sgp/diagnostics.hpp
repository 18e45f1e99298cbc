#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sgp/flow.hpp"
#include "sgp/problems.hpp"

namespace sgp {

// Per-time mean and standard deviation of a scalar metric across runs.
struct EnsembleSummary {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> std_dev;  // sample StD, J-1 denominator
    int run_count = 0;
    std::string metric;
};

// Relative squared error of the fitted polynomial against the truth on an
// evaluation grid (default 10^3 equispaced points in [-1, 1]):
//   sum_l (truth(x_l) - <theta, l(x_l)>)^2 / sum_l truth(x_l)^2.
double rel_err(const ParameterVector& theta, const std::function<double(double)>& truth,
               const std::vector<double>& grid);
std::vector<double> equispaced_grid(int count = 1000, double lo = -1.0, double hi = 1.0);

// |truth(x) - <theta, l(x)>|.
double abs_err(const ParameterVector& theta, const std::function<double(double)>& truth, double x);

// Truncated Wasserstein distance of an empirical law to a Dirac:
// mean over samples of 1 ^ ||theta_i - ref||. The coupling to a Dirac is
// unique, so this is exact.
double trunc_wass_to_dirac(const std::vector<ParameterVector>& samples,
                           const ParameterVector& ref);

// (1/2) sum_i |p_hat_i - pi_i| for finite-state samples (1-based states).
double empirical_tv(const std::vector<int>& samples, const std::vector<double>& law);

// Kolmogorov-Smirnov distance of an empirical CDF to Unif[lo, hi].
double ks_distance(std::vector<double> samples, double lo, double hi);

// max over the shared grid of ||a_t - b_t||; grids must match exactly.
double sup_traj_distance(const Trajectory& a, const Trajectory& b);

// Per-time mean/StD over runs; all series must share the grid, J >= 2.
EnsembleSummary ensemble_stats(const std::vector<std::vector<double>>& series,
                               const std::vector<double>& times, const std::string& metric = "");

}  // namespace sgp
