#include "sgp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgp {

std::vector<double> equispaced_grid(int count, double lo, double hi) {
    if (count < 1) throw std::domain_error("equispaced_grid: count >= 1 required");
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = lo;
        return g;
    }
    for (int i = 0; i < count; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

double rel_err(const ParameterVector& theta, const std::function<double(double)>& truth,
               const std::vector<double>& grid) {
    if (grid.empty()) throw std::domain_error("rel_err: empty grid");
    double num = 0.0, den = 0.0;
    for (double x : grid) {
        double t = truth(x);
        double fit = theta.dot(legendre_basis(x, static_cast<int>(theta.size())));
        num += (t - fit) * (t - fit);
        den += t * t;
    }
    if (den == 0.0) throw std::domain_error("rel_err: truth vanishes on the whole grid");
    return num / den;
}

double abs_err(const ParameterVector& theta, const std::function<double(double)>& truth, double x) {
    if (x < -1.0 || x > 1.0) throw std::domain_error("abs_err: x outside [-1, 1]");
    return std::abs(truth(x) - theta.dot(legendre_basis(x, static_cast<int>(theta.size()))));
}

double trunc_wass_to_dirac(const std::vector<ParameterVector>& samples,
                           const ParameterVector& ref) {
    if (samples.empty()) throw std::domain_error("trunc_wass_to_dirac: empty sample set");
    double acc = 0.0;
    for (const auto& s : samples) acc += std::min(1.0, (s - ref).norm());
    return acc / static_cast<double>(samples.size());
}

double empirical_tv(const std::vector<int>& samples, const std::vector<double>& law) {
    if (samples.empty() || law.empty()) throw std::domain_error("empirical_tv: empty input");
    std::vector<double> counts(law.size(), 0.0);
    for (int s : samples) {
        if (s < 1 || s > static_cast<int>(law.size()))
            throw std::domain_error("empirical_tv: sample outside the state space");
        counts[s - 1] += 1.0;
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < law.size(); ++i)
        tv += std::abs(counts[i] / static_cast<double>(samples.size()) - law[i]);
    return 0.5 * tv;
}

double ks_distance(std::vector<double> samples, double lo, double hi) {
    if (samples.empty()) throw std::domain_error("ks_distance: empty sample set");
    if (lo >= hi) throw std::domain_error("ks_distance: lo < hi required");
    std::sort(samples.begin(), samples.end());
    auto n = static_cast<double>(samples.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double x = samples[i];
        if (x < lo || x > hi) throw std::domain_error("ks_distance: sample outside [lo, hi]");
        double cdf = (x - lo) / (hi - lo);
        // empirical CDF jumps from i/n to (i+1)/n at x
        sup = std::max(sup, std::abs(cdf - static_cast<double>(i) / n));
        sup = std::max(sup, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    return sup;
}

double sup_traj_distance(const Trajectory& a, const Trajectory& b) {
    if (a.times != b.times) throw std::domain_error("sup_traj_distance: time grids differ");
    double sup = 0.0;
    for (std::size_t i = 0; i < a.states.size(); ++i)
        sup = std::max(sup, (a.states[i] - b.states[i]).norm());
    return sup;
}

EnsembleSummary ensemble_stats(const std::vector<std::vector<double>>& series,
                               const std::vector<double>& times, const std::string& metric) {
    if (series.size() < 2) throw std::domain_error("ensemble_stats: J >= 2 required");
    for (const auto& s : series)
        if (s.size() != times.size()) throw std::domain_error("ensemble_stats: grid mismatch");
    EnsembleSummary out;
    out.times = times;
    out.run_count = static_cast<int>(series.size());
    out.metric = metric;
    out.mean.resize(times.size());
    out.std_dev.resize(times.size());
    auto J = static_cast<double>(series.size());
    for (std::size_t t = 0; t < times.size(); ++t) {
        double m = 0.0;
        for (const auto& s : series) m += s[t];
        m /= J;
        double v = 0.0;
        for (const auto& s : series) v += (s[t] - m) * (s[t] - m);
        out.mean[t] = m;
        out.std_dev[t] = std::sqrt(v / (J - 1.0));
    }
    return out;
}

}  // namespace sgp
