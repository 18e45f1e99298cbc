#include "sgp/problems.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// pi-weighted composite Simpson rule on [-1, 1] (weights sum to 1).
void simpson_unit(int intervals, std::vector<double>& nodes, std::vector<double>& weights) {
    if (intervals < 2 || intervals % 2 != 0)
        throw std::domain_error("quadrature: even interval count >= 2 required");
    int n = intervals;
    nodes.resize(n + 1);
    weights.resize(n + 1);
    double h = 2.0 / n;
    for (int i = 0; i <= n; ++i) {
        nodes[i] = -1.0 + i * h;
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        // density of Unif[-1,1] is 1/2: total weight integrates to 1
        weights[i] = w * h / 3.0 * 0.5;
    }
}

double continuous_point(const IndexValue& y) {
    if (y.kind() != IndexValue::Kind::Continuous)
        throw std::domain_error("problem: continuous index value required");
    return y.as_real();
}

}  // namespace

Eigen::VectorXd legendre_basis(double x, int basis_size) {
    if (x < -1.0 || x > 1.0) throw std::domain_error("legendre_basis: x outside [-1, 1]");
    if (basis_size < 1) throw std::domain_error("legendre_basis: K >= 1 required");
    Eigen::VectorXd p(basis_size);
    p(0) = 1.0;
    if (basis_size > 1) p(1) = x;
    for (int k = 1; k + 1 < basis_size; ++k)
        p(k + 1) = ((2.0 * k + 1.0) * x * p(k) - k * p(k - 1)) / (k + 1.0);
    return p;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev-like initial guess
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 1; k < n; ++k) {
                double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

GRFNoiseSpec GRFNoiseSpec::realize(int modes, std::uint64_t seed) {
    GRFNoiseSpec spec;
    spec.modes = modes;
    spec.seed = seed;
    spec.amplitudes.resize(modes);
    Rng rng(seed);
    for (int j = 0; j < modes; ++j) spec.amplitudes[j] = rng.normal();
    return spec;
}

GRFNoiseSpec GRFNoiseSpec::silent(int modes) {
    GRFNoiseSpec spec;
    spec.modes = modes;
    spec.amplitudes.assign(modes, 0.0);
    return spec;
}

double GRFNoiseSpec::coefficient(int j) const {
    return 10.0 / (1000.0 + std::pow(kPi * j, 1.5));
}

double GRFNoiseSpec::eval(double x) const {
    double s = 0.0;
    for (int j = 1; j <= modes; ++j)
        s += coefficient(j) * std::sin(2.0 * kPi * j * (x - 0.5)) * amplitudes[j - 1];
    return s;
}

QuadraticToy::QuadraticToy() { simpson_unit(512, nodes_, weights_); }

double QuadraticToy::value(const ParameterVector& theta, const IndexValue& y) const {
    if (theta.size() != 1) throw std::domain_error("toy: dimension mismatch");
    double d = theta(0) - continuous_point(y) * continuous_point(y);
    return 0.5 * d * d;
}

ParameterVector QuadraticToy::gradient(const ParameterVector& theta, const IndexValue& y) const {
    if (theta.size() != 1) throw std::domain_error("toy: dimension mismatch");
    double yy = continuous_point(y);
    ParameterVector g(1);
    g(0) = theta(0) - yy * yy;
    return g;
}

SubsampledGradient QuadraticToy::linear_gradient(const IndexValue& y) const {
    double yy = continuous_point(y);
    SubsampledGradient lg;
    lg.curvature = Eigen::MatrixXd::Identity(1, 1);
    lg.offset = Eigen::VectorXd::Constant(1, yy * yy);
    return lg;
}

ParameterVector QuadraticToy::mean_gradient(const ParameterVector& theta) const {
    if (theta.size() != 1) throw std::domain_error("toy: dimension mismatch");
    double mean_y2 = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        mean_y2 += weights_[i] * nodes_[i] * nodes_[i];
    ParameterVector g(1);
    g(0) = theta(0) - mean_y2;
    return g;
}

SubsampledGradient QuadraticToy::mean_linear_gradient() const {
    SubsampledGradient lg;
    lg.curvature = Eigen::MatrixXd::Identity(1, 1);
    lg.offset = minimizer();
    return lg;
}

ParameterVector QuadraticToy::minimizer() const {
    ParameterVector m(1);
    double mean_y2 = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        mean_y2 += weights_[i] * nodes_[i] * nodes_[i];
    m(0) = mean_y2;
    return m;
}

double QuadraticToy::gradient_bound_at_zero() const {
    return 1.0;  // ||grad f(0, y)|| = y^2 <= 1
}

IndexValue QuadraticToy::sample_index(Rng& rng) const {
    return IndexValue::continuous(rng.uniform(-1.0, 1.0));
}

PolyRegression::PolyRegression(PolyRegressionSpec spec) : spec_(std::move(spec)) {
    if (spec_.basis_size < 1) throw std::domain_error("poly_regression: K >= 1 required");
    if (spec_.alpha < 0.0) throw std::domain_error("poly_regression: alpha >= 0 required");
    if (!spec_.truth) spec_.truth = [](double x) { return std::sin(kPi * x); };
    if (spec_.noise.amplitudes.empty() && spec_.noise.modes > 0)
        spec_.noise = GRFNoiseSpec::realize(spec_.noise.modes, spec_.noise.seed);
    simpson_unit(spec_.quad_intervals, nodes_, weights_);

    int K = spec_.basis_size;
    mean_gram_ = Eigen::MatrixXd::Zero(K, K);
    mean_moment_ = Eigen::VectorXd::Zero(K);
    max_basis_sq_norm_ = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        Eigen::VectorXd l = legendre_basis(nodes_[i], K);
        mean_gram_.noalias() += weights_[i] * l * l.transpose();
        mean_moment_.noalias() += weights_[i] * data_g(nodes_[i]) * l;
        max_basis_sq_norm_ = std::max(max_basis_sq_norm_, l.squaredNorm());
    }
}

double PolyRegression::data_g(double x) const { return spec_.truth(x) + spec_.noise.eval(x); }

double PolyRegression::value(const ParameterVector& theta, const IndexValue& y) const {
    if (theta.size() != spec_.basis_size) throw std::domain_error("poly_regression: dimension mismatch");
    double x = continuous_point(y);
    double r = data_g(x) - theta.dot(basis(x));
    return 0.5 * r * r + 0.5 * spec_.alpha * theta.squaredNorm();
}

ParameterVector PolyRegression::gradient(const ParameterVector& theta, const IndexValue& y) const {
    if (theta.size() != spec_.basis_size) throw std::domain_error("poly_regression: dimension mismatch");
    double x = continuous_point(y);
    Eigen::VectorXd l = basis(x);
    double r = data_g(x) - theta.dot(l);
    return (-r) * l + spec_.alpha * theta;
}

SubsampledGradient PolyRegression::linear_gradient(const IndexValue& y) const {
    double x = continuous_point(y);
    Eigen::VectorXd l = basis(x);
    SubsampledGradient lg;
    lg.curvature = l * l.transpose();
    lg.curvature.diagonal().array() += spec_.alpha;
    lg.offset = data_g(x) * l;
    return lg;
}

ParameterVector PolyRegression::mean_gradient(const ParameterVector& theta) const {
    if (theta.size() != spec_.basis_size) throw std::domain_error("poly_regression: dimension mismatch");
    return mean_gram_ * theta - mean_moment_ + spec_.alpha * theta;
}

SubsampledGradient PolyRegression::mean_linear_gradient() const {
    SubsampledGradient lg;
    lg.curvature = mean_gram_;
    lg.curvature.diagonal().array() += spec_.alpha;
    lg.offset = mean_moment_;
    return lg;
}

ParameterVector PolyRegression::minimizer() const {
    Eigen::MatrixXd A = mean_gram_;
    A.diagonal().array() += spec_.alpha;
    return A.ldlt().solve(mean_moment_);
}

double PolyRegression::gradient_bound_at_zero() const {
    double best = 0.0;
    for (double x : nodes_) {
        double g = std::abs(data_g(x)) * std::sqrt(legendre_basis(x, spec_.basis_size).squaredNorm());
        best = std::max(best, g);
    }
    return best;
}

double PolyRegression::lipschitz_bound() const { return max_basis_sq_norm_ + spec_.alpha; }

IndexValue PolyRegression::sample_index(Rng& rng) const {
    return IndexValue::continuous(rng.uniform(-1.0, 1.0));
}

double strong_convexity_probe(const Problem& problem, int n_pairs, Rng& rng) {
    if (n_pairs < 1) throw std::domain_error("strong_convexity_probe: n >= 1 required");
    int K = problem.dim();
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_pairs; ++i) {
        Eigen::VectorXd x1(K), x2(K);
        double dist2 = 0.0;
        do {
            for (int k = 0; k < K; ++k) {
                x1(k) = rng.uniform(-2.0, 2.0);
                x2(k) = rng.uniform(-2.0, 2.0);
            }
            dist2 = (x1 - x2).squaredNorm();
        } while (dist2 == 0.0);  // coincident pairs are redrawn
        IndexValue y = problem.sample_index(rng);
        double num = (x1 - x2).dot(problem.gradient(x1, y) - problem.gradient(x2, y));
        worst = std::min(worst, num / dist2);
    }
    return worst;
}

}  // namespace sgp
