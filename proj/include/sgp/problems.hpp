#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "sgp/index_process.hpp"
#include "sgp/rng.hpp"

namespace sgp {

using ParameterVector = Eigen::VectorXd;

// Legendre polynomials P_0..P_{K-1} by the Bonnet recurrence, standard
// normalization P_k(1) = 1. x must lie in [-1, 1].
Eigen::VectorXd legendre_basis(double x, int basis_size);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Truncated Karhunen-Loeve observational noise
//   xi(x) = sum_j c_j sin(2 pi j (x - 0.5)) Xi_j,  c_j = 10/(1000 + (pi j)^{3/2}).
struct GRFNoiseSpec {
    int modes = 200;
    std::uint64_t seed = 0;
    std::vector<double> amplitudes;  // realized Xi_j, standard normal draws

    static GRFNoiseSpec realize(int modes, std::uint64_t seed);
    static GRFNoiseSpec silent(int modes = 200);  // all Xi_j = 0

    double coefficient(int j) const;  // c_j, 1-based
    double eval(double x) const;
};

struct SubsampledGradient {
    // grad f(theta, y) = A(y) theta - r(y); both built-ins are linear in theta.
    Eigen::MatrixXd curvature;  // A(y)
    Eigen::VectorXd offset;     // r(y)
};

// Subsampled target f(theta, y) with its gradient, pi-averaged gradient
// field, and minimizer oracle. Immutable after construction.
class Problem {
public:
    virtual ~Problem() = default;

    virtual int dim() const = 0;
    virtual double kappa() const = 0;
    virtual double value(const ParameterVector& theta, const IndexValue& y) const = 0;
    virtual ParameterVector gradient(const ParameterVector& theta, const IndexValue& y) const = 0;
    // A(y), r(y) with gradient = A theta - r.
    virtual SubsampledGradient linear_gradient(const IndexValue& y) const = 0;
    // g(theta) = int grad f(theta, y) pi(dy), by the registered quadrature.
    virtual ParameterVector mean_gradient(const ParameterVector& theta) const = 0;
    // pi-average of the linear structure: g(theta) = A theta - r.
    virtual SubsampledGradient mean_linear_gradient() const = 0;
    virtual ParameterVector minimizer() const = 0;
    // sup over quadrature nodes of ||grad f(0, y)||.
    virtual double gradient_bound_at_zero() const = 0;
    // gradient Lipschitz constant bound, uniform in y.
    virtual double lipschitz_bound() const = 0;
    // draw y from pi (for probes)
    virtual IndexValue sample_index(Rng& rng) const = 0;
    // quadrature nodes/weights of pi over S (weights sum to 1)
    virtual const std::vector<double>& quad_nodes() const = 0;
    virtual const std::vector<double>& quad_weights() const = 0;
};

// f(theta, y) = (theta - y^2)^2 / 2 on S = [-1, 1], pi = Unif[-1, 1].
// kappa = 1, minimizer 1/3.
class QuadraticToy final : public Problem {
public:
    QuadraticToy();

    int dim() const override { return 1; }
    double kappa() const override { return 1.0; }
    double value(const ParameterVector& theta, const IndexValue& y) const override;
    ParameterVector gradient(const ParameterVector& theta, const IndexValue& y) const override;
    SubsampledGradient linear_gradient(const IndexValue& y) const override;
    ParameterVector mean_gradient(const ParameterVector& theta) const override;
    SubsampledGradient mean_linear_gradient() const override;
    ParameterVector minimizer() const override;
    double gradient_bound_at_zero() const override;
    double lipschitz_bound() const override { return 1.0; }
    IndexValue sample_index(Rng& rng) const override;
    const std::vector<double>& quad_nodes() const override { return nodes_; }
    const std::vector<double>& quad_weights() const override { return weights_; }

private:
    std::vector<double> nodes_, weights_;
};

struct PolyRegressionSpec {
    int basis_size = 9;      // Legendre degrees 0..basis_size-1
    double alpha = 1e-4;     // regularization weight; kappa = alpha
    std::function<double(double)> truth;  // default sin(pi x)
    GRFNoiseSpec noise;
    int quad_intervals = 2048;  // composite Simpson intervals over [-1, 1]
};

// Regularized polynomial regression on noisy functional data:
//   f(theta, y) = (data_g(y) - <theta, l(y)>)^2 / 2 + alpha ||theta||^2 / 2,
// with data_g = truth + realized noise, S = [-1, 1], pi = Unif[-1, 1].
class PolyRegression final : public Problem {
public:
    explicit PolyRegression(PolyRegressionSpec spec);

    int dim() const override { return spec_.basis_size; }
    double kappa() const override { return spec_.alpha; }
    double value(const ParameterVector& theta, const IndexValue& y) const override;
    ParameterVector gradient(const ParameterVector& theta, const IndexValue& y) const override;
    SubsampledGradient linear_gradient(const IndexValue& y) const override;
    ParameterVector mean_gradient(const ParameterVector& theta) const override;
    SubsampledGradient mean_linear_gradient() const override;
    ParameterVector minimizer() const override;
    double gradient_bound_at_zero() const override;
    double lipschitz_bound() const override;
    IndexValue sample_index(Rng& rng) const override;
    const std::vector<double>& quad_nodes() const override { return nodes_; }
    const std::vector<double>& quad_weights() const override { return weights_; }

    double data_g(double x) const;  // observed data function
    double truth(double x) const { return spec_.truth(x); }
    Eigen::VectorXd basis(double x) const { return legendre_basis(x, spec_.basis_size); }
    double alpha() const { return spec_.alpha; }

private:
    PolyRegressionSpec spec_;
    std::vector<double> nodes_, weights_;  // pi-weighted Simpson rule
    Eigen::MatrixXd mean_gram_;            // int l l^T pi(dy)
    Eigen::VectorXd mean_moment_;          // int data_g l pi(dy)
    double max_basis_sq_norm_;             // sup_y ||l(y)||^2 over nodes
};

// min over random pairs of <x1-x2, grad f(x1,y) - grad f(x2,y)> / ||x1-x2||^2.
double strong_convexity_probe(const Problem& problem, int n_pairs, Rng& rng);

}  // namespace sgp
