#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sgp/problems.hpp"

using namespace sgp;

namespace {
constexpr double kPi = 3.14159265358979323846;

// central finite difference of f(., y) at theta
ParameterVector fd_gradient(const Problem& p, const ParameterVector& theta, const IndexValue& y,
                            double h = 1e-6) {
    ParameterVector g(theta.size());
    for (int k = 0; k < theta.size(); ++k) {
        ParameterVector plus = theta, minus = theta;
        plus(k) += h;
        minus(k) -= h;
        g(k) = (p.value(plus, y) - p.value(minus, y)) / (2.0 * h);
    }
    return g;
}
}  // namespace

TEST_CASE("legendre_basis: endpoint and explicit low-order values") {
    auto at_one = legendre_basis(1.0, 9);
    for (int k = 0; k < 9; ++k) CHECK(at_one(k) == doctest::Approx(1.0).epsilon(1e-14));
    auto at_zero = legendre_basis(0.0, 3);
    CHECK(at_zero(0) == 1.0);
    CHECK(at_zero(1) == 0.0);
    CHECK(at_zero(2) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK_THROWS_AS(legendre_basis(1.5, 3), std::domain_error);
    CHECK_THROWS_AS(legendre_basis(0.0, 0), std::domain_error);
}

TEST_CASE("legendre_basis: orthogonality under 64-node Gauss quadrature") {
    std::vector<double> nodes, weights;
    gauss_legendre(64, nodes, weights);
    for (int j = 0; j < 9; ++j)
        for (int k = 0; k < j; ++k) {
            double ip = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                auto l = legendre_basis(nodes[i], 9);
                ip += weights[i] * l(j) * l(k);
            }
            CHECK(std::abs(ip) < 1e-10);
        }
}

TEST_CASE("gauss_legendre: weights sum to 2 and integrate x^2 exactly") {
    std::vector<double> nodes, weights;
    gauss_legendre(16, nodes, weights);
    double wsum = 0.0, x2 = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        wsum += weights[i];
        x2 += weights[i] * nodes[i] * nodes[i];
    }
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(x2 == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("grf noise: silent, single-mode, and coefficient values") {
    auto silent = GRFNoiseSpec::silent();
    CHECK(silent.eval(0.3) == 0.0);

    GRFNoiseSpec single = GRFNoiseSpec::silent();
    single.amplitudes[0] = 1.0;
    CHECK(std::abs(single.eval(0.5)) < 1e-15);  // sin(0)
    double c1 = 10.0 / (1000.0 + std::pow(kPi, 1.5));
    CHECK(single.eval(0.75) == doctest::Approx(c1).epsilon(1e-12));
    CHECK(c1 == doctest::Approx(9.9446e-3).epsilon(1e-4));
    CHECK(single.coefficient(1) == doctest::Approx(c1).epsilon(1e-15));
    // coefficients strictly decreasing
    for (int j = 1; j < 200; ++j) CHECK(single.coefficient(j + 1) < single.coefficient(j));
}

TEST_CASE("grf noise: fixed seed gives identical realizations") {
    auto a = GRFNoiseSpec::realize(200, 17);
    auto b = GRFNoiseSpec::realize(200, 17);
    for (double x : {-0.9, -0.2, 0.0, 0.4, 1.0}) CHECK(a.eval(x) == b.eval(x));
}

TEST_CASE("toy gradient: pointwise stationary value and closed forms") {
    QuadraticToy toy;
    ParameterVector one = ParameterVector::Constant(1, 1.0);
    CHECK(toy.gradient(one, IndexValue::continuous(1.0))(0) == 0.0);
    CHECK(toy.mean_gradient(ParameterVector::Constant(1, 1.0 / 3.0))(0) ==
          doctest::Approx(0.0).epsilon(1e-14));
    CHECK(toy.mean_gradient(one)(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(toy.minimizer()(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("poly regression gradient: alpha=0, theta=0, data_g == 1 gives -l(y)") {
    PolyRegressionSpec spec;
    spec.alpha = 0.0;
    spec.truth = [](double) { return 1.0; };
    spec.noise = GRFNoiseSpec::silent();
    PolyRegression p(spec);
    ParameterVector zero = ParameterVector::Zero(9);
    for (double x : {-0.7, 0.1, 0.6}) {
        auto g = p.gradient(zero, IndexValue::continuous(x));
        auto l = legendre_basis(x, 9);
        CHECK((g + l).norm() < 1e-14);
    }
}

TEST_CASE("gradients match central finite differences at 100 random probes") {
    QuadraticToy toy;
    PolyRegression poly{PolyRegressionSpec{}};
    Rng rng(101);
    for (const Problem* p : {static_cast<const Problem*>(&toy),
                             static_cast<const Problem*>(&poly)}) {
        for (int i = 0; i < 100; ++i) {
            ParameterVector theta(p->dim());
            for (int k = 0; k < p->dim(); ++k) theta(k) = rng.uniform(-2.0, 2.0);
            IndexValue y = p->sample_index(rng);
            auto g = p->gradient(theta, y);
            auto fd = fd_gradient(*p, theta, y);
            CHECK((g - fd).norm() <= 1e-6 * (g.norm() + 1.0));
        }
    }
}

TEST_CASE("linear_gradient agrees with gradient: A(y) theta - r(y)") {
    PolyRegression poly{PolyRegressionSpec{}};
    Rng rng(55);
    for (int i = 0; i < 20; ++i) {
        ParameterVector theta(9);
        for (int k = 0; k < 9; ++k) theta(k) = rng.uniform(-1.0, 1.0);
        IndexValue y = poly.sample_index(rng);
        auto lg = poly.linear_gradient(y);
        CHECK((lg.curvature * theta - lg.offset - poly.gradient(theta, y)).norm() < 1e-13);
    }
}

TEST_CASE("mean_gradient equals the quadrature average of the subsampled gradient") {
    PolyRegression poly{PolyRegressionSpec{}};
    ParameterVector theta(9);
    for (int k = 0; k < 9; ++k) theta(k) = 0.1 * (k - 4);
    ParameterVector avg = ParameterVector::Zero(9);
    const auto& nodes = poly.quad_nodes();
    const auto& weights = poly.quad_weights();
    for (std::size_t i = 0; i < nodes.size(); ++i)
        avg += weights[i] * poly.gradient(theta, IndexValue::continuous(nodes[i]));
    CHECK((avg - poly.mean_gradient(theta)).norm() < 1e-12);
}

TEST_CASE("minimizer optimality: mean gradient vanishes at theta*") {
    QuadraticToy toy;
    CHECK(toy.mean_gradient(toy.minimizer()).norm() <= 1e-8);
    PolyRegression poly{PolyRegressionSpec{}};
    CHECK(poly.mean_gradient(poly.minimizer()).norm() <= 1e-8);
}

TEST_CASE("minimizer: diagonal case data_g == l_1 at alpha = 0") {
    PolyRegressionSpec spec;
    spec.alpha = 0.0;
    spec.truth = [](double x) { return x; };  // P_1
    spec.noise = GRFNoiseSpec::silent();
    PolyRegression p(spec);
    auto m = p.minimizer();
    ParameterVector expected = ParameterVector::Zero(9);
    expected(1) = 1.0;
    CHECK((m - expected).norm() < 1e-8);
}

TEST_CASE("minimizer: huge regularization pushes theta* to zero") {
    PolyRegressionSpec spec;
    spec.alpha = 1e6;
    PolyRegression p(spec);
    CHECK(p.minimizer().norm() < 1e-3);
}

TEST_CASE("strong convexity probe floors") {
    Rng rng(31);
    QuadraticToy toy;
    double toy_ratio = strong_convexity_probe(toy, 1000, rng);
    CHECK(toy_ratio >= 1.0 - 1e-12);
    CHECK(toy_ratio <= 1.0 + 1e-12);

    PolyRegression poly{PolyRegressionSpec{}};
    CHECK(strong_convexity_probe(poly, 10000, rng) >= 1e-4 - 1e-12);
}

TEST_CASE("strong convexity ratio is symmetric under swapping the pair") {
    QuadraticToy toy;
    ParameterVector x1 = ParameterVector::Constant(1, 0.7);
    ParameterVector x2 = ParameterVector::Constant(1, -0.4);
    IndexValue y = IndexValue::continuous(0.2);
    auto ratio = [&](const ParameterVector& a, const ParameterVector& b) {
        return (a - b).dot(toy.gradient(a, y) - toy.gradient(b, y)) / (a - b).squaredNorm();
    };
    CHECK(ratio(x1, x2) == doctest::Approx(ratio(x2, x1)).epsilon(1e-15));
}

TEST_CASE("problem parameter validation") {
    PolyRegressionSpec bad;
    bad.basis_size = 0;
    CHECK_THROWS_AS(PolyRegression{bad}, std::domain_error);
    PolyRegressionSpec neg;
    neg.alpha = -1.0;
    CHECK_THROWS_AS(PolyRegression{neg}, std::domain_error);
}
