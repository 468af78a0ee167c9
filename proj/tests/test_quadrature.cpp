#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "catch_amalgamated.hpp"

#include "entdist/quadrature.hpp"

using namespace entdist;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Gauss-Legendre rules integrate polynomials up to degree 2N-1 exactly", "[quadrature]") {
    auto check = [](const auto& rule, int degree) {
        for (int k = 0; k <= degree; ++k) {
            double sum = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], k);
            const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            CHECK_THAT(sum, WithinAbs(exact, 1e-14));
        }
    };
    check(quad::gauss_legendre<1>(), 1);
    check(quad::gauss_legendre<5>(), 9);
    check(quad::gauss_legendre<16>(), 31);
}

TEST_CASE("panel integration of smooth and complex integrands", "[quadrature]") {
    const std::vector<double> cuts{0.0, 0.5, 1.0, 2.0};
    const double v = quad::integrate_panels<16>([](double x) { return std::exp(x); }, cuts);
    CHECK_THAT(v, WithinRel(std::exp(2.0) - 1.0, 1e-14));

    // int_0^2 e^{i 5 x} dx
    const auto z = quad::integrate_panels<16>([](double x) { return std::polar(1.0, 5.0 * x); }, cuts);
    const std::complex<double> exact = (std::polar(1.0, 10.0) - 1.0) / std::complex<double>(0.0, 5.0);
    CHECK(std::abs(z - exact) < 1e-13);
}

TEST_CASE("adaptive Gauss-Kronrod meets its tolerance", "[quadrature]") {
    SECTION("endpoint square-root singularity") {
        const auto r = quad::integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 0.0, 1e-10);
        CHECK(r.converged);
        CHECK_THAT(r.value, WithinRel(2.0, 1e-9));
    }
    SECTION("interior breakpoint at a kink") {
        const std::vector<double> kink{0.3};
        const auto r = quad::integrate_adaptive([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 0.0, 1e-13, kink);
        CHECK(r.converged);
        CHECK_THAT(r.value, WithinRel(0.5 * (0.09 + 0.49), 1e-13));
    }
    SECTION("oscillatory complex integrand") {
        const double w = 200.0;
        const auto r = quad::integrate_adaptive([w](double x) { return std::exp(-x) * std::polar(1.0, -w * x); }, 0.0,
                                                40.0, 0.0, 1e-12, {}, 20000);
        const std::complex<double> exact = 1.0 / std::complex<double>(1.0, w);
        CHECK(r.converged);
        CHECK(std::abs(r.value - exact) < 1e-11);
    }
    SECTION("segment budget exhaustion is reported, not hidden") {
        const auto r = quad::integrate_adaptive([](double x) { return std::sin(1e4 * x); }, 0.0, 1.0, 0.0, 1e-14, {}, 4);
        CHECK_FALSE(r.converged);
    }
}
