#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "catch_amalgamated.hpp"

#include "entdist/oracle.hpp"

using namespace entdist;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("one resonant mode is the Jaynes-Cummings model", "[oracle]") {
    const double g = 0.2, w0 = 1.0;
    const auto bath = make_bath({w0}, {g});
    const TimeGrid grid(4.0 * std::numbers::pi / g, 2000);
    const auto r = discretized_reference(bath, w0, grid);
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double c = std::cos(g * grid.time(i));
        err = std::max(err, std::abs(r.trajectory.population(i) - c * c));
    }
    CHECK(err < 1e-9);
    CHECK(r.norm_deviation < 1e-10);
    CHECK(std::isinf(bath.recurrence_time()));
}

TEST_CASE("uncoupled modes leave the qubit precessing", "[oracle]") {
    const double w0 = 1.3;
    const auto bath = make_bath({0.5, 1.0, 2.0}, {0.0, 0.0, 0.0});
    const auto r = discretized_reference(bath, w0, TimeGrid(20.0, 200));
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
        CHECK(std::abs(r.trajectory.b[i] - std::polar(1.0, -w0 * r.trajectory.grid.time(i))) < 1e-12);
        CHECK(r.reservoir_population[i] == 0.0);
    }
    CHECK(r.norm_deviation < 1e-14);
}

TEST_CASE("discretised Ohmic bath conserves the norm", "[oracle]") {
    const auto bath = discretize(SpectralModel::ohmic(0.3, 10.0), 300);
    const auto r = discretized_reference(bath, 1.0, TimeGrid(5.0, 500));
    CHECK(r.norm_deviation < 1e-8);
    for (std::size_t i = 0; i < r.trajectory.size(); ++i)
        CHECK_THAT(r.trajectory.population(i) + r.reservoir_population[i], WithinAbs(1.0, 1e-8));
}

TEST_CASE("discretisation preserves the total coupling weight", "[oracle]") {
    const auto m = SpectralModel::ohmic(0.3, 10.0);
    const auto bath = discretize(m, 2000);
    CHECK(bath.size() == 2000);
    CHECK(bath.tail_modes == 2);
    CHECK(bath.band_modes() == 1998);
    CHECK_THAT(bath.coupling_weight(), WithinRel(kernel_at_zero(m), 1e-6));
    CHECK_THAT(bath.recurrence_time(), WithinRel(2.0 * std::numbers::pi / (80.0 / 1998.0), 1e-14));

    DiscretizeOptions plain;
    plain.sampling = BathSampling::Midpoint;
    plain.tail_modes = 0;
    plain.band = std::pair{0.0, 100.0};
    const auto mid = discretize(m, 2000, plain);
    CHECK(mid.tail_modes == 0);
    CHECK_THAT(mid.frequencies.front(), WithinAbs(0.025, 1e-15));
    CHECK_THAT(mid.coupling_weight(), WithinRel(kernel_at_zero(m), 1e-3));
}

TEST_CASE("tail rule integrates its weight function exactly", "[oracle]") {
    // n-point Gauss: exact for polynomials of degree 2n-1 against (a + u) e^{-u}.
    const double a = 8.0;
    const auto [u, w] = detail::shifted_laguerre_rule(a, 3);
    auto moment = [a](int k) {  // int u^k (a + u) e^{-u} du = a k! + (k+1)!
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return a * f + f * (k + 1);
    };
    for (int k = 0; k <= 5; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) s += w[j] * std::pow(u[j], k);
        CHECK_THAT(s, WithinRel(moment(k), 1e-11));
    }
}

TEST_CASE("PBG discretisation covers the band above the edge", "[oracle]") {
    const auto m = SpectralModel::pbg(0.2);
    const auto bath = discretize(m, 500);
    CHECK(bath.tail_modes == 0);
    CHECK(bath.frequencies.front() > 1.0);
    CHECK(bath.frequencies.back() < pbg_band_top(m.as<PbgParams>()));
    DiscretizeOptions opt;
    opt.tail_modes = 2;
    CHECK_THROWS_AS(discretize(m, 500, opt), InputError);
}

TEST_CASE("invalid oracle requests", "[oracle]") {
    const auto m = SpectralModel::ohmic(0.3, 10.0);
    CHECK_THROWS_AS(discretize(m, 20000), InputError);
    CHECK_THROWS_AS(make_bath({1.0, 2.0}, {0.1}), InputError);
    OracleOptions opt;
    opt.max_step = 1.0;
    CHECK_THROWS_AS(discretized_reference(discretize(m, 100), 1.0, TimeGrid(1.0, 10), opt), InstabilityError);
    OracleComparisonOptions cmp;
    cmp.n_modes = 100;
    cmp.window = 1e3;
    CHECK_THROWS_AS(compare_with_oracle(m, 1.0, cmp), InputError);
}

TEST_CASE("agreement with the Volterra solver improves with N", "[oracle]") {
    const auto m = SpectralModel::ohmic(0.3, 10.0);
    const double window = 5.0;  // inside half the recurrence time of the smallest bath
    std::vector<double> errors;
    for (std::size_t n : {250u, 500u, 1000u}) {
        OracleComparisonOptions opt;
        opt.n_modes = n;
        opt.window = window;
        opt.output_dt = 0.01;
        opt.volterra_refine = 200;
        const auto cmp = compare_with_oracle(m, 1.0, opt);
        REQUIRE(cmp.window <= 0.5 * cmp.recurrence_time);
        CHECK(cmp.oracle.norm_deviation < 1e-8);
        CHECK(cmp.max_complement_error < 1e-6);
        errors.push_back(cmp.max_amplitude_error);
    }
    INFO("errors " << errors[0] << " " << errors[1] << " " << errors[2]);
    CHECK(errors[1] < errors[0]);
    CHECK(errors[2] < errors[1]);
    CHECK(errors[2] < 1e-4);
}
