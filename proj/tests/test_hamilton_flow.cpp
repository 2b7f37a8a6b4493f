#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "singprop/error.hpp"
#include "singprop/experiments.hpp"
#include "singprop/hamilton_flow.hpp"
#include "singprop/ode_oracle.hpp"

using namespace singprop;

namespace {

double energy(const OscParams& P, PhasePoint z) { return std::pow(z.x, 2 * P.K) + std::pow(z.xi, 2 * P.M); }

double dist(PhasePoint a, PhasePoint b) { return std::max(std::abs(a.x - b.x), std::abs(a.xi - b.xi)); }

// sigma-dilated samples spanning about three decades of theta
std::vector<PhasePoint> dilated_samples(double sigma) {
    std::vector<PhasePoint> out;
    for (int i = 0; i < 40; ++i) {
        const double lam = 1.5 * std::pow(2000.0 / 1.5, i / 39.0);
        for (int a = 0; a < 24; ++a) {
            const double phi = 2 * M_PI * (a + 0.37) / 24;
            out.push_back({lam * std::cos(phi), std::pow(lam, sigma) * std::sin(phi)});
        }
    }
    return out;
}

}  // namespace

TEST_CASE("critical exponent") {
    CHECK(critical_exponent(OscParams(1, 1, 1.0)) == 1.0);
    CHECK(critical_exponent(OscParams(1, 2, 1.0)) == 0.75);
    CHECK(critical_exponent(OscParams(2, 2, 1.0)) == 0.5);
    CHECK(OscParams(1, 2, 1.0).sigma == 0.5);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(OscParams(0, 1, 1.0), ParameterError);
    CHECK_THROWS_AS(OscParams(1, 1, 0.0), ParameterError);
    CHECK_THROWS_AS(period(OscParams(1, 1, 1.0), 0.0), DomainError);
    CHECK_THROWS_AS(flow_segment(OscParams(1, 1, 1.0), {0.0, 0.0}), DomainError);
}

TEST_CASE("harmonic period is pi") {
    const OscParams P(1, 1, 1.0);
    for (double c : {0.1, 1.0, 3.0, 50.0}) CHECK(std::abs(period(P, c) - M_PI) < 1e-12);
    // the oracle returns to its start after one period
    const PhasePoint z0{0.8, -0.4};
    OdeResult r = ode_oracle(P, M_PI, z0, 1e-12);
    CHECK(dist(r.z, z0) < 1e-9);
}

TEST_CASE("critical period independent of c") {
    const OscParams P(1, 2, 0.75);
    const double T1 = period(P, 1.0);
    for (double c : {0.5, 2.0, 9.0}) CHECK(std::abs(period(P, c) - T1) < 1e-12 * T1);
}

TEST_CASE("period law slope") {
    const OscParams P(2, 1, 1.0);
    CHECK(std::abs(period_slope(P, {1.0, 2.0, 4.0}) + 0.25) < 1e-6);
    // cross-check one period with the oracle
    const PhasePoint z0{0.7, 0.3};
    const double T = period(P, energy(P, z0));
    CHECK(dist(ode_oracle(P, T, z0, 1e-12).z, z0) < 1e-8);
}

TEST_CASE("flow at t=0 and the harmonic rotation") {
    const OscParams P(1, 1, 1.0);
    const PhasePoint z0{0.6, -1.3};
    CHECK(dist(flow(P, 0.0, z0), z0) < 1e-14);
    for (double t : {0.1, 0.5, 1.0, 2.7, -0.8}) {
        PhasePoint z = flow(P, t, z0);
        CHECK(std::abs(z.x - (z0.x * std::cos(2 * t) + z0.xi * std::sin(2 * t))) < 1e-12);
        CHECK(std::abs(z.xi - (z0.xi * std::cos(2 * t) - z0.x * std::sin(2 * t))) < 1e-12);
    }
}

TEST_CASE("quartic flow against the oracle over two periods") {
    const OscParams P(2, 1, 1.0);
    const PhasePoint z0{0.7, 0.3};
    const double T = period(P, energy(P, z0));
    std::vector<double> times;
    for (int k = 0; k <= 100; ++k) times.push_back(2 * T * k / 100.0);
    auto ode = ode_trajectory(P, times, z0, 1e-12);
    double worst = 0;
    for (size_t k = 0; k < times.size(); ++k) worst = std::max(worst, dist(flow(P, times[k], z0), ode[k]));
    CHECK(worst <= 1e-6);
}

TEST_CASE("branch consistency") {
    for (auto [K, M, p] : {std::tuple{1, 1, 1.0}, {2, 1, 1.0}, {1, 2, 0.75}, {2, 1, 0.375}, {3, 2, 1.0}}) {
        const OscParams P(K, M, p);
        for (PhasePoint z0 : {PhasePoint{0.7, 0.3}, PhasePoint{-1.1, 0.9}, PhasePoint{0.4, -1.6}}) {
            const double T = period(P, energy(P, z0));
            for (int k = 0; k <= 20; ++k) {
                const double t = T * k / 20.0;
                CHECK(dist(flow_branch(P, t, z0, Branch::eta), flow_branch(P, t, z0, Branch::y)) < 1e-9);
            }
        }
    }
    CHECK_THROWS_AS(flow_branch(OscParams(1, 1, 1.0), 0.3, {1.0, 0.0}, Branch::eta), DomainError);
}

TEST_CASE("oracle agrees with rotation and conserves energy") {
    const OscParams P(1, 1, 1.0);
    const double tol = 1e-10;
    OdeResult r = ode_oracle(P, 1.3, {0.5, 0.2}, tol);
    PhasePoint z = flow(P, 1.3, {0.5, 0.2});
    CHECK(dist(r.z, z) < 1e-8);
    CHECK(r.diag.max_energy_drift <= 10 * tol);
}

TEST_CASE("subcritical flow against the oracle") {
    const OscParams P(1, 2, 0.5);
    const PhasePoint z0{1.2, 0.9};
    const double T = period(P, energy(P, z0));
    std::vector<double> times;
    for (int k = 0; k <= 60; ++k) times.push_back(T * k / 60.0);
    OdeDiagnostics diag;
    auto ode = ode_trajectory(P, times, z0, 1e-12, &diag);
    double worst = 0, drift = 0;
    for (size_t k = 0; k < times.size(); ++k) {
        PhasePoint z = flow(P, times[k], z0);
        worst = std::max(worst, dist(z, ode[k]));
        drift = std::max(drift, std::abs(energy(P, z) / energy(P, z0) - 1.0));
    }
    CHECK(worst <= 1e-6);
    CHECK(drift <= 1e-9);
    CHECK(diag.min_radius > 0.5);
}

TEST_CASE("group law") {
    for (auto [K, M, p] : {std::tuple{2, 1, 1.0}, {1, 2, 0.5}, {3, 1, 1.0}}) {
        const OscParams P(K, M, p);
        const PhasePoint z0{0.9, -0.8};
        for (double s : {0.2, 0.7})
            for (double t : {0.3, 1.1}) CHECK(dist(flow(P, s, flow(P, t, z0)), flow(P, s + t, z0)) < 1e-9);
    }
}

TEST_CASE("scaling commutation") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    const OscParams crit(1, 2, 0.75);
    for (int i = 0; i < 20; ++i) {
        const PhasePoint z{U(rng), U(rng)};
        CHECK(scaling_commutation_defect(crit, 0.37, z, 2.0) <= 1e-9);
    }
    CHECK(scaling_commutation_defect(OscParams(2, 1, 1.0), 0.37, {0.8, 0.4}, 1.0) == 0.0);
    CHECK(scaling_commutation_defect(OscParams(2, 1, 1.0), 0.37, {0.8, 0.4}, 2.0) > 1e-3);
}

TEST_CASE("cutoff and symbol value") {
    const double d = 0.5;
    CHECK(cutoff_psi(d, {0.1, 0.1}) == 0.0);
    CHECK(cutoff_psi(d, {0.6, 0.0}) == 1.0);
    const double mid = cutoff_psi(d, {0.35, 0.0});
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
    CHECK(symbol_value(OscParams(1, 1, 1.0), {0.1, 0.2}) == doctest::Approx(0.05));
    CHECK(symbol_value(OscParams(1, 2, 0.5), {0.1, 0.1}) == 0.0);
    CHECK(symbol_value(OscParams(1, 2, 0.5), {2.0, 1.0}) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("flow derivative growth: components scale like x and xi") {
    const OscParams P(1, 2, 0.75);
    auto rep = flow_derivative_growth(P, 0.3, dilated_samples(P.sigma), 0, 0);
    CHECK(std::abs(rep.x_exponent - 1.0) < 0.1);
    CHECK(std::abs(rep.xi_exponent - P.sigma) < 0.1);
}

TEST_CASE("flow derivative growth: first derivative bounded at p <= p_c") {
    for (double p : {0.5, 0.75}) {
        const OscParams P(1, 2, p);
        auto rep = flow_derivative_growth(P, 0.3, dilated_samples(P.sigma), 1, 0);
        CHECK(rep.x_exponent <= 0.0 + 0.1);
        CHECK(rep.x_bound == doctest::Approx(0.0));
    }
}

TEST_CASE("flow derivative growth: supercritical term") {
    const OscParams P(2, 1, 1.0);
    auto rep = flow_derivative_growth(P, 0.3, dilated_samples(P.sigma), 1, 0);
    CHECK(rep.x_bound == doctest::Approx(2 * 2 * 0.25));
    CHECK(rep.x_exponent <= rep.x_bound + 0.1);
}
