#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "singprop/error.hpp"
#include "singprop/experiments.hpp"
#include "singprop/spectral.hpp"

using namespace singprop;

namespace {

const SpectralBasis& harmonic() {
    static const SpectralBasis b = [] {
        const Grid g = default_grid(1, 1);
        return eigendecompose(build_operator(g, 1, 1), g, 1, 1);
    }();
    return b;
}

const SpectralBasis& quartic() {
    static const SpectralBasis b = [] {
        const Grid g = default_grid(2, 1);
        return eigendecompose(build_operator(g, 2, 1), g, 2, 1);
    }();
    return b;
}

StateVector gaussian(const Grid& g, double x0, double xi0, double width = 1.0) {
    StateVector u = StateVector::from_function(g, [&](double x) {
        return std::exp(-(x - x0) * (x - x0) / (2 * width * width)) * std::exp(cplx(0.0, xi0 * x));
    });
    u.values /= u.norm();
    return u;
}

StateVector mode(const SpectralBasis& b, int j) { return StateVector(b.grid, b.modes.col(j)); }

int sign_changes(const Eigen::VectorXcd& v) {
    const double top = v.cwiseAbs().maxCoeff();
    int changes = 0, last = 0;
    for (int i = 0; i < v.size(); ++i) {
        const double r = v[i].real();
        if (std::abs(r) < 1e-6 * top) continue;
        const int s = r > 0 ? 1 : -1;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

}  // namespace

TEST_CASE("harmonic spectrum") {
    const SpectralBasis& b = harmonic();
    CHECK(b.real_modes);
    CHECK(b.diffop_k == 2);
    CHECK(b.diffop_m == 2);
    CHECK(b.orthonormality_defect < 1e-10);
    for (int j = 0; j < 10; ++j) CHECK(std::abs(b.lambdas[j] - (2 * j + 1)) < 1e-6);
}

TEST_CASE("harmonic spectrum at n=512, L=12") {
    const Grid g(512, 12.0);
    SpectralBasis b = eigendecompose(build_operator(g, 1, 1), g, 1, 1);
    for (int j = 0; j < 10; ++j) CHECK(std::abs(b.lambdas[j] - (2 * j + 1)) < 1e-6);
}

TEST_CASE("quartic ground state") {
    // oracle: the same dense solve at twice the resolution, frozen here
    const double reference = 1.0603620904841828;
    CHECK(std::abs(quartic().lambdas[0] - reference) < 1e-6);
    const Grid g2(1024, default_grid(2, 1).L);
    SpectralBasis b2 = eigendecompose(build_operator(g2, 2, 1), g2, 2, 1);
    CHECK(std::abs(b2.lambdas[0] - quartic().lambdas[0]) < 1e-9);
}

TEST_CASE("degenerate principal symbol is rejected") {
    const Grid g(128, 8.0);
    CHECK_THROWS_AS(build_operator(g, 1, 1, {{2, 2, 1.0}}, false), ParameterError);
    CHECK_THROWS_AS(build_operator(g, 1, 1, {{1, 3, 1.0}, {3, 1, 1.0}}, false), ParameterError);
    // lower-order perturbations are fine
    Eigen::MatrixXcd A = build_operator(g, 1, 1, {{0, 1, 0.3}});
    CHECK((A - A.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("perturbed operator matches the shifted oscillator") {
    // x^2 + 2 b x + xi^2 = (x + b)^2 + xi^2 - b^2
    const Grid g = default_grid(1, 1);
    const double beta = 0.7;
    SpectralBasis b = eigendecompose(build_operator(g, 1, 1, {{0, 1, 2 * beta}}), g, 1, 1);
    for (int j = 0; j < 10; ++j) CHECK(std::abs(b.lambdas[j] - (2 * j + 1 - beta * beta)) < 1e-6);
}

TEST_CASE("eigendecompose trivial matrices") {
    const Grid g(64, 8.0);
    SpectralBasis id = eigendecompose(Eigen::MatrixXcd::Identity(64, 64), g, 1, 1, 10.0);
    for (int j = 0; j < 64; ++j) CHECK(id.lambdas[j] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(id.n_kept == 64);
    CHECK(id.orthonormality_defect < 1e-12);

    Eigen::VectorXd d(64);
    for (int i = 0; i < 64; ++i) d[i] = 1.0 + std::fmod(37.0 * i, 64.0);
    SpectralBasis diag = eigendecompose(d.cast<cplx>().asDiagonal().toDenseMatrix(), g, 1, 1, 1000.0);
    std::sort(d.data(), d.data() + 64);
    for (int j = 0; j < 64; ++j) CHECK(diag.lambdas[j] == doctest::Approx(d[j]).epsilon(1e-14));
}

TEST_CASE("eigendecompose errors") {
    const Grid g(64, 8.0);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(64, 64);
    A(0, 1) = 0.5;
    CHECK_THROWS_AS(eigendecompose(A, g, 1, 1, 10.0), ParameterError);
    CHECK_THROWS_AS(eigendecompose(-Eigen::MatrixXcd::Identity(64, 64), g, 1, 1, 10.0), ParameterError);
    CHECK_THROWS_AS(eigendecompose(Eigen::MatrixXcd::Identity(64, 64), g, 1, 1, 0.5), ResolutionError);
}

TEST_CASE("Sturm oscillation of harmonic modes") {
    const SpectralBasis& b = harmonic();
    for (int j = 0; j < 20; ++j) CHECK(sign_changes(b.modes.col(j)) == j);
}

TEST_CASE("eigenvalue asymptotics") {
    CHECK(std::abs(asymptotics_fit(harmonic(), 10, 80).slope - 1.0) < 0.05);
    CHECK(std::abs(asymptotics_fit(quartic(), 10, 80).slope - 4.0 / 3.0) < 0.05);
    const Grid g = default_grid(3, 1);
    SpectralBasis sextic = eigendecompose(build_operator(g, 3, 1), g, 3, 1);
    CHECK(sextic.n_kept >= 80);
    CHECK(std::abs(asymptotics_fit(sextic, 10, 80).slope - 1.5) < 0.05);
    CHECK_THROWS_AS(asymptotics_fit(harmonic(), 10, 5000), ParameterError);
}

TEST_CASE("cross-resolution stability") {
    const Grid g = default_grid(1, 2);
    const Grid g2(2 * g.n, g.L);
    SpectralBasis a = eigendecompose(build_operator(g, 1, 2), g, 1, 2);
    SpectralBasis b = eigendecompose(build_operator(g2, 1, 2), g2, 1, 2);
    for (int j = 0; j < 20; ++j) CHECK(std::abs(a.lambdas[j] - b.lambdas[j]) <= 1e-7 * std::max(1.0, a.lambdas[j]));
}

TEST_CASE("default grid places the turning point") {
    for (auto [K, M] : {std::pair{1, 1}, {2, 1}, {1, 2}}) {
        const Grid g = default_grid(K, M);
        const double cap = default_retention_cap(g, M);
        CHECK(cap == doctest::Approx(0.5 * std::pow(0.5 * M_PI / g.dx(), 2 * M)));
        CHECK(std::pow(cap, 0.5 / K) == doctest::Approx(0.6 * g.L).epsilon(1e-12));
    }
}

TEST_CASE("propagate basics") {
    const SpectralBasis& b = harmonic();
    StateVector u0 = gaussian(b.grid, 1.0, -0.5);
    Eigen::VectorXcd c = coefficients(b, u0);
    CHECK(tail_fraction(b, c) < 1e-12);
    CHECK(l2_distance(propagate(b, u0, 0.0), synthesize(b, c)) < 1e-10);
    CHECK(l2_distance(propagate(b, u0, 0.0), u0) < 1e-10);

    for (int j : {0, 3, 17}) {
        StateVector phi = mode(b, j);
        StateVector ut = propagate(b, phi, 0.8);
        Eigen::VectorXcd expect = std::exp(cplx(0.0, -b.lambdas[j] * 0.8)) * phi.values;
        CHECK((ut.values - expect).cwiseAbs().maxCoeff() < 1e-10);
    }
    // the ground state only picks up e^{-it}
    StateVector g0 = gaussian(b.grid, 0.0, 0.0);
    for (double t : {0.3, 1.7, 5.0}) {
        StateVector ut = propagate(b, g0, t);
        CHECK((ut.values - std::exp(cplx(0.0, -t)) * g0.values).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("propagate rejects unresolved states") {
    const SpectralBasis& b = harmonic();
    StateVector spike = StateVector::zeros(b.grid);
    spike.values[b.grid.n / 2] = 1.0 / std::sqrt(b.grid.dx());
    CHECK_THROWS_AS(propagate(b, spike, 0.1), ResolutionError);
}

TEST_CASE("unitarity, group law and self-adjointness") {
    const SpectralBasis& b = harmonic();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const Eigen::MatrixXcd A = build_operator(b.grid, 1, 1);
    for (int trial = 0; trial < 10; ++trial) {
        StateVector u = gaussian(b.grid, 2 * U(rng), 2 * U(rng), 0.8 + 0.3 * U(rng));
        StateVector v = gaussian(b.grid, 2 * U(rng), 2 * U(rng), 0.8 + 0.3 * U(rng));
        const double t = 3 * U(rng), s = 3 * U(rng);
        CHECK(std::abs(propagate(b, u, t).norm() - u.norm()) < 1e-10);
        CHECK(l2_distance(propagate(b, propagate(b, u, t), s), propagate(b, u, t + s)) < 1e-10);
        const cplx lhs = (A * u.values).dot(v.values), rhs = u.values.dot(A * v.values);
        CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("Duhamel with zero source matches propagate") {
    const SpectralBasis& b = harmonic();
    StateVector u0 = gaussian(b.grid, 0.5, 1.0);
    const double lmax = b.lambdas[b.n_kept - 1];
    SourceSamples f{0.1 / lmax, {}};
    const double t = 0.3;
    const int N = static_cast<int>(std::ceil(t / f.dt));
    f.samples.assign(N + 1, StateVector::zeros(b.grid));
    CHECK(l2_distance(propagate_duhamel(b, u0, f, t), propagate(b, u0, t)) < 1e-12);
    SourceSamples coarse{10 * f.dt, f.samples};
    CHECK_THROWS_AS(propagate_duhamel(b, u0, coarse, t), ParameterError);
}

TEST_CASE("Duhamel resonant growth") {
    // exact up to the linear interpolation of f_j, error ~ t (lambda_j dt)^2 / 8
    const SpectralBasis& b = harmonic();
    const int j = 4;
    const double lmax = b.lambdas[b.n_kept - 1], t = 0.5;
    auto error_at = [&](double dt) {
        SourceSamples f{dt, {}};
        const int N = static_cast<int>(std::ceil(t / f.dt));
        for (int k = 0; k <= N; ++k)
            f.samples.emplace_back(b.grid, std::exp(cplx(0.0, -b.lambdas[j] * k * f.dt)) * b.modes.col(j));
        StateVector u = propagate_duhamel(b, StateVector::zeros(b.grid), f, t);
        StateVector expect(b.grid, t * std::exp(cplx(0.0, -b.lambdas[j] * t)) * b.modes.col(j));
        return l2_distance(u, expect);
    };
    const double dt = 0.1 / lmax;
    const double e1 = error_at(dt), e2 = error_at(0.5 * dt);
    CHECK(e1 <= t * std::pow(b.lambdas[j] * dt, 2) / 8);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("Duhamel residual") {
    // i u' = A u + i f written as u' + i A u = f
    const SpectralBasis& b = harmonic();
    const Eigen::MatrixXcd A = build_operator(b.grid, 1, 1);
    const StateVector bump = gaussian(b.grid, -1.0, 0.5);
    const StateVector u0 = gaussian(b.grid, 1.0, 0.0);
    const double lmax = b.lambdas[b.n_kept - 1];
    const double dt = 0.1 / lmax, T = 1.0;
    SourceSamples f{dt, {}};
    const int N = static_cast<int>(std::ceil(T / dt)) + 2;
    auto src = [&](double tau) { return StateVector(b.grid, std::cos(3.0 * tau) * bump.values); };
    for (int k = 0; k <= N; ++k) f.samples.push_back(src(k * dt));
    const double h = 2 * dt;
    for (double t : {0.3, 0.6}) {
        StateVector up = propagate_duhamel(b, u0, f, t + h), um = propagate_duhamel(b, u0, f, t - h);
        StateVector u = propagate_duhamel(b, u0, f, t);
        Eigen::VectorXcd r = (up.values - um.values) / (2 * h) + cplx(0, 1) * (A * u.values) - src(t).values;
        const double scale = (A * u.values).norm() + src(t).values.norm();
        CHECK(r.norm() / scale <= 1e-4);
    }
}

TEST_CASE("spectral modulation norm") {
    const SpectralBasis& b = harmonic();
    StateVector u = gaussian(b.grid, 1.0, 0.5);
    CHECK(std::abs(modulation_norm_spectral(b, u, 0.0) - u.norm()) < 1e-10);
    for (int j : {0, 5, 30})
        for (double s : {0.5, 1.0, 2.0})
            CHECK(modulation_norm_spectral(b, mode(b, j), s) ==
                  doctest::Approx(std::pow(b.lambdas[j], s / b.diffop_k)).epsilon(1e-10));
    for (double s : {0.0, 1.0, 3.0}) {
        const double n0 = modulation_norm_spectral(b, u, s);
        CHECK(modulation_norm_spectral(b, propagate(b, u, 1.3), s) == doctest::Approx(n0).epsilon(1e-10));
    }
    CHECK(modulation_norm_spectral(b, u, 2.0) >= modulation_norm_spectral(b, u, 1.0));
}

TEST_CASE("coefficient decay: Schwartz versus step") {
    const SpectralBasis& b = harmonic();
    DecayFitReport gs = coefficient_decay_fit(b, gaussian(b.grid, 2.0, 1.0), DecayModel::polynomial());
    REQUIRE_FALSE(gs.saturated);
    CHECK(gs.window_growth > 1.0);
    CHECK(gs.parameter > 3.0);

    StateVector step = StateVector::from_function(b.grid, [](double x) { return std::abs(x - 0.3) < 2.0 ? 1.0 : 0.0; });
    step.values /= step.norm();
    DecayFitReport st = coefficient_decay_fit(b, step, DecayModel::polynomial());
    REQUIRE_FALSE(st.saturated);
    CHECK(st.parameter > 0.0);
    CHECK(st.parameter < 1.5);
    CHECK(st.window_growth < 0.5);

    DecayFitReport sat = coefficient_decay_fit(b, gaussian(b.grid, 0.0, 0.0), DecayModel::polynomial());
    CHECK(sat.saturated);
}

TEST_CASE("coefficient decay: Gelfand-Shilov model in the quartic basis") {
    const SpectralBasis& b = quartic();
    StateVector u = gaussian(b.grid, 0.4, 0.0, 0.7);
    DecayFitReport r = coefficient_decay_fit(b, u, DecayModel::gelfand_shilov(0.75), 1e-13);
    REQUIRE_FALSE(r.saturated);
    CHECK(r.parameter > 0.0);
    CHECK(r.used >= 30);
    // linear in lambda^(3/4) up to modest scatter
    CHECK(r.residual_rms < 0.2 * std::abs(r.intercept - std::log(1e-26)));
}

TEST_CASE("state helpers") {
    const Grid g(256, 10.0);
    StateVector u = gaussian(g, 0.0, 0.0);
    CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(u.outer_energy_fraction() < 1e-10);
    StateVector far = gaussian(g, 7.0, 0.0);
    CHECK(far.outer_energy_fraction() > 0.5);
    CHECK_THROWS_AS(far.require_inner_support(), ResolutionError);
}
