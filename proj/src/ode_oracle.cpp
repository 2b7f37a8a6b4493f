#include "singprop/ode_oracle.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "singprop/error.hpp"

namespace singprop {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

// gradient of psi_delta(z) c^p; psi_delta is constant 1 outside B_delta,
// so its derivative only enters for non-integer p inside the cutoff ring
struct Rhs {
    OscParams P;
    void operator()(const State& s, State& ds, double) const {
        const double x = s[0], xi = s[1];
        const double c = std::pow(x, 2 * P.K) + std::pow(xi, 2 * P.M);
        const double cp1 = P.p * std::pow(c, P.p - 1.0);
        double ax = cp1 * 2 * P.K * std::pow(x, 2 * P.K - 1);
        double axi = cp1 * 2 * P.M * std::pow(xi, 2 * P.M - 1);
        if (!P.integer_p()) {
            const double d = P.cutoff_delta, r2 = x * x + xi * xi;
            const double lo = 0.25 * d * d, hi = d * d;
            if (r2 < hi) {
                const double psi = cutoff_psi(d, {x, xi});
                double dpsi = 0.0;
                if (r2 > lo) {
                    const double u = (r2 - lo) / (hi - lo);
                    const double f0 = std::exp(-1.0 / u), f1 = std::exp(-1.0 / (1.0 - u));
                    const double df0 = f0 / (u * u), df1 = -f1 / ((1 - u) * (1 - u));
                    const double S = f0 + f1;
                    dpsi = (df0 * S - f0 * (df0 + df1)) / (S * S) / (hi - lo);
                }
                const double cp = c > 0 ? std::pow(c, P.p) : 0.0;
                ax = psi * ax + dpsi * 2 * x * cp;
                axi = psi * axi + dpsi * 2 * xi * cp;
            }
        }
        ds[0] = axi;
        ds[1] = -ax;
    }
};

void check_outside(const OscParams& P, const State& s, OdeDiagnostics& d) {
    const double r = std::hypot(s[0], s[1]);
    d.min_radius = std::min(d.min_radius, r);
    if (!P.integer_p() && r < P.cutoff_delta) {
        std::ostringstream os;
        os << "ode_oracle: orbit enters B_delta (|z|=" << r << " < " << P.cutoff_delta << ")";
        throw DomainError(os.str());
    }
}

}  // namespace

std::vector<PhasePoint> ode_trajectory(const OscParams& P, const std::vector<double>& times, PhasePoint z0, double tol,
                                       OdeDiagnostics* diag_out) {
    if (z0.x == 0.0 && z0.xi == 0.0) throw DomainError("ode_oracle: origin is a fixed point, nothing to integrate");
    if (!(tol > 0.0)) throw ParameterError("ode_oracle: tol must be positive");
    Rhs rhs{P};
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
    OdeDiagnostics d;
    d.min_dt = std::numeric_limits<double>::infinity();
    d.min_radius = std::numeric_limits<double>::infinity();
    State s{z0.x, z0.xi};
    check_outside(P, s, d);
    const double a0 = symbol_value(P, z0);
    double t = 0.0;
    double dt = 1e-3;
    std::vector<PhasePoint> out;
    out.reserve(times.size());
    for (double target : times) {
        if (!std::isfinite(target)) throw ParameterError("ode_oracle: time must be finite");
        if (target < t) throw ParameterError("ode_trajectory: times must be nondecreasing and >= 0");
        while (t < target) {
            double h = std::min(dt, target - t);
            const double t_before = t;
            auto res = stepper.try_step(rhs, s, t, h);
            if (res == odeint::fail) {
                ++d.rejected;
                dt = h;
                if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                    std::ostringstream os;
                    os << "ode_oracle: step size collapsed to " << h << " at t=" << t << ", z=(" << s[0] << ", "
                       << s[1] << "), " << d.steps << " steps, " << d.rejected << " rejections";
                    throw NumericError(os.str());
                }
                continue;
            }
            ++d.steps;
            d.min_dt = std::min(d.min_dt, t - t_before);
            // h now holds the suggested next step
            dt = h;
            check_outside(P, s, d);
            const double a = symbol_value(P, {s[0], s[1]});
            d.max_energy_drift = std::max(d.max_energy_drift, std::abs(a - a0) / std::abs(a0));
        }
        out.push_back({s[0], s[1]});
    }
    if (diag_out) *diag_out = d;
    return out;
}

OdeResult ode_oracle(const OscParams& P, double t, PhasePoint z0, double tol) {
    OdeResult r;
    if (t >= 0) {
        r.z = ode_trajectory(P, {t}, z0, tol, &r.diag).front();
        return r;
    }
    // a is even in xi, so (x, xi) -> (x, -xi) conjugates the flow to its time reversal
    PhasePoint mirrored{z0.x, -z0.xi};
    PhasePoint w = ode_trajectory(P, {-t}, mirrored, tol, &r.diag).front();
    r.z = {w.x, -w.xi};
    return r;
}

}  // namespace singprop
