#pragma once

#include <vector>

#include "singprop/hamilton_flow.hpp"

namespace singprop {

struct OdeDiagnostics {
    long steps = 0;
    long rejected = 0;
    double min_dt = 0.0;
    double max_energy_drift = 0.0;  // max |a(z(t)) - a(z0)| / a(z0)
    double min_radius = 0.0;        // closest approach to the origin
};

struct OdeResult {
    PhasePoint z;
    OdeDiagnostics diag;
};

// Adaptive Dormand-Prince integration of x' = d_xi a, xi' = -d_x a with
// abs/rel tolerance tol. For non-integer p the cutoff symbol is used and
// the orbit must stay outside B_delta.
OdeResult ode_oracle(const OscParams& params, double t, PhasePoint z0, double tol);

// Same integration, sampled at increasing times (times[0] >= 0).
std::vector<PhasePoint> ode_trajectory(const OscParams& params, const std::vector<double>& times, PhasePoint z0,
                                       double tol, OdeDiagnostics* diag = nullptr);

}  // namespace singprop
