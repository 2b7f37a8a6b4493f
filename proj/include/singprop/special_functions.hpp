#pragma once

#include <vector>

namespace singprop {

struct GExponents {
    int k = 1;
    int m = 1;
    GExponents() = default;
    GExponents(int k_, int m_);
    GExponents swapped() const { return {m, k}; }
};

double gamma_fn(double x);
double beta_fn(double z, double w);

// B(x,z,w) = int_0^x t^(z-1) (1-t)^(w-1) dt
double incomplete_beta(double x, double z, double w);

// g_{k,m}(x) = int_0^x (1-t^(2k))^(1/2m - 1) dt, |x| <= 1
double g_km(GExponents e, double x);
// g_{k,m}(x) for x >= 0 given only q = 1 - x^(2k). Stays accurate when x is
// within rounding of 1 but q is known exactly.
double g_km_complement(GExponents e, double q);

// derivative (1-x^(2k))^(1/2m - 1); infinite at |x| = 1 when m > 1
double g_km_prime(GExponents e, double x);

// quarter period tau_{k,m} = g_{k,m}(1)
double tau(GExponents e);

double g_inverse(GExponents e, double y);

// h(y) = (1 - g^{-1}(y)^(2k))^(1/2m)
double h_fn(GExponents e, double y);

struct DerivativeLimits {
    std::vector<double> even;  // orders 2, 4, ...
    std::vector<double> odd;   // orders 1, 3, ...
};

struct BoundaryDerivativeReport {
    int order = 0;
    double step = 0.0;
    double tolerance = 0.0;
    std::vector<double> ginv;  // one-sided derivatives of g^{-1} at tau, orders 1..n
    std::vector<double> h;     // same for h
    std::vector<double> ginv_err;  // agreement between neighbouring steps
    std::vector<double> h_err;
    DerivativeLimits ginv_limits;
    DerivativeLimits h_limits;
    bool ginv_odd_vanish = false;
    bool h_even_vanish = false;
};

// One-sided derivatives at y = tau^- by Richardson-extrapolated polynomial
// stencils with base step 1e-3*tau. Orders up to 4.
BoundaryDerivativeReport boundary_derivative_check(GExponents e, int n);

}  // namespace singprop
