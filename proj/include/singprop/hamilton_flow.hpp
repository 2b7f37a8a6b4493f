#pragma once

#include <vector>

namespace singprop {

// Exponents of a(x,xi) = (x^(2K) + xi^(2M))^p
struct OscParams {
    int K = 1;
    int M = 1;
    double p = 1.0;
    double sigma = 1.0;
    double p_crit = 1.0;
    double cutoff_delta = 0.5;

    OscParams() = default;
    OscParams(int K_, int M_, double p_, double cutoff_delta_ = 0.5);
    bool integer_p() const;
};

struct PhasePoint {
    double x = 0.0;
    double xi = 0.0;
};

enum class Branch { eta, y };

struct FlowSegment {
    Branch branch = Branch::eta;
    double T1 = 0, T2 = 0, T3 = 0, T4 = 0;
    double period_T = 0;
    double c = 0;
};

double critical_exponent(const OscParams& params);

// Period of the orbit on {x^(2K) + xi^(2M) = c}; requires p > 0.
double period(const OscParams& params, double c);

// Segment data for z0; T3/T4 are filled only when y != 0, T1/T2 only when eta != 0.
FlowSegment flow_segment(const OscParams& params, PhasePoint z0);

// chi_t(z0). Uses the eta-branch whenever eta != 0.
PhasePoint flow(const OscParams& params, double t, PhasePoint z0);
// Evaluation through a chosen branch, for cross-checking.
PhasePoint flow_branch(const OscParams& params, double t, PhasePoint z0, Branch branch);

// Smooth cutoff psi_delta(z) = chi(x^2 + xi^2), 0 below delta^2/4, 1 above delta^2.
double cutoff_psi(double delta, PhasePoint z);
// a(z), multiplied by psi_delta when p is not an integer
double symbol_value(const OscParams& params, PhasePoint z);

// |chi_t(L z) - L chi_t(z)| with L the sigma-dilation, measured as
// max(|dx|, |dxi|^(1/sigma)).
double scaling_commutation_defect(const OscParams& params, double t, PhasePoint z0, double lambda);

struct DerivativeGrowthReport {
    int alpha = 0, beta = 0;
    std::vector<double> theta;   // shell representative theta_sigma
    std::vector<double> x_mag;   // max |d^alpha_y d^beta_eta (psi x)| over the shell
    std::vector<double> xi_mag;
    double x_exponent = 0, xi_exponent = 0;  // fitted log-log slopes
    double x_bound = 0, xi_bound = 0;        // exponents allowed by the growth estimate
    double decades = 0;
};

// Finite-difference derivatives of psi_delta * chi_t with respect to the
// initial point, grouped into dyadic theta_sigma shells and fitted in log-log.
DerivativeGrowthReport flow_derivative_growth(const OscParams& params, double t,
                                              const std::vector<PhasePoint>& samples, int alpha, int beta);

}  // namespace singprop
