#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "singprop/fft.hpp"
#include "singprop/grid.hpp"

namespace singprop {

struct StateVector {
    Grid grid;
    Eigen::VectorXcd values;

    StateVector() = default;
    StateVector(const Grid& g, Eigen::VectorXcd v);
    static StateVector zeros(const Grid& g);
    static StateVector from_function(const Grid& g, const std::function<cplx(double)>& f);

    double norm() const;  // discrete L2 norm with weight dx
    // energy fraction outside |x| < L/2
    double outer_energy_fraction() const;
    // throws ResolutionError when the outer fraction exceeds tol
    void require_inner_support(double tol = 1e-6) const;
};

double l2_distance(const StateVector& a, const StateVector& b);

// Weyl-symbol monomial coeff * x^beta * xi^alpha
struct PolyTerm {
    int alpha = 0;  // power of xi (derivative order)
    int beta = 0;   // power of x
    double coeff = 0.0;
};

// Grid matrix of sum c x^beta D^alpha. With include_standard the terms
// x^(2K) and xi^(2M) (coefficient 1) are added to `extra`. Pure powers are
// applied exactly (diagonal / Fourier multiplier), mixed terms through
// weyl_quantize. The quasi-homogeneous principal part must be elliptic.
Eigen::MatrixXcd build_operator(const Grid& g, int K, int M, const std::vector<PolyTerm>& extra = {},
                                bool include_standard = true);

// Grid with n points and L placing the turning point of the largest retained
// eigenvalue at 0.6 L.
Grid default_grid(int K, int M, int n = 512);
// Nyquist-safe retention cap 0.5 (0.5 pi/dx)^(2M)
double default_retention_cap(const Grid& g, int M);

struct SpectralBasis {
    Grid grid;
    Eigen::VectorXd lambdas;  // all n eigenvalues, ascending
    Eigen::MatrixXcd modes;   // columns, discrete-L2 normalized
    int n_kept = 0;           // modes 0..n_kept-1 are retained
    double retention_cap = 0.0;
    int diffop_k = 2, diffop_m = 2;
    double orthonormality_defect = 0.0;
    bool real_modes = false;
};

// Dense Hermitian eigensolve (LAPACK). retention_cap <= 0 selects the default.
SpectralBasis eigendecompose(const Eigen::MatrixXcd& A, const Grid& g, int K, int M, double retention_cap = -1.0);

// c_j = (u, phi_j) for all modes
Eigen::VectorXcd coefficients(const SpectralBasis& b, const StateVector& u);
StateVector synthesize(const SpectralBasis& b, const Eigen::VectorXcd& c);  // sum over retained modes
// number of leading modes needed to hold all but tail_tol of the energy
int required_modes(const SpectralBasis& b, const Eigen::VectorXcd& c, double tail_tol);
// relative energy outside the retained modes
double tail_fraction(const SpectralBasis& b, const Eigen::VectorXcd& c);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

// slope of log lambda_j vs log j for 1-based j in [j_lo, j_hi]
FitResult asymptotics_fit(const SpectralBasis& b, int j_lo, int j_hi);

StateVector propagate(const SpectralBasis& b, const StateVector& u0, double t, double tail_tol = 1e-8);

// f sampled at tau_k = k dt, k = 0..N, with N dt >= t
struct SourceSamples {
    double dt = 0.0;
    std::vector<StateVector> samples;
};

StateVector propagate_duhamel(const SpectralBasis& b, const StateVector& u0, const SourceSamples& f, double t,
                              double tail_tol = 1e-8);

double modulation_norm_spectral(const SpectralBasis& b, const StateVector& u, double s, double tail_tol = 1e-8);

struct DecayModel {
    enum class Kind { polynomial, gelfand_shilov } kind = Kind::polynomial;
    double rho = 1.0;
    static DecayModel polynomial() { return {}; }
    static DecayModel gelfand_shilov(double rho) { return {Kind::gelfand_shilov, rho}; }
};

struct DecayFitReport {
    DecayModel model;
    bool saturated = false;  // fewer than 30 coefficients above the floor
    int used = 0;
    double parameter = 0.0;  // s (polynomial) or alpha (Gelfand-Shilov)
    double intercept = 0.0;
    double residual_rms = 0.0;
    // polynomial model: s on the upper half of the window minus s on the lower half
    double window_growth = 0.0;
};

DecayFitReport coefficient_decay_fit(const SpectralBasis& b, const StateVector& u, const DecayModel& model,
                                     double noise_floor = 1e-14);

// Hermitian eigendecomposition helpers (LAPACK dsyevd / zheevd)
void eigh(const Eigen::MatrixXd& A, Eigen::VectorXd& w, Eigen::MatrixXd& V);
void eigh(const Eigen::MatrixXcd& A, Eigen::VectorXd& w, Eigen::MatrixXcd& V);

}  // namespace singprop
