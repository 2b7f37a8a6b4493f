#pragma once

#include <vector>

#include <Eigen/Dense>

#include "singprop/grid.hpp"
#include "singprop/hamilton_flow.hpp"
#include "singprop/spectral.hpp"
#include "singprop/symbols.hpp"

namespace singprop {

// Window samples phi(d dx) at minimum-image offsets d = 0..n-1, so that
// phi(y_k - x_i) = w[(k - i) mod n] on the periodic grid.
Eigen::VectorXcd gaussian_window(const Grid& g, double width = 1.0);

// V(x_i, xi_l) = (2 pi)^-1/2 sum_k u_k conj(phi(y_k - x_i)) e^{-i y_k xi_l} dx
struct StftField {
    Grid grid;
    Eigen::MatrixXcd values;  // rows x_i, columns xi_l
    Eigen::VectorXcd window;
    double sigma = 1.0;
    double moyal_defect = 0.0;

    double x(int i) const { return grid.x(i); }
    double xi(int l) const { return grid.xi(l); }
    double energy() const;  // sum |V|^2 dx dxi
};

StftField stft(const StateVector& u, const Eigen::VectorXcd& window, double sigma = 1.0);
StftField stft(const StateVector& u, double sigma = 1.0);  // unit-norm Gaussian window
StateVector reconstruct(const StftField& V);

struct ModulationNorm {
    double value = 0.0;
    bool lower_bound = false;  // |V| had not decayed at the grid boundary
};

ModulationNorm modulation_norm_stft(const StftField& V, double s, int K, int M);

struct WavefrontOptions {
    int directions = 64;
    double lambda_min = 2.0;
    double lambda_max = 16.0;
    int lambda_bins = 12;
    double radius = 0.1;
    double n_thr = 5.0;
    double floor = 1e-12;  // relative to max|V|; values below are treated as decayed
};

struct WavefrontRecord {
    PhasePoint direction;  // on the unit circle
    double angle = 0.0;
    double radius = 0.1;
    double exponent = 0.0;
    double residual = 0.0;
    double dynamic_range = 0.0;
    int bins_used = 0;
    bool decayed_to_floor = false;
    bool low_confidence = false;
    bool in_wavefront = false;
};

struct WavefrontReport {
    std::vector<WavefrontRecord> records;
    std::vector<double> lambdas;  // bin centres
};

// evenly spaced unit directions, the first at angle 0
std::vector<PhasePoint> direction_mesh(int n);

// probes may be arbitrary nonzero points; each is sigma-projected to S^1
WavefrontReport wavefront_indicator(const StftField& V, const std::vector<PhasePoint>& probes,
                                    const WavefrontOptions& opt = {});
WavefrontReport wavefront_indicator(const StftField& V, const WavefrontOptions& opt = {});

std::vector<double> annular_mass_profile(const StftField& V, int K, int M, const std::vector<AnnularSet>& shells);

struct FilterOptions {
    double decay_order = 5.0;   // N
    double theta_min = 4.0;     // first analysed dyadic shell
    double theta_max = 32.0;    // analysis stops below this theta
    double floor = 1e-12;       // relative to max|V| of the unfiltered state
};

struct FilterEvidence {
    bool member = false;
    double exponent = 0.0;     // fitted slope of log max|V| vs log theta
    double residual = 0.0;
    bool decayed_to_floor = false;
    std::vector<double> shell_theta;
    std::vector<double> shell_max;
    AnnularSet complement;     // (1, inf) minus Sigma
};

// Sigma in F(u): q^w u decays like theta^-N on dyadic shells, where q is the
// annular cutoff of the complement region
FilterEvidence filter_membership(const StateVector& u, const AnnularSet& sigma_set, double eps, double delta,
                                 const FilterOptions& opt = {});

}  // namespace singprop
