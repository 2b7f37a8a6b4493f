#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "singprop/grid.hpp"
#include "singprop/hamilton_flow.hpp"

namespace singprop {

struct Weight {
    double sigma = 1.0;
    explicit Weight(double s = 1.0);
};

// theta_sigma(x, xi) = 1 + |x| + |xi|^(1/sigma)
double theta(const Weight& w, PhasePoint z);

struct SigmaProjection {
    PhasePoint unit;  // (x/lambda, xi/lambda^sigma), on the unit circle
    double lambda = 1.0;
};

// Solves lambda^-2 x^2 + lambda^(-2 sigma) xi^2 = 1.
SigmaProjection sigma_project(const Weight& w, PhasePoint z);

// Symbol samples on the Weyl lattice of a state grid: row m sits at the
// midpoint x = -L + m dx/2 (m = 0..2n-1), column l at xi_l. The same lattice
// feeds weyl_quantize and the derivative diagnostics.
struct GridSymbol {
    Grid grid;
    Eigen::MatrixXcd values;  // (2n) x n
    double order = 0.0;       // claimed r
    double sigma = 1.0;
    bool tapered = false;

    int n_x() const { return static_cast<int>(values.rows()); }
    int n_xi() const { return static_cast<int>(values.cols()); }
    double x(int m) const { return -grid.L + 0.5 * m * grid.dx(); }
    double xi(int l) const { return grid.xi(l); }

    // radial taper coordinate rho = ((x/L)^8 + (xi/xi_max)^8)^(1/8)
    double rho(double x, double xi) const;

    // samples f; for order > 0 and taper = true the argument is compressed
    // radially beyond rho = 0.9 so values saturate near the grid edge
    static GridSymbol sample(const Grid& g, const std::function<std::complex<double>(double, double)>& f,
                             double order, double sigma, bool taper);
};

constexpr double kTaperStart = 0.9;

// sigma-conic cutoff q(z) = g(|z|/r) phi(pi_sigma(z)) around the unit direction z0
double conic_cutoff_value(const Weight& w, PhasePoint z0, double eps, double delta, double r, PhasePoint z);
GridSymbol conic_cutoff(const Grid& g, const Weight& w, PhasePoint z0, double eps, double delta, double r);

// [lo, hi) when lo < hi, or (lo, hi) with lo_open; the single point {lo}
// when lo == hi; hi may be +inf
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_open = false;
    bool contains(double c) const {
        if (lo == hi) return c == lo;
        return (lo_open ? c > lo : c >= lo) && c < hi;
    }
};

struct AnnularSet {
    std::vector<Interval> intervals;
    int K = 1, M = 1;

    AnnularSet() = default;
    AnnularSet(std::vector<Interval> iv, int K_, int M_);  // sorts, merges, validates
    bool contains_base(double c) const;
    bool contains(PhasePoint z) const;  // the lift: x^(2K) + xi^(2M) in the base
    double base(PhasePoint z) const;
    bool bounded() const;
    double sup() const;
    std::string describe() const;
};

AnnularSet set_union(const AnnularSet& a, const AnnularSet& b);
AnnularSet set_intersection(const AnnularSet& a, const AnnularSet& b);
// (1, inf) minus the base; the complement region used by the filter tests
AnnularSet complement_above_one(const AnnularSet& a);

// Sigma_eps = union of balls B_{eps |y|}(y): [a,b) -> ((1-eps)a, (1+eps)b), merged
AnnularSet enlarge(const AnnularSet& s, double eps);

// relative separation radius for 0 < eps < gamma < delta
double separation_mu(double eps, double delta, double gamma);

// the mollified indicator g_{eps,delta} on the base half-line
class AnnularProfile {
public:
    AnnularProfile(const AnnularSet& s, double eps, double delta);
    double operator()(double c) const;
    double mu() const { return mu_; }
    const AnnularSet& mollified_set() const { return inner_; }

private:
    AnnularSet inner_;  // (Sigma_eps)_mu
    double mu_;
};

GridSymbol annular_cutoff(const Grid& g, const AnnularSet& s, double eps, double delta);

struct ClassEntry {
    int alpha = 0, beta = 0;
    double exponent = 0.0;  // fitted; -inf when the derivative vanishes identically
    double bound = 0.0;     // r - alpha - sigma beta
    bool pass = false;
};

struct SymbolClassReport {
    std::vector<ClassEntry> entries;
    std::vector<double> shell_theta;
    double slack = 0.15;
    bool pass = false;
};

SymbolClassReport symbol_class_estimate(const GridSymbol& a, int max_order, double slack = 0.15);

struct Region {
    enum class Kind { plane, annular, cone } kind = Kind::plane;
    AnnularSet set;        // annular
    PhasePoint direction;  // cone axis on the unit circle
    double cone_radius = 0.1;
    static Region plane() { return {}; }
    static Region annulus(const AnnularSet& s);
    static Region cone(PhasePoint z0, double radius);
    bool contains(const Weight& w, PhasePoint z) const;
};

struct EllipticityReport {
    double margin = 0.0;
    PhasePoint worst;  // sample where the margin is attained
    long samples = 0;
    bool pass = false;
};

// margin = inf |a| theta^-r over lattice samples in the region with |z| >= R,
// outside the taper zone
EllipticityReport ellipticity_check(const GridSymbol& a, const Region& region, double r, double floor,
                                    double R = 4.0);
EllipticityReport ellipticity_check(const std::function<double(PhasePoint)>& a, const std::vector<PhasePoint>& samples,
                                    const Weight& w, double r, double floor, double R = 4.0);

// (n x n) Weyl quantization matrix acting on grid values; pre_defect receives
// max|Q - Q^H| / max|Q| before symmetrization
Eigen::MatrixXcd weyl_quantize(const GridSymbol& a, double* pre_defect = nullptr);

// smooth 0 -> 1 transition on [0,1], C-infinity
double smooth_step(double u);

}  // namespace singprop
