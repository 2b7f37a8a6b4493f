#include "singprop/hamilton_flow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "singprop/error.hpp"
#include "singprop/special_functions.hpp"

namespace singprop {

OscParams::OscParams(int K_, int M_, double p_, double cutoff_delta_)
    : K(K_), M(M_), p(p_), cutoff_delta(cutoff_delta_) {
    if (K < 1 || M < 1) throw ParameterError("OscParams: K and M must be >= 1");
    if (p == 0.0 || !std::isfinite(p)) throw ParameterError("OscParams: p must be finite and nonzero");
    if (!(cutoff_delta > 0.0)) throw ParameterError("OscParams: cutoff_delta must be positive");
    sigma = static_cast<double>(K) / M;
    p_crit = 0.5 * (1.0 / K + 1.0 / M);
}

bool OscParams::integer_p() const { return p > 0 && std::floor(p) == p; }

double critical_exponent(const OscParams& params) { return 0.5 * (1.0 / params.K + 1.0 / params.M); }

namespace {

// exponent of c in the angular speed omega = 2 M |p| c^e
double speed_exponent(const OscParams& P) { return std::abs(P.p) - 0.5 / P.M - 0.5 / P.K; }

double base_c(const OscParams& P, PhasePoint z) {
    return std::pow(z.x, 2 * P.K) + std::pow(z.xi, 2 * P.M);
}

double sgn(double v) { return v < 0 ? -1.0 : 1.0; }

// g(|u| c^(-1/2k)) for the orbit through a point with coordinate u, where
// q = 1 - u^(2k)/c is the other coordinate's share of c. Whichever of the
// two is small is the accurate input.
double initial_phase(GExponents e, double u, double q, double c) {
    if (q < 0.5) return g_km_complement(e, q);
    return g_km(e, std::min(1.0, std::abs(u) * std::pow(c, -0.5 / e.k)));
}

// phase reduced into [-q, 3q) where q is the quarter period in phase units
double reduce_phase(double phi, double q) {
    double n = std::floor((phi + q) / (4.0 * q));
    double r = phi - 4.0 * q * n;
    if (r < -q) r = -q;
    if (r >= 3.0 * q) r -= 4.0 * q;
    return r;
}

PhasePoint eta_branch(const OscParams& P, double t, PhasePoint z, double c) {
    const GExponents e(P.K, P.M);
    const double ta = tau(e);
    const double s = sgn(z.xi);
    // theta0 = g(s y c^(-1/2K)); the complement 1 - y^(2K)/c equals eta^(2M)/c exactly
    const double q = std::min(1.0, std::pow(z.xi, 2 * P.M) / c);
    const double theta0 = sgn(s * z.x) * initial_phase(e, z.x, q, c);
    const double omega = 2.0 * P.M * std::abs(P.p) * std::pow(c, speed_exponent(P));
    const double teff = P.p > 0 ? t : -t;
    const double phi = reduce_phase(omega * teff + theta0, ta);
    const double cx = std::pow(c, 0.5 / P.K), cxi = std::pow(c, 0.5 / P.M);
    if (phi <= ta) return {s * cx * g_inverse(e, phi), s * cxi * h_fn(e, phi)};
    const double psi = 2.0 * ta - phi;
    return {s * cx * g_inverse(e, psi), -s * cxi * h_fn(e, psi)};
}

PhasePoint y_branch(const OscParams& P, double t, PhasePoint z, double c) {
    const GExponents e(P.M, P.K);  // functions g_{M,K}, h_{M,K}
    const double ta = tau(e);
    const double s = sgn(z.x);
    const double q = std::min(1.0, std::pow(z.x, 2 * P.K) / c);
    const double theta0 = sgn(s * z.xi) * initial_phase(e, z.xi, q, c);
    const double omega = 2.0 * P.K * std::abs(P.p) * std::pow(c, speed_exponent(P));
    const double teff = P.p > 0 ? t : -t;
    const double psi = reduce_phase(omega * teff - theta0, ta);
    const double cx = std::pow(c, 0.5 / P.K), cxi = std::pow(c, 0.5 / P.M);
    if (psi <= ta) return {s * cx * h_fn(e, psi), -s * cxi * g_inverse(e, psi)};
    const double r = 2.0 * ta - psi;
    return {-s * cx * h_fn(e, r), -s * cxi * g_inverse(e, r)};
}

}  // namespace

double period(const OscParams& P, double c) {
    if (!(c > 0.0)) throw DomainError("period: c must be positive");
    if (P.p <= 0.0) throw ParameterError("period: only defined here for p > 0; use flow for reverse time");
    const double ta = tau(GExponents(P.K, P.M));
    return 2.0 * ta / (P.M * P.p) * std::pow(c, 0.5 / P.M + 0.5 / P.K - P.p);
}

FlowSegment flow_segment(const OscParams& P, PhasePoint z) {
    FlowSegment seg;
    seg.c = base_c(P, z);
    if (!(seg.c > 0.0)) throw DomainError("flow_segment: origin has no orbit");
    const double scale = std::pow(seg.c, 0.5 / P.M + 0.5 / P.K - std::abs(P.p));
    seg.branch = z.xi != 0.0 ? Branch::eta : Branch::y;
    if (z.xi != 0.0) {
        const GExponents e(P.K, P.M);
        const double q = std::min(1.0, std::pow(z.xi, 2 * P.M) / seg.c);
        const double theta0 = sgn(sgn(z.xi) * z.x) * initial_phase(e, z.x, q, seg.c);
        const double ta = tau(e);
        seg.T1 = scale * (-ta - theta0) / (2.0 * P.M * std::abs(P.p));
        seg.T2 = scale * (ta - theta0) / (2.0 * P.M * std::abs(P.p));
        seg.period_T = 2.0 * (seg.T2 - seg.T1);
    }
    if (z.x != 0.0) {
        const GExponents e(P.M, P.K);
        const double q = std::min(1.0, std::pow(z.x, 2 * P.K) / seg.c);
        const double theta0 = sgn(sgn(z.x) * z.xi) * initial_phase(e, z.xi, q, seg.c);
        const double ta = tau(e);
        seg.T3 = scale * (-ta + theta0) / (2.0 * P.K * std::abs(P.p));
        seg.T4 = scale * (ta + theta0) / (2.0 * P.K * std::abs(P.p));
        if (z.xi == 0.0) seg.period_T = 2.0 * (seg.T4 - seg.T3);
    }
    return seg;
}

PhasePoint flow_branch(const OscParams& P, double t, PhasePoint z, Branch branch) {
    const double c = base_c(P, z);
    if (c == 0.0) return {0.0, 0.0};
    if (branch == Branch::eta) {
        if (z.xi == 0.0) throw DomainError("flow_branch: eta-branch needs eta != 0");
        return eta_branch(P, t, z, c);
    }
    if (z.x == 0.0) throw DomainError("flow_branch: y-branch needs y != 0");
    return y_branch(P, t, z, c);
}

PhasePoint flow(const OscParams& P, double t, PhasePoint z) {
    if (z.x == 0.0 && z.xi == 0.0) return z;
    if (t == 0.0) return z;
    return flow_branch(P, t, z, z.xi != 0.0 ? Branch::eta : Branch::y);
}

double cutoff_psi(double delta, PhasePoint z) {
    const double r2 = z.x * z.x + z.xi * z.xi;
    const double lo = 0.25 * delta * delta, hi = delta * delta;
    if (r2 <= lo) return 0.0;
    if (r2 >= hi) return 1.0;
    const double u = (r2 - lo) / (hi - lo);
    const double f0 = std::exp(-1.0 / u), f1 = std::exp(-1.0 / (1.0 - u));
    return f0 / (f0 + f1);
}

double symbol_value(const OscParams& P, PhasePoint z) {
    const double c = base_c(P, z);
    if (P.integer_p()) return std::pow(c, P.p);
    const double psi = cutoff_psi(P.cutoff_delta, z);
    return psi == 0.0 ? 0.0 : psi * std::pow(c, P.p);
}

double scaling_commutation_defect(const OscParams& P, double t, PhasePoint z, double lambda) {
    if (!(lambda > 0.0)) throw ParameterError("scaling_commutation_defect: lambda must be positive");
    const double ls = std::pow(lambda, P.sigma);
    PhasePoint a = flow(P, t, {lambda * z.x, ls * z.xi});
    PhasePoint b = flow(P, t, z);
    b.x *= lambda;
    b.xi *= ls;
    return std::max(std::abs(a.x - b.x), std::pow(std::abs(a.xi - b.xi), 1.0 / P.sigma));
}

namespace {

double theta_of(double sigma, PhasePoint z) {
    return 1.0 + std::abs(z.x) + std::pow(std::abs(z.xi), 1.0 / sigma);
}

double slope_fit(const std::vector<double>& lx, const std::vector<double>& ly) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

DerivativeGrowthReport flow_derivative_growth(const OscParams& P, double t, const std::vector<PhasePoint>& samples,
                                              int alpha, int beta) {
    if (alpha < 0 || beta < 0 || alpha + beta > 2)
        throw ParameterError("flow_derivative_growth: orders must satisfy alpha+beta <= 2");
    DerivativeGrowthReport rep;
    rep.alpha = alpha;
    rep.beta = beta;
    const double grow = 2.0 * P.K * std::max(P.p - P.p_crit, 0.0) * (alpha + beta);
    rep.x_bound = grow + 1.0 - alpha - P.sigma * beta;
    rep.xi_bound = grow + P.sigma - alpha - P.sigma * beta;

    auto comp = [&](PhasePoint z) {
        PhasePoint w = flow(P, t, z);
        const double psi = cutoff_psi(P.cutoff_delta, z);
        return PhasePoint{psi * w.x, psi * w.xi};
    };
    // shell index -> running maxima
    std::map<int, std::pair<double, double>> shells;
    double tmin = 1e300, tmax = 0;
    for (const PhasePoint& z : samples) {
        const double th = theta_of(P.sigma, z);
        const double hy = 1e-4 * std::max(1.0, std::abs(z.x));
        const double he = 1e-4 * std::max(1.0, std::abs(z.xi));
        PhasePoint d{};
        auto at = [&](int i, int j) { return comp({z.x + i * hy, z.xi + j * he}); };
        if (alpha == 0 && beta == 0) {
            d = comp(z);
        } else if (alpha + beta == 1) {
            PhasePoint p1 = alpha ? at(1, 0) : at(0, 1), m1 = alpha ? at(-1, 0) : at(0, -1);
            const double h = alpha ? hy : he;
            d = {(p1.x - m1.x) / (2 * h), (p1.xi - m1.xi) / (2 * h)};
        } else if (alpha == 2 || beta == 2) {
            PhasePoint p1 = alpha ? at(1, 0) : at(0, 1), m1 = alpha ? at(-1, 0) : at(0, -1), c0 = comp(z);
            const double h = alpha ? hy : he;
            d = {(p1.x - 2 * c0.x + m1.x) / (h * h), (p1.xi - 2 * c0.xi + m1.xi) / (h * h)};
        } else {
            PhasePoint pp = at(1, 1), pm = at(1, -1), mp = at(-1, 1), mm = at(-1, -1);
            d = {(pp.x - pm.x - mp.x + mm.x) / (4 * hy * he), (pp.xi - pm.xi - mp.xi + mm.xi) / (4 * hy * he)};
        }
        const int idx = static_cast<int>(std::floor(std::log2(th)));
        auto& slot = shells[idx];
        slot.first = std::max(slot.first, std::abs(d.x));
        slot.second = std::max(slot.second, std::abs(d.xi));
        tmin = std::min(tmin, th);
        tmax = std::max(tmax, th);
    }
    rep.decades = std::log10(tmax / tmin);
    if (rep.decades < 2.0 || shells.size() < 3)
        throw NumericError("flow_derivative_growth: samples span " + std::to_string(rep.decades) +
                           " decades of theta, need >= 2");
    std::vector<double> lx, ly1, ly2;
    for (auto& [idx, v] : shells) {
        const double th = std::pow(2.0, idx + 0.5);
        rep.theta.push_back(th);
        rep.x_mag.push_back(v.first);
        rep.xi_mag.push_back(v.second);
        if (v.first > 0 && v.second > 0) {
            lx.push_back(std::log(th));
            ly1.push_back(std::log(v.first));
            ly2.push_back(std::log(v.second));
        }
    }
    if (lx.size() < 3) throw NumericError("flow_derivative_growth: derivative vanishes on most shells");
    rep.x_exponent = slope_fit(lx, ly1);
    rep.xi_exponent = slope_fit(lx, ly2);
    return rep;
}

}  // namespace singprop
