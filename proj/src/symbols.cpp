#include "singprop/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "singprop/error.hpp"
#include "singprop/fft.hpp"
#include "singprop/quadrature.hpp"

namespace singprop {

Weight::Weight(double s) : sigma(s) {
    if (!(s > 0.0)) throw ParameterError("Weight: sigma must be positive");
}

double theta(const Weight& w, PhasePoint z) {
    return 1.0 + std::abs(z.x) + std::pow(std::abs(z.xi), 1.0 / w.sigma);
}

SigmaProjection sigma_project(const Weight& w, PhasePoint z) {
    if (z.x == 0.0 && z.xi == 0.0) throw DomainError("sigma_project: z = 0");
    const double s = w.sigma;
    const double x2 = z.x * z.x, xi2 = z.xi * z.xi;
    // F(mu) = x^2 e^(-2 mu) + xi^2 e^(-2 sigma mu) - 1 is decreasing in mu = log lambda
    double lo = std::log(std::max(std::abs(z.x), std::pow(std::abs(z.xi), 1.0 / s)));
    double hi = lo + std::log(2.0) / std::min(1.0, s);
    double mu = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        const double e1 = x2 * std::exp(-2.0 * mu), e2 = xi2 * std::exp(-2.0 * s * mu);
        const double F = e1 + e2 - 1.0;
        if (F > 0) lo = mu; else hi = mu;
        const double dF = -2.0 * e1 - 2.0 * s * e2;
        double next = mu - F / dF;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - mu) < 1e-15 * std::max(1.0, std::abs(mu)) || hi - lo < 1e-15) {
            mu = next;
            break;
        }
        mu = next;
    }
    const double lambda = std::exp(mu);
    return {{z.x / lambda, z.xi / std::pow(lambda, s)}, lambda};
}

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

double GridSymbol::rho(double x, double xi) const {
    const double u = x / grid.L, v = xi / grid.xi_max();
    return std::pow(std::pow(u, 8) + std::pow(v, 8), 0.125);
}

GridSymbol GridSymbol::sample(const Grid& g, const std::function<std::complex<double>(double, double)>& f,
                              double order, double sigma, bool taper) {
    GridSymbol s;
    s.grid = g;
    s.order = order;
    s.sigma = sigma;
    s.tapered = taper && order > 0;
    s.values.resize(2 * g.n, g.n);
    for (int m = 0; m < 2 * g.n; ++m) {
        for (int l = 0; l < g.n; ++l) {
            double x = s.x(m), xi = s.xi(l);
            if (s.tapered) {
                const double r = s.rho(x, xi);
                if (r > kTaperStart) {
                    const double rc = kTaperStart + 0.05 * std::tanh((r - kTaperStart) / 0.05);
                    x *= rc / r;
                    xi *= rc / r;
                }
            }
            s.values(m, l) = f(x, xi);
        }
    }
    return s;
}

double conic_cutoff_value(const Weight& w, PhasePoint z0, double eps, double delta, double r, PhasePoint z) {
    if (z.x == 0.0 && z.xi == 0.0) return 0.0;
    const double rad = std::hypot(z.x, z.xi);
    const double g = smooth_step((rad / r - 0.5) / 0.5);
    if (g == 0.0) return 0.0;
    const PhasePoint u = sigma_project(w, z).unit;
    const double d = std::hypot(u.x - z0.x, u.xi - z0.xi);
    return g * smooth_step((delta - d) / (delta - eps));
}

GridSymbol conic_cutoff(const Grid& g, const Weight& w, PhasePoint z0, double eps, double delta, double r) {
    if (!(eps > 0.0) || !(eps < delta) || !(delta <= 1.0))
        throw ParameterError("conic_cutoff: need 0 < eps < delta <= 1");
    if (!(r > 0.0)) throw ParameterError("conic_cutoff: r must be positive");
    if (std::abs(std::hypot(z0.x, z0.xi) - 1.0) > 1e-9) throw ParameterError("conic_cutoff: z0 must lie on S^1");
    return GridSymbol::sample(
        g, [&](double x, double xi) { return std::complex<double>(conic_cutoff_value(w, z0, eps, delta, r, {x, xi})); },
        0.0, w.sigma, false);
}

// ---- annular sets

namespace {

std::vector<Interval> normalize(std::vector<Interval> iv) {
    std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) {
        if (a.lo != b.lo) return a.lo < b.lo;
        if (a.lo_open != b.lo_open) return !a.lo_open;
        return a.hi > b.hi;
    });
    std::vector<Interval> out;
    for (const Interval& I : iv) {
        if (out.empty()) {
            out.push_back(I);
            continue;
        }
        Interval& P = out.back();
        const bool ipoint = I.lo == I.hi, ppoint = P.lo == P.hi;
        if (ipoint) {
            if (!P.contains(I.lo)) out.push_back(I);
            continue;
        }
        if (ppoint) {
            if (I.lo == P.lo) {
                P = {I.lo, I.hi, false};  // the point closes the left end
            } else {
                out.push_back(I);
            }
            continue;
        }
        const bool touches = I.lo < P.hi || (I.lo == P.hi && !I.lo_open);
        if (touches) P.hi = std::max(P.hi, I.hi);
        else out.push_back(I);
    }
    return out;
}

}  // namespace

AnnularSet::AnnularSet(std::vector<Interval> iv, int K_, int M_) : K(K_), M(M_) {
    if (K < 1 || M < 1) throw ParameterError("AnnularSet: K and M must be >= 1");
    for (const Interval& I : iv) {
        if (!(I.lo >= 0.0) || !(I.hi >= I.lo)) throw ParameterError("AnnularSet: need 0 <= lo <= hi");
    }
    intervals = normalize(std::move(iv));
}

bool AnnularSet::contains_base(double c) const {
    for (const Interval& I : intervals)
        if (I.contains(c)) return true;
    return false;
}

double AnnularSet::base(PhasePoint z) const { return std::pow(z.x, 2 * K) + std::pow(z.xi, 2 * M); }
bool AnnularSet::contains(PhasePoint z) const { return contains_base(base(z)); }

bool AnnularSet::bounded() const {
    return intervals.empty() || std::isfinite(intervals.back().hi);
}

double AnnularSet::sup() const { return intervals.empty() ? 0.0 : intervals.back().hi; }

std::string AnnularSet::describe() const {
    std::ostringstream os;
    if (intervals.empty()) return "{}";
    for (size_t i = 0; i < intervals.size(); ++i) {
        const Interval& I = intervals[i];
        if (i) os << " u ";
        if (I.lo == I.hi) os << "{" << I.lo << "}";
        else os << (I.lo_open ? "(" : "[") << I.lo << ", " << I.hi << ")";
    }
    return os.str();
}

AnnularSet set_union(const AnnularSet& a, const AnnularSet& b) {
    std::vector<Interval> all = a.intervals;
    all.insert(all.end(), b.intervals.begin(), b.intervals.end());
    return AnnularSet(all, a.K, a.M);
}

AnnularSet set_intersection(const AnnularSet& a, const AnnularSet& b) {
    std::vector<Interval> out;
    for (const Interval& I : a.intervals) {
        for (const Interval& J : b.intervals) {
            if (I.lo == I.hi) {
                if (J.contains(I.lo)) out.push_back(I);
                continue;
            }
            if (J.lo == J.hi) {
                if (I.contains(J.lo)) out.push_back(J);
                continue;
            }
            Interval R;
            if (I.lo > J.lo || (I.lo == J.lo && I.lo_open)) {
                R.lo = I.lo;
                R.lo_open = I.lo_open;
            } else {
                R.lo = J.lo;
                R.lo_open = J.lo_open;
            }
            R.hi = std::min(I.hi, J.hi);
            if (R.lo < R.hi) out.push_back(R);
        }
    }
    return AnnularSet(out, a.K, a.M);
}

AnnularSet complement_above_one(const AnnularSet& a) {
    std::vector<Interval> out;
    double cur = 1.0;
    bool cur_open = true;
    const double inf = std::numeric_limits<double>::infinity();
    for (const Interval& I : a.intervals) {
        if (I.hi <= cur && !(I.lo == I.hi && I.lo > cur)) continue;
        if (I.lo == I.hi) {
            out.push_back({cur, I.lo, cur_open});
            cur = I.lo;
            cur_open = true;
            continue;
        }
        if (I.lo > cur) out.push_back({cur, I.lo, cur_open});
        // the gap after [lo, hi) starts at hi, which is excluded from I
        cur = std::max(cur, I.hi);
        cur_open = false;
        if (!std::isfinite(cur)) break;
    }
    if (std::isfinite(cur)) out.push_back({cur, inf, cur_open});
    return AnnularSet(out, a.K, a.M);
}

AnnularSet enlarge(const AnnularSet& s, double eps) {
    if (!(eps > 0.0)) throw ParameterError("enlarge: eps must be positive");
    std::vector<Interval> out;
    for (const Interval& I : s.intervals) {
        if (I.lo == 0.0 && I.hi == 0.0) {
            out.push_back(I);
            continue;
        }
        out.push_back({(1.0 - eps) * I.lo, (1.0 + eps) * I.hi, true});
    }
    return AnnularSet(out, s.K, s.M);
}

double separation_mu(double eps, double delta, double gamma) {
    if (!(0.0 < eps && eps < gamma && gamma < delta)) throw ParameterError("separation_mu: need 0 < eps < gamma < delta");
    return std::min((delta - gamma) / (1.0 + delta), (gamma - eps) / (1.0 + eps));
}

namespace {

// CDF of the unit-mass bump C exp(-1/(1-4s^2)) on [-1/2, 1/2], tabulated and
// evaluated by cubic Hermite interpolation with the exact density as slope
class BumpCdf {
public:
    BumpCdf() {
        const int N = kN;
        nodes_.resize(N + 1);
        cdf_.resize(N + 1);
        dens_.resize(N + 1);
        double acc = 0.0;
        for (int i = 0; i <= N; ++i) {
            const double s = -0.5 + static_cast<double>(i) / N;
            nodes_[i] = s;
            if (i > 0) acc += integrate_gk(raw, nodes_[i - 1], s, 1e-18, 1e-15).value;
            cdf_[i] = acc;
            dens_[i] = raw(s);
        }
        for (int i = 0; i <= N; ++i) {
            cdf_[i] /= acc;
            dens_[i] /= acc;
        }
        cdf_[N] = 1.0;
    }
    double operator()(double s) const {
        if (s <= -0.5) return 0.0;
        if (s >= 0.5) return 1.0;
        const double h = 1.0 / kN;
        int i = std::min(kN - 1, static_cast<int>((s + 0.5) / h));
        const double t = (s - nodes_[i]) / h;
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        return h00 * cdf_[i] + h10 * h * dens_[i] + h01 * cdf_[i + 1] + h11 * h * dens_[i + 1];
    }

private:
    static constexpr int kN = 4096;
    static double raw(double s) {
        const double u = 1.0 - 4.0 * s * s;
        return u <= 0.0 ? 0.0 : std::exp(-1.0 / u);
    }
    std::vector<double> nodes_, cdf_, dens_;
};

const BumpCdf& bump_cdf() {
    static const BumpCdf table;
    return table;
}

void check_condition(const AnnularSet& s) {
    for (const Interval& I : s.intervals) {
        if (I.lo == 0.0 && I.hi == 0.0) continue;
        const bool clear = I.lo > 1.0 || (I.lo == 1.0 && I.lo_open && I.hi > I.lo);
        if (!clear)
            throw ParameterError("annular_cutoff: base " + s.describe() + " intersects (0,1]");
    }
}

}  // namespace

AnnularProfile::AnnularProfile(const AnnularSet& s, double eps, double delta) {
    if (!(0.0 < eps && eps < delta && delta < 1.0)) throw ParameterError("annular cutoff: need 0 < eps < delta < 1");
    check_condition(s);
    const double gamma = 0.5 * (eps + delta);
    mu_ = separation_mu(eps, delta, gamma);
    inner_ = s.intervals.empty() ? s : enlarge(enlarge(s, eps), mu_);
}

double AnnularProfile::operator()(double c) const {
    if (!(c > 0.0)) return 0.0;
    const BumpCdf& Phi = bump_cdf();
    double g = 0.0;
    for (const Interval& I : inner_.intervals) {
        if (I.lo == I.hi) continue;
        const double a = Phi((c - I.lo) / (mu_ * c));
        const double b = std::isfinite(I.hi) ? Phi((c - I.hi) / (mu_ * c)) : 0.0;
        g += a - b;
    }
    return std::min(1.0, std::max(0.0, g));
}

GridSymbol annular_cutoff(const Grid& g, const AnnularSet& s, double eps, double delta) {
    AnnularProfile prof(s, eps, delta);
    const int K = s.K, M = s.M;
    return GridSymbol::sample(
        g,
        [&](double x, double xi) {
            return std::complex<double>(prof(std::pow(x, 2 * K) + std::pow(xi, 2 * M)));
        },
        0.0, static_cast<double>(K) / M, false);
}

// ---- symbol-class diagnostics

namespace {

// central second-order stencils for derivative orders 0..3
const std::vector<double>& stencil(int order) {
    static const std::vector<double> s0{1.0};
    static const std::vector<double> s1{-0.5, 0.0, 0.5};
    static const std::vector<double> s2{1.0, -2.0, 1.0};
    static const std::vector<double> s3{-0.5, 1.0, 0.0, -1.0, 0.5};
    switch (order) {
        case 0: return s0;
        case 1: return s1;
        case 2: return s2;
        default: return s3;
    }
}

double lattice_derivative(const GridSymbol& a, int m, int l, int alpha, int beta, int stride) {
    const auto& sx = stencil(alpha);
    const auto& sxi = stencil(beta);
    const int hx = static_cast<int>(sx.size()) / 2, hxi = static_cast<int>(sxi.size()) / 2;
    double acc = 0.0;
    for (int i = 0; i < static_cast<int>(sx.size()); ++i) {
        if (sx[i] == 0.0) continue;
        for (int j = 0; j < static_cast<int>(sxi.size()); ++j) {
            if (sxi[j] == 0.0) continue;
            acc += sx[i] * sxi[j] * a.values(m + (i - hx) * stride, l + (j - hxi) * stride).real();
        }
    }
    const double dx = 0.5 * a.grid.dx() * stride, dxi = a.grid.dxi() * stride;
    return acc / (std::pow(dx, alpha) * std::pow(dxi, beta));
}

double fit_slope(const std::vector<double>& lx, const std::vector<double>& ly) {
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

SymbolClassReport symbol_class_estimate(const GridSymbol& a, int max_order, double slack) {
    if (max_order < 0 || max_order > 3) throw ParameterError("symbol_class_estimate: max_order must be in 0..3");
    SymbolClassReport rep;
    rep.slack = slack;
    const Weight w(a.sigma);
    const int margin = 2 * 2 * 2;  // widest stencil half-width (2) at stride 2, doubled for safety
    const int nx = a.n_x(), nxi = a.n_xi();
    auto usable = [&](int m, int l) {
        if (m < margin || m >= nx - margin - 1 || l < margin || l >= nxi - margin) return false;
        if (a.tapered && a.rho(a.x(m), a.xi(l)) >= kTaperStart - 0.02) return false;
        return true;
    };
    // Shells and fits use theta - 1 = |x| + |xi|^(1/sigma). It is comparable to theta
    // on the fitted range and exactly homogeneous under the sigma-dilation, so
    // quasi-homogeneous symbols fit without the bias of the constant.
    auto vt = [&](int m, int l) { return theta(w, {a.x(m), a.xi(l)}) - 1.0; };
    // largest theta such that every lattice point below it is usable
    double theta_lim = std::numeric_limits<double>::infinity();
    for (int m = 0; m < nx; ++m)
        for (int l = 0; l < nxi; ++l)
            if (!usable(m, l)) theta_lim = std::min(theta_lim, vt(m, l));
    int nshell = 0;
    while (std::pow(2.0, nshell + 1) <= theta_lim) ++nshell;
    // fits start at theta - 1 = 4
    constexpr int first_fit = 2;
    if (nshell < first_fit + 3)
        throw NumericError("symbol_class_estimate: grid covers theta < " + std::to_string(theta_lim) +
                           ", fewer than 3 dyadic shells above theta = 5");
    for (int j = 0; j < nshell; ++j) rep.shell_theta.push_back(std::pow(2.0, j + 0.5));  // theta - 1

    double scale = 0.0;
    for (int m = 0; m < nx; ++m)
        for (int l = 0; l < nxi; ++l) scale = std::max(scale, std::abs(a.values(m, l)));

    rep.pass = true;
    for (int order = 0; order <= max_order; ++order) {
        for (int alpha = order; alpha >= 0; --alpha) {
            const int beta = order - alpha;
            std::vector<double> shell_max(nshell, 0.0);
            auto shell_of = [&](int m, int l) {
                const double th = vt(m, l);
                if (th < 1.0 || th >= std::pow(2.0, nshell) || !usable(m, l)) return -1;
                return std::min(nshell - 1, static_cast<int>(std::floor(std::log2(th))));
            };
            for (int m = 0; m < nx; ++m)
                for (int l = 0; l < nxi; ++l) {
                    const int j = shell_of(m, l);
                    if (j >= 0) shell_max[j] = std::max(shell_max[j], std::abs(lattice_derivative(a, m, l, alpha, beta, 1)));
                }
            // stride-1 and stride-2 stencils agree to a fraction of the shell scale
            // unless the lattice under-resolves the symbol
            long checked = 0, disagree = 0;
            if (order > 0) {
                for (int m = 0; m < nx; ++m)
                    for (int l = (7 - m % 7) % 7; l < nxi; l += 7) {
                        const int j = shell_of(m, l);
                        if (j < 0 || !(shell_max[j] > 1e-8 * scale)) continue;
                        const double d1 = lattice_derivative(a, m, l, alpha, beta, 1);
                        const double d2 = lattice_derivative(a, m, l, alpha, beta, 2);
                        ++checked;
                        if (std::abs(d1 - d2) > 0.25 * shell_max[j]) ++disagree;
                    }
            }
            if (checked > 20 && disagree > checked / 10) {
                std::ostringstream os;
                os << "symbol_class_estimate: aliasing detected for (alpha,beta)=(" << alpha << "," << beta
                   << "): stride-1 and stride-2 derivatives disagree at " << disagree << " of " << checked
                   << " points";
                throw NumericError(os.str());
            }
            ClassEntry e;
            e.alpha = alpha;
            e.beta = beta;
            e.bound = a.order - alpha - a.sigma * beta;
            const double top = *std::max_element(shell_max.begin(), shell_max.end());
            if (top <= 1e-12 * std::max(scale, 1e-300)) {
                e.exponent = -std::numeric_limits<double>::infinity();
            } else {
                std::vector<double> lx, ly;
                for (int j = first_fit; j < nshell; ++j) {
                    if (shell_max[j] <= 1e-12 * top) continue;
                    lx.push_back(std::log(rep.shell_theta[j]));
                    ly.push_back(std::log(shell_max[j]));
                }
                e.exponent = lx.size() >= 2 ? fit_slope(lx, ly) : -std::numeric_limits<double>::infinity();
            }
            e.pass = e.exponent <= e.bound + slack;
            rep.pass = rep.pass && e.pass;
            rep.entries.push_back(e);
        }
    }
    return rep;
}

// ---- ellipticity

Region Region::annulus(const AnnularSet& s) {
    Region r;
    r.kind = Kind::annular;
    r.set = s;
    return r;
}

Region Region::cone(PhasePoint z0, double radius) {
    Region r;
    r.kind = Kind::cone;
    r.direction = z0;
    r.cone_radius = radius;
    return r;
}

bool Region::contains(const Weight& w, PhasePoint z) const {
    switch (kind) {
        case Kind::plane: return true;
        case Kind::annular: return set.contains(z);
        case Kind::cone: {
            if (z.x == 0.0 && z.xi == 0.0) return false;
            PhasePoint u = sigma_project(w, z).unit;
            return std::hypot(u.x - direction.x, u.xi - direction.xi) < cone_radius;
        }
    }
    return false;
}

EllipticityReport ellipticity_check(const GridSymbol& a, const Region& region, double r, double floor, double R) {
    const Weight w(a.sigma);
    EllipticityReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    for (int m = 0; m < a.n_x(); ++m) {
        for (int l = 0; l < a.n_xi(); ++l) {
            PhasePoint z{a.x(m), a.xi(l)};
            if (std::hypot(z.x, z.xi) < R) continue;
            if (a.tapered && a.rho(z.x, z.xi) >= kTaperStart) continue;
            if (!region.contains(w, z)) continue;
            const double v = std::abs(a.values(m, l)) * std::pow(theta(w, z), -r);
            ++rep.samples;
            if (v < rep.margin) {
                rep.margin = v;
                rep.worst = z;
            }
        }
    }
    if (rep.samples == 0) throw ParameterError("ellipticity_check: no samples with |z| >= R in the region");
    rep.pass = rep.margin >= floor;
    return rep;
}

EllipticityReport ellipticity_check(const std::function<double(PhasePoint)>& a, const std::vector<PhasePoint>& samples,
                                    const Weight& w, double r, double floor, double R) {
    EllipticityReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    for (const PhasePoint& z : samples) {
        if (std::hypot(z.x, z.xi) < R) continue;
        const double v = std::abs(a(z)) * std::pow(theta(w, z), -r);
        ++rep.samples;
        if (v < rep.margin) {
            rep.margin = v;
            rep.worst = z;
        }
    }
    if (rep.samples == 0) throw ParameterError("ellipticity_check: no samples with |z| >= R");
    rep.pass = rep.margin >= floor;
    return rep;
}

// ---- Weyl quantization

Eigen::MatrixXcd weyl_quantize(const GridSymbol& a, double* pre_defect) {
    const int n = a.n_xi();
    if (!is_power_of_two(n) || !is_power_of_two(a.n_x())) throw ParameterError("weyl_quantize: grid sizes must be powers of two");
    if (a.n_x() != 2 * n) throw ParameterError("weyl_quantize: symbol must be sampled on the (2n) x n midpoint lattice");
    Eigen::MatrixXcd Q(n, n);
    Fft fft(n);
    cplx* buf = fft.data();
    // Q_ij = (dx dxi / 2 pi) sum_l e^{i (x_i - x_j) xi_l} a((x_i + x_j)/2, xi_l)
    //      = (-1)^(i-j) / n * sum_l a_m(l) e^{2 pi i (i-j) l / n},  m = i + j
    for (int m = 0; m <= 2 * n - 2; ++m) {
        for (int l = 0; l < n; ++l) buf[l] = a.values(m, l);
        fft.backward();
        const int i0 = std::max(0, m - n + 1), i1 = std::min(m, n - 1);
        for (int i = i0; i <= i1; ++i) {
            const int j = m - i, d = i - j;
            const cplx v = buf[((d % n) + n) % n] / static_cast<double>(n);
            Q(i, j) = (d % 2 == 0) ? v : -v;
        }
    }
    if (pre_defect) {
        const double top = Q.cwiseAbs().maxCoeff();
        *pre_defect = top > 0 ? (Q - Q.adjoint()).cwiseAbs().maxCoeff() / top : 0.0;
    }
    Eigen::MatrixXcd H = 0.5 * (Q + Q.adjoint());
    return H;
}

}  // namespace singprop
