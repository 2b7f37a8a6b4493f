#include "singprop/special_functions.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "singprop/error.hpp"
#include "singprop/quadrature.hpp"

namespace singprop {

GExponents::GExponents(int k_, int m_) : k(k_), m(m_) {
    if (k < 1 || m < 1) throw ParameterError("GExponents: k and m must be >= 1");
}

double gamma_fn(double x) {
    if (!(x > 0.0)) throw DomainError("gamma_fn: argument must be positive");
    return std::tgamma(x);
}

double beta_fn(double z, double w) {
    if (!(z > 0.0) || !(w > 0.0)) throw DomainError("beta_fn: arguments must be positive");
    return std::exp(std::lgamma(z) + std::lgamma(w) - std::lgamma(z + w));
}

namespace {

// int_0^s t^(z-1)(1-t)^(w-1) dt for s <= 1/2, after t = u^(1/z) which removes
// the t = 0 singularity: (1/z) int_0^(s^z) (1 - u^(1/z))^(w-1) du
double lower_beta(double s, double z, double w) {
    if (s <= 0.0) return 0.0;
    const double upper = std::pow(s, z);
    const double iz = 1.0 / z;
    auto f = [=](double u) { return std::pow(1.0 - std::pow(u, iz), w - 1.0); };
    return integrate_gk(f, 0.0, upper, 1e-17, 2e-15).value / z;
}

// 1 - x^(2k) without cancellation near x = 1
double one_minus_pow(double x, int twok) {
    if (x < 0.5) return 1.0 - std::pow(x, twok);
    double sum = 0.0, p = 1.0;
    for (int j = 0; j < twok; ++j) {
        sum += p;
        p *= x;
    }
    return (1.0 - x) * sum;
}

}  // namespace

double incomplete_beta(double x, double z, double w) {
    if (!(z > 0.0) || !(w > 0.0)) throw DomainError("incomplete_beta: z, w must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return gamma_fn(z) * gamma_fn(w) / gamma_fn(z + w);
    if (x <= 0.5) return lower_beta(x, z, w);
    return gamma_fn(z) * gamma_fn(w) / gamma_fn(z + w) - lower_beta(1.0 - x, w, z);
}

double tau(GExponents e) {
    const double z = 0.5 / e.k, w = 0.5 / e.m;
    return gamma_fn(z) * gamma_fn(w) / (2.0 * e.k * gamma_fn(z + w));
}

double g_km(GExponents e, double x) {
    if (!(std::abs(x) <= 1.0)) throw DomainError("g_km: |x| > 1");
    const double ax = std::abs(x);
    const double s = x < 0 ? -1.0 : 1.0;
    const double z = 0.5 / e.k, w = 0.5 / e.m;
    if (ax == 0.0) return 0.0;
    if (ax == 1.0) return s * tau(e);
    const double X = std::pow(ax, 2 * e.k);
    if (X <= 0.5) return s * incomplete_beta(X, z, w) / (2.0 * e.k);
    // complement: B(X,z,w) = B(1,z,w) - B(1-X,w,z), with 1-X formed accurately
    const double cX = one_minus_pow(ax, 2 * e.k);
    return s * (tau(e) - lower_beta(cX, w, z) / (2.0 * e.k));
}

double g_km_complement(GExponents e, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("g_km_complement: q outside [0,1]");
    const double z = 0.5 / e.k, w = 0.5 / e.m;
    if (q == 1.0) return 0.0;
    if (q < 0.5) return tau(e) - lower_beta(q, w, z) / (2.0 * e.k);
    return incomplete_beta(1.0 - q, z, w) / (2.0 * e.k);
}

double g_km_prime(GExponents e, double x) {
    if (!(std::abs(x) <= 1.0)) throw DomainError("g_km_prime: |x| > 1");
    const double c = one_minus_pow(std::abs(x), 2 * e.k);
    if (c == 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(c, 0.5 / e.m - 1.0);
}

namespace {

// root of g_{k,m}(x) = y for 0 <= y <= tau/2, where g' is bounded by
// g'(x*) with x* < 1; bisection to a coarse bracket, then safeguarded Newton
double inverse_core(GExponents e, double y) {
    if (y == 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60 && hi - lo > 1e-3; ++it) {
        double mid = 0.5 * (lo + hi);
        if (g_km(e, mid) < y) lo = mid; else hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {
        double r = g_km(e, x) - y;
        if (r == 0.0) return x;
        if (r < 0) lo = x; else hi = x;
        double xn = x - r / g_km_prime(e, x);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 2.0 * std::numeric_limits<double>::epsilon() * x) {
            x = xn;
            break;
        }
        x = xn;
    }
    return x;
}

// For |y| in (tau/2, tau] both g^{-1} and h come from the index-swapped
// inverse: h(y) = g_{m,k}^{-1}((k/m)(tau - |y|)), g^{-1}(y) = (1 - h^(2m))^(1/2k).
double swapped_h(GExponents e, double ay) {
    double arg = (static_cast<double>(e.k) / e.m) * (tau(e) - ay);
    if (arg < 0.0) arg = 0.0;
    return inverse_core(e.swapped(), arg);
}

double clamp_to_tau(GExponents e, double y, const char* who) {
    const double t = tau(e);
    const double slack = 1e-12 * std::max(1.0, t);
    if (std::abs(y) > t + slack) throw DomainError(std::string(who) + ": |y| > tau");
    return std::max(-t, std::min(t, y));
}

}  // namespace

double g_inverse(GExponents e, double y) {
    y = clamp_to_tau(e, y, "g_inverse");
    const double t = tau(e), ay = std::abs(y);
    const double s = y < 0 ? -1.0 : 1.0;
    if (ay == t) return s;
    if (ay <= 0.5 * t) return s * inverse_core(e, ay);
    const double Y = swapped_h(e, ay);
    return s * std::pow(one_minus_pow(Y, 2 * e.m), 0.5 / e.k);
}

double h_fn(GExponents e, double y) {
    y = clamp_to_tau(e, y, "h_fn");
    const double t = tau(e), ay = std::abs(y);
    if (ay == t) return 0.0;
    if (ay <= 0.5 * t) return std::pow(one_minus_pow(inverse_core(e, ay), 2 * e.k), 0.5 / e.m);
    return swapped_h(e, ay);
}

namespace {

// Fornberg weights for derivative `order` at 0 from nodes s_j
std::vector<double> fd_weights(const std::vector<double>& s, int order) {
    const int n = static_cast<int>(s.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
    double c1 = 1.0, c4 = s[0];
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, order);
        double c2 = 1.0, c5 = c4;
        c4 = s[i];
        for (int j = 0; j < i; ++j) {
            double c3 = s[i] - s[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][order];
    return w;
}

// q-th derivative at tau from the left of f, Richardson over steps h and h/2
double one_sided_derivative(const std::function<double(double)>& f, double t, double h, int q) {
    const int D = q + 3;
    auto stencil = [&](double step) {
        std::vector<double> s(D + 1);
        for (int j = 0; j <= D; ++j) s[j] = -j * step;
        auto w = fd_weights(s, q);
        double acc = 0.0;
        for (int j = 0; j <= D; ++j) acc += w[j] * f(t + s[j]);
        return acc;
    };
    const double d1 = stencil(h), d2 = stencil(0.5 * h);
    const double p = std::pow(2.0, D + 1 - q);
    return (p * d2 - d1) / (p - 1.0);
}

// Scans steps h*2^j and keeps the estimate whose neighbour agrees best,
// balancing truncation against eps/h^q roundoff.
std::pair<double, double> scanned_derivative(const std::function<double(double)>& f, double t, double h,
                                             int q) {
    std::vector<double> est;
    for (int j = 0; j < 8; ++j) est.push_back(one_sided_derivative(f, t, h * std::pow(2.0, j), q));
    int best = 0;
    double diff = std::abs(est[1] - est[0]);
    for (int j = 1; j + 1 < static_cast<int>(est.size()); ++j) {
        double d = std::abs(est[j + 1] - est[j]);
        if (d < diff) {
            diff = d;
            best = j;
        }
    }
    return {est[best], diff};
}

}  // namespace

BoundaryDerivativeReport boundary_derivative_check(GExponents e, int n) {
    if (n < 1 || n > 4) throw ParameterError("boundary_derivative_check: order must be in 1..4");
    BoundaryDerivativeReport rep;
    const double t = tau(e);
    rep.order = n;
    rep.step = 1e-3 * t;
    rep.tolerance = 1e-6;
    auto ginv = [&](double y) { return g_inverse(e, y); };
    auto hf = [&](double y) { return h_fn(e, y); };
    rep.ginv_odd_vanish = true;
    rep.h_even_vanish = true;
    for (int q = 1; q <= n; ++q) {
        auto [dg, eg] = scanned_derivative(ginv, t, rep.step, q);
        auto [dh, eh] = scanned_derivative(hf, t, rep.step, q);
        rep.ginv.push_back(dg);
        rep.h.push_back(dh);
        rep.ginv_err.push_back(eg);
        rep.h_err.push_back(eh);
        (q % 2 ? rep.ginv_limits.odd : rep.ginv_limits.even).push_back(dg);
        (q % 2 ? rep.h_limits.odd : rep.h_limits.even).push_back(dh);
        if (q % 2) rep.ginv_odd_vanish = rep.ginv_odd_vanish && std::abs(dg) <= std::max(rep.tolerance, 4 * eg);
        else rep.h_even_vanish = rep.h_even_vanish && std::abs(dh) <= std::max(rep.tolerance, 4 * eh);
    }
    return rep;
}

}  // namespace singprop
