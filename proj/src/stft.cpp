#include "singprop/stft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "singprop/error.hpp"
#include "singprop/fft.hpp"

namespace singprop {

namespace {

double window_norm(const Grid& g, const Eigen::VectorXcd& w) { return std::sqrt(w.squaredNorm() * g.dx()); }

void check_window(const Grid& g, const Eigen::VectorXcd& w) {
    if (w.size() != g.n) throw ParameterError("stft: window length does not match grid");
    const double nrm = window_norm(g, w);
    if (std::abs(nrm - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "stft: window norm " << nrm << " differs from 1";
        throw ParameterError(os.str());
    }
}

double parity(int k) { return (k % 2) ? -1.0 : 1.0; }

}  // namespace

Eigen::VectorXcd gaussian_window(const Grid& g, double width) {
    if (!(width > 0.0)) throw ParameterError("gaussian_window: width must be positive");
    Eigen::VectorXcd w(g.n);
    for (int d = 0; d < g.n; ++d) {
        const int dm = d <= g.n / 2 ? d : d - g.n;
        const double y = dm * g.dx() / width;
        w[d] = std::exp(-0.5 * y * y);
    }
    // normalized on the grid; matches pi^-1/4 width^-1/2 up to quadrature error
    w /= window_norm(g, w);
    return w;
}

double StftField::energy() const { return values.squaredNorm() * grid.dx() * grid.dxi(); }

StftField stft(const StateVector& u, const Eigen::VectorXcd& window, double sigma) {
    const Grid& g = u.grid;
    check_window(g, window);
    const int n = g.n;
    StftField V;
    V.grid = g;
    V.window = window;
    V.sigma = sigma;
    V.values.resize(n, n);
    Fft fft(n);
    const double c = g.dx() / std::sqrt(2.0 * M_PI);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) fft.data()[k] = parity(k) * u.values[k] * std::conj(window[((k - i) % n + n) % n]);
        fft.forward();
        for (int l = 0; l < n; ++l) V.values(i, l) = c * parity(l - n / 2) * fft.data()[l];
    }
    const double un = u.values.squaredNorm() * g.dx();
    V.moyal_defect = un > 0.0 ? std::abs(V.energy() - un) / un : std::abs(V.energy());
    return V;
}

StftField stft(const StateVector& u, double sigma) { return stft(u, gaussian_window(u.grid, 1.0), sigma); }

StateVector reconstruct(const StftField& V) {
    const Grid& g = V.grid;
    const int n = g.n;
    if (V.values.rows() != n || V.values.cols() != n || V.window.size() != n)
        throw ParameterError("reconstruct: field does not match its grid");
    Fft fft(n);
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
    const double c = g.dx() * g.dxi() / std::sqrt(2.0 * M_PI);
    for (int i = 0; i < n; ++i) {
        for (int l = 0; l < n; ++l) fft.data()[l] = parity(l - n / 2) * V.values(i, l);
        fft.backward();
        for (int k = 0; k < n; ++k) u[k] += c * parity(k) * fft.data()[k] * V.window[((k - i) % n + n) % n];
    }
    return StateVector(g, u);
}

ModulationNorm modulation_norm_stft(const StftField& V, double s, int K, int M) {
    const Grid& g = V.grid;
    const Weight w(static_cast<double>(K) / M);
    const int n = g.n;
    double acc = 0.0, peak = 0.0, edge = 0.0;
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) {
            const double a = std::abs(V.values(i, l));
            peak = std::max(peak, a);
            if (i == 0 || l == 0 || i == n - 1 || l == n - 1) edge = std::max(edge, a);
            const double th = s == 0.0 ? 1.0 : std::pow(theta(w, {g.x(i), g.xi(l)}), s);
            acc += a * a * th * th;
        }
    ModulationNorm r;
    r.value = std::sqrt(acc * g.dx() * g.dxi());
    r.lower_bound = s > 0.0 && edge > 1e-10 * peak;
    return r;
}

std::vector<PhasePoint> direction_mesh(int n) {
    if (n < 4) throw ParameterError("direction_mesh: need at least 4 directions");
    std::vector<PhasePoint> d(n);
    for (int j = 0; j < n; ++j) d[j] = {std::cos(2 * M_PI * j / n), std::sin(2 * M_PI * j / n)};
    return d;
}

namespace {

FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    FitResult f;
    const double den = n * sxx - sx * sx;
    f.slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    f.intercept = (sy - f.slope * sx) / n;
    double r2 = 0;
    for (size_t i = 0; i < x.size(); ++i) r2 += std::pow(y[i] - f.intercept - f.slope * x[i], 2);
    f.residual_rms = std::sqrt(r2 / n);
    return f;
}

// Decay fit of a binned sup profile. Bins past the first one below the floor
// are dropped; when the floor is reached the slope is bounded by the line to it.
struct ProfileFit {
    double exponent = 0.0, residual = 0.0, dynamic_range = 0.0;
    int used = 0;
    bool floored = false;
};

ProfileFit fit_profile(const std::vector<double>& centres, const std::vector<double>& S, double floor, double top) {
    ProfileFit r;
    std::vector<double> lx, ly;
    int first_below = -1;
    for (size_t b = 0; b < S.size(); ++b) {
        if (S[b] <= floor) {
            first_below = static_cast<int>(b);
            break;
        }
        lx.push_back(std::log(centres[b]));
        ly.push_back(std::log(S[b]));
    }
    r.used = static_cast<int>(lx.size());
    r.floored = first_below >= 0;
    if (r.used >= 3) {
        FitResult f = fit_line(lx, ly);
        r.exponent = f.slope;
        r.residual = f.residual_rms;
    }
    if (r.floored) {
        // slope of the chord from the first bin to the floor, an upper bound on the decay rate seen
        const double l0 = r.used > 0 ? ly.front() : std::log(top);
        const double bound = (std::log(floor) - l0) / std::max(std::log(centres[first_below] / centres.front()), std::log(centres[1] / centres[0]));
        r.exponent = r.used >= 3 ? std::min(r.exponent, bound) : bound;
    }
    if (r.used > 0) {
        const auto [mn, mx] = std::minmax_element(ly.begin(), ly.end());
        r.dynamic_range = std::exp(*mx - *mn);
    }
    if (r.floored) r.dynamic_range = std::max(r.dynamic_range, std::exp(ly.empty() ? 0.0 : ly.front()) / floor);
    return r;
}

}  // namespace

WavefrontReport wavefront_indicator(const StftField& V, const std::vector<PhasePoint>& probes,
                                    const WavefrontOptions& opt) {
    const Grid& g = V.grid;
    const int n = g.n;
    const Weight w(V.sigma);
    if (!(opt.lambda_min > 0.0 && opt.lambda_max > opt.lambda_min) || opt.lambda_bins < 3)
        throw ParameterError("wavefront_indicator: need 0 < lambda_min < lambda_max and >= 3 bins");
    if (opt.lambda_max > 0.95 * g.L || std::pow(opt.lambda_max, V.sigma) > 0.95 * g.xi_max()) {
        std::ostringstream os;
        os << "wavefront_indicator: lambda_max = " << opt.lambda_max << " leaves the grid (L = " << g.L
           << ", xi_max = " << g.xi_max() << ")";
        throw ParameterError(os.str());
    }
    WavefrontReport rep;
    const int nb = opt.lambda_bins;
    const double lr = std::log(opt.lambda_max / opt.lambda_min) / nb;
    for (int b = 0; b < nb; ++b) rep.lambdas.push_back(opt.lambda_min * std::exp((b + 0.5) * lr));

    std::vector<PhasePoint> dirs;
    for (PhasePoint p : probes) dirs.push_back(sigma_project(w, p).unit);
    const int nd = static_cast<int>(dirs.size());
    std::vector<std::vector<double>> S(nd, std::vector<double>(nb, 0.0));

    double peak = V.values.cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) {
            const PhasePoint z{g.x(i), g.xi(l)};
            if (z.x == 0.0 && z.xi == 0.0) continue;
            const SigmaProjection pr = sigma_project(w, z);
            if (pr.lambda < opt.lambda_min || pr.lambda >= opt.lambda_max) continue;
            const int b = std::min(nb - 1, static_cast<int>(std::log(pr.lambda / opt.lambda_min) / lr));
            const double a = std::abs(V.values(i, l));
            for (int d = 0; d < nd; ++d)
                if (std::hypot(pr.unit.x - dirs[d].x, pr.unit.xi - dirs[d].xi) < opt.radius)
                    S[d][b] = std::max(S[d][b], a);
        }
    const double floor = opt.floor * peak;
    for (int d = 0; d < nd; ++d) {
        WavefrontRecord r;
        r.direction = dirs[d];
        r.angle = std::atan2(dirs[d].xi, dirs[d].x);
        r.radius = opt.radius;
        ProfileFit f = fit_profile(rep.lambdas, S[d], floor, peak);
        r.exponent = f.exponent;
        r.residual = f.residual;
        r.dynamic_range = f.dynamic_range;
        r.bins_used = f.used;
        r.decayed_to_floor = f.floored;
        r.low_confidence = f.dynamic_range < 1e3;
        r.in_wavefront = !f.floored && f.used >= 3 && f.exponent > -opt.n_thr;
        rep.records.push_back(r);
    }
    return rep;
}

WavefrontReport wavefront_indicator(const StftField& V, const WavefrontOptions& opt) {
    return wavefront_indicator(V, direction_mesh(opt.directions), opt);
}

std::vector<double> annular_mass_profile(const StftField& V, int K, int M, const std::vector<AnnularSet>& shells) {
    const Grid& g = V.grid;
    std::vector<double> E(shells.size(), 0.0);
    for (int i = 0; i < g.n; ++i)
        for (int l = 0; l < g.n; ++l) {
            const double c = std::pow(g.x(i), 2 * K) + std::pow(g.xi(l), 2 * M);
            const double m = std::norm(V.values(i, l));
            for (size_t s = 0; s < shells.size(); ++s)
                if (shells[s].contains_base(c)) E[s] += m;
        }
    for (double& e : E) e *= g.dx() * g.dxi();
    return E;
}

FilterEvidence filter_membership(const StateVector& u, const AnnularSet& sigma_set, double eps, double delta,
                                 const FilterOptions& opt) {
    const Grid& g = u.grid;
    const int K = sigma_set.K, M = sigma_set.M;
    const double sigma = static_cast<double>(K) / M;
    if (!(opt.theta_min >= 1.0 && opt.theta_max > 2.0 * opt.theta_min))
        throw ParameterError("filter_membership: need 1 <= theta_min and at least two dyadic shells");
    if (opt.theta_max - 1.0 > kTaperStart * g.L || std::pow(opt.theta_max - 1.0, sigma) > kTaperStart * g.xi_max()) {
        std::ostringstream os;
        os << "filter_membership: analysis region theta < " << opt.theta_max
           << " overlaps the grid edge zone (L = " << g.L << ", xi_max = " << g.xi_max() << ")";
        throw ParameterError(os.str());
    }
    FilterEvidence ev;
    ev.complement = complement_above_one(sigma_set);
    const Weight w(sigma);

    StftField V0 = stft(u, sigma);
    const double floor = opt.floor * V0.values.cwiseAbs().maxCoeff();

    StateVector qu = StateVector::zeros(g);
    if (!ev.complement.intervals.empty()) {
        GridSymbol q = annular_cutoff(g, ev.complement, eps, delta);
        qu = StateVector(g, weyl_quantize(q) * u.values);
    }
    StftField V = stft(qu, sigma);

    for (double t = opt.theta_min; 2.0 * t <= opt.theta_max * (1 + 1e-12); t *= 2.0) ev.shell_theta.push_back(t);
    const int ns = static_cast<int>(ev.shell_theta.size());
    ev.shell_max.assign(ns, 0.0);
    for (int i = 0; i < g.n; ++i)
        for (int l = 0; l < g.n; ++l) {
            const double th = theta(w, {g.x(i), g.xi(l)});
            if (th < opt.theta_min) continue;
            const int s = static_cast<int>(std::floor(std::log2(th / opt.theta_min)));
            if (s >= ns) continue;
            ev.shell_max[s] = std::max(ev.shell_max[s], std::abs(V.values(i, l)));
        }
    std::vector<double> centres;
    for (double t : ev.shell_theta) centres.push_back(t * std::sqrt(2.0));
    ProfileFit f = fit_profile(centres, ev.shell_max, floor, floor / opt.floor);
    ev.exponent = f.exponent;
    ev.residual = f.residual;
    ev.decayed_to_floor = f.floored;
    ev.member = f.floored || (f.used >= 3 && f.exponent <= -opt.decay_order);
    return ev;
}

}  // namespace singprop
