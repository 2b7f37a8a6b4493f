#include "singprop/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "singprop/error.hpp"
#include "singprop/fft.hpp"

namespace singprop {

StateVector band_limited_spike(const Grid& g, double x0, double band) {
    if (!(band > 0.0)) throw ParameterError("band_limited_spike: band must be positive");
    const int n = g.n;
    Fft f(n);
    for (int l = 0; l < n; ++l) {
        const double xi = g.xi(l);
        const double w = 1.0 - smooth_step((std::abs(xi) - 0.6 * band) / (0.4 * band));
        const double sgn = ((l - n / 2) % 2) ? -1.0 : 1.0;
        f.data()[l] = w * sgn * std::exp(cplx(0.0, -xi * x0));
    }
    f.backward();
    Eigen::VectorXcd v(n);
    for (int k = 0; k < n; ++k) v[k] = f.data()[k] * ((k % 2) ? -1.0 : 1.0);
    StateVector u(g, v);
    u.values /= u.norm();
    return u;
}

StateVector make_state(const Grid& g, const StateSpec& s, const SpectralBasis* basis) {
    if (s.kind == "gaussian") {
        auto u = StateVector::from_function(g, [&](double x) {
            const double d = (x - s.x0) / s.width;
            return std::exp(cplx(-0.5 * d * d, s.xi0 * x));
        });
        u.values /= u.norm();
        return u;
    }
    if (s.kind == "spike") return band_limited_spike(g, s.x0, s.band);
    if (s.kind == "mixed") {
        StateSpec a = s;
        a.kind = "gaussian";
        StateVector ga = make_state(g, a);
        StateVector sp = band_limited_spike(g, s.spike_x0, s.band);
        return StateVector(g, ga.values + sp.values);
    }
    if (s.kind == "projected_spike") {
        if (!basis) throw ParameterError("make_state: projected_spike needs a basis");
        const int i0 = static_cast<int>(std::lround((s.x0 + g.L) / g.dx()));
        if (i0 < 0 || i0 >= g.n) throw ParameterError("make_state: x0 outside the grid");
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(g.n);
        for (int j = 0; j < basis->n_kept; ++j) c[j] = std::conj(basis->modes(i0, j));
        StateVector u = synthesize(*basis, c);
        u.values /= u.norm();
        return u;
    }
    throw ConfigError("unknown state kind '" + s.kind + "'");
}

SpectralBasis symbol_basis(const OscParams& P, const Grid& g) {
    if (P.p == 1.0) return eigendecompose(build_operator(g, P.K, P.M), g, P.K, P.M);
    auto sym = GridSymbol::sample(
        g, [&](double x, double xi) { return cplx(symbol_value(P, {x, xi})); }, 2.0 * P.K * P.p, P.sigma, true);
    const double cap = 0.5 * symbol_value(P, {0.0, 0.5 * g.xi_max()});
    return eigendecompose(weyl_quantize(sym), g, P.K, P.M, cap);
}

double period_slope(const OscParams& P, const std::vector<double>& c_values) {
    if (c_values.size() < 2) throw ParameterError("period_slope: need at least two energies");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(c_values.size());
    for (double c : c_values) {
        const double lx = std::log(c), ly = std::log(period(P, c));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

AnnularDrift annular_drift(const SpectralBasis& b, const StateVector& u0, int K, int M,
                           const std::vector<AnnularSet>& shells, const std::vector<double>& times) {
    if (times.size() < 3) throw ParameterError("annular_drift: need at least three times");
    AnnularDrift d;
    d.times = times;
    const double sigma = static_cast<double>(K) / M;
    for (double t : times) d.profiles.push_back(annular_mass_profile(stft(propagate(b, u0, t), sigma), K, M, shells));
    double total = 0.0;
    for (double e : d.profiles.front()) total += e;
    if (!(total > 0.0)) throw NumericError("annular_drift: zero initial mass");
    const size_t ns = shells.size(), nt = times.size();
    d.shell_slope.assign(ns, 0.0);
    for (size_t s = 0; s < ns; ++s) {
        double st = 0, se = 0, stt = 0, ste = 0;
        for (size_t k = 0; k < nt; ++k) {
            const double e = d.profiles[k][s];
            st += times[k];
            se += e;
            stt += times[k] * times[k];
            ste += times[k] * e;
            d.max_excursion = std::max(d.max_excursion, std::abs(e - d.profiles[0][s]) / total);
        }
        const double nn = static_cast<double>(nt);
        d.shell_slope[s] = (nn * ste - st * se) / (nn * stt - st * st) / total;
        d.worst_rate = std::max(d.worst_rate, std::abs(d.shell_slope[s]));
    }
    return d;
}

std::vector<AnnularSet> geometric_shells(int K, int M, int count, double first_edge, double ratio) {
    if (count < 2 || !(first_edge > 0.0) || !(ratio > 1.0)) throw ParameterError("geometric_shells: bad layout");
    std::vector<AnnularSet> out;
    double lo = 0.0, hi = first_edge;
    for (int i = 0; i < count; ++i) {
        const double top = i + 1 == count ? std::numeric_limits<double>::infinity() : hi;
        out.emplace_back(std::vector<Interval>{{lo, top, false}}, K, M);
        lo = hi;
        hi *= ratio;
    }
    return out;
}

std::vector<int> wavefront_indices(const WavefrontReport& r) {
    std::vector<int> idx;
    for (size_t d = 0; d < r.records.size(); ++d)
        if (r.records[d].in_wavefront) idx.push_back(static_cast<int>(d));
    return idx;
}

double wavefront_rotation_mismatch(const OscParams& P, double t, const WavefrontReport& at0,
                                   const WavefrontReport& att, int mesh) {
    const double cell = 2 * M_PI / mesh;
    const Weight w(P.sigma);
    std::vector<double> predicted, detected;
    for (int d : wavefront_indices(at0)) {
        const PhasePoint z = flow(P, t, at0.records[d].direction);
        const PhasePoint u = sigma_project(w, z).unit;
        predicted.push_back(std::atan2(u.xi, u.x));
    }
    for (int d : wavefront_indices(att)) detected.push_back(att.records[d].angle);
    if (predicted.empty() && detected.empty()) return 0.0;
    if (predicted.empty() || detected.empty()) return std::numeric_limits<double>::infinity();
    auto dist = [](double a, double b) {
        double d = std::fmod(std::abs(a - b), 2 * M_PI);
        return std::min(d, 2 * M_PI - d);
    };
    auto directed = [&](const std::vector<double>& A, const std::vector<double>& B) {
        double h = 0.0;
        for (double a : A) {
            double m = 1e300;
            for (double b : B) m = std::min(m, dist(a, b));
            h = std::max(h, m);
        }
        return h;
    };
    return std::max(directed(predicted, detected), directed(detected, predicted)) / cell;
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    // splitmix64 step
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace singprop
