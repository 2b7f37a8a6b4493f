#include "singprop/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <lapacke.h>

#include "singprop/error.hpp"
#include "singprop/symbols.hpp"

namespace singprop {

StateVector::StateVector(const Grid& g, Eigen::VectorXcd v) : grid(g), values(std::move(v)) {
    if (values.size() != g.n) throw ParameterError("StateVector: length does not match grid");
    if (!values.allFinite()) throw ParameterError("StateVector: non-finite entries");
}

StateVector StateVector::zeros(const Grid& g) { return StateVector(g, Eigen::VectorXcd::Zero(g.n)); }

StateVector StateVector::from_function(const Grid& g, const std::function<cplx(double)>& f) {
    Eigen::VectorXcd v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = f(g.x(i));
    return StateVector(g, v);
}

double StateVector::norm() const { return std::sqrt(values.squaredNorm() * grid.dx()); }

double StateVector::outer_energy_fraction() const {
    double total = values.squaredNorm(), outer = 0.0;
    if (total == 0.0) return 0.0;
    for (int i = 0; i < grid.n; ++i)
        if (std::abs(grid.x(i)) >= 0.5 * grid.L) outer += std::norm(values[i]);
    return outer / total;
}

void StateVector::require_inner_support(double tol) const {
    const double f = outer_energy_fraction();
    if (f > tol) {
        std::ostringstream os;
        os << "state carries " << f << " of its energy outside the inner half |x| < " << 0.5 * grid.L;
        throw ResolutionError(os.str());
    }
}

double l2_distance(const StateVector& a, const StateVector& b) {
    return std::sqrt((a.values - b.values).squaredNorm() * a.grid.dx());
}

// ---- LAPACK wrappers

void eigh(const Eigen::MatrixXd& A, Eigen::VectorXd& w, Eigen::MatrixXd& V) {
    const int n = static_cast<int>(A.rows());
    V = A;
    w.resize(n);
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, V.data(), n, w.data());
    if (info != 0) throw NumericError("eigh: dsyevd failed with info=" + std::to_string(info));
}

void eigh(const Eigen::MatrixXcd& A, Eigen::VectorXd& w, Eigen::MatrixXcd& V) {
    const int n = static_cast<int>(A.rows());
    V = A;
    w.resize(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, reinterpret_cast<lapack_complex_double*>(V.data()),
                                     n, w.data());
    if (info != 0) throw NumericError("eigh: zheevd failed with info=" + std::to_string(info));
}

// ---- operator construction

namespace {

// (-1)^d / n * sum_l m(xi_l) e^{2 pi i d l / n}: the circulant of a Fourier multiplier
Eigen::MatrixXcd fourier_multiplier(const Grid& g, const std::function<double(double)>& m) {
    const int n = g.n;
    Fft fft(n);
    for (int l = 0; l < n; ++l) fft.data()[l] = m(g.xi(l));
    fft.backward();
    std::vector<cplx> col(n);
    for (int d = 0; d < n; ++d) col[d] = fft.data()[d] / static_cast<double>(n) * ((d % 2) ? -1.0 : 1.0);
    Eigen::MatrixXcd Q(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int d = i - j;
            // the parity factor depends on d itself, not on d mod n; n is even so both agree
            Q(i, j) = col[((d % n) + n) % n];
        }
    return Q;
}

}  // namespace

Eigen::MatrixXcd build_operator(const Grid& g, int K, int M, const std::vector<PolyTerm>& extra,
                                bool include_standard) {
    if (K < 1 || M < 1) throw ParameterError("build_operator: K, M must be >= 1");
    std::vector<PolyTerm> terms = extra;
    if (include_standard) {
        terms.push_back({0, 2 * K, 1.0});
        terms.push_back({2 * M, 0, 1.0});
    }
    for (const PolyTerm& t : terms) {
        if (t.alpha < 0 || t.beta < 0) throw ParameterError("build_operator: negative exponent");
        if (2 * K * t.alpha + 2 * M * t.beta > 4 * K * M)
            throw ParameterError("build_operator: term exceeds the quasi-homogeneous order of the class");
    }
    // principal part: terms with 2K alpha + 2M beta = 4KM, checked on sigma-dilated circles
    auto principal = [&](PhasePoint z) {
        double v = 0.0;
        for (const PolyTerm& t : terms)
            if (2 * K * t.alpha + 2 * M * t.beta == 4 * K * M)
                v += t.coeff * std::pow(z.x, t.beta) * std::pow(z.xi, t.alpha);
        return v;
    };
    const double sigma = static_cast<double>(K) / M;
    std::vector<PhasePoint> samples;
    for (double lam : {4.0, 8.0, 16.0})
        for (int a = 0; a < 720; ++a) {
            const double t = 2 * M_PI * a / 720.0;
            samples.push_back({lam * std::cos(t), std::pow(lam, sigma) * std::sin(t)});
        }
    auto ell = ellipticity_check(principal, samples, Weight(sigma), 2.0 * K, 1e-8);
    if (!ell.pass) {
        auto dir = sigma_project(Weight(sigma), ell.worst).unit;
        std::ostringstream os;
        os << "build_operator: principal symbol is not elliptic; it vanishes in direction (" << dir.x << ", "
           << dir.xi << ") on S^1 (margin " << ell.margin << ")";
        throw ParameterError(os.str());
    }

    const int n = g.n;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    std::vector<PolyTerm> mixed;
    for (const PolyTerm& t : terms) {
        if (t.coeff == 0.0) continue;
        if (t.alpha == 0) {
            for (int i = 0; i < n; ++i) A(i, i) += t.coeff * std::pow(g.x(i), t.beta);
        } else if (t.beta == 0) {
            A += t.coeff * fourier_multiplier(g, [&](double xi) { return std::pow(xi, t.alpha); });
        } else {
            mixed.push_back(t);
        }
    }
    if (!mixed.empty()) {
        auto sym = GridSymbol::sample(
            g,
            [&](double x, double xi) {
                double v = 0.0;
                for (const PolyTerm& t : mixed) v += t.coeff * std::pow(x, t.beta) * std::pow(xi, t.alpha);
                return cplx(v);
            },
            2.0 * K, sigma, false);
        A += weyl_quantize(sym);
    }
    return 0.5 * (A + A.adjoint());
}

Grid default_grid(int K, int M, int n) {
    // lambda_cap^(1/2K) = 0.6 L with lambda_cap = 0.5 (pi n / 4L)^(2M)
    const double rhs = std::pow(0.5, 0.5 / K) * std::pow(M_PI * n / 4.0, static_cast<double>(M) / K) / 0.6;
    const double L = std::pow(rhs, 1.0 / (1.0 + static_cast<double>(M) / K));
    return Grid(n, L);
}

double default_retention_cap(const Grid& g, int M) { return 0.5 * std::pow(0.5 * M_PI / g.dx(), 2 * M); }

SpectralBasis eigendecompose(const Eigen::MatrixXcd& A, const Grid& g, int K, int M, double retention_cap) {
    const int n = g.n;
    if (A.rows() != n || A.cols() != n) throw ParameterError("eigendecompose: matrix size does not match grid");
    const double top = A.cwiseAbs().maxCoeff();
    if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(top, 1e-300))
        throw ParameterError("eigendecompose: matrix is not Hermitian");
    SpectralBasis b;
    b.grid = g;
    b.diffop_k = 2 * K;
    b.diffop_m = 2 * M;
    b.retention_cap = retention_cap > 0 ? retention_cap : default_retention_cap(g, M);
    // FFT round-off leaves ~1e-17 imaginary parts on operators that are real analytically
    b.real_modes = A.imag().cwiseAbs().maxCoeff() <= 1e-14 * top;
    const double scale = 1.0 / std::sqrt(g.dx());
    if (b.real_modes) {
        Eigen::VectorXd w;
        Eigen::MatrixXd V;
        eigh(Eigen::MatrixXd(A.real()), w, V);
        for (int j = 0; j < n; ++j) {
            Eigen::Index imax;
            V.col(j).cwiseAbs().maxCoeff(&imax);
            if (V(imax, j) < 0) V.col(j) *= -1.0;
        }
        b.lambdas = w;
        b.modes = (V * scale).cast<cplx>();
    } else {
        Eigen::VectorXd w;
        Eigen::MatrixXcd V;
        eigh(A, w, V);
        for (int j = 0; j < n; ++j) {
            Eigen::Index imax;
            V.col(j).cwiseAbs().maxCoeff(&imax);
            const cplx ph = V(imax, j) / std::abs(V(imax, j));
            V.col(j) *= std::conj(ph);
        }
        b.lambdas = w;
        b.modes = V * scale;
    }
    if (!(b.lambdas[0] > 0.0)) {
        std::ostringstream os;
        os << "eigendecompose: positivity violated, lambda_1 = " << b.lambdas[0];
        throw ParameterError(os.str());
    }
    b.n_kept = 0;
    while (b.n_kept < n && b.lambdas[b.n_kept] <= b.retention_cap) ++b.n_kept;
    if (b.n_kept == 0) throw ResolutionError("eigendecompose: no eigenvalue below the retention cap");
    const auto kept = b.modes.leftCols(b.n_kept);
    Eigen::MatrixXcd G = kept.adjoint() * kept * g.dx();
    b.orthonormality_defect = (G - Eigen::MatrixXcd::Identity(b.n_kept, b.n_kept)).cwiseAbs().maxCoeff();
    if (b.orthonormality_defect > 1e-10)
        throw NumericError("eigendecompose: orthonormality defect " + std::to_string(b.orthonormality_defect));
    return b;
}

Eigen::VectorXcd coefficients(const SpectralBasis& b, const StateVector& u) {
    if (u.grid.n != b.grid.n || u.grid.L != b.grid.L) throw ParameterError("coefficients: grid mismatch");
    return b.modes.adjoint() * u.values * b.grid.dx();
}

StateVector synthesize(const SpectralBasis& b, const Eigen::VectorXcd& c) {
    return StateVector(b.grid, b.modes.leftCols(b.n_kept) * c.head(b.n_kept));
}

double tail_fraction(const SpectralBasis& b, const Eigen::VectorXcd& c) {
    const double total = c.squaredNorm();
    if (total == 0.0) return 0.0;
    return c.tail(c.size() - b.n_kept).squaredNorm() / total;
}

int required_modes(const SpectralBasis&, const Eigen::VectorXcd& c, double tail_tol) {
    const double total = c.squaredNorm();
    double rest = total;
    int j = 0;
    while (j < c.size() && rest > tail_tol * total) rest -= std::norm(c[j++]);
    return j;
}

namespace {

void require_resolved(const SpectralBasis& b, const Eigen::VectorXcd& c, double tail_tol, const char* who) {
    const double tail = tail_fraction(b, c);
    if (tail > tail_tol) {
        std::ostringstream os;
        os << who << ": tail energy " << tail << " beyond the " << b.n_kept << " retained modes exceeds " << tail_tol
           << "; about " << required_modes(b, c, tail_tol) << " modes would be required";
        throw ResolutionError(os.str());
    }
}

}  // namespace

FitResult asymptotics_fit(const SpectralBasis& b, int j_lo, int j_hi) {
    if (b.n_kept < 20) throw NumericError("asymptotics_fit: fewer than 20 resolved modes");
    if (j_lo < 1 || j_hi > b.n_kept || j_hi - j_lo < 2)
        throw ParameterError("asymptotics_fit: j range must lie inside 1.." + std::to_string(b.n_kept));
    std::vector<double> lx, ly;
    for (int j = j_lo; j <= j_hi; ++j) {
        lx.push_back(std::log(static_cast<double>(j)));
        ly.push_back(std::log(b.lambdas[j - 1]));
    }
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    FitResult f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double r2 = 0;
    for (size_t i = 0; i < lx.size(); ++i) r2 += std::pow(ly[i] - f.intercept - f.slope * lx[i], 2);
    f.residual_rms = std::sqrt(r2 / n);
    return f;
}

StateVector propagate(const SpectralBasis& b, const StateVector& u0, double t, double tail_tol) {
    Eigen::VectorXcd c = coefficients(b, u0);
    require_resolved(b, c, tail_tol, "propagate");
    for (int j = 0; j < b.n_kept; ++j) c[j] *= std::exp(cplx(0.0, -b.lambdas[j] * t));
    return synthesize(b, c);
}

namespace {

// E0(th) = int_0^1 e^{i th u} du, E1(th) = int_0^1 u e^{i th u} du
void filon_moments(double th, cplx& E0, cplx& E1) {
    if (std::abs(th) < 0.5) {
        E0 = E1 = 0.0;
        cplx p = 1.0;  // (i th)^n / n!
        for (int k = 0; k < 30; ++k) {
            E0 += p / static_cast<double>(k + 1);
            E1 += p / static_cast<double>(k + 2);
            p *= cplx(0.0, th) / static_cast<double>(k + 1);
        }
        return;
    }
    const cplx e = std::exp(cplx(0.0, th));
    const cplx ith(0.0, th);
    E0 = (e - 1.0) / ith;
    E1 = e / ith + (e - 1.0) / (th * th);
}

}  // namespace

StateVector propagate_duhamel(const SpectralBasis& b, const StateVector& u0, const SourceSamples& f, double t,
                              double tail_tol) {
    if (!(t >= 0.0)) throw ParameterError("propagate_duhamel: t must be >= 0");
    if (!(f.dt > 0.0)) throw ParameterError("propagate_duhamel: dt must be positive");
    const double lmax = b.lambdas[b.n_kept - 1];
    if (lmax * f.dt > 0.1 + 1e-12) {
        std::ostringstream os;
        os << "propagate_duhamel: lambda_max*dt = " << lmax * f.dt << " > 0.1; need dt <= " << 0.1 / lmax;
        throw ParameterError(os.str());
    }
    const int steps = static_cast<int>(std::ceil(t / f.dt - 1e-9));
    if (static_cast<int>(f.samples.size()) < steps + 1)
        throw ParameterError("propagate_duhamel: source samples do not reach t");
    Eigen::VectorXcd c = coefficients(b, u0);
    require_resolved(b, c, tail_tol, "propagate_duhamel");
    const int nk = b.n_kept;
    Eigen::VectorXcd acc = c.head(nk);
    Eigen::VectorXcd fk = b.modes.leftCols(nk).adjoint() * f.samples[0].values * b.grid.dx();
    for (int k = 0; k < steps; ++k) {
        const double t0 = k * f.dt;
        const double h = std::min(f.dt, t - t0);
        Eigen::VectorXcd fk1 = b.modes.leftCols(nk).adjoint() * f.samples[k + 1].values * b.grid.dx();
        for (int j = 0; j < nk; ++j) {
            const double lam = b.lambdas[j];
            cplx E0, E1;
            filon_moments(lam * h, E0, E1);
            // int_0^h (f_k + (f_k1 - f_k) s/dt) e^{i lam (t0 + s)} ds
            const cplx slope = (fk1[j] - fk[j]) / f.dt;
            acc[j] += std::exp(cplx(0.0, lam * t0)) * (fk[j] * h * E0 + slope * h * h * E1);
        }
        fk = fk1;
    }
    for (int j = 0; j < nk; ++j) acc[j] *= std::exp(cplx(0.0, -b.lambdas[j] * t));
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(b.grid.n);
    full.head(nk) = acc;
    return synthesize(b, full);
}

double modulation_norm_spectral(const SpectralBasis& b, const StateVector& u, double s, double tail_tol) {
    Eigen::VectorXcd c = coefficients(b, u);
    if (s == 0.0) return std::sqrt(c.squaredNorm());
    require_resolved(b, c, tail_tol, "modulation_norm_spectral");
    double acc = 0.0;
    for (int j = 0; j < b.n_kept; ++j) acc += std::pow(b.lambdas[j], 2.0 * s / b.diffop_k) * std::norm(c[j]);
    return std::sqrt(acc);
}

namespace {

FitResult line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    FitResult f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double r2 = 0;
    for (size_t i = 0; i < x.size(); ++i) r2 += std::pow(y[i] - f.intercept - f.slope * x[i], 2);
    f.residual_rms = std::sqrt(r2 / n);
    return f;
}

}  // namespace

DecayFitReport coefficient_decay_fit(const SpectralBasis& b, const StateVector& u, const DecayModel& model,
                                     double noise_floor) {
    DecayFitReport rep;
    rep.model = model;
    Eigen::VectorXcd c = coefficients(b, u);
    const double scale = std::sqrt(c.squaredNorm());
    std::vector<int> idx;
    for (int j = 0; j < b.n_kept; ++j)
        if (std::abs(c[j]) > noise_floor * scale) idx.push_back(j);
    rep.used = static_cast<int>(idx.size());
    if (rep.used < 30) {
        rep.saturated = true;
        return rep;
    }
    std::vector<double> x, y;
    for (int j : idx) {
        if (model.kind == DecayModel::Kind::polynomial) {
            x.push_back(std::log(j + 1.0));
            y.push_back(std::log(std::abs(c[j])));
        } else {
            x.push_back(std::pow(b.lambdas[j], model.rho));
            y.push_back(std::log(std::norm(c[j])));
        }
    }
    FitResult f = line_fit(x, y);
    rep.intercept = f.intercept;
    rep.residual_rms = f.residual_rms;
    if (model.kind == DecayModel::Kind::polynomial) {
        rep.parameter = -f.slope;
        const size_t h = x.size() / 2;
        FitResult lo = line_fit({x.begin(), x.begin() + h}, {y.begin(), y.begin() + h});
        FitResult hi = line_fit({x.begin() + h, x.end()}, {y.begin() + h, y.end()});
        rep.window_growth = (-hi.slope) - (-lo.slope);
    } else {
        rep.parameter = -0.5 * f.slope;
    }
    return rep;
}

}  // namespace singprop
