#include "suites.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "singprop/error.hpp"
#include "singprop/io.hpp"
#include "singprop/ode_oracle.hpp"

namespace singprop::cli {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex m;
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            {
                std::lock_guard<std::mutex> lk(m);
                if (err) return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(m);
                if (!err) err = std::current_exception();
            }
        }
    };
    const int k = std::max(1, std::min(threads, n));
    std::vector<std::thread> pool;
    for (int t = 1; t < k; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

namespace {

std::string path_in(const SuiteContext& ctx, const std::string& name) { return ctx.out_dir + "/" + name; }

PhasePoint orbit_point(const OscParams& P, double c, double angle) {
    const double ca = std::cos(angle), sa = std::sin(angle);
    return {std::copysign(std::pow(c * ca * ca, 0.5 / P.K), ca), std::copysign(std::pow(c * sa * sa, 0.5 / P.M), sa)};
}

double base_energy(const OscParams& P, PhasePoint z) {
    return std::pow(z.x, 2 * P.K) + std::pow(z.xi, 2 * P.M);
}

}  // namespace

Json run_flow_suite(const SuiteContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const OscParams& P = cfg.params;
    const FlowSettings& fs = cfg.flow;
    std::mt19937_64 rng(mix_seed(cfg.seed, 1));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<PhasePoint> z0(fs.points);
    std::vector<double> cs(fs.points);
    for (int i = 0; i < fs.points; ++i) {
        cs[i] = fs.c_min * std::pow(fs.c_max / fs.c_min, U(rng));
        z0[i] = orbit_point(P, cs[i], 2 * M_PI * U(rng));
    }
    struct PointResult {
        double T = 0, dev = 0, energy = 0, ode_energy = 0;
        long steps = 0;
        std::string csv;
    };
    std::vector<PointResult> res(fs.points);
    parallel_for(fs.points, ctx.threads, [&](int i) {
        PointResult& r = res[i];
        const double c = base_energy(P, z0[i]);
        r.T = period(P, c);
        std::vector<double> times(fs.trajectory_samples);
        for (int k = 0; k < fs.trajectory_samples; ++k) times[k] = r.T * k / (fs.trajectory_samples - 1);
        OdeDiagnostics diag;
        auto ode = ode_trajectory(P, times, z0[i], fs.ode_tol, &diag);
        std::ostringstream os;
        os << std::setprecision(17);
        for (int k = 0; k < fs.trajectory_samples; ++k) {
            const PhasePoint z = flow(P, times[k], z0[i]);
            r.dev = std::max({r.dev, std::abs(z.x - ode[k].x), std::abs(z.xi - ode[k].xi)});
            r.energy = std::max(r.energy, std::abs(base_energy(P, z) - c) / c);
            os << i << ',' << times[k] << ',' << z.x << ',' << z.xi << ',' << ode[k].x << ',' << ode[k].xi << '\n';
        }
        r.ode_energy = diag.max_energy_drift;
        r.steps = diag.steps;
        r.csv = os.str();
    });
    std::string csv = "point,t,x,xi,x_ode,xi_ode\n";
    Json pts = Json::array();
    double sup = 0, emax = 0;
    for (int i = 0; i < fs.points; ++i) {
        csv += res[i].csv;
        sup = std::max(sup, res[i].dev);
        emax = std::max(emax, res[i].energy);
        pts.push_back({{"z0", {z0[i].x, z0[i].xi}},
                       {"c", cs[i]},
                       {"period", res[i].T},
                       {"max_deviation", res[i].dev},
                       {"energy_drift", res[i].energy},
                       {"ode_energy_drift", res[i].ode_energy},
                       {"ode_steps", res[i].steps}});
    }
    write_text_atomic(path_in(ctx, "flow_trajectories.csv"), csv);

    Json scaling = Json::array();
    for (double lam : fs.scaling_lambdas) {
        double worst = 0.0;
        for (int i = 0; i < fs.points; ++i)
            worst = std::max(worst, scaling_commutation_defect(P, 0.25 * res[i].T, z0[i], lam));
        scaling.push_back({{"lambda", lam}, {"t", "T(c)/4"}, {"max_defect", worst}});
    }
    Json out = describe(cfg);
    out["suite"] = "flow";
    out["points"] = pts;
    out["sup_deviation"] = sup;
    out["max_energy_drift"] = emax;
    out["oracle_pass"] = sup <= cfg.tol.oracle && emax <= cfg.tol.energy;
    out["period_slope"] = period_slope(P, fs.c_values);
    out["period_slope_expected"] = P.p_crit - P.p;
    out["scaling_commutation"] = scaling;
    return out;
}

Json run_period_suite(const SuiteContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const OscParams& P = cfg.params;
    std::string csv = "c,period\n";
    Json rows = Json::array();
    for (double c : cfg.flow.c_values) {
        const double T = period(P, c);
        std::ostringstream os;
        os << std::setprecision(17) << c << ',' << T << '\n';
        csv += os.str();
        rows.push_back({{"c", c}, {"period", T}});
    }
    write_text_atomic(path_in(ctx, "period.csv"), csv);
    Json out = describe(cfg);
    out["suite"] = "period";
    out["periods"] = rows;
    out["slope"] = period_slope(P, cfg.flow.c_values);
    out["slope_expected"] = P.p_crit - P.p;
    return out;
}

Json run_spectrum_suite(const SuiteContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const OscParams& P = cfg.params;
    const Grid g = cfg.grid();
    SpectralBasis b = symbol_basis(P, g);
    write_spectrum_csv(path_in(ctx, "spectrum.csv"), b);
    Json out = describe(cfg);
    out["suite"] = "spectrum";
    out["n_kept"] = b.n_kept;
    out["retention_cap"] = b.retention_cap;
    out["orthonormality_defect"] = b.orthonormality_defect;
    out["diffop_k"] = b.diffop_k;
    out["diffop_m"] = b.diffop_m;
    std::vector<double> low;
    for (int j = 0; j < std::min(20, b.n_kept); ++j) low.push_back(b.lambdas[j]);
    out["lowest"] = low;
    if (b.n_kept >= 20) {
        const int hi = std::min(80, b.n_kept);
        FitResult f = asymptotics_fit(b, std::min(10, hi - 2), hi);
        out["asymptotics"] = {{"j_range", {std::min(10, hi - 2), hi}},
                              {"slope", f.slope},
                              {"expected", 2.0 * P.K * P.M * P.p / (P.K + P.M)},
                              {"residual_rms", f.residual_rms}};
    }
    return out;
}

namespace {

struct PropagationData {
    Grid grid;
    SpectralBasis basis;
    StateVector u0;
};

PropagationData prepare(const ExperimentConfig& cfg) {
    PropagationData d{cfg.grid(), {}, {}};
    d.basis = symbol_basis(cfg.params, d.grid);
    d.u0 = make_state(d.grid, cfg.state, &d.basis);
    d.u0.require_inner_support();
    return d;
}

}  // namespace

Json run_propagation_suite(const SuiteContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const OscParams& P = cfg.params;
    PropagationData d = prepare(cfg);
    const int nt = static_cast<int>(cfg.times.size());
    std::vector<WavefrontReport> reps(nt);
    std::vector<std::vector<double>> profiles(nt);
    std::vector<double> norms(nt);
    const auto shells = cfg.shell_sets();
    parallel_for(nt, ctx.threads, [&](int k) {
        StateVector u = propagate(d.basis, d.u0, cfg.times[k], cfg.tol.tail);
        StftField V = stft(u, P.sigma);
        reps[k] = wavefront_indicator(V, cfg.wavefront);
        profiles[k] = annular_mass_profile(V, P.K, P.M, shells);
        norms[k] = u.norm();
    });
    Json per_time = Json::array();
    // conservation is measured against the projection onto the retained modes
    const double n0 = propagate(d.basis, d.u0, 0.0, cfg.tol.tail).norm();
    for (int k = 0; k < nt; ++k) {
        bool same = true;
        for (size_t r = 0; r < reps[k].records.size(); ++r)
            same = same && reps[k].records[r].in_wavefront == reps[0].records[r].in_wavefront;
        per_time.push_back({{"t", cfg.times[k]},
                            {"l2_defect", std::abs(norms[k] - n0) / n0},
                            {"wavefront", to_json(reps[k])},
                            {"in_wavefront_indices", wavefront_indices(reps[k])},
                            {"booleans_equal_first", same},
                            {"flow_mismatch_cells",
                             wavefront_rotation_mismatch(P, cfg.times[k] - cfg.times[0], reps[0], reps[k],
                                                         cfg.wavefront.directions)},
                            {"annular_profile", profiles[k]}});
    }
    Json out = describe(cfg);
    out["suite"] = "propagate";
    out["n_kept"] = d.basis.n_kept;
    out["times"] = per_time;
    return out;
}

Json run_wavefront_suite(const SuiteContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    PropagationData d = prepare(cfg);
    StftField V = stft(d.u0, cfg.params.sigma);
    WavefrontReport r = wavefront_indicator(V, cfg.wavefront);
    Json out = describe(cfg);
    out["suite"] = "wavefront";
    out["moyal_defect"] = V.moyal_defect;
    out["lambdas"] = r.lambdas;
    out["wavefront"] = to_json(r);
    out["in_wavefront_indices"] = wavefront_indices(r);
    return out;
}

Json run_annular_suite(const SuiteContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const OscParams& P = cfg.params;
    PropagationData d = prepare(cfg);
    if (P.p != 1.0) throw ConfigError("annular suite: the annular invariance experiment needs p = 1");
    std::vector<double> times;
    for (int k = 0; k < cfg.annular_samples; ++k) times.push_back(cfg.annular_t_max * k / (cfg.annular_samples - 1));
    const auto shells = cfg.shell_sets();
    AnnularDrift dr = annular_drift(d.basis, d.u0, P.K, P.M, shells, times);
    std::string csv = "t";
    for (size_t s = 0; s < shells.size(); ++s) csv += ",shell" + std::to_string(s);
    csv += "\n";
    for (size_t k = 0; k < times.size(); ++k) {
        std::ostringstream os;
        os << std::setprecision(17) << times[k];
        for (double e : dr.profiles[k]) os << ',' << e;
        csv += os.str() + "\n";
    }
    write_text_atomic(path_in(ctx, "annular_profile.csv"), csv);
    Json sh = Json::array();
    for (const auto& s : shells) sh.push_back(s.describe());
    Json out = describe(cfg);
    out["suite"] = "annular";
    out["shells"] = sh;
    out["initial_profile"] = dr.profiles.front();
    out["shell_drift_rate"] = dr.shell_slope;
    out["worst_drift_rate"] = dr.worst_rate;
    out["max_excursion"] = dr.max_excursion;
    out["drift_pass"] = dr.worst_rate <= cfg.tol.drift;
    return out;
}

}  // namespace singprop::cli
