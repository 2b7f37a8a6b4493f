#include "config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "singprop/error.hpp"

namespace singprop::cli {

using nlohmann::json;

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

void positive(double v, const std::string& name) {
    if (!(v > 0.0)) throw ConfigError("config: " + name + " must be positive");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
}

}  // namespace

Grid ExperimentConfig::grid() const {
    if (grid_L > 0.0) return Grid(grid_n, grid_L);
    return default_grid(params.K, params.M, grid_n);
}

std::vector<AnnularSet> ExperimentConfig::shell_sets() const {
    if (shells.edges.empty())
        return geometric_shells(params.K, params.M, shells.count, shells.first_edge, shells.ratio);
    std::vector<AnnularSet> out;
    double lo = 0.0;
    for (size_t i = 0; i <= shells.edges.size(); ++i) {
        const double hi = i < shells.edges.size() ? shells.edges[i] : std::numeric_limits<double>::infinity();
        out.emplace_back(std::vector<Interval>{{lo, hi, false}}, params.K, params.M);
        lo = hi;
    }
    return out;
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object() || j.empty()) throw ConfigError("config: empty or not a JSON object");
    check_keys(j,
               {"experiment", "oscillator", "grid", "times", "annular", "flow", "state", "wavefront", "shells",
                "tolerances", "seed"},
               "top level");
    ExperimentConfig c;
    read(j, "experiment", c.experiment);
    read(j, "seed", c.seed);
    if (!j.contains("oscillator")) throw ConfigError("config: missing required key 'oscillator'");
    {
        const json& o = j["oscillator"];
        check_keys(o, {"K", "M", "p", "delta"}, "oscillator");
        int K = 1, M = 1;
        double p = 1.0, delta = 0.5;
        read(o, "K", K);
        read(o, "M", M);
        read(o, "p", p);
        read(o, "delta", delta);
        try {
            c.params = OscParams(K, M, p, delta);
        } catch (const Error& e) {
            throw ConfigError(std::string("config oscillator: ") + e.what());
        }
    }
    if (j.contains("grid")) {
        check_keys(j["grid"], {"n", "L"}, "grid");
        read(j["grid"], "n", c.grid_n);
        read(j["grid"], "L", c.grid_L);
        if (!is_power_of_two(c.grid_n) || c.grid_n < 64) throw ConfigError("config: grid.n must be a power of two >= 64");
        if (c.grid_L < 0.0) throw ConfigError("config: grid.L must be positive");
    }
    read(j, "times", c.times);
    if (c.times.empty()) throw ConfigError("config: times must be non-empty");
    if (j.contains("annular")) {
        check_keys(j["annular"], {"t_max", "samples"}, "annular");
        read(j["annular"], "t_max", c.annular_t_max);
        read(j["annular"], "samples", c.annular_samples);
        positive(c.annular_t_max, "annular.t_max");
        if (c.annular_samples < 3) throw ConfigError("config: annular.samples must be >= 3");
    }
    if (j.contains("flow")) {
        const json& f = j["flow"];
        check_keys(f, {"points", "ode_tol", "c_range", "trajectory_samples", "c_values", "scaling_lambdas"}, "flow");
        read(f, "points", c.flow.points);
        read(f, "ode_tol", c.flow.ode_tol);
        read(f, "trajectory_samples", c.flow.trajectory_samples);
        read(f, "c_values", c.flow.c_values);
        read(f, "scaling_lambdas", c.flow.scaling_lambdas);
        if (f.contains("c_range")) {
            std::vector<double> r;
            read(f, "c_range", r);
            if (r.size() != 2 || !(r[0] > 0.0 && r[1] > r[0])) throw ConfigError("config: flow.c_range must be [lo, hi]");
            c.flow.c_min = r[0];
            c.flow.c_max = r[1];
        }
        if (c.flow.points < 1 || c.flow.trajectory_samples < 2) throw ConfigError("config: flow counts too small");
        positive(c.flow.ode_tol, "flow.ode_tol");
        if (c.flow.c_values.size() < 2) throw ConfigError("config: flow.c_values needs two entries");
        for (double v : c.flow.c_values) positive(v, "flow.c_values");
        for (double v : c.flow.scaling_lambdas) positive(v, "flow.scaling_lambdas");
    }
    if (j.contains("state")) {
        const json& s = j["state"];
        check_keys(s, {"kind", "x0", "xi0", "width", "band", "spike_x0"}, "state");
        read(s, "kind", c.state.kind);
        read(s, "x0", c.state.x0);
        read(s, "xi0", c.state.xi0);
        read(s, "width", c.state.width);
        read(s, "band", c.state.band);
        read(s, "spike_x0", c.state.spike_x0);
        positive(c.state.width, "state.width");
        positive(c.state.band, "state.band");
    }
    if (j.contains("wavefront")) {
        const json& w = j["wavefront"];
        check_keys(w, {"directions", "lambda_min", "lambda_max", "lambda_bins", "radius", "n_thr", "floor"},
                   "wavefront");
        read(w, "directions", c.wavefront.directions);
        read(w, "lambda_min", c.wavefront.lambda_min);
        read(w, "lambda_max", c.wavefront.lambda_max);
        read(w, "lambda_bins", c.wavefront.lambda_bins);
        read(w, "radius", c.wavefront.radius);
        read(w, "n_thr", c.wavefront.n_thr);
        read(w, "floor", c.wavefront.floor);
        positive(c.wavefront.radius, "wavefront.radius");
        positive(c.wavefront.n_thr, "wavefront.n_thr");
        positive(c.wavefront.floor, "wavefront.floor");
    }
    if (j.contains("shells")) {
        const json& s = j["shells"];
        check_keys(s, {"edges", "count", "first_edge", "ratio"}, "shells");
        read(s, "edges", c.shells.edges);
        read(s, "count", c.shells.count);
        read(s, "first_edge", c.shells.first_edge);
        read(s, "ratio", c.shells.ratio);
        for (size_t i = 0; i < c.shells.edges.size(); ++i)
            if (!(c.shells.edges[i] > (i ? c.shells.edges[i - 1] : 0.0)))
                throw ConfigError("config: shells.edges must be positive and increasing");
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        check_keys(t, {"oracle", "energy", "drift", "tail"}, "tolerances");
        read(t, "oracle", c.tol.oracle);
        read(t, "energy", c.tol.energy);
        read(t, "drift", c.tol.drift);
        read(t, "tail", c.tol.tail);
        positive(c.tol.oracle, "tolerances.oracle");
        positive(c.tol.energy, "tolerances.energy");
        positive(c.tol.drift, "tolerances.drift");
        positive(c.tol.tail, "tolerances.tail");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    if (ss.str().find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigError("config " + path + " is empty");
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return parse_config(j);
}

nlohmann::ordered_json describe(const ExperimentConfig& c) {
    const Grid g = c.grid();
    return {{"experiment", c.experiment},
            {"seed", c.seed},
            {"oscillator", {{"K", c.params.K}, {"M", c.params.M}, {"p", c.params.p}, {"delta", c.params.cutoff_delta}}},
            {"sigma", c.params.sigma},
            {"p_crit", c.params.p_crit},
            {"grid", {{"n", g.n}, {"L", g.L}}}};
}

}  // namespace singprop::cli
