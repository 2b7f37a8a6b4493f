#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "singprop/experiments.hpp"
#include "singprop/hamilton_flow.hpp"
#include "singprop/stft.hpp"

namespace singprop::cli {

struct FlowSettings {
    int points = 20;
    double ode_tol = 1e-9;
    double c_min = 1.0, c_max = 16.0;
    int trajectory_samples = 64;
    std::vector<double> c_values{0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    std::vector<double> scaling_lambdas{2.0, 4.0};
};

struct ShellSettings {
    std::vector<double> edges;  // explicit; empty means geometric
    int count = 8;
    double first_edge = 2.0;
    double ratio = 4.0;
};

struct Tolerances {
    double oracle = 1e-6;
    double energy = 1e-9;
    double drift = 0.01;
    double tail = 1e-8;
};

struct ExperimentConfig {
    std::string experiment = "unnamed";
    OscParams params{1, 1, 1.0};
    int grid_n = 512;
    double grid_L = 0.0;  // 0: default_grid
    std::vector<double> times{0.0, 0.5, 1.0};
    double annular_t_max = 2.0;
    int annular_samples = 81;
    FlowSettings flow;
    StateSpec state;
    WavefrontOptions wavefront;
    ShellSettings shells;
    Tolerances tol;
    uint64_t seed = 1;

    Grid grid() const;
    std::vector<AnnularSet> shell_sets() const;
};

// throws ConfigError on malformed input
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::ordered_json describe(const ExperimentConfig& c);

}  // namespace singprop::cli
