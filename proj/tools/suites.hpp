#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "config.hpp"

namespace singprop::cli {

// Runs fn(0..n-1) on a shared work queue with the given thread count; the
// first exception is rethrown after all workers stop.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

struct SuiteContext {
    ExperimentConfig cfg;
    std::string out_dir;
    int threads = 1;
};

using Json = nlohmann::ordered_json;

Json run_flow_suite(const SuiteContext& ctx);
Json run_period_suite(const SuiteContext& ctx);
Json run_spectrum_suite(const SuiteContext& ctx);
Json run_propagation_suite(const SuiteContext& ctx);
Json run_wavefront_suite(const SuiteContext& ctx);
Json run_annular_suite(const SuiteContext& ctx);

}  // namespace singprop::cli
