#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "singprop/hamilton_flow.hpp"
#include "singprop/spectral.hpp"
#include "singprop/stft.hpp"
#include "singprop/symbols.hpp"

namespace singprop {

// Test states used by the suites.
//   gaussian: exp(-(x-x0)^2 / (2 width^2) + i xi0 x)
//   spike:    smooth band-limited delta at x0, flat below 0.6 band, zero above band
//   mixed:    normalized gaussian + normalized spike
//   projected_spike: spectral projection of the grid delta at x0 onto retained modes
struct StateSpec {
    std::string kind = "spike";
    double x0 = 0.0;
    double xi0 = 0.0;
    double width = 1.0;
    double band = 12.0;
    double spike_x0 = 0.0;  // mixed: spike location (gaussian uses x0)
};

StateVector band_limited_spike(const Grid& g, double x0, double band);
StateVector make_state(const Grid& g, const StateSpec& s, const SpectralBasis* basis = nullptr);

// Basis of the Weyl operator of a = (x^(2K) + xi^(2M))^p. p = 1 uses the
// exact polynomial operator; other p quantize the cutoff symbol with taper.
SpectralBasis symbol_basis(const OscParams& P, const Grid& g);

// least-squares slope of log T(c) against log c
double period_slope(const OscParams& P, const std::vector<double>& c_values);

struct AnnularDrift {
    std::vector<double> times;
    std::vector<std::vector<double>> profiles;  // [time][shell]
    std::vector<double> shell_slope;            // d E_i / dt relative to total mass
    double worst_rate = 0.0;                    // max |shell_slope|
    double max_excursion = 0.0;                 // max |E_i(t) - E_i(0)| / total mass
};

AnnularDrift annular_drift(const SpectralBasis& b, const StateVector& u0, int K, int M,
                           const std::vector<AnnularSet>& shells, const std::vector<double>& times);

// geometric shells [0,e1), [e1,e2), ..., [e_{n-1}, inf)
std::vector<AnnularSet> geometric_shells(int K, int M, int count, double first_edge, double ratio);

// Hausdorff distance, in direction-mesh cells, between the detected set at
// time t and the image under chi_t of the detected set at time 0.
double wavefront_rotation_mismatch(const OscParams& P, double t, const WavefrontReport& at0,
                                   const WavefrontReport& att, int mesh);

std::vector<int> wavefront_indices(const WavefrontReport& r);

// splits the seed so every job draws from its own stream
uint64_t mix_seed(uint64_t seed, uint64_t stream);

}  // namespace singprop
