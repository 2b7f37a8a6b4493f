#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "singprop/spectral.hpp"
#include "singprop/stft.hpp"
#include "singprop/symbols.hpp"

namespace singprop {

// Binary layouts, little-endian, row-major interleaved (re, im) float64 pairs:
//   GSYM: magic, u32 n_x (=2n), u32 n_xi (=n), f64 L, f64 sigma, values
//   GSTA: magic, u32 n, f64 L, values
//   GTFF: magic, u32 n_x, u32 n_xi, f64 L, f64 sigma, n window samples, values
// GSYM does not carry the claimed order or taper flag; readers set order 0.
void write_symbol_binary(const std::string& path, const GridSymbol& a);
GridSymbol read_symbol_binary(const std::string& path);
void write_state_binary(const std::string& path, const StateVector& u);
StateVector read_state_binary(const std::string& path);
void write_stft_binary(const std::string& path, const StftField& V);
StftField read_stft_binary(const std::string& path);

void write_symbol_csv(const std::string& path, const GridSymbol& a);  // x,xi,re,im
void write_state_csv(const std::string& path, const StateVector& u);  // x,re,im
StateVector read_state_csv(const std::string& path, const Grid& g);
void write_spectrum_csv(const std::string& path, const SpectralBasis& b);  // j,lambda_j (retained)
void write_stft_csv(const std::string& path, const StftField& V);  // x,xi,magnitude

nlohmann::ordered_json to_json(const WavefrontReport& r);
nlohmann::ordered_json to_json(const FilterEvidence& e);

// writes to path.tmp and renames, so readers never see partial files
void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace singprop
