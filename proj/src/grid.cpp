#include "singprop/grid.hpp"

#include "singprop/error.hpp"

namespace singprop {

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

Grid::Grid(int n_, double L_) : n(n_), L(L_) {
    if (!is_power_of_two(n)) throw ParameterError("Grid: n must be a power of two");
    if (!(L > 0.0)) throw ParameterError("Grid: L must be positive");
}

}  // namespace singprop
