#pragma once

#include <cmath>

namespace singprop {

// Periodic grid x_i = -L + i dx on [-L, L), with frequencies
// xi_l = (l - n/2) dxi, dxi = pi/L, covering [-pi/dx, pi/dx).
struct Grid {
    int n = 512;
    double L = 12.0;

    Grid() = default;
    Grid(int n_, double L_);
    double dx() const { return 2.0 * L / n; }
    double dxi() const { return M_PI / L; }
    double x(int i) const { return -L + i * dx(); }
    double xi(int l) const { return (l - n / 2) * dxi(); }
    double xi_max() const { return M_PI / dx(); }
};

bool is_power_of_two(long n);

}  // namespace singprop
