#pragma once

#include <functional>

namespace singprop {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
};

// Adaptive Gauss-Kronrod (7/15) on [a,b]. Subdivides until the summed
// error estimate is below max(abs_tol, rel_tol*|I|) or max_panels is hit.
QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-15, double rel_tol = 1e-14, int max_panels = 4000);

}  // namespace singprop
