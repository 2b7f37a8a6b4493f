#include "singprop/fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace singprop {

namespace {
// the planner is not thread-safe; execution with distinct plans is
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Fft::Fft(int n) : n_(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * n));
    auto* b = reinterpret_cast<fftw_complex*>(buf_);
    fwd_ = fftw_plan_dft_1d(n, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(n, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    fftw_free(buf_);
}

void Fft::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }
void Fft::backward() { fftw_execute(static_cast<fftw_plan>(bwd_)); }

}  // namespace singprop
