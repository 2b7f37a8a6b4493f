#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace singprop {

using cplx = std::complex<double>;

// In-place 1-D complex FFT of fixed length backed by FFTW. Forward uses
// exp(-2 pi i k l / n), backward exp(+...), both unnormalized. A plan owns
// its own buffer, so one instance per thread.
class Fft {
public:
    explicit Fft(int n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    int size() const { return n_; }
    cplx* data() { return buf_; }
    void forward();
    void backward();

private:
    int n_;
    cplx* buf_;
    void* fwd_;
    void* bwd_;
};

}  // namespace singprop
