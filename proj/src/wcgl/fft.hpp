#pragma once

#include <complex>
#include <vector>

namespace wcgl {

// Out-of-place complex 2-D DFTs on an n x n grid, backed by a process-wide
// FFTW plan cache. Plans are created with FFTW_ESTIMATE so the chosen
// algorithm (and hence bit-level output) is identical across runs.
// fftw_execute_dft on distinct buffers is thread-safe; plan creation is
// serialized internally.
namespace fft {

// raw DFT, e^{-2 pi i k.j/n}, unnormalized
void forward(int n, const std::complex<double>* in, std::complex<double>* out);
// raw inverse DFT, e^{+2 pi i k.j/n}, unnormalized
void backward(int n, const std::complex<double>* in, std::complex<double>* out);

}  // namespace fft
}  // namespace wcgl
