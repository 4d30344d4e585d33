#pragma once

#include <complex>
#include <span>

namespace isac::fft {

/// In-place unnormalized DFT, kernel e^{-j 2 pi k i / n}.
void forward(std::span<std::complex<double>> x);

/// In-place unnormalized inverse DFT, kernel e^{+j 2 pi k i / n}.
void inverse(std::span<std::complex<double>> x);

}  // namespace isac::fft
