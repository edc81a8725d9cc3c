#pragma once

// Minimal iterative radix-2 FFT, enough for the divide-and-conquer renewal
// convolution.  Internal to src/.

#include <complex>
#include <cstddef>
#include <vector>

namespace lab::detail {

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// c[k] = sum_j a[j] * b[k-j], k < a.size() + b.size() - 1
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b);

} // namespace lab::detail
