#pragma once

#include <complex>
#include <vector>

namespace roughmdp::detail {

/// In-place radix-2 Cooley-Tukey transform; a.size() must be a power of two.
/// Forward convention: X_k = sum_j a_j exp(-2*pi*i*j*k/n). The inverse
/// applies the conjugate kernel and divides by n.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse);

} // namespace roughmdp::detail
