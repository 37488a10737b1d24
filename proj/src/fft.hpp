#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace arw::detail {

// Half-spectrum layout used by the real transforms: d-1 full axes of length M
// followed by a last axis of length M/2 + 1, last axis fastest.
std::size_t half_spectrum_size(int d, int M);

// Unnormalized inverse: out[j] = sum_k spectrum[k] exp(+2 pi i k.j / M).
// The spectrum must be Hermitian-consistent on the stored half.
std::vector<double> inverse_real_transform(int d, int M, std::vector<std::complex<double>> spectrum);

// Unnormalized forward: out[k] = sum_j values[j] exp(-2 pi i k.j / M).
std::vector<std::complex<double>> forward_real_transform(int d, int M, std::span<const double> values);

}  // namespace arw::detail
