#pragma once

#include "wk/util.hpp"

namespace wk {

// Unitary in-place FFT along the given axes of an NdArray (complex).
// sign = -1: forward  (1/sqrt(n)) sum_j x_j e^{-2pi i jk/n} per axis
// sign = +1: backward (1/sqrt(n)) sum_k X_k e^{+2pi i jk/n}
void fft_unitary(NdArray& a, const std::vector<int>& axes, int sign);

// Batched 1-D unnormalized backward transforms: for each of `howmany`
// contiguous rows of length n, y_r = sum_k x_k e^{+2pi i kr/n}.
void fft_rows_backward(cplx* data, int n, int howmany);
void fft_rows_forward(cplx* data, int n, int howmany);

// Signed frequency of FFT bin k on an n-lattice: 0..n/2-1, -n/2..-1.
inline int freq_of_bin(int k, int n) { return k < n - n / 2 ? k : k - n; }
// FFT bin of signed frequency f in [-n/2, n/2).
inline int bin_of_freq(int f, int n) { return f >= 0 ? f : f + n; }

}  // namespace wk
