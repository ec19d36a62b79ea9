// Copyright 2026 ts3codec authors
// Iterative radix-2 FFT for the power-of-two sizes used by the spectral
// losses and metrics. Fixed butterfly order keeps results reproducible.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstddef>
#include <vector>

namespace ts3::dsp {

// In-place complex FFT over separate re/im arrays; n must be a power of two.
// inverse=true applies exp(+i...) without the 1/n scale.
void fft_inplace(double * re, double * im, size_t n, bool inverse);

bool is_pow2(size_t n);

}  // namespace ts3::dsp
