// Copyright 2026 ts3codec authors
// Spectral feature extraction: mel filterbanks, magnitude/mel spectrograms,
// and MFCCs. All routines are windowed without center padding so frame
// counts match the taped spectral ops exactly.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/tensor.h"

#include <cstdint>
#include <vector>

namespace ts3::dsp {

// HTK mel scale: 2595 * log10(1 + hz / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters with unit peaks over [0, sample_rate/2], returned as a
// [n_mels, fft_size/2 + 1] matrix against FFT bin center frequencies.
Tensor mel_filterbank(int64_t n_mels, int64_t fft_size, double sample_rate);

// Periodic Hann window of the given length.
std::vector<double> hann_window(int64_t length);

// Magnitude spectrogram [n_frames, fft_size/2 + 1]. Frames of window_size
// samples advance by hop with no centering (n_frames = 1 + (T - window)/hop),
// are Hann windowed, and zero padded up to fft_size when window_size is
// smaller. fft_size must be a power of two and T >= window_size.
Tensor magnitude_spectrogram(const std::vector<double> & x, int64_t window_size, int64_t fft_size, int64_t hop);

// Mel magnitude spectrogram [n_frames, n_mels] with window_size == fft_size.
Tensor mel_spectrogram(const std::vector<double> & x, int64_t fft_size, int64_t hop, int64_t n_mels,
                       double sample_rate);

// MFCC matrix [n_frames, n_coeffs]: log mel power spectrogram followed by an
// orthonormal DCT-II; coefficient 0 is dropped, so column k holds C_{k+1}.
Tensor mfcc(const std::vector<double> & x, int64_t window_size, int64_t fft_size, int64_t hop, int64_t n_mels,
            int64_t n_coeffs, double sample_rate);

}  // namespace ts3::dsp
