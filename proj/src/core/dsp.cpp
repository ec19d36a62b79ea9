// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/dsp.h"

#include "core/common.h"
#include "core/fft.h"

#include <cmath>

namespace ts3::dsp {

double hz_to_mel(double hz) {
    return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Tensor mel_filterbank(int64_t n_mels, int64_t fft_size, double sample_rate) {
    check(n_mels >= 1, ErrCode::invalid_arg, "mel_filterbank: n_mels must be >= 1");
    check(is_pow2(static_cast<size_t>(fft_size)), ErrCode::invalid_arg,
          "mel_filterbank: fft_size must be a power of two");
    const int64_t bins = fft_size / 2 + 1;

    // n_mels + 2 points equally spaced on the mel axis, mapped back to hz
    const double        mel_max = hz_to_mel(sample_rate / 2.0);
    std::vector<double> edges(static_cast<size_t>(n_mels + 2));
    for (int64_t m = 0; m < n_mels + 2; ++m) {
        edges[static_cast<size_t>(m)] = mel_to_hz(mel_max * static_cast<double>(m) / static_cast<double>(n_mels + 1));
    }

    Tensor fb({n_mels, bins});
    for (int64_t m = 0; m < n_mels; ++m) {
        const double lo  = edges[static_cast<size_t>(m)];
        const double mid = edges[static_cast<size_t>(m + 1)];
        const double hi  = edges[static_cast<size_t>(m + 2)];
        for (int64_t b = 0; b < bins; ++b) {
            const double f    = sample_rate * static_cast<double>(b) / static_cast<double>(fft_size);
            const double up   = (f - lo) / (mid - lo);
            const double down = (hi - f) / (hi - mid);
            fb.row(m)[b]      = std::max(0.0, std::min(up, down));
        }
    }
    return fb;
}

std::vector<double> hann_window(int64_t length) {
    std::vector<double> w(static_cast<size_t>(length));
    for (int64_t i = 0; i < length; ++i) {
        w[static_cast<size_t>(i)] =
            0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(length));
    }
    return w;
}

Tensor magnitude_spectrogram(const std::vector<double> & x, int64_t window_size, int64_t fft_size, int64_t hop) {
    check(window_size >= 1 && hop >= 1, ErrCode::invalid_arg, "spectrogram: window and hop must be >= 1");
    check(fft_size >= window_size, ErrCode::invalid_arg, "spectrogram: fft_size must be >= window_size");
    check(is_pow2(static_cast<size_t>(fft_size)), ErrCode::invalid_arg,
          "spectrogram: fft_size must be a power of two");
    const int64_t t = static_cast<int64_t>(x.size());
    check(t >= window_size, ErrCode::invalid_arg,
          "spectrogram: input of " + std::to_string(t) + " samples is shorter than the " +
              std::to_string(window_size) + "-sample window");

    const int64_t             n_frames = 1 + (t - window_size) / hop;
    const int64_t             bins     = fft_size / 2 + 1;
    const std::vector<double> win      = hann_window(window_size);

    Tensor              out({n_frames, bins});
    std::vector<double> re(static_cast<size_t>(fft_size));
    std::vector<double> im(static_cast<size_t>(fft_size));
    for (int64_t f = 0; f < n_frames; ++f) {
        for (int64_t i = 0; i < window_size; ++i) {
            re[static_cast<size_t>(i)] =
                x[static_cast<size_t>(f * hop + i)] * win[static_cast<size_t>(i)];
        }
        std::fill(re.begin() + window_size, re.end(), 0.0);
        std::fill(im.begin(), im.end(), 0.0);
        fft_inplace(re.data(), im.data(), static_cast<size_t>(fft_size), false);
        for (int64_t b = 0; b < bins; ++b) {
            out.row(f)[b] = std::sqrt(re[static_cast<size_t>(b)] * re[static_cast<size_t>(b)] +
                                      im[static_cast<size_t>(b)] * im[static_cast<size_t>(b)]);
        }
    }
    return out;
}

Tensor mel_spectrogram(const std::vector<double> & x, int64_t fft_size, int64_t hop, int64_t n_mels,
                       double sample_rate) {
    const Tensor  mag = magnitude_spectrogram(x, fft_size, fft_size, hop);
    const Tensor  fb  = mel_filterbank(n_mels, fft_size, sample_rate);
    const int64_t n_frames = mag.dim(0);
    const int64_t bins     = mag.dim(1);

    Tensor out({n_frames, n_mels});
    for (int64_t f = 0; f < n_frames; ++f) {
        for (int64_t m = 0; m < n_mels; ++m) {
            double acc = 0.0;
            for (int64_t b = 0; b < bins; ++b) {
                acc += fb.row(m)[b] * mag.row(f)[b];
            }
            out.row(f)[m] = acc;
        }
    }
    return out;
}

Tensor mfcc(const std::vector<double> & x, int64_t window_size, int64_t fft_size, int64_t hop, int64_t n_mels,
            int64_t n_coeffs, double sample_rate) {
    check(n_coeffs >= 1 && n_coeffs < n_mels, ErrCode::invalid_arg, "mfcc: need 1 <= n_coeffs < n_mels");
    const Tensor  mag      = magnitude_spectrogram(x, window_size, fft_size, hop);
    const Tensor  fb       = mel_filterbank(n_mels, fft_size, sample_rate);
    const int64_t n_frames = mag.dim(0);
    const int64_t bins     = mag.dim(1);

    Tensor              out({n_frames, n_coeffs});
    std::vector<double> logmel(static_cast<size_t>(n_mels));
    const double        scale0 = std::sqrt(1.0 / static_cast<double>(n_mels));
    const double        scalek = std::sqrt(2.0 / static_cast<double>(n_mels));
    (void)scale0;  // C0 is dropped; kept for the formula's record
    for (int64_t f = 0; f < n_frames; ++f) {
        for (int64_t m = 0; m < n_mels; ++m) {
            double acc = 0.0;
            for (int64_t b = 0; b < bins; ++b) {
                acc += fb.row(m)[b] * mag.row(f)[b] * mag.row(f)[b];
            }
            logmel[static_cast<size_t>(m)] = std::log(std::max(acc, 1e-10));
        }
        // orthonormal DCT-II, coefficients 1..n_coeffs
        for (int64_t k = 1; k <= n_coeffs; ++k) {
            double acc = 0.0;
            for (int64_t m = 0; m < n_mels; ++m) {
                acc += logmel[static_cast<size_t>(m)] *
                       std::cos(M_PI * static_cast<double>(k) * (2.0 * static_cast<double>(m) + 1.0) /
                                (2.0 * static_cast<double>(n_mels)));
            }
            out.row(f)[k - 1] = scalek * acc;
        }
    }
    return out;
}

}  // namespace ts3::dsp
