// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/fft.h"

#include "core/common.h"

#include <cmath>

namespace ts3::dsp {

bool is_pow2(size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

void fft_inplace(double * re, double * im, size_t n, bool inverse) {
    check(is_pow2(n), ErrCode::invalid_arg, "fft size must be a power of two");
    if (n == 1) {
        return;
    }

    // bit-reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }

    const double sign = inverse ? 1.0 : -1.0;
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const double wr = std::cos(ang);
        const double wi = std::sin(ang);
        for (size_t i = 0; i < n; i += len) {
            double cr = 1.0;
            double ci = 0.0;
            for (size_t k = 0; k < len / 2; ++k) {
                const size_t a = i + k;
                const size_t b = i + k + len / 2;
                const double tr = re[b] * cr - im[b] * ci;
                const double ti = re[b] * ci + im[b] * cr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                const double ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
    }
}

}  // namespace ts3::dsp
