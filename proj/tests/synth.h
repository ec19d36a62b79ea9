// Copyright 2026 ts3codec authors
// Deterministic speech-like test signals: alternating voiced, fricative, and
// silent segments, with glottal pulse trains shaped by formant resonators.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/rng.h"

#include <cmath>
#include <vector>

namespace ts3::synth {

// Two-pole resonator applied in place: y[n] = x[n] + 2r cos(th) y[n-1] - r^2 y[n-2].
inline void resonate(std::vector<double> & x, double center_hz, double bandwidth_hz, int sample_rate) {
    const double r  = std::exp(-3.14159265358979323846 * bandwidth_hz / sample_rate);
    const double th = 2.0 * 3.14159265358979323846 * center_hz / sample_rate;
    const double a1 = 2.0 * r * std::cos(th);
    const double a2 = -r * r;
    double       y1 = 0.0, y2 = 0.0;
    for (double & v : x) {
        const double y = v + a1 * y1 + a2 * y2;
        y2             = y1;
        y1             = y;
        v              = y;
    }
}

// One utterance of roughly `seconds` length. Segments of 60-250 ms alternate
// between voiced vowels (pulse train through two formants), fricative noise,
// and short silences, so the spectrum and energy move the way speech does.
inline std::vector<double> utterance(Rng & rng, double seconds, int sample_rate = 16000) {
    const int           total = static_cast<int>(seconds * sample_rate);
    std::vector<double> out;
    out.reserve(static_cast<size_t>(total));

    while (static_cast<int>(out.size()) < total) {
        const int     kind    = static_cast<int>(rng.uniform_int(0, 5));
        const int     seg_len = static_cast<int>(rng.uniform(0.06, 0.25) * sample_rate);
        std::vector<double> seg(static_cast<size_t>(seg_len), 0.0);

        if (kind <= 2) {  // voiced vowel
            const double f0    = rng.uniform(85.0, 240.0);
            const double drift = rng.uniform(-20.0, 20.0);
            double       phase = 0.0;
            for (int n = 0; n < seg_len; ++n) {
                const double f = f0 + drift * n / seg_len;
                phase += f / sample_rate;
                if (phase >= 1.0) {
                    phase -= 1.0;
                    seg[static_cast<size_t>(n)] = 1.0;
                }
            }
            resonate(seg, rng.uniform(300.0, 900.0), 80.0, sample_rate);
            resonate(seg, rng.uniform(1000.0, 2600.0), 120.0, sample_rate);
        } else if (kind <= 4) {  // fricative
            for (double & v : seg) {
                v = rng.normal(0.0, 0.05);
            }
            resonate(seg, rng.uniform(2500.0, 6000.0), 800.0, sample_rate);
        }
        // kind == 5 stays silent

        // attack/release ramps avoid clicks at segment joins
        const int ramp = std::min(seg_len / 4, 160);
        for (int n = 0; n < ramp; ++n) {
            const double g = static_cast<double>(n) / ramp;
            seg[static_cast<size_t>(n)] *= g;
            seg[static_cast<size_t>(seg_len - 1 - n)] *= g;
        }
        out.insert(out.end(), seg.begin(), seg.end());
    }
    out.resize(static_cast<size_t>(total));

    double peak = 1e-9;
    for (double v : out) {
        peak = std::max(peak, std::abs(v));
    }
    const double gain = 0.5 / peak;
    for (double & v : out) {
        v *= gain;
    }
    return out;
}

// A corpus of `count` utterances with lengths between min_seconds and
// max_seconds, all from one seeded stream.
inline std::vector<std::vector<double>> corpus(uint64_t seed, int count, double min_seconds, double max_seconds,
                                               int sample_rate = 16000) {
    Rng                              rng(seed);
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        out.push_back(utterance(rng, rng.uniform(min_seconds, max_seconds), sample_rate));
    }
    return out;
}

}  // namespace ts3::synth
