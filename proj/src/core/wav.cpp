// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/wav.h"

#include "core/common.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>

namespace ts3::audio {

namespace {

uint32_t read_u32(std::istream & s) {
    unsigned char b[4];
    s.read(reinterpret_cast<char *>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) | (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream & s) {
    unsigned char b[2];
    s.read(reinterpret_cast<char *>(b), 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream & s, uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    s.write(b, 4);
}

void write_u16(std::ostream & s, uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    s.write(b, 2);
}

}  // namespace

Waveform load_wav(const std::string & path, int target_rate) {
    std::ifstream f(path, std::ios::binary);
    check(f.good(), ErrCode::io, "load_wav: cannot open " + path);

    char tag[4];
    f.read(tag, 4);
    check(f.good() && std::memcmp(tag, "RIFF", 4) == 0, ErrCode::format, "load_wav: not a RIFF file: " + path);
    (void) read_u32(f);  // riff size
    f.read(tag, 4);
    check(f.good() && std::memcmp(tag, "WAVE", 4) == 0, ErrCode::format, "load_wav: not a WAVE file: " + path);

    bool     have_fmt = false;
    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    std::vector<int16_t> pcm;
    bool have_data = false;

    while (f.peek() != EOF) {
        f.read(tag, 4);
        if (!f.good()) {
            break;
        }
        const uint32_t size = read_u32(f);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            check(size >= 16, ErrCode::format, "load_wav: fmt chunk too small");
            format   = read_u16(f);
            channels = read_u16(f);
            rate     = read_u32(f);
            (void) read_u32(f);  // byte rate
            (void) read_u16(f);  // block align
            bits = read_u16(f);
            f.ignore(size - 16 + (size & 1));
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            check(have_fmt, ErrCode::format, "load_wav: data chunk before fmt");
            pcm.resize(size / 2);
            f.read(reinterpret_cast<char *>(pcm.data()), static_cast<std::streamsize>(size / 2 * 2));
            check(f.good(), ErrCode::format, "load_wav: truncated data chunk");
            if (size & 1) {
                f.ignore(1);
            }
            have_data = true;
        } else {
            f.ignore(size + (size & 1));
        }
    }
    check(have_fmt && have_data, ErrCode::format, "load_wav: missing fmt or data chunk in " + path);
    check(format == 1, ErrCode::format, "load_wav: only PCM (format 1) is supported");
    check(bits == 16, ErrCode::format, "load_wav: only 16-bit samples are supported");
    check(channels == 1, ErrCode::format, "load_wav: only mono files are supported");
    check(rate > 0, ErrCode::format, "load_wav: invalid sample rate");

    Waveform w;
    w.sample_rate = target_rate;
    w.samples.resize(pcm.size());
    for (size_t i = 0; i < pcm.size(); ++i) {
        w.samples[i] = static_cast<double>(pcm[i]) / 32768.0;
    }
    if (static_cast<int>(rate) != target_rate) {
        w.samples = resample(w.samples, static_cast<int>(rate), target_rate);
    }
    return w;
}

void save_wav(const std::string & path, const std::vector<double> & samples, int sample_rate) {
    std::ofstream f(path, std::ios::binary);
    check(f.good(), ErrCode::io, "save_wav: cannot open " + path);

    const uint32_t data_size = static_cast<uint32_t>(samples.size() * 2);
    f.write("RIFF", 4);
    write_u32(f, 36 + data_size);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    write_u32(f, 16);
    write_u16(f, 1);  // PCM
    write_u16(f, 1);  // mono
    write_u32(f, static_cast<uint32_t>(sample_rate));
    write_u32(f, static_cast<uint32_t>(sample_rate * 2));
    write_u16(f, 2);   // block align
    write_u16(f, 16);  // bits
    f.write("data", 4);
    write_u32(f, data_size);
    for (double v : samples) {
        const double  c = std::clamp(v, -1.0, 1.0);
        const int32_t q = static_cast<int32_t>(std::lrint(c * 32768.0));
        const int16_t s = static_cast<int16_t>(std::clamp(q, -32768, 32767));
        const char    b[2] = {static_cast<char>(s & 0xff), static_cast<char>((s >> 8) & 0xff)};
        f.write(b, 2);
    }
    check(f.good(), ErrCode::io, "save_wav: write failed for " + path);
}

std::vector<double> resample(const std::vector<double> & x, int from_rate, int to_rate) {
    check(from_rate > 0 && to_rate > 0, ErrCode::invalid_arg, "resample: rates must be positive");
    if (from_rate == to_rate || x.empty()) {
        return x;
    }
    const int     g = std::gcd(from_rate, to_rate);
    const int64_t l = to_rate / g;   // upsample factor (number of phases)
    const int64_t m = from_rate / g; // downsample factor

    // windowed-sinc lowpass at 0.45 of the narrower Nyquist, ~16 input-sample
    // zero crossings of support on the wider side
    const double  ratio  = static_cast<double>(to_rate) / static_cast<double>(from_rate);
    const double  fc     = 0.45 * std::min(1.0, ratio);
    const int64_t radius = static_cast<int64_t>(std::ceil(8.0 / fc));

    // taps[p][k] = h(k - p/L) for input offsets k in [-radius, radius]
    const int64_t       width = 2 * radius + 1;
    std::vector<double> taps(static_cast<size_t>(l * width));
    for (int64_t p = 0; p < l; ++p) {
        for (int64_t k = -radius; k <= radius; ++k) {
            const double u = static_cast<double>(k) - static_cast<double>(p) / static_cast<double>(l);
            double       h;
            if (u == 0.0) {
                h = 2.0 * fc;
            } else {
                h = std::sin(2.0 * M_PI * fc * u) / (M_PI * u);
            }
            const double win = 0.5 + 0.5 * std::cos(M_PI * u / static_cast<double>(radius + 1));
            taps[static_cast<size_t>(p * width + (k + radius))] = h * win;
        }
    }

    const int64_t       in_len  = static_cast<int64_t>(x.size());
    const int64_t       out_len = (in_len * l) / m;
    std::vector<double> y(static_cast<size_t>(out_len), 0.0);
    for (int64_t j = 0; j < out_len; ++j) {
        const int64_t num   = j * m;          // output time = num / L input samples
        const int64_t base  = num / l;
        const int64_t phase = num % l;
        const double * h    = taps.data() + phase * width;
        double acc          = 0.0;
        for (int64_t k = -radius; k <= radius; ++k) {
            const int64_t i = base + k;
            if (i >= 0 && i < in_len) {
                acc += x[static_cast<size_t>(i)] * h[k + radius];
            }
        }
        y[static_cast<size_t>(j)] = acc;
    }
    return y;
}

}  // namespace ts3::audio
