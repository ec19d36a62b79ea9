// Copyright 2026 ts3codec authors
// Minimal RIFF WAV reader/writer (mono 16-bit PCM) and a polyphase
// windowed-sinc resampler for bringing other sample rates to 16 kHz.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <string>
#include <vector>

namespace ts3::audio {

struct Waveform {
    std::vector<double> samples;  // amplitudes in [-1, 1]
    int                 sample_rate = 16000;
};

// Reads a mono 16-bit PCM WAV file. Amplitudes are integer PCM / 32768.
// When the file rate differs from target_rate the signal is resampled.
Waveform load_wav(const std::string & path, int target_rate = 16000);

// Writes mono 16-bit PCM. Samples are clamped to [-1, 1] before quantizing.
void save_wav(const std::string & path, const std::vector<double> & samples, int sample_rate = 16000);

// Rational-ratio polyphase resampler. Precomputes one windowed-sinc tap set
// per fractional phase (L phases after reducing to_rate/from_rate = L/M).
std::vector<double> resample(const std::vector<double> & x, int from_rate, int to_rate);

}  // namespace ts3::audio
