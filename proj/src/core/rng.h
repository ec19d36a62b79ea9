// Copyright 2026 ts3codec authors
// Seeded RNG wrapper with exact text serialization for reproducible
// training resume.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace ts3 {

class Rng {
public:
    explicit Rng(uint64_t seed = 0) : engine_(seed) {}

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(engine_);
    }

    double normal(double mean, double stddev) {
        std::normal_distribution<double> d(mean, stddev);
        return d(engine_);
    }

    // inclusive bounds
    int64_t uniform_int(int64_t lo, int64_t hi) {
        std::uniform_int_distribution<int64_t> d(lo, hi);
        return d(engine_);
    }

    std::mt19937_64 & engine() { return engine_; }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void deserialize(const std::string & s) {
        std::istringstream is(s);
        is >> engine_;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ts3
