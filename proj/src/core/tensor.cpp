// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/tensor.h"

#include <cmath>
#include <sstream>

namespace ts3 {

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) {
            os << ",";
        }
        os << shape[i];
    }
    os << "]";
    return os.str();
}

}  // namespace ts3
