// Copyright 2026 ts3codec authors
// Error codes and exception type shared across the core library.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ts3 {

enum class ErrCode {
    invalid_arg = 1,  // bad argument to an API call
    config      = 2,  // invalid or inconsistent configuration
    data        = 3,  // corpus / input-content problems
    io          = 4,  // filesystem failures
    format      = 5,  // container or checkpoint parse failures
    state       = 6,  // session lifecycle misuse
    runtime     = 7,  // numeric failures, aborted runs
};

class Error : public std::runtime_error {
public:
    Error(ErrCode code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
    ErrCode code() const noexcept { return code_; }

private:
    ErrCode code_;
};

[[noreturn]] inline void fail(ErrCode code, const std::string & msg) {
    throw Error(code, msg);
}

inline void check(bool cond, ErrCode code, const std::string & msg) {
    if (!cond) {
        fail(code, msg);
    }
}

}  // namespace ts3
