// Copyright 2026 ts3codec authors
// Self-describing binary archive: JSON metadata plus named float64 tensors,
// CRC-protected and written atomically via a temp file.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/tensor.h"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace ts3 {

struct Archive {
    nlohmann::json                              meta;
    std::vector<std::pair<std::string, Tensor>> tensors;  // creation order

    const Tensor * find(const std::string & name) const;
};

// Layout (little-endian): magic "TS3K", u32 format version, u64 meta length,
// meta JSON bytes, u32 tensor count, then per tensor u32 name length, name,
// u32 ndim, i64 dims, f64 data; a trailing u32 CRC32 covers everything after
// the magic.
void    write_archive(const std::string & path, const Archive & a);
Archive read_archive(const std::string & path);

uint32_t crc32(const uint8_t * data, size_t n, uint32_t seed = 0);

}  // namespace ts3
