// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/checkpoint.h"

#include "core/common.h"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace ts3 {

namespace {

constexpr char     kMagic[4]       = {'T', 'S', '3', 'K'};
constexpr uint32_t kArchiveVersion = 1;

uint32_t crc_table_entry(uint32_t i) {
    uint32_t c = i;
    for (int k = 0; k < 8; ++k) {
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    }
    return c;
}

struct ByteSink {
    std::vector<uint8_t> bytes;

    void put(const void * p, size_t n) {
        const uint8_t * b = static_cast<const uint8_t *>(p);
        bytes.insert(bytes.end(), b, b + n);
    }
    void u32(uint32_t v) {
        uint8_t b[4];
        for (int i = 0; i < 4; ++i) {
            b[i] = static_cast<uint8_t>(v >> (8 * i));
        }
        put(b, 4);
    }
    void u64(uint64_t v) {
        uint8_t b[8];
        for (int i = 0; i < 8; ++i) {
            b[i] = static_cast<uint8_t>(v >> (8 * i));
        }
        put(b, 8);
    }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
};

struct ByteSource {
    const std::vector<uint8_t> & bytes;
    size_t                       pos = 0;

    void need(size_t n) const {
        check(pos + n <= bytes.size(), ErrCode::format, "checkpoint: truncated archive");
    }
    void get(void * p, size_t n) {
        need(n);
        std::memcpy(p, bytes.data() + pos, n);
        pos += n;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<uint32_t>(bytes[pos + static_cast<size_t>(i)]) << (8 * i);
        }
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<uint64_t>(bytes[pos + static_cast<size_t>(i)]) << (8 * i);
        }
        pos += 8;
        return v;
    }
    double f64() {
        const uint64_t bits = u64();
        double         v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

}  // namespace

uint32_t crc32(const uint8_t * data, size_t n, uint32_t seed) {
    static const auto table = [] {
        std::vector<uint32_t> t(256);
        for (uint32_t i = 0; i < 256; ++i) {
            t[i] = crc_table_entry(i);
        }
        return t;
    }();
    uint32_t c = seed ^ 0xFFFFFFFFu;
    for (size_t i = 0; i < n; ++i) {
        c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFu;
}

const Tensor * Archive::find(const std::string & name) const {
    for (const auto & [n, t] : tensors) {
        if (n == name) {
            return &t;
        }
    }
    return nullptr;
}

void write_archive(const std::string & path, const Archive & a) {
    ByteSink body;
    body.u32(kArchiveVersion);
    const std::string meta = a.meta.dump();
    body.u64(meta.size());
    body.put(meta.data(), meta.size());
    body.u32(static_cast<uint32_t>(a.tensors.size()));
    for (const auto & [name, t] : a.tensors) {
        body.u32(static_cast<uint32_t>(name.size()));
        body.put(name.data(), name.size());
        body.u32(static_cast<uint32_t>(t.shape.size()));
        for (int64_t d : t.shape) {
            body.u64(static_cast<uint64_t>(d));
        }
        for (double v : t.data) {
            body.f64(v);
        }
    }
    const uint32_t crc = crc32(body.bytes.data(), body.bytes.size());

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        check(out.good(), ErrCode::io, "checkpoint: cannot open '" + tmp + "' for writing");
        out.write(kMagic, 4);
        out.write(reinterpret_cast<const char *>(body.bytes.data()), static_cast<std::streamsize>(body.bytes.size()));
        ByteSink tail;
        tail.u32(crc);
        out.write(reinterpret_cast<const char *>(tail.bytes.data()), 4);
        check(out.good(), ErrCode::io, "checkpoint: write to '" + tmp + "' failed");
    }
    check(std::rename(tmp.c_str(), path.c_str()) == 0, ErrCode::io,
          "checkpoint: cannot move '" + tmp + "' into place at '" + path + "'");
}

Archive read_archive(const std::string & path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), ErrCode::io, "checkpoint: cannot open '" + path + "'");
    std::vector<uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    check(raw.size() >= 12, ErrCode::format, "checkpoint: file too small to be an archive");
    check(std::memcmp(raw.data(), kMagic, 4) == 0, ErrCode::format,
          "checkpoint: bad magic, not a checkpoint archive");

    const std::vector<uint8_t> body(raw.begin() + 4, raw.end() - 4);
    ByteSource                 tail{raw};
    tail.pos           = raw.size() - 4;
    const uint32_t got = tail.u32();
    check(crc32(body.data(), body.size()) == got, ErrCode::format, "checkpoint: CRC mismatch, archive corrupt");

    ByteSource src{body};
    const uint32_t version = src.u32();
    check(version == kArchiveVersion, ErrCode::format,
          "checkpoint: unsupported archive version " + std::to_string(version) + " (expected " +
              std::to_string(kArchiveVersion) + ")");

    Archive a;
    const uint64_t meta_len = src.u64();
    std::string    meta(meta_len, '\0');
    src.get(meta.data(), meta_len);
    try {
        a.meta = nlohmann::json::parse(meta);
    } catch (const nlohmann::json::exception & e) {
        fail(ErrCode::format, std::string("checkpoint: metadata is not valid JSON: ") + e.what());
    }

    const uint32_t count = src.u32();
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t name_len = src.u32();
        std::string    name(name_len, '\0');
        src.get(name.data(), name_len);
        const uint32_t       ndim = src.u32();
        check(ndim <= 8, ErrCode::format, "checkpoint: implausible tensor rank");
        std::vector<int64_t> shape(ndim);
        const int64_t        avail = static_cast<int64_t>((body.size() - src.pos) / 8);
        int64_t              numel = 1;
        for (uint32_t d = 0; d < ndim; ++d) {
            shape[d] = static_cast<int64_t>(src.u64());
            check(shape[d] >= 0 && (shape[d] == 0 || numel <= avail / shape[d]), ErrCode::format,
                  "checkpoint: tensor larger than the remaining archive bytes");
            numel *= shape[d];
        }
        Tensor t(shape);
        for (int64_t v = 0; v < numel; ++v) {
            t.at(v) = src.f64();
        }
        a.tensors.emplace_back(std::move(name), std::move(t));
    }
    check(src.pos == body.size(), ErrCode::format, "checkpoint: trailing bytes after the last tensor");
    return a;
}

}  // namespace ts3
