// Copyright 2026 ts3codec authors
// Token serialization and streaming sessions: fixed-width MSB-first bit
// packing, the .ts3c container, rate accounting, and stateful encoder and
// decoder sessions that match offline processing bit for bit.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/model.h"

#include <cstdint>
#include <string>
#include <vector>

namespace ts3 {

struct Rates {
    double frame_rate;  // frames per second
    double token_rate;  // equal to frame_rate: one codebook, one token/frame
    double bitrate;     // token_rate * bits_per_token
};
Rates rates(const CodecConfig & cfg);

// Seconds of input the encoder must see before it can emit: one frame.
double algorithmic_latency_seconds(const CodecConfig & cfg);

// MSB-first concatenation of fixed-width big-endian fields; the final byte is
// zero-padded. Ids must fit in bits_per_token (1..31).
std::vector<uint8_t> pack_tokens(const std::vector<int32_t> & ids, int64_t bits_per_token);

// Exact inverse of pack_tokens. The payload must be exactly
// ceil(count * bits_per_token / 8) bytes and the unused trailing bits zero.
std::vector<int32_t> unpack_tokens(const std::vector<uint8_t> & bytes, int64_t bits_per_token, int64_t count);

// Parsed .ts3c stream. Header fields are stored big-endian on the wire:
// magic "TS3C", version u8, config id u8 (0 custom, 1..5 for X1..X5),
// sample_rate u32, frame_size u16, codebook_size u32, original_length u64,
// token_count u32, then the packed payload.
struct Container {
    std::string          config_id = "custom";
    int64_t              sample_rate = 0;
    int64_t              frame_size = 0;
    int64_t              codebook_size = 0;
    int64_t              original_length = 0;  // samples before padding
    std::vector<int32_t> tokens;
};

std::vector<uint8_t> serialize_container(const Container & c);
// Rejects bad magic, unknown versions, header fields inconsistent with a
// named config id, oversized ids, wrong payload length, and nonzero padding.
Container parse_container(const std::vector<uint8_t> & bytes);

// Whole-file conveniences; both check the container against the model config.
std::vector<uint8_t> encode_to_container(const CodecModel & model, const std::vector<double> & wave);
std::vector<double>  decode_from_container(const CodecModel & model, const std::vector<uint8_t> & bytes);

// Incremental encoder. Samples buffer in a remainder (< frame_size) until a
// frame completes; each complete frame emits exactly one token, bit-identical
// to the matching offline token. flush() zero-pads a non-empty remainder.
class EncoderSession {
public:
    explicit EncoderSession(const CodecModel & model);

    std::vector<int32_t> feed(const double * samples, size_t count);
    std::vector<int32_t> feed(const std::vector<double> & samples);
    std::vector<int32_t> flush();

    bool    flushed() const { return flushed_; }
    int64_t samples_consumed() const { return samples_in_; }
    int64_t tokens_emitted() const { return tokens_out_; }

private:
    const CodecModel &       model_;
    CodecModel::EncoderState st_;
    std::vector<double>      remainder_;
    bool                     flushed_    = false;
    int64_t                  samples_in_ = 0;
    int64_t                  tokens_out_ = 0;
};

// Incremental decoder. One token in, frame_size samples out, immediately;
// flush() emits nothing and only closes the session.
class DecoderSession {
public:
    explicit DecoderSession(const CodecModel & model);

    std::vector<double> feed(const std::vector<int32_t> & ids);
    std::vector<double> flush();

    bool    flushed() const { return flushed_; }
    int64_t tokens_consumed() const { return tokens_in_; }
    int64_t samples_emitted() const { return samples_out_; }

private:
    const CodecModel &       model_;
    CodecModel::DecoderState st_;
    bool                     flushed_     = false;
    int64_t                  tokens_in_   = 0;
    int64_t                  samples_out_ = 0;
};

}  // namespace ts3
