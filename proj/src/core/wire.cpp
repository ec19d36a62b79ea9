// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/wire.h"

#include <algorithm>
#include <cstring>

namespace ts3 {

namespace {

constexpr char    kMagic[4]  = {'T', 'S', '3', 'C'};
constexpr uint8_t kVersion   = 1;
constexpr size_t  kHeaderLen = 4 + 1 + 1 + 4 + 2 + 4 + 8 + 4;

const char * const kNamedIds[5] = {"X1", "X2", "X3", "X4", "X5"};

uint8_t id_byte(const std::string & config_id) {
    for (int i = 0; i < 5; ++i) {
        if (config_id == kNamedIds[i]) {
            return static_cast<uint8_t>(i + 1);
        }
    }
    check(config_id == "custom", ErrCode::invalid_arg,
          "container: unknown config id '" + config_id + "'");
    return 0;
}

void put_be(std::vector<uint8_t> & out, uint64_t v, int bytes) {
    for (int i = bytes - 1; i >= 0; --i) {
        out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
}

uint64_t get_be(const std::vector<uint8_t> & in, size_t pos, int bytes) {
    uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v = v << 8 | in[pos + static_cast<size_t>(i)];
    }
    return v;
}

int64_t payload_bytes(int64_t count, int64_t bits) {
    return (count * bits + 7) / 8;
}

void check_ids(const std::vector<int32_t> & ids, int64_t limit, const char * what) {
    for (size_t i = 0; i < ids.size(); ++i) {
        check(ids[i] >= 0 && ids[i] < limit, ErrCode::invalid_arg,
              std::string(what) + ": token " + std::to_string(ids[i]) + " at position " + std::to_string(i) +
                  " is outside [0, " + std::to_string(limit) + ")");
    }
}

}  // namespace

Rates rates(const CodecConfig & cfg) {
    cfg.validate();
    Rates r;
    r.frame_rate = cfg.frame_rate();
    r.token_rate = cfg.token_rate();
    r.bitrate    = cfg.bitrate();
    return r;
}

double algorithmic_latency_seconds(const CodecConfig & cfg) {
    return static_cast<double>(cfg.frame_size) / static_cast<double>(cfg.sample_rate);
}

std::vector<uint8_t> pack_tokens(const std::vector<int32_t> & ids, int64_t bits_per_token) {
    check(bits_per_token >= 1 && bits_per_token <= 31, ErrCode::invalid_arg,
          "pack_tokens: bits_per_token must lie in [1, 31]");
    check_ids(ids, int64_t{1} << bits_per_token, "pack_tokens");

    std::vector<uint8_t> out(static_cast<size_t>(payload_bytes(static_cast<int64_t>(ids.size()), bits_per_token)),
                             0);
    int64_t bitpos = 0;
    for (int32_t id : ids) {
        for (int64_t b = bits_per_token - 1; b >= 0; --b, ++bitpos) {
            if (id >> b & 1) {
                out[static_cast<size_t>(bitpos >> 3)] |= static_cast<uint8_t>(1 << (7 - (bitpos & 7)));
            }
        }
    }
    return out;
}

std::vector<int32_t> unpack_tokens(const std::vector<uint8_t> & bytes, int64_t bits_per_token, int64_t count) {
    check(bits_per_token >= 1 && bits_per_token <= 31, ErrCode::invalid_arg,
          "unpack_tokens: bits_per_token must lie in [1, 31]");
    check(count >= 0, ErrCode::invalid_arg, "unpack_tokens: negative token count");
    const int64_t need = payload_bytes(count, bits_per_token);
    check(static_cast<int64_t>(bytes.size()) >= need, ErrCode::format,
          "unpack_tokens: payload of " + std::to_string(bytes.size()) + " bytes is truncated, " +
              std::to_string(need) + " needed for " + std::to_string(count) + " tokens");
    check(static_cast<int64_t>(bytes.size()) == need, ErrCode::format,
          "unpack_tokens: payload has " + std::to_string(bytes.size() - static_cast<size_t>(need)) +
              " extra bytes");

    std::vector<int32_t> ids(static_cast<size_t>(count), 0);
    int64_t              bitpos = 0;
    for (int64_t i = 0; i < count; ++i) {
        int64_t v = 0;
        for (int64_t b = 0; b < bits_per_token; ++b, ++bitpos) {
            v = v << 1 | (bytes[static_cast<size_t>(bitpos >> 3)] >> (7 - (bitpos & 7)) & 1);
        }
        ids[static_cast<size_t>(i)] = static_cast<int32_t>(v);
    }
    for (int64_t b = bitpos; b < static_cast<int64_t>(bytes.size()) * 8; ++b) {
        check((bytes[static_cast<size_t>(b >> 3)] >> (7 - (b & 7)) & 1) == 0, ErrCode::format,
              "unpack_tokens: nonzero padding bits after the last token");
    }
    return ids;
}

std::vector<uint8_t> serialize_container(const Container & c) {
    check(c.sample_rate > 0 && c.sample_rate <= 0xFFFFFFFFll, ErrCode::invalid_arg,
          "container: sample_rate out of range");
    check(c.frame_size > 0 && c.frame_size <= 0xFFFF, ErrCode::invalid_arg, "container: frame_size out of range");
    check(c.codebook_size >= 2 && c.codebook_size <= 0xFFFFFFFFll, ErrCode::invalid_arg,
          "container: codebook_size out of range");
    check(c.original_length >= 0, ErrCode::invalid_arg, "container: negative original_length");
    check(static_cast<int64_t>(c.tokens.size()) <= 0xFFFFFFFFll, ErrCode::invalid_arg,
          "container: too many tokens");
    check(c.original_length <= static_cast<int64_t>(c.tokens.size()) * c.frame_size, ErrCode::invalid_arg,
          "container: original_length exceeds the decodable sample count");

    int64_t bits = 0;
    while ((int64_t{1} << bits) < c.codebook_size) {
        ++bits;
    }
    check_ids(c.tokens, c.codebook_size, "container");

    std::vector<uint8_t> out;
    out.reserve(kHeaderLen + static_cast<size_t>(payload_bytes(static_cast<int64_t>(c.tokens.size()), bits)));
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    out.push_back(id_byte(c.config_id));
    put_be(out, static_cast<uint64_t>(c.sample_rate), 4);
    put_be(out, static_cast<uint64_t>(c.frame_size), 2);
    put_be(out, static_cast<uint64_t>(c.codebook_size), 4);
    put_be(out, static_cast<uint64_t>(c.original_length), 8);
    put_be(out, static_cast<uint64_t>(c.tokens.size()), 4);
    const std::vector<uint8_t> payload = pack_tokens(c.tokens, bits);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Container parse_container(const std::vector<uint8_t> & bytes) {
    check(bytes.size() >= kHeaderLen, ErrCode::format, "container: shorter than the fixed header");
    check(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrCode::format, "container: bad magic, not a ts3c stream");
    check(bytes[4] == kVersion, ErrCode::format,
          "container: unsupported version " + std::to_string(bytes[4]) + " (expected " +
              std::to_string(kVersion) + ")");
    const uint8_t idb = bytes[5];
    check(idb <= 5, ErrCode::format, "container: unknown config id byte " + std::to_string(idb));

    Container c;
    c.config_id       = idb == 0 ? "custom" : kNamedIds[idb - 1];
    c.sample_rate     = static_cast<int64_t>(get_be(bytes, 6, 4));
    c.frame_size      = static_cast<int64_t>(get_be(bytes, 10, 2));
    c.codebook_size   = static_cast<int64_t>(get_be(bytes, 12, 4));
    c.original_length = static_cast<int64_t>(get_be(bytes, 16, 8));
    const int64_t token_count = static_cast<int64_t>(get_be(bytes, 24, 4));

    check(c.sample_rate > 0, ErrCode::format, "container: zero sample_rate");
    check(c.frame_size > 0, ErrCode::format, "container: zero frame_size");
    check(c.codebook_size >= 2, ErrCode::format, "container: codebook_size below 2");
    if (idb != 0) {
        const CodecConfig named = named_config(c.config_id);
        check(c.sample_rate == named.sample_rate && c.frame_size == named.frame_size &&
                  c.codebook_size == named.codebook_size,
              ErrCode::format, "container: header fields do not match config '" + c.config_id + "'");
    }
    check(c.original_length <= token_count * c.frame_size, ErrCode::format,
          "container: original_length exceeds the decodable sample count");

    int64_t bits = 0;
    while ((int64_t{1} << bits) < c.codebook_size) {
        ++bits;
    }
    const std::vector<uint8_t> payload(bytes.begin() + kHeaderLen, bytes.end());
    c.tokens = unpack_tokens(payload, bits, token_count);
    for (size_t i = 0; i < c.tokens.size(); ++i) {
        check(c.tokens[i] < c.codebook_size, ErrCode::format,
              "container: token " + std::to_string(c.tokens[i]) + " at position " + std::to_string(i) +
                  " is outside the codebook");
    }
    return c;
}

std::vector<uint8_t> encode_to_container(const CodecModel & model, const std::vector<double> & wave) {
    Container c;
    c.config_id       = model.config().config_id;
    c.sample_rate     = model.config().sample_rate;
    c.frame_size      = model.config().frame_size;
    c.codebook_size   = model.config().codebook_size;
    c.original_length = static_cast<int64_t>(wave.size());
    c.tokens          = model.encode(wave);
    return serialize_container(c);
}

std::vector<double> decode_from_container(const CodecModel & model, const std::vector<uint8_t> & bytes) {
    const Container c = parse_container(bytes);
    check(c.sample_rate == model.config().sample_rate && c.frame_size == model.config().frame_size &&
              c.codebook_size == model.config().codebook_size,
          ErrCode::invalid_arg,
          "decode: the stream was produced for a different codec shape (stream " + std::to_string(c.sample_rate) +
              " Hz, frame " + std::to_string(c.frame_size) + ", codebook " + std::to_string(c.codebook_size) +
              ")");
    return model.decode(c.tokens, c.original_length);
}

EncoderSession::EncoderSession(const CodecModel & model) : model_(model), st_(model.make_encoder_state()) {
    remainder_.reserve(static_cast<size_t>(model.config().frame_size));
}

std::vector<int32_t> EncoderSession::feed(const double * samples, size_t count) {
    check(!flushed_, ErrCode::state, "encoder session: feed after flush");
    const size_t         frame = static_cast<size_t>(model_.config().frame_size);
    std::vector<int32_t> out;
    size_t               pos = 0;
    while (pos < count) {
        const size_t take = std::min(frame - remainder_.size(), count - pos);
        remainder_.insert(remainder_.end(), samples + pos, samples + pos + take);
        pos += take;
        if (remainder_.size() == frame) {
            out.push_back(model_.encode_frame(st_, remainder_.data()));
            remainder_.clear();
        }
    }
    samples_in_ += static_cast<int64_t>(count);
    tokens_out_ += static_cast<int64_t>(out.size());
    return out;
}

std::vector<int32_t> EncoderSession::feed(const std::vector<double> & samples) {
    return feed(samples.data(), samples.size());
}

std::vector<int32_t> EncoderSession::flush() {
    check(!flushed_, ErrCode::state, "encoder session: flush called twice");
    flushed_ = true;
    std::vector<int32_t> out;
    if (!remainder_.empty()) {
        remainder_.resize(static_cast<size_t>(model_.config().frame_size), 0.0);
        out.push_back(model_.encode_frame(st_, remainder_.data()));
        remainder_.clear();
        tokens_out_ += 1;
    }
    return out;
}

DecoderSession::DecoderSession(const CodecModel & model) : model_(model), st_(model.make_decoder_state()) {}

std::vector<double> DecoderSession::feed(const std::vector<int32_t> & ids) {
    check(!flushed_, ErrCode::state, "decoder session: feed after flush");
    const int64_t frame = model_.config().frame_size;
    for (size_t i = 0; i < ids.size(); ++i) {
        check(ids[i] >= 0 && ids[i] < model_.config().codebook_size, ErrCode::invalid_arg,
              "decoder session: token " + std::to_string(ids[i]) + " at position " +
                  std::to_string(tokens_in_ + static_cast<int64_t>(i)) + " is outside the codebook");
    }
    std::vector<double> out(ids.size() * static_cast<size_t>(frame));
    for (size_t i = 0; i < ids.size(); ++i) {
        model_.decode_token(st_, ids[i], out.data() + i * static_cast<size_t>(frame));
    }
    tokens_in_ += static_cast<int64_t>(ids.size());
    samples_out_ += static_cast<int64_t>(out.size());
    return out;
}

std::vector<double> DecoderSession::flush() {
    check(!flushed_, ErrCode::state, "decoder session: flush called twice");
    flushed_ = true;
    return {};
}

}  // namespace ts3
