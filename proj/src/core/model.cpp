// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/model.h"

#include "core/common.h"
#include "core/kernels.h"

#include <cmath>

namespace ts3 {

void CodecConfig::validate() const {
    check(sample_rate == 16000, ErrCode::config, "codec: sample_rate must be 16000");
    check(frame_size >= 1, ErrCode::config, "codec: frame_size must be >= 1");
    check(enc_mid >= 1 && dec_mid >= 1, ErrCode::config, "codec: stem widths must be >= 1");
    check(codebook_size >= 2, ErrCode::config, "codec: codebook_size must be >= 2");
    check(codebook_dim >= 1, ErrCode::config, "codec: codebook_dim must be >= 1");
    transformer.validate();
}

int64_t CodecConfig::bits_per_token() const {
    int64_t bits = 1;
    while ((int64_t{1} << bits) < codebook_size) {
        bits += 1;
    }
    return bits;
}

CodecConfig named_config(const std::string & id) {
    CodecConfig c;
    c.config_id              = id;
    c.sample_rate            = 16000;
    c.transformer.embed_dim  = 1024;
    c.transformer.num_heads  = 16;
    c.transformer.num_layers = 8;
    c.transformer.ffn_dim    = 4096;
    if (id == "X1" || id == "X2") {
        c.frame_size         = 320;
        c.enc_mid            = 768;
        c.dec_mid            = 768;
        c.transformer.window = 32;
        c.codebook_size      = id == "X1" ? 65536 : 131072;
    } else if (id == "X3" || id == "X4" || id == "X5") {
        c.frame_size         = 400;
        c.enc_mid            = 1024;
        c.dec_mid            = 1024;
        c.transformer.window = 16;
        c.codebook_size      = id == "X4" ? 131072 : 65536;
        if (id == "X5") {
            c.transformer.num_layers = 10;
            c.transformer.ffn_dim    = 2048;
        }
    } else {
        fail(ErrCode::config, "unknown config id '" + id + "'; valid ids are X1, X2, X3, X4, X5");
    }
    // 8-dimensional codes for 65536-entry codebooks, 16 for 131072
    c.codebook_dim = c.codebook_size == 131072 ? 16 : 8;
    c.validate();
    return c;
}

CodecModel::CodecModel(const CodecConfig & cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng           rng(seed);
    const int64_t f  = cfg_.frame_size;
    const int64_t d  = cfg_.transformer.embed_dim;
    const int64_t cd = cfg_.codebook_dim;

    const double bf  = 1.0 / std::sqrt(static_cast<double>(f));
    const double bem = 1.0 / std::sqrt(static_cast<double>(cfg_.enc_mid));
    const double bdm = 1.0 / std::sqrt(static_cast<double>(cfg_.dec_mid));
    const double bd  = 1.0 / std::sqrt(static_cast<double>(d));
    const double bc  = 1.0 / std::sqrt(static_cast<double>(cd));

    enc_w1_ = &ps_.create_uniform("enc.stem1.w", {cfg_.enc_mid, f}, rng, bf);
    enc_w2_ = &ps_.create_uniform("enc.stem2.w", {d, cfg_.enc_mid}, rng, bem);
    enc_b2_ = &ps_.create_uniform("enc.stem2.b", {d}, rng, bem);
    enc_tf_ = std::make_unique<Transformer>(cfg_.transformer, "enc.tf", ps_, rng);

    down_w_   = &ps_.create_uniform("vq.down.w", {cd, d}, rng, bd);
    down_b_   = &ps_.create_uniform("vq.down.b", {cd}, rng, bd);
    codebook_ = &ps_.create_uniform("vq.codebook", {cfg_.codebook_size, cd}, rng, bc);
    up_w_     = &ps_.create_uniform("vq.up.w", {d, cd}, rng, bc);
    up_b_     = &ps_.create_uniform("vq.up.b", {d}, rng, bc);

    dec_tf_ = std::make_unique<Transformer>(cfg_.transformer, "dec.tf", ps_, rng);
    dec_w1_ = &ps_.create_uniform("dec.stem1.w", {cfg_.dec_mid, d}, rng, bd);
    dec_b1_ = &ps_.create_uniform("dec.stem1.b", {cfg_.dec_mid}, rng, bd);
    dec_w2_ = &ps_.create_uniform("dec.stem2.w", {f, cfg_.dec_mid}, rng, bdm);
}

std::vector<Parameter *> CodecModel::parameters() const {
    std::vector<Parameter *> out;
    for (const Parameter & p : ps_.all()) {
        out.push_back(const_cast<Parameter *>(&p));
    }
    return out;
}

int64_t CodecModel::param_count(const CodecConfig & cfg) {
    cfg.validate();
    const int64_t f  = cfg.frame_size;
    const int64_t d  = cfg.transformer.embed_dim;
    const int64_t cd = cfg.codebook_dim;
    const int64_t enc_stem = cfg.enc_mid * f + (d * cfg.enc_mid + d);
    const int64_t dec_stem = (cfg.dec_mid * d + cfg.dec_mid) + f * cfg.dec_mid;
    const int64_t vq = (cd * d + cd) + cfg.codebook_size * cd + (d * cd + d);
    return enc_stem + dec_stem + 2 * Transformer::param_count(cfg.transformer) + vq;
}

Tensor CodecModel::encode_latents(const FrameMatrix & frames) const {
    check(frames.frame_size == cfg_.frame_size, ErrCode::invalid_arg,
          "encode: frame size " + std::to_string(frames.frame_size) + " does not match config frame size " +
              std::to_string(cfg_.frame_size));
    const int64_t n = frames.num_frames;
    const int64_t d = cfg_.transformer.embed_dim;

    Tensor mid({n, cfg_.enc_mid});
    Tensor lat({n, d});
    for (int64_t i = 0; i < n; ++i) {
        kern::matvec(enc_w1_->value.ptr(), frames.frame(i), mid.row(i), static_cast<size_t>(cfg_.enc_mid),
                     static_cast<size_t>(cfg_.frame_size));
        kern::matvec(enc_w2_->value.ptr(), mid.row(i), lat.row(i), static_cast<size_t>(d),
                     static_cast<size_t>(cfg_.enc_mid));
        for (int64_t j = 0; j < d; ++j) {
            lat.row(i)[j] += enc_b2_->value.at(j);
        }
    }
    return enc_tf_->forward_offline(lat);
}

void CodecModel::project_down(const double * latent, double * z_low) const {
    const int64_t d  = cfg_.transformer.embed_dim;
    const int64_t cd = cfg_.codebook_dim;
    kern::matvec(down_w_->value.ptr(), latent, z_low, static_cast<size_t>(cd), static_cast<size_t>(d));
    for (int64_t j = 0; j < cd; ++j) {
        z_low[j] += down_b_->value.at(j);
    }
}

int32_t CodecModel::nearest_code(const double * z_low) const {
    const int64_t cd = cfg_.codebook_dim;
    for (int64_t j = 0; j < cd; ++j) {
        check(std::isfinite(z_low[j]), ErrCode::runtime, "quantize: non-finite latent");
    }
    int32_t best      = 0;
    double  best_dist = kern::sq_dist(codebook_->value.row(0), z_low, static_cast<size_t>(cd));
    for (int64_t i = 1; i < cfg_.codebook_size; ++i) {
        const double dist = kern::sq_dist(codebook_->value.row(i), z_low, static_cast<size_t>(cd));
        if (dist < best_dist) {  // strict comparison keeps the lowest index on ties
            best_dist = dist;
            best      = static_cast<int32_t>(i);
        }
    }
    return best;
}

std::vector<int32_t> CodecModel::encode(const std::vector<double> & wave) const {
    if (wave.empty()) {
        return {};
    }
    const std::vector<double> padded = pad_to_multiple(wave, cfg_.frame_size);
    const FrameMatrix         fm     = frame(padded, cfg_.frame_size);
    const Tensor              lat    = encode_latents(fm);

    std::vector<int32_t> ids(static_cast<size_t>(fm.num_frames));
    std::vector<double>  low(static_cast<size_t>(cfg_.codebook_dim));
    for (int64_t i = 0; i < fm.num_frames; ++i) {
        project_down(lat.row(i), low.data());
        ids[static_cast<size_t>(i)] = nearest_code(low.data());
    }
    return ids;
}

std::vector<double> CodecModel::decode(const std::vector<int32_t> & ids, int64_t original_length) const {
    const int64_t n = static_cast<int64_t>(ids.size());
    const int64_t f = cfg_.frame_size;
    const int64_t d = cfg_.transformer.embed_dim;
    check(original_length >= 0, ErrCode::invalid_arg, "decode: negative original_length");
    check(original_length <= n * f, ErrCode::invalid_arg,
          "decode: original_length exceeds the decoded sample count");
    if (n == 0) {
        return {};
    }
    for (int64_t i = 0; i < n; ++i) {
        const int32_t id = ids[static_cast<size_t>(i)];
        check(id >= 0 && id < cfg_.codebook_size, ErrCode::data,
              "decode: token " + std::to_string(id) + " at position " + std::to_string(i) +
                  " is outside the codebook");
    }

    Tensor lat({n, d});
    for (int64_t i = 0; i < n; ++i) {
        kern::matvec(up_w_->value.ptr(), codebook_->value.row(ids[static_cast<size_t>(i)]), lat.row(i),
                     static_cast<size_t>(d), static_cast<size_t>(cfg_.codebook_dim));
        for (int64_t j = 0; j < d; ++j) {
            lat.row(i)[j] += up_b_->value.at(j);
        }
    }
    const Tensor out = dec_tf_->forward_offline(lat);

    std::vector<double> wave(static_cast<size_t>(n * f));
    std::vector<double> mid(static_cast<size_t>(cfg_.dec_mid));
    for (int64_t i = 0; i < n; ++i) {
        kern::matvec(dec_w1_->value.ptr(), out.row(i), mid.data(), static_cast<size_t>(cfg_.dec_mid),
                     static_cast<size_t>(d));
        for (int64_t j = 0; j < cfg_.dec_mid; ++j) {
            mid[static_cast<size_t>(j)] += dec_b1_->value.at(j);
        }
        kern::matvec(dec_w2_->value.ptr(), mid.data(), wave.data() + i * f, static_cast<size_t>(f),
                     static_cast<size_t>(cfg_.dec_mid));
    }
    wave.resize(static_cast<size_t>(original_length));
    return wave;
}

CodecModel::EncoderState CodecModel::make_encoder_state() const {
    EncoderState st;
    st.tf = enc_tf_->make_state();
    st.mid.resize(static_cast<size_t>(cfg_.enc_mid));
    st.lat.resize(static_cast<size_t>(cfg_.transformer.embed_dim));
    st.low.resize(static_cast<size_t>(cfg_.codebook_dim));
    return st;
}

CodecModel::DecoderState CodecModel::make_decoder_state() const {
    DecoderState st;
    st.tf = dec_tf_->make_state();
    st.lat.resize(static_cast<size_t>(cfg_.transformer.embed_dim));
    st.mid.resize(static_cast<size_t>(cfg_.dec_mid));
    return st;
}

int32_t CodecModel::encode_frame(EncoderState & st, const double * frame_samples) const {
    const int64_t d = cfg_.transformer.embed_dim;
    kern::matvec(enc_w1_->value.ptr(), frame_samples, st.mid.data(), static_cast<size_t>(cfg_.enc_mid),
                 static_cast<size_t>(cfg_.frame_size));
    kern::matvec(enc_w2_->value.ptr(), st.mid.data(), st.lat.data(), static_cast<size_t>(d),
                 static_cast<size_t>(cfg_.enc_mid));
    for (int64_t j = 0; j < d; ++j) {
        st.lat[static_cast<size_t>(j)] += enc_b2_->value.at(j);
    }
    enc_tf_->step(st.tf, st.lat.data(), st.lat.data());
    project_down(st.lat.data(), st.low.data());
    return nearest_code(st.low.data());
}

void CodecModel::decode_token(DecoderState & st, int32_t id, double * frame_out) const {
    check(id >= 0 && id < cfg_.codebook_size, ErrCode::data,
          "decode: token " + std::to_string(id) + " is outside the codebook");
    const int64_t d = cfg_.transformer.embed_dim;
    kern::matvec(up_w_->value.ptr(), codebook_->value.row(id), st.lat.data(), static_cast<size_t>(d),
                 static_cast<size_t>(cfg_.codebook_dim));
    for (int64_t j = 0; j < d; ++j) {
        st.lat[static_cast<size_t>(j)] += up_b_->value.at(j);
    }
    dec_tf_->step(st.tf, st.lat.data(), st.lat.data());
    kern::matvec(dec_w1_->value.ptr(), st.lat.data(), st.mid.data(), static_cast<size_t>(cfg_.dec_mid),
                 static_cast<size_t>(d));
    for (int64_t j = 0; j < cfg_.dec_mid; ++j) {
        st.mid[static_cast<size_t>(j)] += dec_b1_->value.at(j);
    }
    kern::matvec(dec_w2_->value.ptr(), st.mid.data(), frame_out, static_cast<size_t>(cfg_.frame_size),
                 static_cast<size_t>(cfg_.dec_mid));
}

CodecModel::TrainForward CodecModel::forward_train(Tape & t, const std::vector<double> & padded_wave) const {
    const FrameMatrix fm = frame(padded_wave, cfg_.frame_size);
    const int64_t     n  = fm.num_frames;

    Var x = t.leaf(fm.data);
    Var h = t.linear(x, t.param(*enc_w1_), Var());
    h     = t.linear(h, t.param(*enc_w2_), t.param(*enc_b2_));
    h     = enc_tf_->forward(t, h, 0);

    Var z_low = t.linear(h, t.param(*down_w_), t.param(*down_b_));

    std::vector<int32_t> ids(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        ids[static_cast<size_t>(i)] = nearest_code(z_low.val().row(i));
    }

    Var e = t.gather_rows(t.param(*codebook_), ids);
    Var q = t.straight_through(z_low, e);

    Var u = t.linear(q, t.param(*up_w_), t.param(*up_b_));
    u     = dec_tf_->forward(t, u, 0);
    u     = t.linear(u, t.param(*dec_w1_), t.param(*dec_b1_));
    Var recon = t.linear(u, t.param(*dec_w2_), Var());

    return TrainForward{recon, z_low, e, std::move(ids)};
}

}  // namespace ts3
