// Copyright 2026 ts3codec authors
// The full codec: linear stem encoder, transformer stack, factorized
// single-codebook VQ, transformer stack, linear stem decoder, plus the named
// configurations X1..X5.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/framing.h"
#include "core/params.h"
#include "core/tape.h"
#include "core/xformer.h"

#include <memory>
#include <string>
#include <vector>

namespace ts3 {

struct CodecConfig {
    std::string config_id   = "custom";  // "X1".."X5" or "custom"
    int64_t     sample_rate = 16000;
    int64_t     frame_size  = 0;  // F, samples per frame
    // stem widths: encoder maps F -> enc_mid -> D, decoder D -> dec_mid -> F
    int64_t enc_mid = 0;
    int64_t dec_mid = 0;
    TransformerConfig transformer;  // shared shape for encoder and decoder
    int64_t codebook_size = 0;
    int64_t codebook_dim  = 0;

    void validate() const;

    double  frame_rate() const { return static_cast<double>(sample_rate) / static_cast<double>(frame_size); }
    double  token_rate() const { return frame_rate(); }  // one codebook, one token per frame
    int64_t bits_per_token() const;                      // ceil(log2(codebook_size))
    double  bitrate() const { return token_rate() * static_cast<double>(bits_per_token()); }
};

// Exact Table-of-configurations hyperparameters; unknown ids raise an error
// listing the valid names.
CodecConfig named_config(const std::string & id);

class CodecModel {
public:
    CodecModel(const CodecConfig & cfg, uint64_t seed);

    const CodecConfig & config() const { return cfg_; }
    ParamStore &        params() { return ps_; }
    const ParamStore &  params() const { return ps_; }

    std::vector<Parameter *> parameters() const;

    // learnable-scalar count from the config alone; never allocates weights
    static int64_t param_count(const CodecConfig & cfg);

    // ---- offline inference ----
    // pads to a whole number of frames and emits one token per frame;
    // empty input encodes to an empty sequence
    std::vector<int32_t> encode(const std::vector<double> & wave) const;
    // reconstructs frame_size samples per token, truncated to original_length
    std::vector<double> decode(const std::vector<int32_t> & ids, int64_t original_length) const;

    // stems + encoder transformer; frames [N, F] -> latents [N, D]
    Tensor encode_latents(const FrameMatrix & frames) const;
    // down-projects one latent row (D) into the codebook space (codebook_dim)
    void project_down(const double * latent, double * z_low) const;
    // nearest codebook row under squared euclidean distance, ties broken by
    // the lowest index
    int32_t nearest_code(const double * z_low) const;

    // ---- streaming inference ----
    struct EncoderState {
        StreamState         tf;
        std::vector<double> mid, lat, low;
    };
    struct DecoderState {
        StreamState         tf;
        std::vector<double> lat, mid;
    };
    EncoderState make_encoder_state() const;
    DecoderState make_decoder_state() const;
    // one frame of frame_size samples in, one token out; bit-identical to
    // the matching position of offline encode
    int32_t encode_frame(EncoderState & st, const double * frame_samples) const;
    // one token in, frame_size samples out; bit-identical to offline decode
    void decode_token(DecoderState & st, int32_t id, double * frame_out) const;

    // ---- training ----
    struct TrainForward {
        Var                  recon;   // [N, F] reconstructed frames
        Var                  z_low;   // [N, codebook_dim] pre-quantization
        Var                  e_rows;  // [N, codebook_dim] selected codebook rows
        std::vector<int32_t> ids;
    };
    // taped forward over a padded waveform; gradients reach the encoder via
    // the straight-through estimator and the codebook via e_rows only
    TrainForward forward_train(Tape & t, const std::vector<double> & padded_wave) const;

    Parameter & codebook() { return *codebook_; }
    const Parameter & codebook() const { return *codebook_; }

private:
    CodecConfig cfg_;
    ParamStore  ps_;

    // encoder stem: the linear next to the waveform is bias-free
    Parameter *enc_w1_ = nullptr;              // [enc_mid, F]
    Parameter *enc_w2_ = nullptr, *enc_b2_ = nullptr;  // [D, enc_mid], [D]
    std::unique_ptr<Transformer> enc_tf_;

    Parameter *down_w_ = nullptr, *down_b_ = nullptr;  // [cd, D], [cd]
    Parameter *codebook_ = nullptr;                    // [codebook_size, cd]
    Parameter *up_w_ = nullptr, *up_b_ = nullptr;      // [D, cd], [D]

    std::unique_ptr<Transformer> dec_tf_;
    // decoder stem: the linear next to the transformer carries the bias
    Parameter *dec_w1_ = nullptr, *dec_b1_ = nullptr;  // [dec_mid, D], [dec_mid]
    Parameter *dec_w2_ = nullptr;                      // [F, dec_mid]
};

}  // namespace ts3
