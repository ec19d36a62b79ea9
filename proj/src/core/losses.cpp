// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/losses.h"

#include "core/common.h"
#include "core/dsp.h"

#include <json.hpp>

#include <cmath>

namespace ts3 {

double vq_weight_for(int64_t codebook_size) {
    check(codebook_size >= 2, ErrCode::invalid_arg, "vq_weight_for: codebook_size must be >= 2");
    return static_cast<double>(codebook_size) / 2048.0;
}

const std::vector<MelScale> & mel_scales() {
    static const std::vector<MelScale> scales = [] {
        std::vector<MelScale> s;
        for (int i = 0; i < 6; ++i) {
            const int64_t fft = int64_t{64} << i;
            s.push_back({fft, fft / 4, std::min<int64_t>(80, 10 << i)});
        }
        return s;
    }();
    return scales;
}

namespace {

// mel spectrogram of a [T] waveform as tape ops; filterbank rows act as a
// fixed linear map over magnitude bins
Var taped_log_mel(Tape & t, Var x, const MelScale & s, double sample_rate) {
    Var ri  = t.stft_ri(x, s.fft_size, s.hop);
    Var mag = t.magnitude(ri);
    Var fb  = t.constant(dsp::mel_filterbank(s.n_mels, s.fft_size, sample_rate));
    Var mel = t.linear(mag, fb, Var());
    return t.log_shift(mel, 1e-5);
}

}  // namespace

Var multiscale_mel_loss(Tape & t, Var x, Var y, double sample_rate) {
    check(x.val().ndim() == 1 && y.val().ndim() == 1, ErrCode::invalid_arg,
          "mel loss: expects 1-D waveforms");
    check(x.val().numel() == y.val().numel(), ErrCode::invalid_arg,
          "mel loss: waveform lengths differ (" + std::to_string(x.val().numel()) + " vs " +
              std::to_string(y.val().numel()) + ")");
    const int64_t largest = mel_scales().back().fft_size;
    check(x.val().numel() >= largest, ErrCode::invalid_arg,
          "mel loss: needs at least " + std::to_string(largest) + " samples, got " +
              std::to_string(x.val().numel()));

    Var total;
    for (const MelScale & s : mel_scales()) {
        Var term = t.l1_loss(taped_log_mel(t, x, s, sample_rate), taped_log_mel(t, y, s, sample_rate));
        total    = total.defined() ? t.add(total, term) : term;
    }
    return total;
}

double multiscale_mel_value(const std::vector<double> & x, const std::vector<double> & y, double sample_rate) {
    Tape t;
    Var  vx = t.leaf(Tensor({static_cast<int64_t>(x.size())}, x));
    Var  vy = t.leaf(Tensor({static_cast<int64_t>(y.size())}, y));
    return multiscale_mel_loss(t, vx, vy, sample_rate).val().at(0);
}

GanPair lsgan_losses(Tape & t, const std::vector<Var> & real_logits, const std::vector<Var> & fake_logits) {
    check(!real_logits.empty() && real_logits.size() == fake_logits.size(), ErrCode::invalid_arg,
          "lsgan: need matching non-empty logit lists");
    const double inv = 1.0 / static_cast<double>(real_logits.size());

    Var d, g;
    for (size_t s = 0; s < real_logits.size(); ++s) {
        Var r  = real_logits[s];
        Var f  = fake_logits[s];
        Var rd = t.add_scalar(r, -1.0);
        Var fd = t.add_scalar(f, -1.0);
        Var ds = t.add(t.mean_all(t.mul(rd, rd)), t.mean_all(t.mul(f, f)));
        Var gs = t.mean_all(t.mul(fd, fd));
        d      = d.defined() ? t.add(d, ds) : ds;
        g      = g.defined() ? t.add(g, gs) : gs;
    }
    return {t.scale(d, inv), t.scale(g, inv)};
}

Var feature_matching_loss(Tape & t, const std::vector<std::vector<Var>> & real,
                          const std::vector<std::vector<Var>> & fake) {
    check(!real.empty() && real.size() == fake.size(), ErrCode::invalid_arg,
          "feature matching: need matching non-empty feature lists");

    Var total;
    for (size_t s = 0; s < real.size(); ++s) {
        check(!real[s].empty() && real[s].size() == fake[s].size(), ErrCode::invalid_arg,
              "feature matching: sub-discriminator " + std::to_string(s) + " layer counts differ");
        Var sub;
        for (size_t l = 0; l < real[s].size(); ++l) {
            check(real[s][l].val().shape == fake[s][l].val().shape, ErrCode::invalid_arg,
                  "feature matching: shape mismatch at sub " + std::to_string(s) + " layer " + std::to_string(l) +
                      " (" + real[s][l].val().shape_str() + " vs " + fake[s][l].val().shape_str() + ")");
            Var term = t.l1_loss(fake[s][l], t.constant(real[s][l].val()));
            sub      = sub.defined() ? t.add(sub, term) : term;
        }
        sub   = t.scale(sub, 1.0 / static_cast<double>(real[s].size()));
        total = total.defined() ? t.add(total, sub) : sub;
    }
    return t.scale(total, 1.0 / static_cast<double>(real.size()));
}

VqPair vq_losses(Tape & t, Var pre_quant, Var post_quant) {
    check(pre_quant.val().shape == post_quant.val().shape, ErrCode::invalid_arg,
          "vq losses: shape mismatch (" + pre_quant.val().shape_str() + " vs " + post_quant.val().shape_str() +
              ")");
    Var codebook   = t.l1_loss(t.constant(pre_quant.val()), post_quant);
    Var commitment = t.l1_loss(pre_quant, t.constant(post_quant.val()));
    return {codebook, commitment};
}

TotalPair total_losses(Tape & t, const LossTerms & terms, const LossWeights & w) {
    check(terms.mel.defined(), ErrCode::invalid_arg, "total_losses: missing mel term");
    check(terms.gan_g.defined(), ErrCode::invalid_arg, "total_losses: missing gan_g term");
    check(terms.gan_d.defined(), ErrCode::invalid_arg, "total_losses: missing gan_d term");
    check(terms.feature.defined(), ErrCode::invalid_arg, "total_losses: missing feature term");
    check(terms.codebook.defined(), ErrCode::invalid_arg, "total_losses: missing codebook term");
    check(terms.commitment.defined(), ErrCode::invalid_arg, "total_losses: missing commitment term");

    Var gen = t.scale(terms.mel, w.reconstruction);
    gen     = t.add(gen, t.scale(terms.gan_g, w.gan));
    gen     = t.add(gen, t.scale(terms.feature, w.feature));
    gen     = t.add(gen, t.scale(terms.codebook, w.vq));
    gen     = t.add(gen, t.scale(terms.commitment, w.commitment));
    return {gen, terms.gan_d};
}

void LossReport::finalize(const LossWeights & w) {
    generator_total =
        w.reconstruction * mel + w.gan * gan_g + w.feature * feature + w.vq * vq + w.commitment * commitment;
    discriminator_total = gan_d;
}

std::string LossReport::to_json_line() const {
    nlohmann::json j;
    j["step"]                = step;
    j["mel"]                 = mel;
    j["gan_g"]               = gan_g;
    j["gan_d"]               = gan_d;
    j["feature"]             = feature;
    j["vq"]                  = vq;
    j["commitment"]          = commitment;
    j["generator_total"]     = generator_total;
    j["discriminator_total"] = discriminator_total;
    j["lr"]                  = lr;
    return j.dump();
}

}  // namespace ts3
