// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/trainer.h"

#include "core/checkpoint.h"
#include "core/config.h"
#include "core/framing.h"

#include <cmath>
#include <cstring>

namespace ts3 {

void TrainerConfig::validate() const {
    check(beta1 >= 0.0 && beta1 < 1.0, ErrCode::config, "trainer config: beta1 must lie in [0, 1)");
    check(beta2 >= 0.0 && beta2 < 1.0, ErrCode::config, "trainer config: beta2 must lie in [0, 1)");
    check(lr_end > 0.0, ErrCode::config, "trainer config: lr_end must be positive");
    check(lr_start >= lr_end, ErrCode::config, "trainer config: lr_start must be >= lr_end");
    check(warmup_steps > 0, ErrCode::config, "trainer config: warmup_steps must be positive");
    check(warmup_steps < total_steps, ErrCode::config, "trainer config: warmup_steps must be < total_steps");
    check(crop_seconds > 0.0, ErrCode::config, "trainer config: crop_seconds must be positive");
    check(batch_size >= 1, ErrCode::config,
          "trainer config: batch_size is required; no published value exists, set it explicitly");
    check(checkpoint_interval >= 0, ErrCode::config, "trainer config: checkpoint_interval must be >= 0");
    check(grad_clip >= 0.0, ErrCode::config, "trainer config: grad_clip must be >= 0");
}

double lr_at_step(const TrainerConfig & cfg, int64_t step) {
    if (step <= 0) {
        return 0.0;
    }
    if (step >= cfg.total_steps) {
        return cfg.lr_end;
    }
    if (step <= cfg.warmup_steps) {
        return cfg.lr_start * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
    }
    const double frac = static_cast<double>(step - cfg.warmup_steps) /
                        static_cast<double>(cfg.total_steps - cfg.warmup_steps);
    return cfg.lr_start + (cfg.lr_end - cfg.lr_start) * frac;
}

CodecConfig desk_codec_config() {
    CodecConfig c;
    c.frame_size             = 320;
    c.enc_mid                = 128;
    c.dec_mid                = 128;
    c.transformer.num_layers = 2;
    c.transformer.embed_dim  = 64;
    c.transformer.num_heads  = 4;
    c.transformer.ffn_dim    = 256;
    c.transformer.window     = 8;
    c.codebook_size          = 1024;
    c.codebook_dim           = 8;
    c.validate();
    return c;
}

DiscriminatorConfig desk_discriminator_config() {
    DiscriminatorConfig d;
    d.mpd_periods    = {2, 3, 5};
    d.mpd_channels   = {4, 8, 16, 16};
    d.msstft_windows = {256, 128};
    d.msstft_filters = 4;
    d.validate();
    return d;
}

std::vector<std::vector<double>> crop_batch(const Corpus & utterances, double crop_seconds, int64_t batch_size,
                                            Rng & rng, int64_t sample_rate) {
    check(!utterances.empty(), ErrCode::data, "crop_batch: the corpus is empty");
    check(batch_size >= 1, ErrCode::invalid_arg, "crop_batch: batch_size must be >= 1");
    const int64_t crop_len = static_cast<int64_t>(std::llround(crop_seconds * static_cast<double>(sample_rate)));
    check(crop_len > 0, ErrCode::invalid_arg, "crop_batch: crop length rounds to zero samples");

    std::vector<std::vector<double>> batch;
    batch.reserve(static_cast<size_t>(batch_size));
    for (int64_t b = 0; b < batch_size; ++b) {
        const int64_t idx = rng.uniform_int(0, static_cast<int64_t>(utterances.size()) - 1);
        const auto &  u   = utterances[static_cast<size_t>(idx)];
        const int64_t len = static_cast<int64_t>(u.size());

        std::vector<double> crop(static_cast<size_t>(crop_len), 0.0);
        const int64_t       slack  = len > crop_len ? len - crop_len : 0;
        const int64_t       offset = rng.uniform_int(0, slack);
        const int64_t       take   = std::min(crop_len, len - offset);
        if (take > 0) {
            std::memcpy(crop.data(), u.data() + offset, static_cast<size_t>(take) * sizeof(double));
        }
        batch.push_back(std::move(crop));
    }
    return batch;
}

namespace {

std::vector<Parameter *> pointers(ParamStore & ps) {
    std::vector<Parameter *> out;
    for (Parameter & p : ps.all()) {
        out.push_back(&p);
    }
    return out;
}

Tensor wave_tensor(const std::vector<double> & w) {
    return Tensor({static_cast<int64_t>(w.size())}, w);
}

}  // namespace

Trainer::Trainer(const CodecConfig & codec, const DiscriminatorConfig & disc, const TrainerConfig & trainer)
    : tcfg_(trainer),
      model_(std::make_unique<CodecModel>(codec, trainer.seed)),
      adversary_(std::make_unique<Adversary>(disc, trainer.seed + 1)),
      opt_g_(trainer.beta1, trainer.beta2),
      opt_d_(trainer.beta1, trainer.beta2),
      data_rng_(trainer.seed + 2) {
    tcfg_.validate();
    weights_.vq = vq_weight_for(codec.codebook_size);
}

LossReport Trainer::train_step(const std::vector<std::vector<double>> & batch) {
    return run_step(batch, lr_at_step(tcfg_, step_ + 1));
}

LossReport Trainer::train_step_at(const std::vector<std::vector<double>> & batch, double lr) {
    return run_step(batch, lr);
}

LossReport Trainer::run_step(const std::vector<std::vector<double>> & batch, double lr) {
    check(!batch.empty(), ErrCode::invalid_arg, "train step: the batch is empty");
    const int64_t largest_fft = mel_scales().back().fft_size;
    for (const auto & w : batch) {
        check(static_cast<int64_t>(w.size()) >= largest_fft, ErrCode::invalid_arg,
              "train step: a crop of " + std::to_string(w.size()) +
                  " samples is shorter than the largest mel window (" + std::to_string(largest_fft) + ")");
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    // Real and detached fake waveforms, both padded to whole frames. The raw
    // encode/decode pair reproduces the taped reconstruction bit-exactly, so
    // the discriminator sees the same fakes it later scores on the tape.
    std::vector<std::vector<double>> real, fake;
    for (const auto & w : batch) {
        std::vector<double> padded = pad_to_multiple(w, model_->config().frame_size);
        fake.push_back(model_->decode(model_->encode(padded), static_cast<int64_t>(padded.size())));
        real.push_back(std::move(padded));
    }

    LossReport report;
    report.step = step_ + 1;
    report.lr   = lr;

    auto abort_if_bad = [&](double v, const char * what) {
        if (!std::isfinite(v)) {
            report.finalize(weights_);
            fail(ErrCode::runtime, std::string("train step ") + std::to_string(report.step) + ": " + what +
                                       " is not finite; report: " + report.to_json_line());
        }
    };

    // Discriminator update on detached fakes.
    auto d_params = pointers(adversary_->params());
    adversary_->params().zero_grads();
    {
        Tape t;
        Var  total;
        for (size_t b = 0; b < batch.size(); ++b) {
            Var r = t.leaf(wave_tensor(real[b]));
            Var f = t.leaf(wave_tensor(fake[b]));
            DiscriminatorOutput ro = adversary_->forward(t, r, true);
            DiscriminatorOutput fo = adversary_->forward(t, f, true);
            GanPair             gp = lsgan_losses(t, ro.logit_list(), fo.logit_list());
            total                  = total.defined() ? t.add(total, gp.d_loss) : gp.d_loss;
        }
        total        = t.scale(total, inv_b);
        report.gan_d = total.val().at(0);
        abort_if_bad(report.gan_d, "the discriminator loss");
        t.backward(total);
        if (tcfg_.grad_clip > 0.0) {
            clip_grad_norm(d_params, tcfg_.grad_clip);
        }
        opt_d_.step(d_params, lr);
    }

    // Generator update against the frozen discriminator.
    auto g_params = pointers(model_->params());
    model_->params().zero_grads();
    {
        Tape t;
        Var  mel, gan_g, feature, codebook, commitment;
        auto acc = [&](Var & slot, Var term) { slot = slot.defined() ? t.add(slot, term) : term; };
        for (size_t b = 0; b < batch.size(); ++b) {
            CodecModel::TrainForward fw = model_->forward_train(t, real[b]);
            Var wave = t.reshape(fw.recon, {static_cast<int64_t>(real[b].size())});
            Var r    = t.leaf(wave_tensor(real[b]));

            acc(mel, multiscale_mel_loss(t, wave, r, static_cast<double>(model_->config().sample_rate)));
            DiscriminatorOutput ro = adversary_->forward(t, r, false);
            DiscriminatorOutput fo = adversary_->forward(t, wave, false);
            GanPair             gp = lsgan_losses(t, ro.logit_list(), fo.logit_list());
            acc(gan_g, gp.g_loss);
            acc(feature, feature_matching_loss(t, ro.feature_lists(), fo.feature_lists()));
            VqPair vq = vq_losses(t, fw.z_low, fw.e_rows);
            acc(codebook, vq.codebook_loss);
            acc(commitment, vq.commitment_loss);
        }
        LossTerms terms;
        terms.mel        = t.scale(mel, inv_b);
        terms.gan_g      = t.scale(gan_g, inv_b);
        terms.gan_d      = t.constant_fill({1}, report.gan_d);
        terms.feature    = t.scale(feature, inv_b);
        terms.codebook   = t.scale(codebook, inv_b);
        terms.commitment = t.scale(commitment, inv_b);

        report.mel        = terms.mel.val().at(0);
        report.gan_g      = terms.gan_g.val().at(0);
        report.feature    = terms.feature.val().at(0);
        report.vq         = terms.codebook.val().at(0);
        report.commitment = terms.commitment.val().at(0);
        abort_if_bad(report.mel, "the mel loss");
        abort_if_bad(report.gan_g, "the adversarial generator loss");
        abort_if_bad(report.feature, "the feature matching loss");
        abort_if_bad(report.vq, "the codebook loss");
        abort_if_bad(report.commitment, "the commitment loss");

        TotalPair totals = total_losses(t, terms, weights_);
        t.backward(totals.generator_total);
        if (tcfg_.grad_clip > 0.0) {
            clip_grad_norm(g_params, tcfg_.grad_clip);
        }
        opt_g_.step(g_params, lr);
    }

    step_ += 1;
    report.finalize(weights_);
    return report;
}

namespace {

constexpr const char * kCheckpointFormat = "ts3-checkpoint";
constexpr int          kCheckpointVersion = 1;

void append_params(Archive & a, const ParamStore & ps, const std::string & prefix) {
    for (const Parameter & p : ps.all()) {
        a.tensors.emplace_back(prefix + p.name, p.value);
    }
}

void append_moments(Archive & a, const ParamStore & ps, const std::string & prefix) {
    for (const Parameter & p : ps.all()) {
        if (p.adam_m.numel() > 0) {
            a.tensors.emplace_back("adam." + prefix + p.name + ".m", p.adam_m);
            a.tensors.emplace_back("adam." + prefix + p.name + ".v", p.adam_v);
        }
    }
}

void restore_params(ParamStore & ps, const Archive & a, const std::string & prefix) {
    for (Parameter & p : ps.all()) {
        const Tensor * t = a.find(prefix + p.name);
        check(t != nullptr, ErrCode::format, "checkpoint: missing tensor '" + prefix + p.name + "'");
        check(t->shape == p.value.shape, ErrCode::format,
              "checkpoint: tensor '" + prefix + p.name + "' has shape " + t->shape_str() + ", expected " +
                  p.value.shape_str());
        p.value = *t;
    }
}

void restore_moments(ParamStore & ps, const Archive & a, const std::string & prefix) {
    for (Parameter & p : ps.all()) {
        const Tensor * m = a.find("adam." + prefix + p.name + ".m");
        const Tensor * v = a.find("adam." + prefix + p.name + ".v");
        if (m != nullptr && v != nullptr) {
            check(m->shape == p.value.shape && v->shape == p.value.shape, ErrCode::format,
                  "checkpoint: optimizer moments for '" + prefix + p.name + "' have the wrong shape");
            p.adam_m = *m;
            p.adam_v = *v;
        }
    }
}

void check_meta(const Archive & a, const char * expected_kind) {
    check(a.meta.value("format", "") == kCheckpointFormat, ErrCode::format,
          "checkpoint: not a codec checkpoint (missing format marker)");
    check(a.meta.value("version", 0) == kCheckpointVersion, ErrCode::format,
          "checkpoint: unsupported checkpoint version");
    const std::string kind = a.meta.value("kind", "");
    if (expected_kind != nullptr) {
        check(kind == expected_kind, ErrCode::format,
              "checkpoint: expected a " + std::string(expected_kind) + " checkpoint, found kind '" + kind + "'");
    }
}

}  // namespace

void Trainer::save_training_checkpoint(const std::string & path) const {
    Archive a;
    a.meta["format"]        = kCheckpointFormat;
    a.meta["version"]       = kCheckpointVersion;
    a.meta["kind"]          = "training";
    a.meta["codec"]         = codec_config_to_json(model_->config());
    a.meta["discriminator"] = discriminator_config_to_json(adversary_->config());
    a.meta["trainer"]       = trainer_config_to_json(tcfg_);
    a.meta["step"]          = step_;
    a.meta["data_rng"]      = data_rng_.serialize();
    a.meta["opt_g_t"]       = opt_g_.t();
    a.meta["opt_d_t"]       = opt_d_.t();
    append_params(a, model_->params(), "");
    append_params(a, adversary_->params(), "disc.");
    append_moments(a, model_->params(), "");
    append_moments(a, adversary_->params(), "disc.");
    write_archive(path, a);
}

void Trainer::save_inference_checkpoint(const std::string & path) const {
    save_model(path, *model_, step_);
}

void save_model(const std::string & path, const CodecModel & model, int64_t step) {
    Archive a;
    a.meta["format"]  = kCheckpointFormat;
    a.meta["version"] = kCheckpointVersion;
    a.meta["kind"]    = "inference";
    a.meta["codec"]   = codec_config_to_json(model.config());
    a.meta["step"]    = step;
    append_params(a, model.params(), "");
    write_archive(path, a);
}

std::unique_ptr<Trainer> Trainer::load_training_checkpoint(const std::string & path) {
    Archive a = read_archive(path);
    check_meta(a, "training");
    const CodecConfig         codec = codec_config_from_json(a.meta.at("codec"));
    const DiscriminatorConfig disc  = discriminator_config_from_json(a.meta.at("discriminator"));
    const TrainerConfig       tcfg  = trainer_config_from_json(a.meta.at("trainer"));

    auto tr = std::make_unique<Trainer>(codec, disc, tcfg);
    restore_params(tr->model_->params(), a, "");
    restore_params(tr->adversary_->params(), a, "disc.");
    restore_moments(tr->model_->params(), a, "");
    restore_moments(tr->adversary_->params(), a, "disc.");
    tr->step_ = a.meta.at("step").get<int64_t>();
    tr->opt_g_.set_t(a.meta.at("opt_g_t").get<int64_t>());
    tr->opt_d_.set_t(a.meta.at("opt_d_t").get<int64_t>());
    tr->data_rng_.deserialize(a.meta.at("data_rng").get<std::string>());
    return tr;
}

std::unique_ptr<CodecModel> load_model(const std::string & path) {
    Archive a = read_archive(path);
    check_meta(a, nullptr);
    const std::string kind = a.meta.value("kind", "");
    check(kind == "training" || kind == "inference", ErrCode::format,
          "checkpoint: unknown checkpoint kind '" + kind + "'");
    const CodecConfig codec = codec_config_from_json(a.meta.at("codec"));
    auto              model = std::make_unique<CodecModel>(codec, 0);
    restore_params(model->params(), a, "");
    return model;
}

}  // namespace ts3
