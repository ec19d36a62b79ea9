// Copyright 2026 ts3codec authors
// GAN training loop: random-crop data pipeline, alternating discriminator and
// generator updates on a shared learning-rate schedule, and checkpointing.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/adversary.h"
#include "core/losses.h"
#include "core/model.h"
#include "core/trainer_config.h"

#include <memory>
#include <string>
#include <vector>

namespace ts3 {

// Small configuration pair sized for CPU-scale training runs and tests.
CodecConfig         desk_codec_config();
DiscriminatorConfig desk_discriminator_config();

using Corpus = std::vector<std::vector<double>>;

// Draws batch_size crops of crop_seconds * sample_rate samples. Utterance
// index and start offset are uniform; utterances shorter than the crop are
// zero-padded at the tail.
std::vector<std::vector<double>> crop_batch(const Corpus & utterances, double crop_seconds, int64_t batch_size,
                                            Rng & rng, int64_t sample_rate = 16000);

class Trainer {
public:
    Trainer(const CodecConfig & codec, const DiscriminatorConfig & disc, const TrainerConfig & trainer);

    // One optimization step at the scheduled rate: the discriminator updates
    // on detached reconstructions first, then the generator updates against
    // the frozen discriminator. Non-finite losses abort with the report.
    LossReport train_step(const std::vector<std::vector<double>> & batch);
    // Same step at an explicit learning rate (the schedule is bypassed).
    LossReport train_step_at(const std::vector<std::vector<double>> & batch, double lr);

    CodecModel &        model() { return *model_; }
    const CodecModel &  model() const { return *model_; }
    Adversary &         adversary() { return *adversary_; }
    const Adversary &   adversary() const { return *adversary_; }
    Rng &               data_rng() { return data_rng_; }
    int64_t             step() const { return step_; }
    const TrainerConfig & trainer_config() const { return tcfg_; }
    const LossWeights &   loss_weights() const { return weights_; }

    // Full training state: weights, discriminators, optimizer moments, step
    // counter, and the data rng.
    void save_training_checkpoint(const std::string & path) const;
    // Codec weights only, for deployment.
    void save_inference_checkpoint(const std::string & path) const;

    static std::unique_ptr<Trainer> load_training_checkpoint(const std::string & path);

private:
    LossReport run_step(const std::vector<std::vector<double>> & batch, double lr);

    TrainerConfig               tcfg_;
    LossWeights                 weights_;
    std::unique_ptr<CodecModel> model_;
    std::unique_ptr<Adversary>  adversary_;
    AdamW                       opt_g_;
    AdamW                       opt_d_;
    Rng                         data_rng_;
    int64_t                     step_ = 0;
};

// Writes codec weights only, loadable by load_model; step records the
// training step the weights came from (0 for untrained models).
void save_model(const std::string & path, const CodecModel & model, int64_t step = 0);

// Loads the codec from either checkpoint kind, ignoring any training state.
std::unique_ptr<CodecModel> load_model(const std::string & path);

}  // namespace ts3
