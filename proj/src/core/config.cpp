// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/config.h"

#include "core/common.h"

#include <set>
#include <string>

namespace ts3 {

namespace {

void reject_unknown(const nlohmann::json & j, const std::set<std::string> & allowed, const std::string & what) {
    check(j.is_object(), ErrCode::config, what + ": expected a JSON object");
    for (const auto & item : j.items()) {
        check(allowed.count(item.key()) != 0, ErrCode::config, what + ": unknown key '" + item.key() + "'");
    }
}

template <typename T>
void read_field(const nlohmann::json & j, const char * key, T & out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

}  // namespace

nlohmann::json codec_config_to_json(const CodecConfig & c) {
    nlohmann::json j;
    j["config_id"]     = c.config_id;
    j["sample_rate"]   = c.sample_rate;
    j["frame_size"]    = c.frame_size;
    j["enc_mid"]       = c.enc_mid;
    j["dec_mid"]       = c.dec_mid;
    j["num_layers"]    = c.transformer.num_layers;
    j["embed_dim"]     = c.transformer.embed_dim;
    j["num_heads"]     = c.transformer.num_heads;
    j["ffn_dim"]       = c.transformer.ffn_dim;
    j["window"]        = c.transformer.window;
    j["codebook_size"] = c.codebook_size;
    j["codebook_dim"]  = c.codebook_dim;
    return j;
}

CodecConfig codec_config_from_json(const nlohmann::json & j) {
    reject_unknown(j,
                   {"config_id", "sample_rate", "frame_size", "enc_mid", "dec_mid", "num_layers", "embed_dim",
                    "num_heads", "ffn_dim", "window", "codebook_size", "codebook_dim"},
                   "codec config");
    std::string id = "custom";
    read_field(j, "config_id", id);
    if (id != "custom") {
        // serialized named configs restate their fields; restatements must
        // match the published shape exactly, anything else is an override
        const CodecConfig   named = named_config(id);
        const nlohmann::json full = codec_config_to_json(named);
        for (const auto & item : j.items()) {
            check(full.at(item.key()) == item.value(), ErrCode::config,
                  "codec config: named config '" + id + "' takes no field overrides ('" + item.key() +
                      "' differs)");
        }
        return named;
    }

    CodecConfig c;
    c.config_id = id;
    read_field(j, "sample_rate", c.sample_rate);
    read_field(j, "frame_size", c.frame_size);
    read_field(j, "enc_mid", c.enc_mid);
    read_field(j, "dec_mid", c.dec_mid);
    read_field(j, "num_layers", c.transformer.num_layers);
    read_field(j, "embed_dim", c.transformer.embed_dim);
    read_field(j, "num_heads", c.transformer.num_heads);
    read_field(j, "ffn_dim", c.transformer.ffn_dim);
    read_field(j, "window", c.transformer.window);
    read_field(j, "codebook_size", c.codebook_size);
    read_field(j, "codebook_dim", c.codebook_dim);
    c.validate();
    return c;
}

nlohmann::json discriminator_config_to_json(const DiscriminatorConfig & c) {
    nlohmann::json j;
    j["mpd_periods"]    = c.mpd_periods;
    j["mpd_channels"]   = c.mpd_channels;
    j["msstft_windows"] = c.msstft_windows;
    j["msstft_filters"] = c.msstft_filters;
    return j;
}

DiscriminatorConfig discriminator_config_from_json(const nlohmann::json & j) {
    reject_unknown(j, {"mpd_periods", "mpd_channels", "msstft_windows", "msstft_filters"}, "discriminator config");
    DiscriminatorConfig c;
    read_field(j, "mpd_periods", c.mpd_periods);
    read_field(j, "mpd_channels", c.mpd_channels);
    read_field(j, "msstft_windows", c.msstft_windows);
    read_field(j, "msstft_filters", c.msstft_filters);
    c.validate();
    return c;
}

nlohmann::json trainer_config_to_json(const TrainerConfig & c) {
    nlohmann::json j;
    j["beta1"]               = c.beta1;
    j["beta2"]               = c.beta2;
    j["lr_start"]            = c.lr_start;
    j["lr_end"]              = c.lr_end;
    j["warmup_steps"]        = c.warmup_steps;
    j["total_steps"]         = c.total_steps;
    j["crop_seconds"]        = c.crop_seconds;
    j["batch_size"]          = c.batch_size;
    j["seed"]                = c.seed;
    j["checkpoint_interval"] = c.checkpoint_interval;
    j["grad_clip"]           = c.grad_clip;
    return j;
}

TrainerConfig trainer_config_from_json(const nlohmann::json & j) {
    reject_unknown(j,
                   {"beta1", "beta2", "lr_start", "lr_end", "warmup_steps", "total_steps", "crop_seconds",
                    "batch_size", "seed", "checkpoint_interval", "grad_clip"},
                   "trainer config");
    TrainerConfig c;
    read_field(j, "beta1", c.beta1);
    read_field(j, "beta2", c.beta2);
    read_field(j, "lr_start", c.lr_start);
    read_field(j, "lr_end", c.lr_end);
    read_field(j, "warmup_steps", c.warmup_steps);
    read_field(j, "total_steps", c.total_steps);
    read_field(j, "crop_seconds", c.crop_seconds);
    read_field(j, "batch_size", c.batch_size);
    read_field(j, "seed", c.seed);
    read_field(j, "checkpoint_interval", c.checkpoint_interval);
    read_field(j, "grad_clip", c.grad_clip);
    c.validate();
    return c;
}

}  // namespace ts3
