// Copyright 2026 ts3codec authors
// C API implementation: thin guards around the C++ core. Every entry point
// traps exceptions, records the message thread-locally, and maps the error
// category onto ts3_status.
//
// Licensed under the Apache License, Version 2.0

#include "ts3/ts3.h"

#include "core/analysis.h"
#include "core/config.h"
#include "core/checkpoint.h"
#include "core/trainer.h"
#include "core/wav.h"
#include "core/wire.h"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

using nlohmann::json;

struct ts3_model {
    std::unique_ptr<ts3::CodecModel> impl;
};
struct ts3_encoder {
    ts3::EncoderSession impl;
};
struct ts3_decoder {
    ts3::DecoderSession impl;
};
struct ts3_corpus {
    ts3::Corpus utterances;
};
struct ts3_trainer {
    std::unique_ptr<ts3::Trainer> impl;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
ts3_status guarded(Fn && fn) noexcept {
    try {
        fn();
        return TS3_OK;
    } catch (const ts3::Error & e) {
        g_last_error = e.what();
        return static_cast<ts3_status>(e.code());
    } catch (const std::exception & e) {
        g_last_error = e.what();
        return TS3_ERR_RUNTIME;
    } catch (...) {
        g_last_error = "unknown failure";
        return TS3_ERR_RUNTIME;
    }
}

void require(bool ok, const char * what) {
    ts3::check(ok, ts3::ErrCode::invalid_arg, std::string("null ") + what);
}

char * dup_string(const std::string & s) {
    char * out = static_cast<char *>(std::malloc(s.size() + 1));
    ts3::check(out != nullptr, ts3::ErrCode::runtime, "out of memory");
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename T>
void dup_array(const std::vector<T> & v, T ** out_ptr, size_t * out_count) {
    *out_count = v.size();
    if (v.empty()) {
        *out_ptr = nullptr;
        return;
    }
    T * out = static_cast<T *>(std::malloc(v.size() * sizeof(T)));
    ts3::check(out != nullptr, ts3::ErrCode::runtime, "out of memory");
    std::memcpy(out, v.data(), v.size() * sizeof(T));
    *out_ptr = out;
}

json parse_json(const std::string & text, const char * what) {
    try {
        return json::parse(text);
    } catch (const json::exception & e) {
        ts3::fail(ts3::ErrCode::format, std::string(what) + ": " + e.what());
    }
}

// Named id, "desk", or a JSON object with the full codec configuration.
ts3::CodecConfig resolve_codec_config(const std::string & text) {
    const size_t first = text.find_first_not_of(" \t\r\n");
    ts3::check(first != std::string::npos, ts3::ErrCode::invalid_arg, "config: empty configuration text");
    if (text[first] == '{') {
        return ts3::codec_config_from_json(parse_json(text, "config"));
    }
    std::string id = text.substr(first, text.find_last_not_of(" \t\r\n") - first + 1);
    if (id == "desk") {
        return ts3::desk_codec_config();
    }
    return ts3::named_config(id);
}

json rates_json(const ts3::CodecConfig & cfg) {
    const ts3::Rates r = ts3::rates(cfg);
    return json{{"bitrate", r.bitrate}, {"frame_rate", r.frame_rate}, {"token_rate", r.token_rate}};
}

json macs_json(const ts3::CodecConfig & cfg) {
    const ts3::MacsReport m = ts3::macs(cfg);
    json                  j;
    j["encoder_stem"]      = m.encoder_stem;
    j["encoder_attention"] = m.encoder_attention;
    j["encoder_ffn"]       = m.encoder_ffn;
    j["vq_projections"]    = m.vq_projections;
    j["decoder_attention"] = m.decoder_attention;
    j["decoder_ffn"]       = m.decoder_ffn;
    j["decoder_stem"]      = m.decoder_stem;
    j["total"]             = m.total;
    j["convention"]        = m.convention;
    if (m.published > 0.0) {
        j["reported_elsewhere"] = m.published;
    }
    return j;
}

json config_info(const ts3::CodecConfig & cfg) {
    json j;
    j["config"]                      = ts3::codec_config_to_json(cfg);
    j["param_count"]                 = ts3::CodecModel::param_count(cfg);
    j["bits_per_token"]              = cfg.bits_per_token();
    j["rates"]                       = rates_json(cfg);
    j["algorithmic_latency_seconds"] = ts3::algorithmic_latency_seconds(cfg);
    j["macs"]                        = macs_json(cfg);
    return j;
}

}  // namespace

extern "C" {

const char * ts3_version(void) {
    return "0.1.0";
}

const char * ts3_last_error(void) {
    return g_last_error.c_str();
}

void ts3_free(void * ptr) {
    std::free(ptr);
}

ts3_status ts3_config_info_json(const char * config_text, char ** out_json) {
    return guarded([&] {
        require(config_text != nullptr, "config_text");
        require(out_json != nullptr, "out_json");
        *out_json = dup_string(config_info(resolve_codec_config(config_text)).dump());
    });
}

ts3_status ts3_checkpoint_info_json(const char * path, char ** out_json) {
    return guarded([&] {
        require(path != nullptr, "path");
        require(out_json != nullptr, "out_json");
        const ts3::Archive a = ts3::read_archive(path);
        ts3::check(a.meta.value("format", "") == "ts3-checkpoint", ts3::ErrCode::format,
                   "checkpoint: missing format marker, not a checkpoint");
        json info       = config_info(ts3::codec_config_from_json(a.meta.at("codec")));
        info["kind"]    = a.meta.value("kind", "");
        info["step"]    = a.meta.value("step", int64_t{0});
        info["tensors"] = a.tensors.size();
        *out_json       = dup_string(info.dump());
    });
}

ts3_status ts3_macs_table(const char * config_text, char ** out_text) {
    return guarded([&] {
        require(config_text != nullptr, "config_text");
        require(out_text != nullptr, "out_text");
        *out_text = dup_string(ts3::macs_table(ts3::macs(resolve_codec_config(config_text))));
    });
}

/* ---- model ---- */

ts3_status ts3_model_create(const char * config_text, uint64_t seed, ts3_model ** out) {
    return guarded([&] {
        require(config_text != nullptr, "config_text");
        require(out != nullptr, "out");
        *out = new ts3_model{std::make_unique<ts3::CodecModel>(resolve_codec_config(config_text), seed)};
    });
}

ts3_status ts3_model_load(const char * checkpoint_path, ts3_model ** out) {
    return guarded([&] {
        require(checkpoint_path != nullptr, "checkpoint_path");
        require(out != nullptr, "out");
        *out = new ts3_model{ts3::load_model(checkpoint_path)};
    });
}

ts3_status ts3_model_save(const ts3_model * model, const char * checkpoint_path) {
    return guarded([&] {
        require(model != nullptr, "model");
        require(checkpoint_path != nullptr, "checkpoint_path");
        ts3::save_model(checkpoint_path, *model->impl);
    });
}

void ts3_model_free(ts3_model * model) {
    delete model;
}

ts3_status ts3_model_config_json(const ts3_model * model, char ** out_json) {
    return guarded([&] {
        require(model != nullptr, "model");
        require(out_json != nullptr, "out_json");
        *out_json = dup_string(ts3::codec_config_to_json(model->impl->config()).dump());
    });
}

ts3_status ts3_model_param_count(const ts3_model * model, int64_t * out) {
    return guarded([&] {
        require(model != nullptr, "model");
        require(out != nullptr, "out");
        *out = ts3::CodecModel::param_count(model->impl->config());
    });
}

/* ---- offline coding ---- */

ts3_status ts3_encode(const ts3_model * model, const double * samples, size_t count, int32_t ** out_tokens,
                      size_t * out_count) {
    return guarded([&] {
        require(model != nullptr, "model");
        require(samples != nullptr || count == 0, "samples");
        require(out_tokens != nullptr, "out_tokens");
        require(out_count != nullptr, "out_count");
        const std::vector<double> wave(samples, samples + count);
        dup_array(model->impl->encode(wave), out_tokens, out_count);
    });
}

ts3_status ts3_decode(const ts3_model * model, const int32_t * tokens, size_t count, int64_t original_length,
                      double ** out_samples, size_t * out_count) {
    return guarded([&] {
        require(model != nullptr, "model");
        require(tokens != nullptr || count == 0, "tokens");
        require(out_samples != nullptr, "out_samples");
        require(out_count != nullptr, "out_count");
        const std::vector<int32_t> ids(tokens, tokens + count);
        const int64_t              full = static_cast<int64_t>(count) * model->impl->config().frame_size;
        dup_array(model->impl->decode(ids, original_length < 0 ? full : original_length), out_samples, out_count);
    });
}

ts3_status ts3_encode_container(const ts3_model * model, const double * samples, size_t count, uint8_t ** out_bytes,
                                size_t * out_count) {
    return guarded([&] {
        require(model != nullptr, "model");
        require(samples != nullptr || count == 0, "samples");
        require(out_bytes != nullptr, "out_bytes");
        require(out_count != nullptr, "out_count");
        const std::vector<double> wave(samples, samples + count);
        dup_array(ts3::encode_to_container(*model->impl, wave), out_bytes, out_count);
    });
}

ts3_status ts3_decode_container(const ts3_model * model, const uint8_t * bytes, size_t count, double ** out_samples,
                                size_t * out_count) {
    return guarded([&] {
        require(model != nullptr, "model");
        require(bytes != nullptr || count == 0, "bytes");
        require(out_samples != nullptr, "out_samples");
        require(out_count != nullptr, "out_count");
        const std::vector<uint8_t> buf(bytes, bytes + count);
        dup_array(ts3::decode_from_container(*model->impl, buf), out_samples, out_count);
    });
}

ts3_status ts3_container_build(const ts3_model * model, const int32_t * tokens, size_t count,
                               int64_t original_length, uint8_t ** out_bytes, size_t * out_count) {
    return guarded([&] {
        require(model != nullptr, "model");
        require(tokens != nullptr || count == 0, "tokens");
        require(out_bytes != nullptr, "out_bytes");
        require(out_count != nullptr, "out_count");
        const ts3::CodecConfig & cfg = model->impl->config();
        ts3::Container           c;
        c.config_id       = cfg.config_id;
        c.sample_rate     = cfg.sample_rate;
        c.frame_size      = cfg.frame_size;
        c.codebook_size   = cfg.codebook_size;
        c.original_length = original_length;
        c.tokens.assign(tokens, tokens + count);
        dup_array(ts3::serialize_container(c), out_bytes, out_count);
    });
}

ts3_status ts3_container_parse(const uint8_t * bytes, size_t count, int32_t ** out_tokens, size_t * out_token_count,
                               char ** out_header_json) {
    return guarded([&] {
        require(bytes != nullptr || count == 0, "bytes");
        require(out_tokens != nullptr, "out_tokens");
        require(out_token_count != nullptr, "out_token_count");
        require(out_header_json != nullptr, "out_header_json");
        const std::vector<uint8_t> buf(bytes, bytes + count);
        const ts3::Container       c = ts3::parse_container(buf);
        json                       header;
        header["config_id"]       = c.config_id;
        header["sample_rate"]     = c.sample_rate;
        header["frame_size"]      = c.frame_size;
        header["codebook_size"]   = c.codebook_size;
        header["original_length"] = c.original_length;
        header["token_count"]     = c.tokens.size();
        dup_array(c.tokens, out_tokens, out_token_count);
        *out_header_json = dup_string(header.dump());
    });
}

/* ---- streaming sessions ---- */

ts3_status ts3_encoder_create(const ts3_model * model, ts3_encoder ** out) {
    return guarded([&] {
        require(model != nullptr, "model");
        require(out != nullptr, "out");
        *out = new ts3_encoder{ts3::EncoderSession(*model->impl)};
    });
}

ts3_status ts3_encoder_feed(ts3_encoder * enc, const double * samples, size_t count, int32_t ** out_tokens,
                            size_t * out_count) {
    return guarded([&] {
        require(enc != nullptr, "encoder");
        require(samples != nullptr || count == 0, "samples");
        require(out_tokens != nullptr, "out_tokens");
        require(out_count != nullptr, "out_count");
        dup_array(enc->impl.feed(samples, count), out_tokens, out_count);
    });
}

ts3_status ts3_encoder_flush(ts3_encoder * enc, int32_t ** out_tokens, size_t * out_count) {
    return guarded([&] {
        require(enc != nullptr, "encoder");
        require(out_tokens != nullptr, "out_tokens");
        require(out_count != nullptr, "out_count");
        dup_array(enc->impl.flush(), out_tokens, out_count);
    });
}

void ts3_encoder_free(ts3_encoder * enc) {
    delete enc;
}

ts3_status ts3_decoder_create(const ts3_model * model, ts3_decoder ** out) {
    return guarded([&] {
        require(model != nullptr, "model");
        require(out != nullptr, "out");
        *out = new ts3_decoder{ts3::DecoderSession(*model->impl)};
    });
}

ts3_status ts3_decoder_feed(ts3_decoder * dec, const int32_t * tokens, size_t count, double ** out_samples,
                            size_t * out_count) {
    return guarded([&] {
        require(dec != nullptr, "decoder");
        require(tokens != nullptr || count == 0, "tokens");
        require(out_samples != nullptr, "out_samples");
        require(out_count != nullptr, "out_count");
        const std::vector<int32_t> ids(tokens, tokens + count);
        dup_array(dec->impl.feed(ids), out_samples, out_count);
    });
}

ts3_status ts3_decoder_flush(ts3_decoder * dec) {
    return guarded([&] {
        require(dec != nullptr, "decoder");
        dec->impl.flush();
    });
}

void ts3_decoder_free(ts3_decoder * dec) {
    delete dec;
}

/* ---- training ---- */

ts3_status ts3_corpus_create(ts3_corpus ** out) {
    return guarded([&] {
        require(out != nullptr, "out");
        *out = new ts3_corpus{};
    });
}

ts3_status ts3_corpus_add(ts3_corpus * corpus, const double * samples, size_t count) {
    return guarded([&] {
        require(corpus != nullptr, "corpus");
        require(samples != nullptr, "samples");
        ts3::check(count > 0, ts3::ErrCode::data, "corpus: empty utterance");
        corpus->utterances.emplace_back(samples, samples + count);
    });
}

ts3_status ts3_corpus_add_wav(ts3_corpus * corpus, const char * path) {
    return guarded([&] {
        require(corpus != nullptr, "corpus");
        require(path != nullptr, "path");
        ts3::audio::Waveform w = ts3::audio::load_wav(path, 16000);
        ts3::check(!w.samples.empty(), ts3::ErrCode::data, std::string("corpus: '") + path + "' holds no samples");
        corpus->utterances.push_back(std::move(w.samples));
    });
}

ts3_status ts3_corpus_size(const ts3_corpus * corpus, size_t * out) {
    return guarded([&] {
        require(corpus != nullptr, "corpus");
        require(out != nullptr, "out");
        *out = corpus->utterances.size();
    });
}

void ts3_corpus_free(ts3_corpus * corpus) {
    delete corpus;
}

ts3_status ts3_trainer_create(const char * bundle_json, ts3_trainer ** out) {
    return guarded([&] {
        require(bundle_json != nullptr, "bundle_json");
        require(out != nullptr, "out");
        const json bundle = parse_json(bundle_json, "trainer bundle");
        ts3::check(bundle.is_object(), ts3::ErrCode::config, "trainer bundle: expected a JSON object");
        for (const auto & item : bundle.items()) {
            ts3::check(item.key() == "codec" || item.key() == "discriminator" || item.key() == "trainer",
                       ts3::ErrCode::config, "trainer bundle: unknown section '" + item.key() + "'");
        }
        ts3::check(bundle.contains("codec"), ts3::ErrCode::config, "trainer bundle: missing 'codec' section");
        ts3::check(bundle.contains("trainer"), ts3::ErrCode::config, "trainer bundle: missing 'trainer' section");

        const json & cj = bundle.at("codec");
        const ts3::CodecConfig codec =
            cj.is_string() ? resolve_codec_config(cj.get<std::string>()) : ts3::codec_config_from_json(cj);

        ts3::DiscriminatorConfig disc = ts3::desk_discriminator_config();
        if (bundle.contains("discriminator")) {
            const json & dj = bundle.at("discriminator");
            if (dj.is_string()) {
                ts3::check(dj.get<std::string>() == "desk", ts3::ErrCode::config,
                           "trainer bundle: the only named discriminator is 'desk'");
            } else {
                disc = ts3::discriminator_config_from_json(dj);
            }
        }

        const ts3::TrainerConfig tcfg = ts3::trainer_config_from_json(bundle.at("trainer"));
        *out = new ts3_trainer{std::make_unique<ts3::Trainer>(codec, disc, tcfg)};
    });
}

ts3_status ts3_trainer_load(const char * checkpoint_path, ts3_trainer ** out) {
    return guarded([&] {
        require(checkpoint_path != nullptr, "checkpoint_path");
        require(out != nullptr, "out");
        *out = new ts3_trainer{ts3::Trainer::load_training_checkpoint(checkpoint_path)};
    });
}

void ts3_trainer_free(ts3_trainer * trainer) {
    delete trainer;
}

ts3_status ts3_trainer_step(ts3_trainer * trainer, const ts3_corpus * corpus, char ** out_report_json) {
    return guarded([&] {
        require(trainer != nullptr, "trainer");
        require(corpus != nullptr, "corpus");
        require(out_report_json != nullptr, "out_report_json");
        ts3::Trainer &            tr   = *trainer->impl;
        const ts3::TrainerConfig & cfg = tr.trainer_config();
        const std::vector<std::vector<double>> batch =
            ts3::crop_batch(corpus->utterances, cfg.crop_seconds, cfg.batch_size, tr.data_rng());
        *out_report_json = dup_string(tr.train_step(batch).to_json_line());
    });
}

ts3_status ts3_trainer_info_json(const ts3_trainer * trainer, char ** out_json) {
    return guarded([&] {
        require(trainer != nullptr, "trainer");
        require(out_json != nullptr, "out_json");
        const ts3::Trainer & tr = *trainer->impl;
        json                 j;
        j["step"]          = tr.step();
        j["next_lr"]       = ts3::lr_at_step(tr.trainer_config(), tr.step() + 1);
        j["trainer"]       = ts3::trainer_config_to_json(tr.trainer_config());
        j["codec"]         = ts3::codec_config_to_json(tr.model().config());
        j["discriminator"] = ts3::discriminator_config_to_json(tr.adversary().config());
        *out_json          = dup_string(j.dump());
    });
}

ts3_status ts3_trainer_save(const ts3_trainer * trainer, const char * path) {
    return guarded([&] {
        require(trainer != nullptr, "trainer");
        require(path != nullptr, "path");
        trainer->impl->save_training_checkpoint(path);
    });
}

ts3_status ts3_trainer_save_model(const ts3_trainer * trainer, const char * path) {
    return guarded([&] {
        require(trainer != nullptr, "trainer");
        require(path != nullptr, "path");
        trainer->impl->save_inference_checkpoint(path);
    });
}

/* ---- analysis ---- */

ts3_status ts3_mcd(const double * x, const double * y, size_t count, double sample_rate, double * out) {
    return guarded([&] {
        require(x != nullptr, "x");
        require(y != nullptr, "y");
        require(out != nullptr, "out");
        const std::vector<double> xs(x, x + count), ys(y, y + count);
        *out = ts3::mcd(xs, ys, sample_rate);
    });
}

ts3_status ts3_codebook_stats_json(const int32_t * tokens, size_t count, int64_t codebook_size, char ** out_json) {
    return guarded([&] {
        require(tokens != nullptr || count == 0, "tokens");
        require(out_json != nullptr, "out_json");
        const std::vector<int32_t> ids(tokens, tokens + count);
        const ts3::CodebookStats   s = ts3::codebook_stats(ids, codebook_size);
        *out_json = dup_string(
            json{{"distinct", s.distinct}, {"utilization", s.utilization}, {"perplexity", s.perplexity}}.dump());
    });
}

/* ---- WAV files ---- */

ts3_status ts3_wav_read(const char * path, int target_rate, double ** out_samples, size_t * out_count) {
    return guarded([&] {
        require(path != nullptr, "path");
        require(out_samples != nullptr, "out_samples");
        require(out_count != nullptr, "out_count");
        ts3::audio::Waveform w = ts3::audio::load_wav(path, target_rate);
        dup_array(w.samples, out_samples, out_count);
    });
}

ts3_status ts3_wav_write(const char * path, const double * samples, size_t count, int sample_rate) {
    return guarded([&] {
        require(path != nullptr, "path");
        require(samples != nullptr || count == 0, "samples");
        const std::vector<double> w(samples, samples + count);
        ts3::audio::save_wav(path, w, sample_rate);
    });
}

}  // extern "C"
