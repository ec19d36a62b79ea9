/* Copyright 2026 ts3codec authors
 * Public C interface to the ts3codec library: opaque handles, integer status
 * codes, and heap-allocated output buffers released through ts3_free.
 *
 * Licensed under the Apache License, Version 2.0
 */

#ifndef TS3_TS3_H
#define TS3_TS3_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TS3_API __declspec(dllexport)
#else
#define TS3_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns TS3_OK or a nonzero status; on failure a human-readable
 * message is available from ts3_last_error() until the calling thread's next
 * failing call. Output buffers (arrays and strings) are owned by the caller
 * and released with ts3_free; they may be NULL when the returned count is 0.
 * Handles are not thread-safe; a model must outlive its sessions. */
typedef enum ts3_status {
    TS3_OK              = 0,
    TS3_ERR_INVALID_ARG = 1, /* bad argument value */
    TS3_ERR_CONFIG      = 2, /* invalid or inconsistent configuration */
    TS3_ERR_DATA        = 3, /* unusable input data (empty corpus, NaNs) */
    TS3_ERR_IO          = 4, /* file system failure */
    TS3_ERR_FORMAT      = 5, /* malformed file or stream */
    TS3_ERR_STATE       = 6, /* operation illegal in the current state */
    TS3_ERR_RUNTIME     = 7  /* numerical or internal failure */
} ts3_status;

TS3_API const char * ts3_version(void);
TS3_API const char * ts3_last_error(void);
TS3_API void         ts3_free(void * ptr);

/* Where a function takes config_text, it accepts either a named configuration
 * ("X1".."X5", or "desk" for the small CPU-scale shape) or a JSON object with
 * the full codec configuration. */

/* Configuration report: the resolved config plus parameter count, rates,
 * latency, and per-component MAC counts, as a JSON object. Purely analytic;
 * never builds the model. */
TS3_API ts3_status ts3_config_info_json(const char * config_text, char ** out_json);

/* Same report for the codec stored in a checkpoint, plus its kind and step. */
TS3_API ts3_status ts3_checkpoint_info_json(const char * path, char ** out_json);

/* Printable per-component MAC table for a configuration. */
TS3_API ts3_status ts3_macs_table(const char * config_text, char ** out_text);

/* ---- model ---- */

typedef struct ts3_model ts3_model;

TS3_API ts3_status ts3_model_create(const char * config_text, uint64_t seed, ts3_model ** out);
TS3_API ts3_status ts3_model_load(const char * checkpoint_path, ts3_model ** out);
TS3_API ts3_status ts3_model_save(const ts3_model * model, const char * checkpoint_path);
TS3_API void       ts3_model_free(ts3_model * model);

TS3_API ts3_status ts3_model_config_json(const ts3_model * model, char ** out_json);
TS3_API ts3_status ts3_model_param_count(const ts3_model * model, int64_t * out);

/* ---- offline coding ----
 * Samples are float64 amplitudes at the model sample rate. Encoding pads the
 * tail to a whole frame and emits one token per frame. Decoding reconstructs
 * frame_size samples per token; original_length trims the padding (pass a
 * negative value to keep every reconstructed sample). */

TS3_API ts3_status ts3_encode(const ts3_model * model, const double * samples, size_t count,
                              int32_t ** out_tokens, size_t * out_count);
TS3_API ts3_status ts3_decode(const ts3_model * model, const int32_t * tokens, size_t count,
                              int64_t original_length, double ** out_samples, size_t * out_count);

/* Whole-stream conveniences over the .ts3c container format. */
TS3_API ts3_status ts3_encode_container(const ts3_model * model, const double * samples, size_t count,
                                        uint8_t ** out_bytes, size_t * out_count);
TS3_API ts3_status ts3_decode_container(const ts3_model * model, const uint8_t * bytes, size_t count,
                                        double ** out_samples, size_t * out_count);

/* Builds a container from already-encoded tokens (for example from a
 * streaming session); original_length is the pre-padding sample count. */
TS3_API ts3_status ts3_container_build(const ts3_model * model, const int32_t * tokens, size_t count,
                                       int64_t original_length, uint8_t ** out_bytes, size_t * out_count);

/* Validates a container and extracts its tokens plus a JSON object with the
 * header fields (config_id, sample_rate, frame_size, codebook_size,
 * original_length, token_count). Needs no model. */
TS3_API ts3_status ts3_container_parse(const uint8_t * bytes, size_t count, int32_t ** out_tokens,
                                       size_t * out_token_count, char ** out_header_json);

/* ---- streaming sessions ----
 * The encoder buffers an incomplete trailing frame between feeds and emits
 * tokens bit-identical to offline encoding; flush zero-pads a non-empty
 * remainder and closes the session. The decoder emits frame_size samples per
 * token immediately; its flush only closes the session. */

typedef struct ts3_encoder ts3_encoder;
typedef struct ts3_decoder ts3_decoder;

TS3_API ts3_status ts3_encoder_create(const ts3_model * model, ts3_encoder ** out);
TS3_API ts3_status ts3_encoder_feed(ts3_encoder * enc, const double * samples, size_t count,
                                    int32_t ** out_tokens, size_t * out_count);
TS3_API ts3_status ts3_encoder_flush(ts3_encoder * enc, int32_t ** out_tokens, size_t * out_count);
TS3_API void       ts3_encoder_free(ts3_encoder * enc);

TS3_API ts3_status ts3_decoder_create(const ts3_model * model, ts3_decoder ** out);
TS3_API ts3_status ts3_decoder_feed(ts3_decoder * dec, const int32_t * tokens, size_t count,
                                    double ** out_samples, size_t * out_count);
TS3_API ts3_status ts3_decoder_flush(ts3_decoder * dec);
TS3_API void       ts3_decoder_free(ts3_decoder * dec);

/* ---- training ---- */

typedef struct ts3_corpus  ts3_corpus;
typedef struct ts3_trainer ts3_trainer;

TS3_API ts3_status ts3_corpus_create(ts3_corpus ** out);
TS3_API ts3_status ts3_corpus_add(ts3_corpus * corpus, const double * samples, size_t count);
/* Reads a WAV file, resampling to 16 kHz when needed. */
TS3_API ts3_status ts3_corpus_add_wav(ts3_corpus * corpus, const char * path);
TS3_API ts3_status ts3_corpus_size(const ts3_corpus * corpus, size_t * out);
TS3_API void       ts3_corpus_free(ts3_corpus * corpus);

/* bundle_json holds three sections: "codec" (config object, or a named
 * configuration as a string), "trainer" (object), and optionally
 * "discriminator" (object, or "desk"; the desk discriminator when absent). */
TS3_API ts3_status ts3_trainer_create(const char * bundle_json, ts3_trainer ** out);
TS3_API ts3_status ts3_trainer_load(const char * checkpoint_path, ts3_trainer ** out);
TS3_API void       ts3_trainer_free(ts3_trainer * trainer);

/* Draws one random-crop batch from the corpus with the trainer's own data
 * rng and runs one optimization step; returns the loss record as a JSON
 * line. Deterministic given the checkpointed state and the corpus. */
TS3_API ts3_status ts3_trainer_step(ts3_trainer * trainer, const ts3_corpus * corpus, char ** out_report_json);

/* Step counter, schedule, and resolved configs as a JSON object. */
TS3_API ts3_status ts3_trainer_info_json(const ts3_trainer * trainer, char ** out_json);

/* Full training state, resumable bit-exactly. */
TS3_API ts3_status ts3_trainer_save(const ts3_trainer * trainer, const char * path);
/* Codec weights only, for deployment. */
TS3_API ts3_status ts3_trainer_save_model(const ts3_trainer * trainer, const char * path);

/* ---- analysis ---- */

/* Mel cepstral distortion in dB between two equal-length waveforms. */
TS3_API ts3_status ts3_mcd(const double * x, const double * y, size_t count, double sample_rate, double * out);

/* Distinct-code count, utilization, and perplexity as a JSON object. */
TS3_API ts3_status ts3_codebook_stats_json(const int32_t * tokens, size_t count, int64_t codebook_size,
                                           char ** out_json);

/* ---- WAV files ---- */

/* Reads mono 16-bit PCM, resampled to target_rate when the rates differ. */
TS3_API ts3_status ts3_wav_read(const char * path, int target_rate, double ** out_samples, size_t * out_count);
TS3_API ts3_status ts3_wav_write(const char * path, const double * samples, size_t count, int sample_rate);

#ifdef __cplusplus
}
#endif

#endif /* TS3_TS3_H */
