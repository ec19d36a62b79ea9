// Copyright 2026 ts3codec authors
// ts3: operator entry point with train, encode, decode, eval, and info
// subcommands, driving the codec exclusively through the public C API.
//
// File encode/decode speaks WAV and .ts3c containers; "-" switches a side to
// pipe mode: raw signed 16-bit little-endian PCM at the model rate on the
// waveform side, one big-endian uint32 per token on the token side. Every
// command records a run manifest before starting work (next to its output,
// or on stderr when the output is a pipe). Exit codes: 0 success, 1 bad
// argument, 2 configuration, 3 data, 4 io, 5 format, 6 state, 7 runtime.
//
// Licensed under the Apache License, Version 2.0

#include "ts3/ts3.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr size_t kPipeChunk = 4096;  // samples per read in pipe mode

[[noreturn]] void die(ts3_status s) {
    std::fprintf(stderr, "ts3: error: %s\n", ts3_last_error());
    std::exit(static_cast<int>(s));
}

[[noreturn]] void die_msg(ts3_status s, const std::string & msg) {
    std::fprintf(stderr, "ts3: error: %s\n", msg.c_str());
    std::exit(static_cast<int>(s));
}

void expect(ts3_status s) {
    if (s != TS3_OK) {
        die(s);
    }
}

std::string take_string(char * s) {
    std::string out = s == nullptr ? "" : s;
    ts3_free(s);
    return out;
}

struct ModelHandle {
    ts3_model * h = nullptr;
    ~ModelHandle() { ts3_model_free(h); }
};
struct CorpusHandle {
    ts3_corpus * h = nullptr;
    ~CorpusHandle() { ts3_corpus_free(h); }
};
struct TrainerHandle {
    ts3_trainer * h = nullptr;
    ~TrainerHandle() { ts3_trainer_free(h); }
};

void check_device_env() {
    const char * dev = std::getenv("TS3_DEVICE");
    if (dev != nullptr && *dev != '\0' && std::string(dev) != "cpu") {
        die_msg(TS3_ERR_CONFIG, std::string("TS3_DEVICE='") + dev + "' is not available; this build runs on cpu");
    }
}

std::string read_text_file(const std::string & path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        die_msg(TS3_ERR_IO, "cannot open '" + path + "'");
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

std::vector<uint8_t> read_binary_file(const std::string & path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        die_msg(TS3_ERR_IO, "cannot open '" + path + "'");
    }
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void write_binary_file(const std::string & path, const uint8_t * data, size_t n) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(reinterpret_cast<const char *>(data), static_cast<std::streamsize>(n))) {
        die_msg(TS3_ERR_IO, "cannot write '" + path + "'");
    }
}

std::string now_utc() {
    const std::time_t t = std::time(nullptr);
    char              buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

json manifest_base(const std::string & command, int argc, char ** argv) {
    json m;
    m["command"]     = command;
    m["argv"]        = std::vector<std::string>(argv, argv + argc);
    m["version"]     = ts3_version();
    m["started_utc"] = now_utc();
    return m;
}

// Manifests precede the work they describe: next to a file output, or as one
// JSON line on stderr when the output goes to a pipe.
void write_manifest(const json & m, const std::string & path) {
    if (path.empty()) {
        std::fprintf(stderr, "%s\n", m.dump().c_str());
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out || !(out << m.dump(2) << "\n")) {
        die_msg(TS3_ERR_IO, "cannot write manifest '" + path + "'");
    }
}

std::vector<std::string> list_wavs(const std::string & dir) {
    if (!fs::is_directory(dir)) {
        die_msg(TS3_ERR_IO, "'" + dir + "' is not a directory");
    }
    std::vector<std::string> files;
    for (const auto & entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".wav") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string with_commas(int64_t v) {
    std::string digits = std::to_string(v);
    std::string out;
    int         run = 0;
    for (size_t i = digits.size(); i-- > 0;) {
        out.insert(out.begin(), digits[i]);
        if (++run == 3 && i > 0) {
            out.insert(out.begin(), ',');
            run = 0;
        }
    }
    return out;
}

// ---- pipe conversions, matching the WAV reader/writer exactly ----

size_t read_pcm_chunk(std::FILE * f, std::vector<double> & out) {
    uint8_t raw[kPipeChunk * 2];
    const size_t got = std::fread(raw, 1, sizeof raw, f);
    if (got % 2 != 0) {
        die_msg(TS3_ERR_FORMAT, "pcm stream: odd byte count, truncated sample");
    }
    out.resize(got / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        const auto v = static_cast<int16_t>(static_cast<uint16_t>(raw[2 * i]) |
                                            (static_cast<uint16_t>(raw[2 * i + 1]) << 8));
        out[i]       = static_cast<double>(v) / 32768.0;
    }
    return out.size();
}

void write_pcm(std::FILE * f, const double * samples, size_t n) {
    std::vector<uint8_t> raw(n * 2);
    for (size_t i = 0; i < n; ++i) {
        const double  c = std::clamp(samples[i], -1.0, 1.0);
        const int32_t q = static_cast<int32_t>(std::lrint(c * 32768.0));
        const auto    s = static_cast<uint16_t>(static_cast<int16_t>(std::clamp(q, -32768, 32767)));
        raw[2 * i]      = static_cast<uint8_t>(s & 0xFF);
        raw[2 * i + 1]  = static_cast<uint8_t>(s >> 8);
    }
    if (std::fwrite(raw.data(), 1, raw.size(), f) != raw.size()) {
        die_msg(TS3_ERR_IO, "cannot write pcm stream");
    }
}

void write_tokens_be(std::FILE * f, const int32_t * tokens, size_t n) {
    std::vector<uint8_t> raw(n * 4);
    for (size_t i = 0; i < n; ++i) {
        const auto v   = static_cast<uint32_t>(tokens[i]);
        raw[4 * i]     = static_cast<uint8_t>(v >> 24);
        raw[4 * i + 1] = static_cast<uint8_t>(v >> 16);
        raw[4 * i + 2] = static_cast<uint8_t>(v >> 8);
        raw[4 * i + 3] = static_cast<uint8_t>(v);
    }
    if (std::fwrite(raw.data(), 1, raw.size(), f) != raw.size()) {
        die_msg(TS3_ERR_IO, "cannot write token stream");
    }
}

// Returns false on clean EOF; dies on a truncated token.
bool read_token_be(std::FILE * f, int32_t * out) {
    uint8_t      raw[4];
    const size_t got = std::fread(raw, 1, 4, f);
    if (got == 0) {
        return false;
    }
    if (got != 4) {
        die_msg(TS3_ERR_FORMAT, "token stream: truncated token");
    }
    *out = static_cast<int32_t>((static_cast<uint32_t>(raw[0]) << 24) | (static_cast<uint32_t>(raw[1]) << 16) |
                                (static_cast<uint32_t>(raw[2]) << 8) | static_cast<uint32_t>(raw[3]));
    return true;
}

// ---- model loading shared by encode/decode/eval ----

struct ModelArgs {
    std::string checkpoint;
    std::string config_text;
    uint64_t    seed = 0;
};

void add_model_options(CLI::App * cmd, ModelArgs & args) {
    auto * ckpt = cmd->add_option("-m,--model", args.checkpoint, "checkpoint file with the codec weights");
    auto * cfg  = cmd->add_option("--config", args.config_text,
                                  "named configuration or config JSON for a fresh seeded model");
    cmd->add_option("--seed", args.seed, "weight seed when --config is used")->needs(cfg);
    ckpt->excludes(cfg);
    cfg->excludes(ckpt);
}

ts3_model * open_model(const ModelArgs & args) {
    ts3_model * m = nullptr;
    if (!args.checkpoint.empty()) {
        expect(ts3_model_load(args.checkpoint.c_str(), &m));
    } else if (!args.config_text.empty()) {
        expect(ts3_model_create(args.config_text.c_str(), args.seed, &m));
    } else {
        die_msg(TS3_ERR_INVALID_ARG, "one of --model or --config is required");
    }
    return m;
}

json model_config(const ts3_model * m) {
    char * text = nullptr;
    expect(ts3_model_config_json(m, &text));
    return json::parse(take_string(text));
}

// ---- train ----

int cmd_train(int argc, char ** argv, const std::string & config_path, const std::string & data_dir,
              const std::string & out_dir, const std::string & resume, int64_t steps_override) {
    TrainerHandle tr;
    if (!resume.empty()) {
        expect(ts3_trainer_load(resume.c_str(), &tr.h));
    } else {
        expect(ts3_trainer_create(read_text_file(config_path).c_str(), &tr.h));
    }

    char * info_text = nullptr;
    expect(ts3_trainer_info_json(tr.h, &info_text));
    const json    info     = json::parse(take_string(info_text));
    const int64_t start    = info["step"].get<int64_t>();
    const int64_t target   = steps_override > 0 ? steps_override : info["trainer"]["total_steps"].get<int64_t>();
    const int64_t interval = info["trainer"]["checkpoint_interval"].get<int64_t>();

    const std::vector<std::string> files = list_wavs(data_dir);
    if (files.empty()) {
        die_msg(TS3_ERR_DATA, "train: no WAV files found in '" + data_dir + "'");
    }
    CorpusHandle corpus;
    expect(ts3_corpus_create(&corpus.h));
    for (const std::string & f : files) {
        expect(ts3_corpus_add_wav(corpus.h, f.c_str()));
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const std::string log_path = out_dir + "/train_log.jsonl";

    json manifest          = manifest_base("train", argc, argv);
    manifest["config"]     = info;  // resolved configs, step, and schedule
    manifest["data_dir"]   = data_dir;
    manifest["corpus"]     = files;
    manifest["out_dir"]    = out_dir;
    manifest["resume"]     = resume;
    manifest["target_step"] = target;
    manifest["outputs"]    = {log_path, out_dir + "/model.ts3k"};
    write_manifest(manifest, out_dir + "/manifest.json");

    std::FILE * log = std::fopen(log_path.c_str(), resume.empty() ? "w" : "a");
    if (log == nullptr) {
        die_msg(TS3_ERR_IO, "cannot open '" + log_path + "'");
    }

    auto checkpoint_path = [&](int64_t step) {
        char name[32];
        std::snprintf(name, sizeof name, "step-%08lld.ts3k", static_cast<long long>(step));
        return out_dir + "/" + name;
    };

    for (int64_t step = start + 1; step <= target; ++step) {
        char * report = nullptr;
        expect(ts3_trainer_step(tr.h, corpus.h, &report));
        const std::string line = take_string(report);
        std::fprintf(log, "%s\n", line.c_str());
        std::fflush(log);
        std::fprintf(stdout, "%s\n", line.c_str());
        if (interval > 0 && step % interval == 0 && step != target) {
            expect(ts3_trainer_save(tr.h, checkpoint_path(step).c_str()));
        }
    }
    std::fclose(log);

    expect(ts3_trainer_save(tr.h, checkpoint_path(target).c_str()));
    expect(ts3_trainer_save_model(tr.h, (out_dir + "/model.ts3k").c_str()));

    manifest["finished_utc"] = now_utc();
    write_manifest(manifest, out_dir + "/manifest.json");
    std::fprintf(stderr, "ts3: trained to step %lld; checkpoints in %s\n", static_cast<long long>(target),
                 out_dir.c_str());
    return 0;
}

// ---- encode ----

int cmd_encode(int argc, char ** argv, const ModelArgs & margs, const std::string & in, const std::string & out,
               bool stream) {
    ModelHandle model;
    model.h = open_model(margs);
    const json    cfg   = model_config(model.h);
    const int64_t frame = cfg["frame_size"].get<int64_t>();

    json manifest       = manifest_base("encode", argc, argv);
    manifest["config"]  = cfg;
    manifest["input"]   = in;
    manifest["outputs"] = {out};
    write_manifest(manifest, out == "-" ? "" : out + ".manifest.json");

    const bool pipe_in  = in == "-";
    const bool pipe_out = out == "-";

    // offline fast path: WAV file to container file in one call
    if (!pipe_in && !pipe_out && !stream) {
        double * samples = nullptr;
        size_t   n       = 0;
        expect(ts3_wav_read(in.c_str(), static_cast<int>(cfg["sample_rate"].get<int64_t>()), &samples, &n));
        uint8_t * bytes  = nullptr;
        size_t    nbytes = 0;
        expect(ts3_encode_container(model.h, samples, n, &bytes, &nbytes));
        write_binary_file(out, bytes, nbytes);
        std::fprintf(stderr, "ts3: encoded %zu samples -> %zu tokens (%zu bytes)\n", n,
                     (n + static_cast<size_t>(frame) - 1) / static_cast<size_t>(frame), nbytes);
        ts3_free(bytes);
        ts3_free(samples);
        return 0;
    }

    // session path: incremental input, incremental or collected output
    ts3_encoder * enc = nullptr;
    expect(ts3_encoder_create(model.h, &enc));
    std::vector<int32_t> collected;
    int64_t              total_samples = 0;

    auto sink = [&](const int32_t * tokens, size_t n) {
        if (pipe_out) {
            write_tokens_be(stdout, tokens, n);
            std::fflush(stdout);
        } else {
            collected.insert(collected.end(), tokens, tokens + n);
        }
    };

    if (pipe_in) {
        std::vector<double> chunk;
        while (read_pcm_chunk(stdin, chunk) > 0) {
            int32_t * tokens = nullptr;
            size_t    n      = 0;
            expect(ts3_encoder_feed(enc, chunk.data(), chunk.size(), &tokens, &n));
            sink(tokens, n);
            ts3_free(tokens);
            total_samples += static_cast<int64_t>(chunk.size());
        }
    } else {
        double * samples = nullptr;
        size_t   n       = 0;
        expect(ts3_wav_read(in.c_str(), static_cast<int>(cfg["sample_rate"].get<int64_t>()), &samples, &n));
        for (size_t pos = 0; pos < n; pos += kPipeChunk) {
            const size_t take   = std::min(kPipeChunk, n - pos);
            int32_t *    tokens = nullptr;
            size_t       nt     = 0;
            expect(ts3_encoder_feed(enc, samples + pos, take, &tokens, &nt));
            sink(tokens, nt);
            ts3_free(tokens);
        }
        total_samples = static_cast<int64_t>(n);
        ts3_free(samples);
    }

    int32_t * tail  = nullptr;
    size_t    ntail = 0;
    expect(ts3_encoder_flush(enc, &tail, &ntail));
    sink(tail, ntail);
    ts3_free(tail);
    ts3_encoder_free(enc);

    if (!pipe_out) {
        uint8_t * bytes  = nullptr;
        size_t    nbytes = 0;
        expect(ts3_container_build(model.h, collected.data(), collected.size(), total_samples, &bytes, &nbytes));
        write_binary_file(out, bytes, nbytes);
        std::fprintf(stderr, "ts3: encoded %lld samples -> %zu tokens (%zu bytes)\n",
                     static_cast<long long>(total_samples), collected.size(), nbytes);
        ts3_free(bytes);
    }
    return 0;
}

// ---- decode ----

int cmd_decode(int argc, char ** argv, const ModelArgs & margs, const std::string & in, const std::string & out,
               bool stream) {
    ModelHandle model;
    model.h = open_model(margs);
    const json cfg = model_config(model.h);

    json manifest       = manifest_base("decode", argc, argv);
    manifest["config"]  = cfg;
    manifest["input"]   = in;
    manifest["outputs"] = {out};
    write_manifest(manifest, out == "-" ? "" : out + ".manifest.json");

    const bool pipe_in  = in == "-";
    const bool pipe_out = out == "-";
    const int  rate     = static_cast<int>(cfg["sample_rate"].get<int64_t>());

    std::vector<double> collected;
    auto                sink = [&](const double * samples, size_t n) {
        if (pipe_out) {
            write_pcm(stdout, samples, n);
            std::fflush(stdout);
        } else {
            collected.insert(collected.end(), samples, samples + n);
        }
    };

    if (pipe_in) {
        ts3_decoder * dec = nullptr;
        expect(ts3_decoder_create(model.h, &dec));
        int32_t id = 0;
        while (read_token_be(stdin, &id)) {
            double * samples = nullptr;
            size_t   n       = 0;
            expect(ts3_decoder_feed(dec, &id, 1, &samples, &n));
            sink(samples, n);
            ts3_free(samples);
        }
        expect(ts3_decoder_flush(dec));
        ts3_decoder_free(dec);
    } else {
        const std::vector<uint8_t> bytes = read_binary_file(in);

        int32_t * tokens  = nullptr;
        size_t    ntokens = 0;
        char *    header_text = nullptr;
        expect(ts3_container_parse(bytes.data(), bytes.size(), &tokens, &ntokens, &header_text));
        const json header = json::parse(take_string(header_text));
        if (header["sample_rate"] != cfg["sample_rate"] || header["frame_size"] != cfg["frame_size"] ||
            header["codebook_size"] != cfg["codebook_size"]) {
            ts3_free(tokens);
            auto describe = [](const json & c) {
                return "'" + c["config_id"].get<std::string>() + "' (frame " +
                       std::to_string(c["frame_size"].get<int64_t>()) + ", codebook " +
                       std::to_string(c["codebook_size"].get<int64_t>()) + ")";
            };
            die_msg(TS3_ERR_INVALID_ARG,
                    "decode: container built for " + describe(header) + " but the model is " + describe(cfg));
        }

        if (stream) {
            const auto    original = header["original_length"].get<int64_t>();
            ts3_decoder * dec      = nullptr;
            expect(ts3_decoder_create(model.h, &dec));
            std::vector<double> full;
            for (size_t i = 0; i < ntokens; ++i) {
                double * samples = nullptr;
                size_t   n       = 0;
                expect(ts3_decoder_feed(dec, &tokens[i], 1, &samples, &n));
                full.insert(full.end(), samples, samples + n);
                ts3_free(samples);
            }
            expect(ts3_decoder_flush(dec));
            ts3_decoder_free(dec);
            full.resize(static_cast<size_t>(original));  // trim the frame padding
            sink(full.data(), full.size());
        } else {
            double * samples = nullptr;
            size_t   n       = 0;
            expect(ts3_decode_container(model.h, bytes.data(), bytes.size(), &samples, &n));
            sink(samples, n);
            ts3_free(samples);
        }
        ts3_free(tokens);
    }

    if (!pipe_out) {
        expect(ts3_wav_write(out.c_str(), collected.data(), collected.size(), rate));
        std::fprintf(stderr, "ts3: decoded %zu samples to %s\n", collected.size(), out.c_str());
    }
    return 0;
}

// ---- eval ----

int cmd_eval(int argc, char ** argv, const ModelArgs & margs, const std::string & data_dir,
             const std::string & report_path) {
    ModelHandle model;
    model.h = open_model(margs);
    const json    cfg           = model_config(model.h);
    const int64_t codebook_size = cfg["codebook_size"].get<int64_t>();
    const int     rate          = static_cast<int>(cfg["sample_rate"].get<int64_t>());

    const std::vector<std::string> files = list_wavs(data_dir);
    if (files.empty()) {
        die_msg(TS3_ERR_DATA, "eval: no WAV files found in '" + data_dir + "'");
    }

    json manifest       = manifest_base("eval", argc, argv);
    manifest["config"]  = cfg;
    manifest["data_dir"] = data_dir;
    manifest["corpus"]  = files;
    manifest["outputs"] = {report_path};
    write_manifest(manifest, report_path + ".manifest.json");

    std::ofstream report(report_path, std::ios::trunc);
    if (!report) {
        die_msg(TS3_ERR_IO, "cannot write '" + report_path + "'");
    }

    char * info_text = nullptr;
    expect(ts3_config_info_json(cfg.dump().c_str(), &info_text));
    const json rates = json::parse(take_string(info_text))["rates"];

    std::vector<int32_t> pooled;
    double               mcd_sum = 0.0;
    int64_t              ok = 0, skipped = 0;

    for (const std::string & file : files) {
        double * samples = nullptr;
        size_t   n       = 0;
        if (ts3_wav_read(file.c_str(), rate, &samples, &n) != TS3_OK) {
            std::fprintf(stderr, "ts3: warning: skipping '%s': %s\n", file.c_str(), ts3_last_error());
            ++skipped;
            continue;
        }
        int32_t * tokens  = nullptr;
        size_t    ntokens = 0;
        expect(ts3_encode(model.h, samples, n, &tokens, &ntokens));
        double * recon  = nullptr;
        size_t   nrecon = 0;
        expect(ts3_decode(model.h, tokens, ntokens, static_cast<int64_t>(n), &recon, &nrecon));

        double d = 0.0;
        if (ts3_mcd(samples, recon, n, rate, &d) != TS3_OK) {
            std::fprintf(stderr, "ts3: warning: skipping '%s': %s\n", file.c_str(), ts3_last_error());
            ts3_free(recon);
            ts3_free(tokens);
            ts3_free(samples);
            ++skipped;
            continue;
        }

        char * stats_text = nullptr;
        expect(ts3_codebook_stats_json(tokens, ntokens, codebook_size, &stats_text));
        json record        = json::parse(take_string(stats_text));
        record["file"]     = fs::path(file).filename().string();
        record["samples"]  = n;
        record["tokens"]   = ntokens;
        record["mcd"]      = d;
        report << record.dump() << "\n";

        pooled.insert(pooled.end(), tokens, tokens + ntokens);
        mcd_sum += d;
        ++ok;
        ts3_free(recon);
        ts3_free(tokens);
        ts3_free(samples);
    }

    if (ok == 0) {
        die_msg(TS3_ERR_DATA, "eval: every file failed");
    }

    char * pooled_text = nullptr;
    expect(ts3_codebook_stats_json(pooled.data(), pooled.size(), codebook_size, &pooled_text));
    json aggregate         = json::parse(take_string(pooled_text));
    aggregate["files"]     = ok;
    aggregate["skipped"]   = skipped;
    aggregate["mean_mcd"]  = mcd_sum / static_cast<double>(ok);
    aggregate["bitrate"]   = rates["bitrate"];
    aggregate["frame_rate"] = rates["frame_rate"];
    aggregate["token_rate"] = rates["token_rate"];
    report << aggregate.dump() << "\n";
    std::fprintf(stdout, "%s\n", aggregate.dump().c_str());
    return 0;
}

// ---- info ----

int cmd_info(int argc, char ** argv, const std::string & input, const std::string & manifest_path) {
    json manifest     = manifest_base("info", argc, argv);
    manifest["input"] = input;
    write_manifest(manifest, manifest_path);

    char * info_text = nullptr;
    if (fs::is_regular_file(input)) {
        const std::vector<uint8_t> head = read_binary_file(input);
        if (head.size() >= 4 && std::memcmp(head.data(), "TS3K", 4) == 0) {
            expect(ts3_checkpoint_info_json(input.c_str(), &info_text));
        } else {
            expect(ts3_config_info_json(read_text_file(input).c_str(), &info_text));
        }
    } else {
        expect(ts3_config_info_json(input.c_str(), &info_text));
    }
    const json info = json::parse(take_string(info_text));
    const json cfg  = info["config"];

    if (info.contains("kind")) {
        std::printf("checkpoint        %s (kind %s, step %lld)\n", input.c_str(),
                    info["kind"].get<std::string>().c_str(),
                    static_cast<long long>(info["step"].get<int64_t>()));
    }
    std::printf("config            %s\n", cfg["config_id"].get<std::string>().c_str());
    std::printf("sample rate       %lld Hz\n", static_cast<long long>(cfg["sample_rate"].get<int64_t>()));
    std::printf("frame size        %lld samples\n", static_cast<long long>(cfg["frame_size"].get<int64_t>()));
    std::printf("bitrate           %.0f bps\n", info["rates"]["bitrate"].get<double>());
    std::printf("frame rate        %.0f Hz\n", info["rates"]["frame_rate"].get<double>());
    std::printf("token rate        %.0f Hz\n", info["rates"]["token_rate"].get<double>());
    std::printf("bits per token    %lld\n", static_cast<long long>(info["bits_per_token"].get<int64_t>()));
    std::printf("parameters        %s\n", with_commas(info["param_count"].get<int64_t>()).c_str());
    std::printf("latency           %.1f ms\n", info["algorithmic_latency_seconds"].get<double>() * 1000.0);
    std::printf("\n");

    char * table = nullptr;
    expect(ts3_macs_table(cfg.dump().c_str(), &table));
    std::printf("%s", take_string(table).c_str());
    return 0;
}

}  // namespace

int main(int argc, char ** argv) {
    check_device_env();

    CLI::App app{"ts3: transformer speech codec tool"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 1 argument, 2 config, 3 data, 4 io, 5 format, 6 state, 7 runtime.");

    std::string config_path, data_dir, out_dir, resume;
    int64_t     steps = 0;
    auto *      train = app.add_subcommand("train", "train a codec on a directory of WAV files");
    auto *      copt  = train->add_option("-c,--config", config_path, "bundle JSON: codec, discriminator, trainer");
    train->add_option("-d,--data", data_dir, "directory of training WAVs")->required();
    train->add_option("-o,--out", out_dir, "output directory for logs and checkpoints")->required();
    train->add_option("--resume", resume, "training checkpoint to continue from")->excludes(copt);
    train->add_option("--steps", steps, "stop after this global step (default: the configured total)");

    ModelArgs   enc_margs;
    std::string enc_in, enc_out;
    bool        enc_stream = false;
    auto *      encode     = app.add_subcommand("encode", "encode WAV or PCM to tokens");
    add_model_options(encode, enc_margs);
    encode->add_option("-i,--in", enc_in, "input WAV file, or - for s16le PCM on stdin")->required();
    encode->add_option("-o,--out", enc_out, "output .ts3c file, or - for u32be tokens on stdout")->required();
    encode->add_flag("--stream", enc_stream, "run the incremental encoder even for files");

    ModelArgs   dec_margs;
    std::string dec_in, dec_out;
    bool        dec_stream = false;
    auto *      decode     = app.add_subcommand("decode", "decode tokens to WAV or PCM");
    add_model_options(decode, dec_margs);
    decode->add_option("-i,--in", dec_in, "input .ts3c file, or - for u32be tokens on stdin")->required();
    decode->add_option("-o,--out", dec_out, "output WAV file, or - for s16le PCM on stdout")->required();
    decode->add_flag("--stream", dec_stream, "run the incremental decoder even for files");

    ModelArgs   eval_margs;
    std::string eval_dir, eval_report;
    auto *      eval = app.add_subcommand("eval", "reconstruction metrics over a directory of WAVs");
    add_model_options(eval, eval_margs);
    eval->add_option("-d,--data", eval_dir, "directory of WAVs to evaluate")->required();
    eval->add_option("-o,--out", eval_report, "line-delimited JSON report path")->required();

    std::string info_input, info_manifest;
    auto *      info = app.add_subcommand("info", "print configuration, rates, parameters, and cost");
    info->add_option("input", info_input, "named config, config JSON (inline or file), or checkpoint")->required();
    info->add_option("--manifest", info_manifest, "manifest path (default: one JSON line on stderr)");

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) {
        if (resume.empty() && config_path.empty()) {
            die_msg(TS3_ERR_INVALID_ARG, "train: one of --config or --resume is required");
        }
        return cmd_train(argc, argv, config_path, data_dir, out_dir, resume, steps);
    }
    if (encode->parsed()) {
        return cmd_encode(argc, argv, enc_margs, enc_in, enc_out, enc_stream);
    }
    if (decode->parsed()) {
        return cmd_decode(argc, argv, dec_margs, dec_in, dec_out, dec_stream);
    }
    if (eval->parsed()) {
        return cmd_eval(argc, argv, eval_margs, eval_dir, eval_report);
    }
    return cmd_info(argc, argv, info_input, info_manifest);
}
