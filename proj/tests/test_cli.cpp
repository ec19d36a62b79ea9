// Copyright 2026 ts3codec authors
// CLI tests: run the installed binary end to end, checking train/resume
// determinism, encode/decode in file and pipe modes, eval reports, info
// output, manifests, and exit codes.
//
// Licensed under the Apache License, Version 2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ts3/ts3.h"

#include "core/rng.h"
#include "synth.h"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kScratch = "cli_scratch";

int run(const std::string & args) {
    const std::string cmd = std::string(TS3_CLI_PATH) + " " + args + " > " + kScratch + "/out.txt 2> " + kScratch +
                            "/err.txt";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::string slurp(const std::string & path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string out_text() {
    return slurp(kScratch + "/out.txt");
}
std::string err_text() {
    return slurp(kScratch + "/err.txt");
}

std::vector<std::string> lines_of(const std::string & text) {
    std::vector<std::string> lines;
    std::string              line;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(line);
            line.clear();
        } else {
            line += c;
        }
    }
    return lines;
}

const char * kBundle = R"({
  "codec": {"frame_size": 128, "enc_mid": 32, "dec_mid": 32,
            "num_layers": 1, "embed_dim": 16, "num_heads": 2, "ffn_dim": 32,
            "window": 4, "codebook_size": 32, "codebook_dim": 4},
  "discriminator": {"mpd_periods": [2, 3], "mpd_channels": [2, 4],
                    "msstft_windows": [128], "msstft_filters": 2},
  "trainer": {"batch_size": 1, "crop_seconds": 0.16, "warmup_steps": 10,
              "total_steps": 100, "seed": 5, "checkpoint_interval": 2}
})";

// builds the scratch tree once: WAV corpus, bundle file, PCM pipe fixture
struct Fixture {
    Fixture() {
        fs::remove_all(kScratch);
        fs::create_directories(kScratch + "/data");
        ts3::Rng rng(77);
        for (int k = 0; k < 3; ++k) {
            const std::vector<double> utt  = ts3::synth::utterance(rng, 0.5);
            const std::string         path = kScratch + "/data/utt" + std::to_string(k) + ".wav";
            REQUIRE(ts3_wav_write(path.c_str(), utt.data(), utt.size(), 16000) == TS3_OK);
            if (k == 0) {
                std::ofstream pcm(kScratch + "/utt0.pcm", std::ios::binary);
                for (double v : utt) {
                    const double  c = std::clamp(v, -1.0, 1.0);
                    const int32_t q = static_cast<int32_t>(std::lrint(c * 32768.0));
                    const auto    s = static_cast<int16_t>(std::clamp(q, -32768, 32767));
                    pcm.put(static_cast<char>(s & 0xFF));
                    pcm.put(static_cast<char>((s >> 8) & 0xFF));
                }
                utt0_samples = utt.size();
            }
        }
        std::ofstream(kScratch + "/bundle.json") << kBundle;
    }
    size_t utt0_samples = 0;
};

Fixture & fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("info prints the published rate and parameter columns") {
    fixture();
    REQUIRE(run("info X1") == 0);
    const std::string out = out_text();
    CHECK(out.find("bitrate           800 bps") != std::string::npos);
    CHECK(out.find("frame rate        50 Hz") != std::string::npos);
    CHECK(out.find("token rate        50 Hz") != std::string::npos);
    CHECK(out.find("204,147,464") != std::string::npos);
    CHECK(out.find("total") != std::string::npos);
    CHECK(out.find("7,600,000,000") != std::string::npos);
    // the manifest precedes the table on stderr
    CHECK(json::parse(lines_of(err_text()).at(0))["command"] == "info");

    REQUIRE(run("info X4") == 0);
    CHECK(out_text().find("bitrate           680 bps") != std::string::npos);

    CHECK(run("info X9") == 2);
    CHECK(err_text().find("X9") != std::string::npos);
}

TEST_CASE("device selection rejects anything but cpu") {
    fixture();
    const std::string cmd = std::string("TS3_DEVICE=cuda ") + TS3_CLI_PATH + " info X1 > " + kScratch +
                            "/out.txt 2> " + kScratch + "/err.txt";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    CHECK(WEXITSTATUS(rc) == 2);
    CHECK(err_text().find("cpu") != std::string::npos);
}

TEST_CASE("train writes a manifest, log, and checkpoints, and resumes bit-identically") {
    fixture();
    REQUIRE(run("train -c " + kScratch + "/bundle.json -d " + kScratch + "/data -o " + kScratch +
                "/run --steps 4") == 0);
    CHECK(fs::exists(kScratch + "/run/step-00000002.ts3k"));
    CHECK(fs::exists(kScratch + "/run/step-00000004.ts3k"));
    CHECK(fs::exists(kScratch + "/run/model.ts3k"));

    const json manifest = json::parse(slurp(kScratch + "/run/manifest.json"));
    CHECK(manifest["command"] == "train");
    CHECK(manifest["config"]["codec"]["frame_size"] == 128);
    CHECK(manifest["config"]["trainer"]["seed"] == 5);
    CHECK(manifest["corpus"].size() == 3);
    CHECK(manifest.contains("started_utc"));

    const std::vector<std::string> log = lines_of(slurp(kScratch + "/run/train_log.jsonl"));
    REQUIRE(log.size() == 4);
    for (size_t i = 0; i < log.size(); ++i) {
        const json rec = json::parse(log[i]);
        CHECK(rec["step"].get<int64_t>() == static_cast<int64_t>(i + 1));
        CHECK(rec["mel"].get<double>() > 0.0);
        CHECK(rec.contains("lr"));
    }

    // resuming from the midpoint reproduces the tail of the log exactly
    REQUIRE(run("train --resume " + kScratch + "/run/step-00000002.ts3k -d " + kScratch + "/data -o " + kScratch +
                "/run2 --steps 4") == 0);
    const std::vector<std::string> log2 = lines_of(slurp(kScratch + "/run2/train_log.jsonl"));
    REQUIRE(log2.size() == 2);
    CHECK(log2[0] == log[2]);
    CHECK(log2[1] == log[3]);

    // a corrupted checkpoint fails cleanly without partial outputs
    std::string bytes = slurp(kScratch + "/run/step-00000002.ts3k");
    bytes[bytes.size() / 2] ^= 0x01;
    std::ofstream(kScratch + "/corrupt.ts3k", std::ios::binary) << bytes;
    CHECK(run("train --resume " + kScratch + "/corrupt.ts3k -d " + kScratch + "/data -o " + kScratch +
              "/run3 --steps 4") == 5);
    CHECK(err_text().find("CRC") != std::string::npos);
    CHECK(!fs::exists(kScratch + "/run3/model.ts3k"));

    CHECK(run("train -c " + kScratch + "/bundle.json -d " + kScratch + "/empty -o " + kScratch + "/run4") == 4);
}

TEST_CASE("encode and decode round-trip through files with and without --stream") {
    fixture();
    const std::string model = " -m " + kScratch + "/run/model.ts3k ";
    REQUIRE(run("encode" + model + "-i " + kScratch + "/data/utt0.wav -o " + kScratch + "/utt0.ts3c") == 0);
    REQUIRE(run("encode" + model + "-i " + kScratch + "/data/utt0.wav -o " + kScratch + "/utt0s.ts3c --stream") ==
            0);
    CHECK(slurp(kScratch + "/utt0.ts3c") == slurp(kScratch + "/utt0s.ts3c"));
    CHECK(json::parse(slurp(kScratch + "/utt0.ts3c.manifest.json"))["command"] == "encode");

    REQUIRE(run("decode" + model + "-i " + kScratch + "/utt0.ts3c -o " + kScratch + "/rec.wav") == 0);
    REQUIRE(run("decode" + model + "-i " + kScratch + "/utt0.ts3c -o " + kScratch + "/recs.wav --stream") == 0);
    CHECK(slurp(kScratch + "/rec.wav") == slurp(kScratch + "/recs.wav"));

    // decoded length equals the original sample count exactly
    double * rec = nullptr;
    size_t   n   = 0;
    REQUIRE(ts3_wav_read((kScratch + "/rec.wav").c_str(), 16000, &rec, &n) == TS3_OK);
    CHECK(n == fixture().utt0_samples);
    ts3_free(rec);
}

TEST_CASE("pipe modes carry pcm in and tokens out, matching the file path") {
    fixture();
    const std::string model = " -m " + kScratch + "/run/model.ts3k ";

    const std::string enc_cmd = std::string(TS3_CLI_PATH) + " encode" + model + "-i - -o - < " + kScratch +
                                "/utt0.pcm > " + kScratch + "/utt0.tok 2> " + kScratch + "/err.txt";
    REQUIRE(WEXITSTATUS(std::system(enc_cmd.c_str())) == 0);
    // the manifest goes to stderr when the output is a pipe
    CHECK(json::parse(lines_of(err_text()).at(0))["command"] == "encode");

    // pipe tokens equal the container tokens byte for byte
    const std::string container = slurp(kScratch + "/utt0.ts3c");
    int32_t *         tokens    = nullptr;
    size_t            ntokens   = 0;
    char *            header    = nullptr;
    REQUIRE(ts3_container_parse(reinterpret_cast<const uint8_t *>(container.data()), container.size(), &tokens,
                                &ntokens, &header) == TS3_OK);
    ts3_free(header);
    const std::string tok_bytes = slurp(kScratch + "/utt0.tok");
    REQUIRE(tok_bytes.size() == ntokens * 4);
    for (size_t i = 0; i < ntokens; ++i) {
        const auto got = static_cast<uint32_t>((static_cast<uint8_t>(tok_bytes[4 * i]) << 24) |
                                               (static_cast<uint8_t>(tok_bytes[4 * i + 1]) << 16) |
                                               (static_cast<uint8_t>(tok_bytes[4 * i + 2]) << 8) |
                                               static_cast<uint8_t>(tok_bytes[4 * i + 3]));
        REQUIRE(got == static_cast<uint32_t>(tokens[i]));
    }
    ts3_free(tokens);

    const std::string dec_cmd = std::string(TS3_CLI_PATH) + " decode" + model + "-i - -o - < " + kScratch +
                                "/utt0.tok > " + kScratch + "/rec.pcm 2> /dev/null";
    REQUIRE(WEXITSTATUS(std::system(dec_cmd.c_str())) == 0);

    // pipe decode emits whole frames; its prefix equals the trimmed file path
    const std::string pipe_pcm = slurp(kScratch + "/rec.pcm");
    CHECK(pipe_pcm.size() == ntokens * 128 * 2);
    const std::string wav = slurp(kScratch + "/rec.wav");
    const std::string file_pcm = wav.substr(44);  // lean RIFF header
    CHECK(pipe_pcm.substr(0, file_pcm.size()) == file_pcm);

    // a truncated token stream is a format error
    std::ofstream(kScratch + "/bad.tok", std::ios::binary) << tok_bytes.substr(0, 6);
    const std::string bad_cmd = std::string(TS3_CLI_PATH) + " decode" + model + "-i - -o " + kScratch +
                                "/bad.wav < " + kScratch + "/bad.tok > /dev/null 2> " + kScratch + "/err.txt";
    CHECK(WEXITSTATUS(std::system(bad_cmd.c_str())) == 5);
    CHECK(err_text().find("truncated") != std::string::npos);
}

TEST_CASE("decode refuses a container from a different configuration") {
    fixture();
    REQUIRE(run("encode --config desk --seed 1 -i " + kScratch + "/data/utt0.wav -o " + kScratch + "/desk.ts3c") ==
            0);
    CHECK(run("decode -m " + kScratch + "/run/model.ts3k -i " + kScratch + "/desk.ts3c -o " + kScratch +
              "/bad.wav") == 1);
    const std::string err = err_text();
    CHECK(err.find("frame 320") != std::string::npos);
    CHECK(err.find("frame 128") != std::string::npos);
}

TEST_CASE("eval emits per-file records plus a deterministic aggregate") {
    fixture();
    const std::string model = " -m " + kScratch + "/run/model.ts3k ";
    REQUIRE(run("eval" + model + "-d " + kScratch + "/data -o " + kScratch + "/report.jsonl") == 0);
    const std::vector<std::string> records = lines_of(slurp(kScratch + "/report.jsonl"));
    REQUIRE(records.size() == 4);  // three files plus the aggregate
    for (size_t i = 0; i < 3; ++i) {
        const json rec = json::parse(records[i]);
        CHECK(rec["file"] == "utt" + std::to_string(i) + ".wav");
        CHECK(rec["mcd"].get<double>() > 0.0);
        CHECK(rec["tokens"].get<int64_t>() > 0);
        CHECK(rec["utilization"].get<double>() > 0.0);
    }
    const json aggregate = json::parse(records[3]);
    CHECK(aggregate["files"] == 3);
    CHECK(aggregate["skipped"] == 0);
    CHECK(aggregate["bitrate"].get<double>() == 625.0);  // 125 Hz frames, 5 bits
    CHECK(aggregate["mean_mcd"].get<double>() > 0.0);
    CHECK(aggregate["perplexity"].get<double>() >= 1.0);

    REQUIRE(run("eval" + model + "-d " + kScratch + "/data -o " + kScratch + "/report2.jsonl") == 0);
    CHECK(slurp(kScratch + "/report.jsonl") == slurp(kScratch + "/report2.jsonl"));
}

TEST_CASE("info reads checkpoints and config files") {
    fixture();
    REQUIRE(run("info " + kScratch + "/run/model.ts3k") == 0);
    std::string out = out_text();
    CHECK(out.find("kind inference, step 4") != std::string::npos);
    CHECK(out.find("frame size        128 samples") != std::string::npos);

    std::ofstream(kScratch + "/codec.json") << json::parse(kBundle)["codec"].dump();
    REQUIRE(run("info " + kScratch + "/codec.json") == 0);
    CHECK(out_text().find("bitrate           625 bps") != std::string::npos);

    CHECK(run("info " + kScratch + "/report.jsonl") == 5);  // neither checkpoint nor config
    CHECK(run("nonsense") != 0);
}
