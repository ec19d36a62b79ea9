// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/analysis.h"

#include "core/dsp.h"

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace ts3 {

namespace {

// frames covering one second, trailing partial frame padded to a whole one
int64_t frames_per_second(const CodecConfig & cfg) {
    return (cfg.sample_rate + cfg.frame_size - 1) / cfg.frame_size;
}

// sum over frames of the causal context length min(i + 1, window)
int64_t total_context(int64_t n, int64_t window) {
    const int64_t ramp = std::min(n, window);
    return ramp * (ramp + 1) / 2 + (n - ramp) * window;
}

int64_t transformer_attention_macs(const TransformerConfig & t, int64_t n) {
    const int64_t d = t.embed_dim;
    return t.num_layers * (4 * d * d * n + 2 * d * total_context(n, t.window));
}

int64_t transformer_ffn_macs(const TransformerConfig & t, int64_t n) {
    return t.num_layers * 2 * t.embed_dim * t.ffn_dim * n;
}

double published_macs(const std::string & config_id) {
    if (config_id == "X1" || config_id == "X2") {
        return 7.6e9;
    }
    if (config_id == "X3" || config_id == "X4") {
        return 6.2e9;
    }
    return 0.0;
}

std::string with_commas(int64_t v) {
    std::string s = std::to_string(v);
    for (int64_t i = static_cast<int64_t>(s.size()) - 3; i > 0; i -= 3) {
        s.insert(static_cast<size_t>(i), ",");
    }
    return s;
}

}  // namespace

MacsReport macs(const CodecConfig & cfg) {
    cfg.validate();
    const int64_t n = frames_per_second(cfg);
    const int64_t d = cfg.transformer.embed_dim;

    MacsReport r;
    r.encoder_stem      = (cfg.frame_size * cfg.enc_mid + cfg.enc_mid * d) * n;
    r.encoder_attention = transformer_attention_macs(cfg.transformer, n);
    r.encoder_ffn       = transformer_ffn_macs(cfg.transformer, n);
    r.vq_projections    = 2 * d * cfg.codebook_dim * n;
    r.decoder_attention = r.encoder_attention;
    r.decoder_ffn       = r.encoder_ffn;
    r.decoder_stem      = (d * cfg.dec_mid + cfg.dec_mid * cfg.frame_size) * n;
    r.total = r.encoder_stem + r.encoder_attention + r.encoder_ffn + r.vq_projections + r.decoder_attention +
              r.decoder_ffn + r.decoder_stem;
    r.convention =
        "one MAC per scalar multiply in matrix products; attention = QKV/out projections + windowed score and "
        "context products; norms, softmax, and the codebook search excluded; one second of frames";
    r.published = published_macs(cfg.config_id);
    return r;
}

std::string macs_table(const MacsReport & r) {
    std::ostringstream os;
    auto row = [&](const char * label, int64_t v) {
        os << "  " << label;
        for (size_t i = std::string(label).size(); i < 22; ++i) {
            os << ' ';
        }
        os << with_commas(v) << "\n";
    };
    os << "MACs per second of audio\n";
    row("encoder stem", r.encoder_stem);
    row("encoder attention", r.encoder_attention);
    row("encoder ffn", r.encoder_ffn);
    row("vq projections", r.vq_projections);
    row("decoder attention", r.decoder_attention);
    row("decoder ffn", r.decoder_ffn);
    row("decoder stem", r.decoder_stem);
    row("total", r.total);
    if (r.published > 0.0) {
        os << "  reported elsewhere    " << with_commas(static_cast<int64_t>(r.published))
           << " (different counting convention; shown for reference, not reconciled)\n";
    }
    os << "  convention: " << r.convention << "\n";
    return os.str();
}

double mcd(const std::vector<double> & x, const std::vector<double> & y, double sample_rate) {
    check(x.size() == y.size(), ErrCode::invalid_arg,
          "mcd: inputs differ in length (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");

    const int64_t window = static_cast<int64_t>(std::llround(0.025 * sample_rate));
    const int64_t hop    = static_cast<int64_t>(std::llround(0.010 * sample_rate));
    int64_t       fft    = 1;
    while (fft < window) {
        fft *= 2;
    }
    const int64_t n_mels = 40, n_coeffs = 13;

    const Tensor cx = dsp::mfcc(x, window, fft, hop, n_mels, n_coeffs, sample_rate);
    const Tensor cy = dsp::mfcc(y, window, fft, hop, n_mels, n_coeffs, sample_rate);

    const int64_t frames = cx.shape[0];
    const double  scale  = 10.0 * std::sqrt(2.0) / std::log(10.0);
    double        sum    = 0.0;
    for (int64_t f = 0; f < frames; ++f) {
        double d2 = 0.0;
        for (int64_t k = 0; k < n_coeffs; ++k) {
            const double d = cx.row(f)[k] - cy.row(f)[k];
            d2 += d * d;
        }
        sum += scale * std::sqrt(d2);
    }
    return sum / static_cast<double>(frames);
}

CodebookStats codebook_stats(const std::vector<int32_t> & tokens, int64_t codebook_size) {
    check(!tokens.empty(), ErrCode::invalid_arg, "codebook_stats: the token sequence is empty");
    check(codebook_size >= 1, ErrCode::invalid_arg, "codebook_stats: codebook_size must be >= 1");

    std::unordered_map<int32_t, int64_t> counts;
    for (size_t i = 0; i < tokens.size(); ++i) {
        check(tokens[i] >= 0 && tokens[i] < codebook_size, ErrCode::invalid_arg,
              "codebook_stats: token " + std::to_string(tokens[i]) + " at position " + std::to_string(i) +
                  " is outside the codebook");
        counts[tokens[i]] += 1;
    }

    const double n       = static_cast<double>(tokens.size());
    double       entropy = 0.0;
    for (const auto & [id, c] : counts) {
        const double p = static_cast<double>(c) / n;
        entropy -= p * std::log(p);
    }

    CodebookStats s;
    s.distinct    = static_cast<int64_t>(counts.size());
    s.utilization = static_cast<double>(s.distinct) / static_cast<double>(codebook_size);
    s.perplexity  = std::exp(entropy);
    return s;
}

}  // namespace ts3
