// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/model.hpp"

#include "sandhi/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace sandhi {

using nn::Rng;
using nn::Shape;
using nn::Tape;
using nn::Tensor;

namespace {

constexpr float kInitRange = 0.1f;
constexpr float kMaskedScore = -1e9f;

// Stands in for the dropout stream when not training (dropout is then the
// identity and never draws).
Rng& rng_or_dummy(Rng* rng) {
    thread_local Rng dummy(0);
    return rng != nullptr ? *rng : dummy;
}

std::vector<int> argmax_rows(const Tensor& x) {
    const std::size_t rows = x.dim(0), cols = x.dim(1);
    std::vector<int> out(rows);
    const float* p = x.data().data();
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = static_cast<int>(std::max_element(p + r * cols, p + (r + 1) * cols) - (p + r * cols));
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// variants / config

Variant parse_variant(std::string_view name) {
    if (name == "rnn") return Variant::Rnn;
    if (name == "b-rnn") return Variant::BRnn;
    if (name == "b-rnn-a") return Variant::BRnnA;
    if (name == "dd-rnn") return Variant::DdRnn;
    throw Error(ErrorCode::Config, "unknown model variant '" + std::string(name) + "'");
}

std::string_view variant_name(Variant v) noexcept {
    switch (v) {
        case Variant::Rnn: return "rnn";
        case Variant::BRnn: return "b-rnn";
        case Variant::BRnnA: return "b-rnn-a";
        case Variant::DdRnn: return "dd-rnn";
    }
    return "?";
}

bool is_bidirectional(Variant v) noexcept { return v != Variant::Rnn; }
bool has_attention(Variant v) noexcept { return v == Variant::BRnnA || v == Variant::DdRnn; }
bool has_location_decoder(Variant v) noexcept { return v == Variant::DdRnn; }

void ModelConfig::validate() const {
    if (embed_dim == 0 || hidden == 0 || layers == 0) {
        throw Error(ErrorCode::Config, "model.embed_dim, model.hidden and model.layers must be positive");
    }
    if (!(dropout >= 0.0f && dropout < 1.0f)) {
        throw Error(ErrorCode::Config, "model.dropout must be in [0, 1)");
    }
    if (vocab_size <= static_cast<std::size_t>(Vocabulary::kNumSpecials)) {
        throw Error(ErrorCode::Config, "vocabulary has no regular characters");
    }
    if (max_decode_len == 0) {
        throw Error(ErrorCode::Config, "model.max_decode_len must be positive");
    }
}

// ---------------------------------------------------------------------------
// parameters

Tensor& ParamStore::add(std::string name, std::string_view group, Shape shape, Rng& init) {
    Tensor t = Tensor::zeros(std::move(shape), true);
    for (auto& v : t.data()) {
        v = init.uniform(-kInitRange, kInitRange);
    }
    params_.push_back({std::move(name), std::string(group), t});
    return params_.back().value;
}

const Tensor& ParamStore::get(std::string_view name) const {
    for (const auto& p : params_) {
        if (p.name == name) {
            return p.value;
        }
    }
    throw Error(ErrorCode::Checkpoint, "no parameter named '" + std::string(name) + "'");
}

std::size_t ParamStore::count() const noexcept {
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += p.value.numel();
    }
    return n;
}

std::vector<Tensor> ParamStore::in_groups(const std::set<std::string>& groups) const {
    std::vector<Tensor> out;
    for (const auto& p : params_) {
        if (groups.contains(p.group)) {
            out.push_back(p.value);
        }
    }
    return out;
}

std::set<std::string> ParamStore::groups() const {
    std::set<std::string> out;
    for (const auto& p : params_) {
        out.insert(p.group);
    }
    return out;
}

// ---------------------------------------------------------------------------
// LSTM

std::pair<Tensor, Tensor> lstm_cell_projected(Tape& tape, const Tensor& x_proj, const Tensor& h, const Tensor& c,
                                              const Tensor& w_h) {
    const std::size_t hidden = h.dim(1);
    if (x_proj.rank() != 2 || x_proj.dim(1) != 4 * hidden || w_h.dim(0) != hidden || c.shape() != h.shape()) {
        throw Error(ErrorCode::ShapeMismatch, "lstm_cell: projected input " + nn::to_string(x_proj.shape()) +
                                                  ", state " + nn::to_string(h.shape()));
    }
    Tensor gates = tape.add(x_proj, tape.matmul(h, w_h));
    Tensor i = tape.sigmoid(tape.slice(gates, 0, hidden, 1));
    Tensor f = tape.sigmoid(tape.slice(gates, hidden, 2 * hidden, 1));
    Tensor g = tape.tanh(tape.slice(gates, 2 * hidden, 3 * hidden, 1));
    Tensor o = tape.sigmoid(tape.slice(gates, 3 * hidden, 4 * hidden, 1));
    Tensor c_next = tape.add(tape.mul(f, c), tape.mul(i, g));
    Tensor h_next = tape.mul(o, tape.tanh(c_next));
    return {h_next, c_next};
}

std::pair<Tensor, Tensor> lstm_cell(Tape& tape, const Tensor& x, const Tensor& h, const Tensor& c,
                                    const LstmLayer& p) {
    if (x.rank() != 2 || x.dim(1) != p.w_x.dim(0)) {
        throw Error(ErrorCode::ShapeMismatch,
                    "lstm_cell: input " + nn::to_string(x.shape()) + " vs W_x " + nn::to_string(p.w_x.shape()));
    }
    return lstm_cell_projected(tape, tape.add_bias(tape.matmul(x, p.w_x), p.b), h, c, p.w_h);
}

// ---------------------------------------------------------------------------
// batching

Batch collate(std::span<const EncodedExample* const> examples) {
    Batch b;
    b.size = examples.size();
    for (const auto* ex : examples) {
        if (ex->input.empty()) {
            throw Error(ErrorCode::EmptyInput, "cannot encode an empty word");
        }
        b.src_len = std::max(b.src_len, ex->input.size());
        if (ex->chars.size() > 1) {
            b.tgt_len = std::max(b.tgt_len, ex->chars.size() - 1);
        }
    }
    const std::size_t B = b.size, S = b.src_len, T = b.tgt_len;
    b.src.assign(S * B, Vocabulary::kPad);
    b.loc_in.assign(S * B, kLocBos);
    b.loc_out.assign(S * B, kIgnore);
    b.char_in.assign(T * B, Vocabulary::kPad);
    b.char_out.assign(T * B, kIgnore);
    for (std::size_t k = 0; k < B; ++k) {
        const auto& ex = *examples[k];
        b.lengths.push_back(ex.input.size());
        for (std::size_t t = 0; t < ex.input.size(); ++t) {
            b.src[t * B + k] = ex.input[t];
        }
        if (!ex.locations.empty()) {
            if (ex.locations.size() != ex.input.size()) {
                throw Error(ErrorCode::LengthMismatch, "location targets do not match the input length");
            }
            for (std::size_t t = 0; t < ex.locations.size(); ++t) {
                b.loc_out[t * B + k] = ex.locations[t];
                if (t + 1 < ex.locations.size()) {
                    b.loc_in[(t + 1) * B + k] = ex.locations[t];
                }
            }
            b.loc_tokens += ex.locations.size();
        }
        for (std::size_t t = 0; t + 1 < ex.chars.size(); ++t) {
            b.char_in[t * B + k] = ex.chars[t];
            b.char_out[t * B + k] = ex.chars[t + 1];
        }
        b.char_tokens += ex.chars.empty() ? 0 : ex.chars.size() - 1;
    }
    return b;
}

// ---------------------------------------------------------------------------
// model

DdRnnModel::DdRnnModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng init = Rng(seed).split(1);
    const std::size_t E = cfg_.embed_dim, H = cfg_.hidden, L = cfg_.layers, V = cfg_.vocab_size;
    const std::size_t D = encoder_width();

    src_embed_ = params_.add("embed.src", kGroupEmbeddings, {V, E}, init);

    auto make_stack = [&](const std::string& prefix, std::size_t input) {
        std::vector<LstmLayer> stack;
        for (std::size_t l = 0; l < L; ++l) {
            const std::string p = prefix + ".l" + std::to_string(l);
            LstmLayer layer;
            layer.w_x = params_.add(p + ".w_x", kGroupEncoder, {l == 0 ? input : H, 4 * H}, init);
            layer.w_h = params_.add(p + ".w_h", kGroupEncoder, {H, 4 * H}, init);
            layer.b = params_.add(p + ".b", kGroupEncoder, {4 * H}, init);
            stack.push_back(layer);
        }
        return stack;
    };
    enc_fw_ = make_stack("encoder.fw", E);
    if (is_bidirectional(cfg_.variant)) {
        enc_bw_ = make_stack("encoder.bw", E);
    }
    if (has_attention(cfg_.variant)) {
        w_a_ = params_.add("attention.w_a", kGroupAttention, {D, H}, init);
    }

    auto make_decoder = [&](const std::string& prefix, std::string_view group, std::size_t in_vocab,
                            std::size_t out_vocab) {
        DecoderParams d;
        d.embed = params_.add(prefix + ".embed", group, {in_vocab, E}, init);
        std::size_t input = has_attention(cfg_.variant) ? E + H : E;
        if (group == kGroupLocationDecoder) {
            input += D;
        }
        for (std::size_t l = 0; l < L; ++l) {
            const std::string p = prefix + ".l" + std::to_string(l);
            LstmLayer layer;
            layer.w_x = params_.add(p + ".w_x", group, {l == 0 ? input : H, 4 * H}, init);
            layer.w_h = params_.add(p + ".w_h", group, {H, 4 * H}, init);
            layer.b = params_.add(p + ".b", group, {4 * H}, init);
            d.layers.push_back(layer);
            d.bridge_h_w.push_back(params_.add(p + ".bridge_h.w", group, {D, H}, init));
            d.bridge_h_b.push_back(params_.add(p + ".bridge_h.b", group, {H}, init));
            d.bridge_c_w.push_back(params_.add(p + ".bridge_c.w", group, {D, H}, init));
            d.bridge_c_b.push_back(params_.add(p + ".bridge_c.b", group, {H}, init));
        }
        if (has_attention(cfg_.variant)) {
            d.w_c = params_.add(prefix + ".w_c", group, {D + H, H}, init);
        }
        d.w_out = params_.add(prefix + ".w_out", group, {H, out_vocab}, init);
        d.b_out = params_.add(prefix + ".b_out", group, {out_vocab}, init);
        return d;
    };
    if (has_location_decoder(cfg_.variant)) {
        loc_ = make_decoder("loc_decoder", kGroupLocationDecoder, 3, 2);
    }
    chr_ = make_decoder("char_decoder", kGroupCharDecoder, V, V);
}

std::size_t DdRnnModel::encoder_width() const noexcept {
    return is_bidirectional(cfg_.variant) ? 2 * cfg_.hidden : cfg_.hidden;
}

const DdRnnModel::DecoderParams& DdRnnModel::decoder(Decoder which) const {
    if (which == Decoder::Location) {
        if (!has_location_decoder(cfg_.variant)) {
            throw Error(ErrorCode::Config,
                        "variant " + std::string(variant_name(cfg_.variant)) + " has no location decoder");
        }
        return loc_;
    }
    return chr_;
}

EncoderOutputs DdRnnModel::encode(Tape& tape, const Batch& batch, bool training, Rng* dropout_rng) const {
    const std::size_t B = batch.size, S = batch.src_len, H = cfg_.hidden;
    if (B == 0 || S == 0) {
        throw Error(ErrorCode::EmptyInput, "cannot encode an empty batch");
    }
    Rng& rng = rng_or_dummy(dropout_rng);

    // Per-step [B, H] keep-masks, only for steps where some example is
    // already past its end.
    std::vector<Tensor> step_mask(S);
    for (std::size_t t = 0; t < S; ++t) {
        bool any_pad = false;
        std::vector<float> m(B * H, 1.0f);
        for (std::size_t k = 0; k < B; ++k) {
            if (t >= batch.lengths[k]) {
                any_pad = true;
                std::fill_n(m.begin() + static_cast<std::ptrdiff_t>(k * H), H, 0.0f);
            }
        }
        if (any_pad) {
            step_mask[t] = Tensor::from_data({B, H}, std::move(m));
        }
    }

    const Tensor embedded = tape.embedding(src_embed_, batch.src);

    struct StackOut {
        Tensor top;  // [S*B, H]
        std::vector<Tensor> final_h, final_c;
    };
    auto run_stack = [&](const std::vector<LstmLayer>& stack, bool reverse) {
        StackOut out;
        Tensor input = embedded;
        for (std::size_t l = 0; l < stack.size(); ++l) {
            const Tensor proj = tape.add_bias(tape.matmul(input, stack[l].w_x), stack[l].b);
            Tensor h = Tensor::zeros({B, H});
            Tensor c = Tensor::zeros({B, H});
            std::vector<Tensor> steps(S);
            for (std::size_t n = 0; n < S; ++n) {
                const std::size_t t = reverse ? S - 1 - n : n;
                auto [h2, c2] = lstm_cell_projected(tape, tape.slice(proj, t * B, (t + 1) * B, 0), h, c, stack[l].w_h);
                if (step_mask[t].defined()) {
                    // Padded examples keep their previous state.
                    h2 = tape.add(h, tape.mul(step_mask[t], tape.sub(h2, h)));
                    c2 = tape.add(c, tape.mul(step_mask[t], tape.sub(c2, c)));
                }
                h = h2;
                c = c2;
                steps[t] = h;
            }
            out.final_h.push_back(h);
            out.final_c.push_back(c);
            input = tape.concat(std::span<const Tensor>(steps), 0);
            if (l + 1 < stack.size()) {
                // Between layers only; the top states feed attention as is.
                input = tape.dropout(input, cfg_.dropout, training, rng);
            }
        }
        out.top = input;
        return out;
    };

    const StackOut fw = run_stack(enc_fw_, false);
    EncoderOutputs enc;
    enc.batch = B;
    enc.steps = S;
    Tensor states_tm = fw.top;
    if (is_bidirectional(cfg_.variant)) {
        const StackOut bw = run_stack(enc_bw_, true);
        states_tm = tape.concat({fw.top, bw.top}, 1);
        for (std::size_t l = 0; l < cfg_.layers; ++l) {
            enc.final_h.push_back(tape.concat({fw.final_h[l], bw.final_h[l]}, 1));
            enc.final_c.push_back(tape.concat({fw.final_c[l], bw.final_c[l]}, 1));
        }
    } else {
        enc.final_h = fw.final_h;
        enc.final_c = fw.final_c;
    }
    const std::size_t D = encoder_width();
    enc.states_tm = states_tm;
    enc.states = tape.swap_leading(tape.reshape(states_tm, {S, B, D}));
    if (has_attention(cfg_.variant)) {
        enc.keys = tape.swap_leading(tape.reshape(tape.matmul(states_tm, w_a_), {S, B, H}));
        std::vector<float> mask(B * S, 0.0f);
        for (std::size_t k = 0; k < B; ++k) {
            for (std::size_t t = batch.lengths[k]; t < S; ++t) {
                mask[k * S + t] = kMaskedScore;
            }
        }
        enc.score_mask = Tensor::from_data({B, S}, std::move(mask));
    }
    return enc;
}

std::pair<Tensor, Tensor> attend(Tape& tape, const Tensor& dec_h, const EncoderOutputs& enc) {
    Tensor scores = tape.batch_dot(dec_h, enc.keys);
    if (enc.score_mask.defined()) {
        scores = tape.add(scores, enc.score_mask);
    }
    Tensor alpha = tape.softmax_rows(scores);
    Tensor context = tape.batch_weighted_sum(alpha, enc.states);
    return {context, alpha};
}

DdRnnModel::DecoderState DdRnnModel::init_decoder(Tape& tape, const DecoderParams& d,
                                                  const EncoderOutputs& enc) const {
    DecoderState st;
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
        st.h.push_back(tape.add_bias(tape.matmul(enc.final_h[l], d.bridge_h_w[l]), d.bridge_h_b[l]));
        st.c.push_back(tape.add_bias(tape.matmul(enc.final_c[l], d.bridge_c_w[l]), d.bridge_c_b[l]));
    }
    if (has_attention(cfg_.variant)) {
        st.feed = Tensor::zeros({enc.batch, cfg_.hidden});
    }
    return st;
}

Tensor DdRnnModel::decoder_step(Tape& tape, const DecoderParams& d, DecoderState& st, const Tensor& input_embed,
                                const EncoderOutputs& enc, bool training, Rng* rng, StepTrace* trace) const {
    Rng& r = rng_or_dummy(rng);
    Tensor x = has_attention(cfg_.variant) ? tape.concat({input_embed, st.feed}, 1) : input_embed;
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
        auto [h, c] = lstm_cell(tape, x, st.h[l], st.c[l], d.layers[l]);
        st.h[l] = h;
        st.c[l] = c;
        if (l + 1 < cfg_.layers) {
            x = tape.dropout(h, cfg_.dropout, training, r);
        }
    }
    const Tensor& top = st.h.back();
    if (!has_attention(cfg_.variant)) {
        return tape.dropout(top, cfg_.dropout, training, r);
    }
    auto [context, alpha] = attend(tape, top, enc);
    if (trace != nullptr) {
        trace->alpha.emplace_back(alpha.data().begin(), alpha.data().end());
    }
    Tensor mixed = tape.tanh(tape.matmul(tape.concat({context, top}, 1), d.w_c));
    st.feed = tape.dropout(mixed, cfg_.dropout, training, r);
    return st.feed;
}

Tensor DdRnnModel::decoder_log_probs(Tape& tape, Decoder which, const EncoderOutputs& enc, const Batch& batch,
                                     bool training, Rng* dropout_rng, StepTrace* trace) const {
    const DecoderParams& d = decoder(which);
    const std::vector<int>& inputs = which == Decoder::Location ? batch.loc_in : batch.char_in;
    const std::size_t B = batch.size;
    const std::size_t T = which == Decoder::Location ? batch.src_len : batch.tgt_len;
    if (T == 0) {
        throw Error(ErrorCode::EmptyInput, "batch has no decoder targets");
    }
    const Tensor embedded = tape.embedding(d.embed, inputs);
    DecoderState st = init_decoder(tape, d, enc);
    std::vector<Tensor> outs;
    outs.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        Tensor input = tape.slice(embedded, t * B, (t + 1) * B, 0);
        if (which == Decoder::Location) {
            input = tape.concat({input, tape.slice(enc.states_tm, t * B, (t + 1) * B, 0)}, 1);
        }
        outs.push_back(decoder_step(tape, d, st, input, enc, training, dropout_rng, trace));
    }
    const Tensor all = tape.concat(std::span<const Tensor>(outs), 0);
    return tape.log_softmax_rows(tape.add_bias(tape.matmul(all, d.w_out), d.b_out));
}

Tensor DdRnnModel::decoder_loss(Tape& tape, Decoder which, const EncoderOutputs& enc, const Batch& batch,
                                bool training, Rng* dropout_rng) const {
    const Tensor log_probs = decoder_log_probs(tape, which, enc, batch, training, dropout_rng);
    return tape.nll(log_probs, which == Decoder::Location ? batch.loc_out : batch.char_out, kIgnore);
}

DdRnnModel::GreedyResult DdRnnModel::greedy(Decoder which, const Batch& batch, StepTrace* trace) const {
    const DecoderParams& d = decoder(which);
    Tape tape(false);
    const EncoderOutputs enc = encode(tape, batch, false, nullptr);
    const std::size_t B = batch.size;
    GreedyResult result;
    result.tokens.resize(B);
    result.truncated.assign(B, false);
    DecoderState st = init_decoder(tape, d, enc);

    if (which == Decoder::Location) {
        result.probs.resize(B);
        std::vector<int> prev(B, kLocBos);
        for (std::size_t t = 0; t < batch.src_len; ++t) {
            const Tensor input =
                tape.concat({tape.embedding(d.embed, prev), tape.slice(enc.states_tm, t * B, (t + 1) * B, 0)}, 1);
            const Tensor out = decoder_step(tape, d, st, input, enc, false, nullptr, trace);
            const Tensor probs = tape.softmax_rows(tape.add_bias(tape.matmul(out, d.w_out), d.b_out));
            const std::vector<int> best = argmax_rows(probs);
            for (std::size_t k = 0; k < B; ++k) {
                if (t < batch.lengths[k]) {
                    result.tokens[k].push_back(best[k]);
                    result.probs[k].push_back({probs.data()[k * 2], probs.data()[k * 2 + 1]});
                }
            }
            prev = best;
        }
        return result;
    }

    std::vector<int> prev(B, Vocabulary::kBos);
    std::vector<bool> done(B, false);
    std::size_t remaining = B;
    for (std::size_t t = 0; t < cfg_.max_decode_len && remaining > 0; ++t) {
        const Tensor out = decoder_step(tape, d, st, tape.embedding(d.embed, prev), enc, false, nullptr, trace);
        const std::vector<int> best = argmax_rows(tape.add_bias(tape.matmul(out, d.w_out), d.b_out));
        for (std::size_t k = 0; k < B; ++k) {
            if (done[k]) {
                continue;
            }
            if (best[k] == Vocabulary::kEos) {
                done[k] = true;
                --remaining;
            } else {
                result.tokens[k].push_back(best[k]);
            }
        }
        prev = best;
    }
    for (std::size_t k = 0; k < B; ++k) {
        result.truncated[k] = !done[k];
    }
    return result;
}

DdRnnModel build_variant(const ModelConfig& cfg, std::uint64_t seed) { return DdRnnModel(cfg, seed); }

// ---------------------------------------------------------------------------
// inference

std::vector<Prediction> predict(const DdRnnModel& model, const Vocabulary& vocab, std::span<const std::string> words,
                                std::size_t batch_size) {
    std::vector<Prediction> out(words.size());
    std::vector<EncodedExample> encoded(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i].empty()) {
            throw Error(ErrorCode::EmptyInput, "cannot split an empty word");
        }
        encoded[i].input = vocab.encode(words[i]);
    }
    batch_size = std::max<std::size_t>(batch_size, 1);
    for (std::size_t start = 0; start < words.size(); start += batch_size) {
        const std::size_t end = std::min(words.size(), start + batch_size);
        std::vector<const EncodedExample*> ptrs;
        for (std::size_t i = start; i < end; ++i) {
            ptrs.push_back(&encoded[i]);
        }
        const Batch batch = collate(ptrs);
        const auto chars = model.greedy(Decoder::Character, batch);
        std::optional<DdRnnModel::GreedyResult> locs;
        if (has_location_decoder(model.config().variant)) {
            locs = model.greedy(Decoder::Location, batch);
        }
        for (std::size_t k = 0; k < batch.size; ++k) {
            Prediction& p = out[start + k];
            p.split = vocab.decode(chars.tokens[k]);
            p.truncated = chars.truncated[k];
            p.empty = chars.tokens[k].empty();
            if (locs) {
                p.locations.assign(locs->tokens[k].begin(), locs->tokens[k].end());
            }
        }
    }
    return out;
}

std::vector<Prediction> predict_parallel(const DdRnnModel& model, const Vocabulary& vocab,
                                         std::span<const std::string> words, std::size_t threads,
                                         std::size_t batch_size) {
    batch_size = std::max<std::size_t>(batch_size, 1);
    const std::size_t batches = (words.size() + batch_size - 1) / batch_size;
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(batches, 1));
    if (threads == 1) {
        return predict(model, vocab, words, batch_size);
    }
    std::vector<Prediction> out(words.size());
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    const std::size_t per = (batches + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t lo = std::min(words.size(), t * per * batch_size);
        const std::size_t hi = std::min(words.size(), (t + 1) * per * batch_size);
        pool.emplace_back([&, t, lo, hi] {
            try {
                auto part = predict(model, vocab, words.subspan(lo, hi - lo), batch_size);
                std::move(part.begin(), part.end(), out.begin() + static_cast<std::ptrdiff_t>(lo));
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

NllSummary loss_nll(const Tensor& log_probs, std::span<const int> targets) {
    if (log_probs.rank() != 2 || log_probs.dim(0) != targets.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(targets.size()) + " targets for distributions of shape " +
                                                   nn::to_string(log_probs.shape()));
    }
    NllSummary s;
    const std::size_t v = log_probs.dim(1);
    for (std::size_t r = 0; r < targets.size(); ++r) {
        if (targets[r] == kIgnore) {
            continue;
        }
        s.total -= log_probs.data()[r * v + static_cast<std::size_t>(targets[r])];
        ++s.tokens;
    }
    return s;
}

} // namespace sandhi
