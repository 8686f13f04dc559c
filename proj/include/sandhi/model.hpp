// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Encoder/decoder splitter. A character embedding feeds one or two
// independent LSTM stacks (forward, and backward for the bidirectional
// variants). Decoders are LSTM stacks initialised through an affine bridge
// from the encoder's final states. With attention, each decoder step scores
// every encoder position with a bilinear form shared by both decoders,
// mixes the context with the top hidden state (h~ = tanh(W_c [ctx; h])) and
// feeds h~ back into the next step's input.
//
// The double-decoder variant adds a location decoder: the same machinery over
// the alphabet {0, 1}, run for exactly as many steps as the input has
// characters. Its step-t input also carries the encoder state of input
// position t, which tells it which character it is labelling.
//
// Batches are time-major: row t*B + b of a [T*B, d] tensor holds step t of
// example b.

#pragma once

#include "sandhi/corpus.hpp"
#include "sandhi/nn/rng.hpp"
#include "sandhi/nn/tape.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace sandhi {

enum class Variant { Rnn, BRnn, BRnnA, DdRnn };

Variant parse_variant(std::string_view name);  // "rnn" | "b-rnn" | "b-rnn-a" | "dd-rnn"
std::string_view variant_name(Variant v) noexcept;

bool is_bidirectional(Variant v) noexcept;
bool has_attention(Variant v) noexcept;
bool has_location_decoder(Variant v) noexcept;

struct ModelConfig {
    std::size_t embed_dim = 128;
    std::size_t hidden = 512;
    std::size_t layers = 2;
    float dropout = 0.3f;
    std::size_t vocab_size = 0;
    Variant variant = Variant::DdRnn;
    std::size_t max_decode_len = 80;

    /// Throws Error(Config) on an invalid combination.
    void validate() const;
};

// Parameter groups, also the unit of freezing during training.
inline constexpr std::string_view kGroupEmbeddings = "embeddings";
inline constexpr std::string_view kGroupEncoder = "encoder";
inline constexpr std::string_view kGroupAttention = "attention";
inline constexpr std::string_view kGroupLocationDecoder = "location_decoder";
inline constexpr std::string_view kGroupCharDecoder = "char_decoder";

struct Parameter {
    std::string name;
    std::string group;
    nn::Tensor value;
};

/// Named parameters in creation order (the checkpoint order).
class ParamStore {
public:
    nn::Tensor& add(std::string name, std::string_view group, nn::Shape shape, nn::Rng& init);

    std::vector<Parameter>& all() noexcept { return params_; }
    const std::vector<Parameter>& all() const noexcept { return params_; }
    const nn::Tensor& get(std::string_view name) const;
    std::size_t count() const noexcept;  // scalar parameters

    std::vector<nn::Tensor> in_groups(const std::set<std::string>& groups) const;
    std::set<std::string> groups() const;

private:
    std::vector<Parameter> params_;
};

struct LstmLayer {
    nn::Tensor w_x;  // [in, 4h], gate order i, f, g, o
    nn::Tensor w_h;  // [h, 4h]
    nn::Tensor b;    // [4h]
};

/// One LSTM step for a batch. x [B, in], h and c [B, hidden].
std::pair<nn::Tensor, nn::Tensor> lstm_cell(nn::Tape& tape, const nn::Tensor& x, const nn::Tensor& h,
                                            const nn::Tensor& c, const LstmLayer& p);

/// Same as lstm_cell with the input projection (x W_x + b) precomputed.
std::pair<nn::Tensor, nn::Tensor> lstm_cell_projected(nn::Tape& tape, const nn::Tensor& x_proj,
                                                      const nn::Tensor& h, const nn::Tensor& c,
                                                      const nn::Tensor& w_h);

/// A padded, time-major batch.
struct Batch {
    std::size_t size = 0;        // B
    std::size_t src_len = 0;     // S, longest compound
    std::size_t tgt_len = 0;     // T, longest char target minus one
    std::vector<std::size_t> lengths;
    std::vector<int> src;        // [S*B], PAD beyond each length
    std::vector<int> loc_in;     // [S*B], BOS then gold bits
    std::vector<int> loc_out;    // [S*B], gold bits, -1 on padding
    std::vector<int> char_in;    // [T*B], BOS + split, PAD beyond
    std::vector<int> char_out;   // [T*B], split + EOS, -1 on padding
    std::size_t loc_tokens = 0;
    std::size_t char_tokens = 0;
};

inline constexpr int kIgnore = -1;
inline constexpr int kLocBos = 2;  // location decoder input alphabet: 0, 1, BOS

/// Pads examples into one batch. Examples without targets (inference) may
/// leave locations/chars empty.
Batch collate(std::span<const EncodedExample* const> examples);

struct EncoderOutputs {
    std::size_t batch = 0;
    std::size_t steps = 0;
    nn::Tensor states;      // [B, S, D] top-layer states, fw || bw per position
    nn::Tensor states_tm;   // the same states time-major, [S*B, D]
    nn::Tensor keys;        // [B, S, hidden] states projected by the attention matrix
    nn::Tensor score_mask;  // [B, S], 0 on real positions, large negative on padding
    std::vector<nn::Tensor> final_h;  // per layer [B, D]
    std::vector<nn::Tensor> final_c;
};

enum class Decoder { Location, Character };

struct StepTrace {
    std::vector<std::vector<float>> alpha;  // per step, [B*S] attention weights
};

class DdRnnModel {
public:
    DdRnnModel(const ModelConfig& cfg, std::uint64_t seed);

    const ModelConfig& config() const noexcept { return cfg_; }
    ParamStore& params() noexcept { return params_; }
    const ParamStore& params() const noexcept { return params_; }
    std::size_t encoder_width() const noexcept;

    /// `dropout_rng` may be null when training is false.
    EncoderOutputs encode(nn::Tape& tape, const Batch& batch, bool training, nn::Rng* dropout_rng) const;

    /// Teacher-forced summed NLL of one decoder's targets.
    nn::Tensor decoder_loss(nn::Tape& tape, Decoder which, const EncoderOutputs& enc, const Batch& batch,
                            bool training, nn::Rng* dropout_rng) const;

    /// Teacher-forced per-step log-probabilities [T*B, V] (for inspection).
    nn::Tensor decoder_log_probs(nn::Tape& tape, Decoder which, const EncoderOutputs& enc, const Batch& batch,
                                 bool training, nn::Rng* dropout_rng, StepTrace* trace = nullptr) const;

    struct GreedyResult {
        std::vector<std::vector<int>> tokens;  // per example, without BOS/EOS
        std::vector<bool> truncated;           // no EOS within max_decode_len
        std::vector<std::vector<std::vector<float>>> probs;  // location decoder only: per step P(0), P(1)
    };

    /// Greedy decoding without teacher forcing. The location decoder runs
    /// exactly `lengths[b]` steps for example b.
    GreedyResult greedy(Decoder which, const Batch& batch, StepTrace* trace = nullptr) const;

private:
    struct DecoderParams {
        nn::Tensor embed;
        std::vector<LstmLayer> layers;
        std::vector<nn::Tensor> bridge_h_w, bridge_h_b, bridge_c_w, bridge_c_b;
        nn::Tensor w_c;  // [D + h, h] attention mix, empty without attention
        nn::Tensor w_out;
        nn::Tensor b_out;
    };

    struct DecoderState {
        std::vector<nn::Tensor> h, c;
        nn::Tensor feed;  // h~ of the previous step
    };

    DecoderState init_decoder(nn::Tape& tape, const DecoderParams& d, const EncoderOutputs& enc) const;
    // One step; returns the pre-output vector (h~ or top h).
    nn::Tensor decoder_step(nn::Tape& tape, const DecoderParams& d, DecoderState& st, const nn::Tensor& input_embed,
                            const EncoderOutputs& enc, bool training, nn::Rng* rng, StepTrace* trace) const;
    const DecoderParams& decoder(Decoder which) const;

    ModelConfig cfg_;
    ParamStore params_;
    nn::Tensor src_embed_;
    std::vector<LstmLayer> enc_fw_, enc_bw_;
    nn::Tensor w_a_;  // [D, h], score = enc_s^T W_a h
    DecoderParams loc_;
    DecoderParams chr_;
};

/// attention over a batch: scores = keys . h + mask, alpha = softmax,
/// context = sum alpha * states. Returns (context [B, D], alpha [B, S]).
std::pair<nn::Tensor, nn::Tensor> attend(nn::Tape& tape, const nn::Tensor& dec_h, const EncoderOutputs& enc);

/// Builds the model for `cfg.variant`; same as the constructor.
DdRnnModel build_variant(const ModelConfig& cfg, std::uint64_t seed);

struct Prediction {
    std::string split;                    // '+'-joined constituents
    std::vector<std::uint8_t> locations;  // empty without a location decoder
    bool truncated = false;
    bool empty = false;
};

/// Greedy inference over words (SLP1). Throws OovCharacter for characters
/// the vocabulary lacks.
std::vector<Prediction> predict(const DdRnnModel& model, const Vocabulary& vocab,
                                std::span<const std::string> words, std::size_t batch_size = 64);

/// predict() over up to `threads` workers sharing the model read-only.
/// Shards are whole batches, so the output equals the serial result.
std::vector<Prediction> predict_parallel(const DdRnnModel& model, const Vocabulary& vocab,
                                         std::span<const std::string> words, std::size_t threads,
                                         std::size_t batch_size = 64);

/// -sum log p over targets (kIgnore skipped); plain-data helper mirroring the
/// tape loss, with its token count.
struct NllSummary {
    double total = 0.0;
    std::size_t tokens = 0;
    double per_token() const { return tokens == 0 ? 0.0 : total / static_cast<double>(tokens); }
};
NllSummary loss_nll(const nn::Tensor& log_probs, std::span<const int> targets);

} // namespace sandhi
