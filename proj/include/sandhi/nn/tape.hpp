// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode gradient tape. Every differentiable primitive is a member of
// Tape: it computes its output eagerly and, when recording and at least one
// input requires a gradient, appends a node holding the inputs and whatever
// the backward rule needs. backward() walks the nodes in exact reverse
// order, so each node runs once and gradients accumulate across fan-out.
//
// Broadcasting is limited to scalar-with-tensor; everything else requires
// identical shapes. Reductions accumulate in double.

#pragma once

#include "sandhi/nn/rng.hpp"
#include "sandhi/nn/tensor.hpp"

#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace sandhi::nn {

enum class OpKind {
    MatMul,
    Add,
    Sub,
    Mul,
    Scale,
    Sigmoid,
    Tanh,
    AddBias,
    SoftmaxRows,
    LogSoftmaxRows,
    Embedding,
    Dropout,
    Concat,
    Slice,
    Reshape,
    SwapLeading,
    BatchDot,
    BatchWeightedSum,
    Nll,
    Sum,
};

const char* to_string(OpKind kind) noexcept;

class Tape {
public:
    /// A non-recording tape evaluates primitives without keeping any graph
    /// (inference).
    explicit Tape(bool recording = true) : recording_(recording) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    ~Tape();

    bool recording() const noexcept { return recording_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    OpKind kind(std::size_t node) const { return nodes_.at(node).kind; }

    // [m,k] x [k,n] -> [m,n]
    Tensor matmul(const Tensor& a, const Tensor& b);

    Tensor add(const Tensor& a, const Tensor& b);
    Tensor sub(const Tensor& a, const Tensor& b);
    Tensor mul(const Tensor& a, const Tensor& b);
    Tensor scale(const Tensor& a, float factor);
    Tensor sigmoid(const Tensor& a);
    Tensor tanh(const Tensor& a);

    // [m,n] + bias[n] broadcast over rows
    Tensor add_bias(const Tensor& x, const Tensor& bias);

    Tensor softmax_rows(const Tensor& x);
    Tensor log_softmax_rows(const Tensor& x);

    // table[V,d], ids -> [len(ids), d]
    Tensor embedding(const Tensor& table, std::span<const int> ids);

    /// Inverted dropout; identity when !training or p == 0.
    Tensor dropout(const Tensor& x, float p, bool training, Rng& rng);

    Tensor concat(std::span<const Tensor> parts, std::size_t axis);
    Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis);
    Tensor slice(const Tensor& x, std::size_t begin, std::size_t end, std::size_t axis);
    Tensor reshape(const Tensor& x, Shape shape);
    // [A,B,D] -> [B,A,D]
    Tensor swap_leading(const Tensor& x);

    // query[B,D], memory[B,S,D] -> [B,S] with out[b,s] = <query[b], memory[b,s]>
    Tensor batch_dot(const Tensor& query, const Tensor& memory);
    // weights[B,S], memory[B,S,D] -> [B,D] with out[b] = sum_s weights[b,s] memory[b,s]
    Tensor batch_weighted_sum(const Tensor& weights, const Tensor& memory);

    /// -sum_r log_probs[r, targets[r]] over rows whose target != ignore.
    Tensor nll(const Tensor& log_probs, std::span<const int> targets, int ignore);
    Tensor sum(const Tensor& x);

    /// Seeds d(loss)/d(loss) = 1 and runs every node up to the loss in
    /// reverse. Throws NotScalar or DetachedFromTape.
    void backward(const Tensor& loss);

    /// Nodes visited by the most recent backward().
    std::size_t last_backward_visits() const noexcept { return visits_; }

    /// Drops the graph; tensors produced so far become detached.
    void clear();

private:
    struct Node {
        OpKind kind;
        std::vector<Tensor> inputs;
        Tensor output;
        std::function<void(Node&)> backward;
    };

    bool wants_grad(std::initializer_list<const Tensor*> inputs) const;
    Tensor record(OpKind kind, std::vector<Tensor> inputs, Tensor output, std::function<void(Node&)> backward);
    Tensor elementwise_binary(OpKind kind, const Tensor& a, const Tensor& b);
    Tensor concat_impl(std::vector<Tensor> parts, std::size_t axis);

    bool recording_;
    std::vector<Node> nodes_;
    std::uint64_t generation_ = 1;
    std::size_t visits_ = 0;
};

} // namespace sandhi::nn
