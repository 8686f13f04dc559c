// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/nn/tape.hpp"

#include "kernels.hpp"
#include "sandhi/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sandhi::nn {

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
    throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": " + to_string(a) + " vs " + to_string(b));
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
    if (t.rank() != rank) {
        throw Error(ErrorCode::ShapeMismatch,
                    std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + to_string(t.shape()));
    }
}

// Split of a shape around `axis`: outer * extent * inner == numel.
struct AxisView {
    std::size_t outer = 1;
    std::size_t extent = 1;
    std::size_t inner = 1;
};

AxisView view_of(const Shape& shape, std::size_t axis) {
    AxisView v;
    for (std::size_t d = 0; d < axis; ++d) {
        v.outer *= shape[d];
    }
    v.extent = shape[axis];
    for (std::size_t d = axis + 1; d < shape.size(); ++d) {
        v.inner *= shape[d];
    }
    return v;
}

} // namespace

const char* to_string(OpKind kind) noexcept {
    switch (kind) {
        case OpKind::MatMul: return "matmul";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::Mul: return "mul";
        case OpKind::Scale: return "scale";
        case OpKind::Sigmoid: return "sigmoid";
        case OpKind::Tanh: return "tanh";
        case OpKind::AddBias: return "add_bias";
        case OpKind::SoftmaxRows: return "softmax_rows";
        case OpKind::LogSoftmaxRows: return "log_softmax_rows";
        case OpKind::Embedding: return "embedding";
        case OpKind::Dropout: return "dropout";
        case OpKind::Concat: return "concat";
        case OpKind::Slice: return "slice";
        case OpKind::Reshape: return "reshape";
        case OpKind::SwapLeading: return "swap_leading";
        case OpKind::BatchDot: return "batch_dot";
        case OpKind::BatchWeightedSum: return "batch_weighted_sum";
        case OpKind::Nll: return "nll";
        case OpKind::Sum: return "sum";
    }
    return "?";
}

Tape::~Tape() { clear(); }

void Tape::clear() {
    nodes_.clear();
    ++generation_;
}

bool Tape::wants_grad(std::initializer_list<const Tensor*> inputs) const {
    if (!recording_) {
        return false;
    }
    return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->requires_grad(); });
}

Tensor Tape::record(OpKind kind, std::vector<Tensor> inputs, Tensor output, std::function<void(Node&)> backward) {
    auto& impl = output.impl();
    impl.requires_grad = true;
    impl.tape = this;
    impl.generation = generation_;
    impl.node = nodes_.size();
    nodes_.push_back(Node{kind, std::move(inputs), output, std::move(backward)});
    return output;
}

// ---------------------------------------------------------------------------
// matmul

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    require_rank("matmul", a, 2);
    require_rank("matmul", b, 2);
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        shape_error("matmul", a.shape(), b.shape());
    }
    Tensor out = Tensor::zeros({m, n});
    kernels::gemm_nn(a.data().data(), b.data().data(), out.data().data(), m, k, n, false);
    if (!wants_grad({&a, &b})) {
        return out;
    }
    return record(OpKind::MatMul, {a, b}, out, [m, k, n](Node& node) {
        auto& a = node.inputs[0];
        auto& b = node.inputs[1];
        const float* g = node.output.grad().data();
        if (a.requires_grad()) {
            kernels::gemm_nt_acc(g, b.data().data(), a.ensure_grad().data(), m, n, k);
        }
        if (b.requires_grad()) {
            kernels::gemm_tn_acc(a.data().data(), g, b.ensure_grad().data(), m, k, n);
        }
    });
}

// ---------------------------------------------------------------------------
// elementwise

Tensor Tape::elementwise_binary(OpKind kind, const Tensor& a, const Tensor& b) {
    const std::size_t na = a.numel(), nb = b.numel();
    const bool same = a.shape() == b.shape();
    if (!same && na != 1 && nb != 1) {
        shape_error(to_string(kind), a.shape(), b.shape());
    }
    const Shape& shape = (same || nb == 1) ? a.shape() : b.shape();
    const std::size_t n = std::max(na, nb);
    Tensor out = Tensor::zeros(shape);
    const float* pa = a.data().data();
    const float* pb = b.data().data();
    float* po = out.data().data();
    const std::size_t sa = na == 1 && n > 1 ? 0 : 1;
    const std::size_t sb = nb == 1 && n > 1 ? 0 : 1;
    switch (kind) {
        case OpKind::Add:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i * sa] + pb[i * sb];
            break;
        case OpKind::Sub:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i * sa] - pb[i * sb];
            break;
        case OpKind::Mul:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i * sa] * pb[i * sb];
            break;
        default: break;
    }
    if (!wants_grad({&a, &b})) {
        return out;
    }
    return record(kind, {a, b}, out, [kind, n, sa, sb](Node& node) {
        auto& a = node.inputs[0];
        auto& b = node.inputs[1];
        const float* g = node.output.grad().data();
        auto accumulate = [&](Tensor& target, std::size_t stride, auto&& factor) {
            float* dt = target.ensure_grad().data();
            if (stride == 0) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(g[i]) * factor(i);
                dt[0] += static_cast<float>(acc);
            } else {
                for (std::size_t i = 0; i < n; ++i) dt[i] += g[i] * factor(i);
            }
        };
        const float* pa = a.data().data();
        const float* pb = b.data().data();
        switch (kind) {
            case OpKind::Add:
                if (a.requires_grad()) accumulate(a, sa, [](std::size_t) { return 1.0f; });
                if (b.requires_grad()) accumulate(b, sb, [](std::size_t) { return 1.0f; });
                break;
            case OpKind::Sub:
                if (a.requires_grad()) accumulate(a, sa, [](std::size_t) { return 1.0f; });
                if (b.requires_grad()) accumulate(b, sb, [](std::size_t) { return -1.0f; });
                break;
            case OpKind::Mul:
                if (a.requires_grad()) accumulate(a, sa, [&](std::size_t i) { return pb[i * sb]; });
                if (b.requires_grad()) accumulate(b, sb, [&](std::size_t i) { return pa[i * sa]; });
                break;
            default: break;
        }
    });
}

Tensor Tape::add(const Tensor& a, const Tensor& b) { return elementwise_binary(OpKind::Add, a, b); }
Tensor Tape::sub(const Tensor& a, const Tensor& b) { return elementwise_binary(OpKind::Sub, a, b); }
Tensor Tape::mul(const Tensor& a, const Tensor& b) { return elementwise_binary(OpKind::Mul, a, b); }

Tensor Tape::scale(const Tensor& a, float factor) {
    Tensor out = Tensor::zeros(a.shape());
    const auto x = a.data();
    auto y = out.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = x[i] * factor;
    }
    if (!wants_grad({&a})) {
        return out;
    }
    return record(OpKind::Scale, {a}, out, [factor](Node& node) {
        const auto g = node.output.grad();
        auto dx = node.inputs[0].ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            dx[i] += g[i] * factor;
        }
    });
}

Tensor Tape::sigmoid(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    const auto x = a.data();
    auto y = out.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = 1.0f / (1.0f + std::exp(-x[i]));
    }
    if (!wants_grad({&a})) {
        return out;
    }
    return record(OpKind::Sigmoid, {a}, out, [](Node& node) {
        const auto g = node.output.grad();
        const auto y = node.output.data();
        auto dx = node.inputs[0].ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            dx[i] += g[i] * y[i] * (1.0f - y[i]);
        }
    });
}

Tensor Tape::tanh(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    const auto x = a.data();
    auto y = out.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::tanh(x[i]);
    }
    if (!wants_grad({&a})) {
        return out;
    }
    return record(OpKind::Tanh, {a}, out, [](Node& node) {
        const auto g = node.output.grad();
        const auto y = node.output.data();
        auto dx = node.inputs[0].ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            dx[i] += g[i] * (1.0f - y[i] * y[i]);
        }
    });
}

Tensor Tape::add_bias(const Tensor& x, const Tensor& bias) {
    require_rank("add_bias", x, 2);
    const std::size_t m = x.dim(0), n = x.dim(1);
    if (bias.numel() != n) {
        shape_error("add_bias", x.shape(), bias.shape());
    }
    Tensor out = Tensor::zeros(x.shape());
    const float* px = x.data().data();
    const float* pb = bias.data().data();
    float* po = out.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            po[i * n + j] = px[i * n + j] + pb[j];
        }
    }
    if (!wants_grad({&x, &bias})) {
        return out;
    }
    return record(OpKind::AddBias, {x, bias}, out, [m, n](Node& node) {
        const float* g = node.output.grad().data();
        if (node.inputs[0].requires_grad()) {
            float* dx = node.inputs[0].ensure_grad().data();
            for (std::size_t i = 0; i < m * n; ++i) {
                dx[i] += g[i];
            }
        }
        if (node.inputs[1].requires_grad()) {
            float* db = node.inputs[1].ensure_grad().data();
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    acc += g[i * n + j];
                }
                db[j] += static_cast<float>(acc);
            }
        }
    });
}

// ---------------------------------------------------------------------------
// softmax

Tensor Tape::softmax_rows(const Tensor& x) {
    require_rank("softmax_rows", x, 2);
    const std::size_t m = x.dim(0), n = x.dim(1);
    Tensor out = Tensor::zeros(x.shape());
    const float* px = x.data().data();
    float* py = out.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const float* row = px + i * n;
        const float mx = *std::max_element(row, row + n);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            total += std::exp(static_cast<double>(row[j]) - mx);
        }
        for (std::size_t j = 0; j < n; ++j) {
            py[i * n + j] = static_cast<float>(std::exp(static_cast<double>(row[j]) - mx) / total);
        }
    }
    if (!wants_grad({&x})) {
        return out;
    }
    return record(OpKind::SoftmaxRows, {x}, out, [m, n](Node& node) {
        const float* g = node.output.grad().data();
        const float* y = node.output.data().data();
        float* dx = node.inputs[0].ensure_grad().data();
        for (std::size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                dot += static_cast<double>(g[i * n + j]) * y[i * n + j];
            }
            for (std::size_t j = 0; j < n; ++j) {
                dx[i * n + j] += static_cast<float>(y[i * n + j] * (g[i * n + j] - dot));
            }
        }
    });
}

Tensor Tape::log_softmax_rows(const Tensor& x) {
    require_rank("log_softmax_rows", x, 2);
    const std::size_t m = x.dim(0), n = x.dim(1);
    Tensor out = Tensor::zeros(x.shape());
    const float* px = x.data().data();
    float* py = out.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const float* row = px + i * n;
        const double mx = *std::max_element(row, row + n);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            total += std::exp(row[j] - mx);
        }
        const double lse = mx + std::log(total);
        for (std::size_t j = 0; j < n; ++j) {
            py[i * n + j] = static_cast<float>(row[j] - lse);
        }
    }
    if (!wants_grad({&x})) {
        return out;
    }
    return record(OpKind::LogSoftmaxRows, {x}, out, [m, n](Node& node) {
        const float* g = node.output.grad().data();
        const float* y = node.output.data().data();
        float* dx = node.inputs[0].ensure_grad().data();
        for (std::size_t i = 0; i < m; ++i) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                total += g[i * n + j];
            }
            for (std::size_t j = 0; j < n; ++j) {
                dx[i * n + j] += static_cast<float>(g[i * n + j] - std::exp(static_cast<double>(y[i * n + j])) * total);
            }
        }
    });
}

// ---------------------------------------------------------------------------
// embedding / dropout

Tensor Tape::embedding(const Tensor& table, std::span<const int> ids) {
    require_rank("embedding", table, 2);
    const std::size_t vocab = table.dim(0), d = table.dim(1);
    for (int id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
            throw Error(ErrorCode::IndexOutOfRange,
                        "embedding id " + std::to_string(id) + " outside table of " + std::to_string(vocab) + " rows");
        }
    }
    Tensor out = Tensor::zeros({ids.size(), d});
    const float* pt = table.data().data();
    float* po = out.data().data();
    for (std::size_t r = 0; r < ids.size(); ++r) {
        std::copy_n(pt + static_cast<std::size_t>(ids[r]) * d, d, po + r * d);
    }
    if (!wants_grad({&table})) {
        return out;
    }
    std::vector<int> saved(ids.begin(), ids.end());
    return record(OpKind::Embedding, {table}, out, [saved = std::move(saved), d](Node& node) {
        const float* g = node.output.grad().data();
        float* dt = node.inputs[0].ensure_grad().data();
        for (std::size_t r = 0; r < saved.size(); ++r) {
            float* row = dt + static_cast<std::size_t>(saved[r]) * d;
            for (std::size_t j = 0; j < d; ++j) {
                row[j] += g[r * d + j];
            }
        }
    });
}

Tensor Tape::dropout(const Tensor& x, float p, bool training, Rng& rng) {
    if (!(p >= 0.0f && p < 1.0f)) {
        throw Error(ErrorCode::Config, "dropout probability must be in [0, 1)");
    }
    if (!training || p == 0.0f) {
        return x;
    }
    const float keep_scale = 1.0f / (1.0f - p);
    std::vector<float> mask(x.numel());
    for (auto& m : mask) {
        m = rng.uniform() < p ? 0.0f : keep_scale;
    }
    Tensor out = Tensor::zeros(x.shape());
    const auto px = x.data();
    auto po = out.data();
    for (std::size_t i = 0; i < mask.size(); ++i) {
        po[i] = px[i] * mask[i];
    }
    if (!wants_grad({&x})) {
        return out;
    }
    return record(OpKind::Dropout, {x}, out, [mask = std::move(mask)](Node& node) {
        const auto g = node.output.grad();
        auto dx = node.inputs[0].ensure_grad();
        for (std::size_t i = 0; i < mask.size(); ++i) {
            dx[i] += g[i] * mask[i];
        }
    });
}

// ---------------------------------------------------------------------------
// concat / slice / reshape

Tensor Tape::concat(std::span<const Tensor> parts, std::size_t axis) {
    return concat_impl(std::vector<Tensor>(parts.begin(), parts.end()), axis);
}

Tensor Tape::concat(std::initializer_list<Tensor> parts, std::size_t axis) {
    return concat_impl(std::vector<Tensor>(parts), axis);
}

Tensor Tape::concat_impl(std::vector<Tensor> parts, std::size_t axis) {
    if (parts.empty()) {
        throw Error(ErrorCode::ShapeMismatch, "concat of zero tensors");
    }
    if (parts.size() == 1) {
        return parts.front();
    }
    Shape shape = parts.front().shape();
    if (axis >= shape.size()) {
        throw Error(ErrorCode::ShapeMismatch, "concat axis out of range for " + to_string(shape));
    }
    std::size_t total = 0;
    for (const auto& p : parts) {
        Shape s = p.shape();
        if (s.size() != shape.size()) {
            shape_error("concat", shape, s);
        }
        for (std::size_t d = 0; d < s.size(); ++d) {
            if (d != axis && s[d] != shape[d]) {
                shape_error("concat", shape, s);
            }
        }
        total += s[axis];
    }
    shape[axis] = total;
    Tensor out = Tensor::zeros(shape);
    const AxisView ov = view_of(shape, axis);
    float* po = out.data().data();
    std::vector<std::size_t> offsets;
    offsets.reserve(parts.size());
    std::size_t offset = 0;
    for (const auto& p : parts) {
        const AxisView pv = view_of(p.shape(), axis);
        const float* pp = p.data().data();
        const std::size_t chunk = pv.extent * pv.inner;
        for (std::size_t o = 0; o < ov.outer; ++o) {
            std::copy_n(pp + o * chunk, chunk, po + o * ov.extent * ov.inner + offset * ov.inner);
        }
        offsets.push_back(offset);
        offset += pv.extent;
    }
    bool any = false;
    for (const auto& p : parts) {
        any = any || p.requires_grad();
    }
    if (!recording_ || !any) {
        return out;
    }
    return record(OpKind::Concat, std::move(parts), out, [ov, axis, offsets = std::move(offsets)](Node& node) {
        const float* g = node.output.grad().data();
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
            auto& p = node.inputs[k];
            if (!p.requires_grad()) {
                continue;
            }
            const AxisView pv = view_of(p.shape(), axis);
            const std::size_t chunk = pv.extent * pv.inner;
            float* dp = p.ensure_grad().data();
            for (std::size_t o = 0; o < ov.outer; ++o) {
                const float* src = g + o * ov.extent * ov.inner + offsets[k] * ov.inner;
                float* dst = dp + o * chunk;
                for (std::size_t i = 0; i < chunk; ++i) {
                    dst[i] += src[i];
                }
            }
        }
    });
}

Tensor Tape::slice(const Tensor& x, std::size_t begin, std::size_t end, std::size_t axis) {
    const Shape& in_shape = x.shape();
    if (axis >= in_shape.size() || begin > end || end > in_shape[axis]) {
        throw Error(ErrorCode::ShapeMismatch, "slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                                                  ") on axis " + std::to_string(axis) + " of " + to_string(in_shape));
    }
    Shape shape = in_shape;
    shape[axis] = end - begin;
    const AxisView iv = view_of(in_shape, axis);
    const std::size_t chunk = (end - begin) * iv.inner;
    Tensor out = Tensor::zeros(shape);
    const float* px = x.data().data();
    float* po = out.data().data();
    for (std::size_t o = 0; o < iv.outer; ++o) {
        std::copy_n(px + o * iv.extent * iv.inner + begin * iv.inner, chunk, po + o * chunk);
    }
    if (!wants_grad({&x})) {
        return out;
    }
    return record(OpKind::Slice, {x}, out, [iv, begin, chunk](Node& node) {
        const float* g = node.output.grad().data();
        float* dx = node.inputs[0].ensure_grad().data();
        for (std::size_t o = 0; o < iv.outer; ++o) {
            float* dst = dx + o * iv.extent * iv.inner + begin * iv.inner;
            for (std::size_t i = 0; i < chunk; ++i) {
                dst[i] += g[o * chunk + i];
            }
        }
    });
}

Tensor Tape::reshape(const Tensor& x, Shape shape) {
    if (nn::numel(shape) != x.numel()) {
        shape_error("reshape", x.shape(), shape);
    }
    Tensor out = Tensor::from_data(std::move(shape), std::vector<float>(x.data().begin(), x.data().end()));
    if (!wants_grad({&x})) {
        return out;
    }
    return record(OpKind::Reshape, {x}, out, [](Node& node) {
        const auto g = node.output.grad();
        auto dx = node.inputs[0].ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            dx[i] += g[i];
        }
    });
}

Tensor Tape::swap_leading(const Tensor& x) {
    require_rank("swap_leading", x, 3);
    const std::size_t a = x.dim(0), b = x.dim(1), d = x.dim(2);
    Tensor out = Tensor::zeros({b, a, d});
    const float* px = x.data().data();
    float* po = out.data().data();
    for (std::size_t i = 0; i < a; ++i) {
        for (std::size_t j = 0; j < b; ++j) {
            std::copy_n(px + (i * b + j) * d, d, po + (j * a + i) * d);
        }
    }
    if (!wants_grad({&x})) {
        return out;
    }
    return record(OpKind::SwapLeading, {x}, out, [a, b, d](Node& node) {
        const float* g = node.output.grad().data();
        float* dx = node.inputs[0].ensure_grad().data();
        for (std::size_t i = 0; i < a; ++i) {
            for (std::size_t j = 0; j < b; ++j) {
                const float* src = g + (j * a + i) * d;
                float* dst = dx + (i * b + j) * d;
                for (std::size_t k = 0; k < d; ++k) {
                    dst[k] += src[k];
                }
            }
        }
    });
}

// ---------------------------------------------------------------------------
// attention helpers

Tensor Tape::batch_dot(const Tensor& query, const Tensor& memory) {
    require_rank("batch_dot", query, 2);
    require_rank("batch_dot", memory, 3);
    const std::size_t b = query.dim(0), d = query.dim(1), s = memory.dim(1);
    if (memory.dim(0) != b || memory.dim(2) != d) {
        shape_error("batch_dot", query.shape(), memory.shape());
    }
    Tensor out = Tensor::zeros({b, s});
    const float* pq = query.data().data();
    const float* pm = memory.data().data();
    float* po = out.data().data();
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t t = 0; t < s; ++t) {
            double acc = 0.0;
            const float* row = pm + (i * s + t) * d;
            for (std::size_t k = 0; k < d; ++k) {
                acc += static_cast<double>(pq[i * d + k]) * row[k];
            }
            po[i * s + t] = static_cast<float>(acc);
        }
    }
    if (!wants_grad({&query, &memory})) {
        return out;
    }
    return record(OpKind::BatchDot, {query, memory}, out, [b, s, d](Node& node) {
        const float* g = node.output.grad().data();
        auto& q = node.inputs[0];
        auto& m = node.inputs[1];
        const float* pq = q.data().data();
        const float* pm = m.data().data();
        if (q.requires_grad()) {
            float* dq = q.ensure_grad().data();
            for (std::size_t i = 0; i < b; ++i) {
                for (std::size_t t = 0; t < s; ++t) {
                    const float gv = g[i * s + t];
                    const float* row = pm + (i * s + t) * d;
                    for (std::size_t k = 0; k < d; ++k) {
                        dq[i * d + k] += gv * row[k];
                    }
                }
            }
        }
        if (m.requires_grad()) {
            float* dm = m.ensure_grad().data();
            for (std::size_t i = 0; i < b; ++i) {
                for (std::size_t t = 0; t < s; ++t) {
                    const float gv = g[i * s + t];
                    float* row = dm + (i * s + t) * d;
                    for (std::size_t k = 0; k < d; ++k) {
                        row[k] += gv * pq[i * d + k];
                    }
                }
            }
        }
    });
}

Tensor Tape::batch_weighted_sum(const Tensor& weights, const Tensor& memory) {
    require_rank("batch_weighted_sum", weights, 2);
    require_rank("batch_weighted_sum", memory, 3);
    const std::size_t b = weights.dim(0), s = weights.dim(1), d = memory.dim(2);
    if (memory.dim(0) != b || memory.dim(1) != s) {
        shape_error("batch_weighted_sum", weights.shape(), memory.shape());
    }
    Tensor out = Tensor::zeros({b, d});
    const float* pw = weights.data().data();
    const float* pm = memory.data().data();
    float* po = out.data().data();
    std::vector<double> acc(d);
    for (std::size_t i = 0; i < b; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t t = 0; t < s; ++t) {
            const double w = pw[i * s + t];
            const float* row = pm + (i * s + t) * d;
            for (std::size_t k = 0; k < d; ++k) {
                acc[k] += w * row[k];
            }
        }
        for (std::size_t k = 0; k < d; ++k) {
            po[i * d + k] = static_cast<float>(acc[k]);
        }
    }
    if (!wants_grad({&weights, &memory})) {
        return out;
    }
    return record(OpKind::BatchWeightedSum, {weights, memory}, out, [b, s, d](Node& node) {
        const float* g = node.output.grad().data();
        auto& w = node.inputs[0];
        auto& m = node.inputs[1];
        const float* pw = w.data().data();
        const float* pm = m.data().data();
        if (w.requires_grad()) {
            float* dw = w.ensure_grad().data();
            for (std::size_t i = 0; i < b; ++i) {
                for (std::size_t t = 0; t < s; ++t) {
                    double acc = 0.0;
                    const float* row = pm + (i * s + t) * d;
                    for (std::size_t k = 0; k < d; ++k) {
                        acc += static_cast<double>(g[i * d + k]) * row[k];
                    }
                    dw[i * s + t] += static_cast<float>(acc);
                }
            }
        }
        if (m.requires_grad()) {
            float* dm = m.ensure_grad().data();
            for (std::size_t i = 0; i < b; ++i) {
                for (std::size_t t = 0; t < s; ++t) {
                    const float wv = pw[i * s + t];
                    float* row = dm + (i * s + t) * d;
                    for (std::size_t k = 0; k < d; ++k) {
                        row[k] += wv * g[i * d + k];
                    }
                }
            }
        }
    });
}

// ---------------------------------------------------------------------------
// losses / reductions

Tensor Tape::nll(const Tensor& log_probs, std::span<const int> targets, int ignore) {
    require_rank("nll", log_probs, 2);
    const std::size_t rows = log_probs.dim(0), v = log_probs.dim(1);
    if (targets.size() != rows) {
        throw Error(ErrorCode::LengthMismatch, "nll: " + std::to_string(rows) + " distributions vs " +
                                                   std::to_string(targets.size()) + " targets");
    }
    const float* lp = log_probs.data().data();
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const int t = targets[r];
        if (t == ignore) {
            continue;
        }
        if (t < 0 || static_cast<std::size_t>(t) >= v) {
            throw Error(ErrorCode::IndexOutOfRange, "nll target " + std::to_string(t) + " outside " +
                                                        std::to_string(v) + " classes");
        }
        total -= lp[r * v + static_cast<std::size_t>(t)];
    }
    Tensor out = Tensor::scalar(static_cast<float>(total));
    if (!wants_grad({&log_probs})) {
        return out;
    }
    std::vector<int> saved(targets.begin(), targets.end());
    return record(OpKind::Nll, {log_probs}, out, [saved = std::move(saved), v, ignore](Node& node) {
        const float g = node.output.grad()[0];
        float* dlp = node.inputs[0].ensure_grad().data();
        for (std::size_t r = 0; r < saved.size(); ++r) {
            if (saved[r] != ignore) {
                dlp[r * v + static_cast<std::size_t>(saved[r])] -= g;
            }
        }
    });
}

Tensor Tape::sum(const Tensor& x) {
    double total = 0.0;
    for (float v : x.data()) {
        total += v;
    }
    Tensor out = Tensor::scalar(static_cast<float>(total));
    if (!wants_grad({&x})) {
        return out;
    }
    return record(OpKind::Sum, {x}, out, [](Node& node) {
        const float g = node.output.grad()[0];
        for (auto& d : node.inputs[0].ensure_grad()) {
            d += g;
        }
    });
}

// ---------------------------------------------------------------------------
// backward

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1) {
        throw Error(ErrorCode::NotScalar, "backward on tensor of shape " + to_string(loss.shape()));
    }
    const auto& impl = loss.impl();
    if (impl.tape != this || impl.generation != generation_ || impl.node >= nodes_.size()) {
        throw Error(ErrorCode::DetachedFromTape, "loss was not produced by this tape");
    }
    Tensor seed = loss;
    seed.ensure_grad()[0] += 1.0f;
    visits_ = 0;
    for (std::size_t i = impl.node + 1; i-- > 0;) {
        Node& node = nodes_[i];
        ++visits_;
        if (!node.output.has_grad()) {
            continue;
        }
        node.backward(node);
    }
}

} // namespace sandhi::nn
