// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference gradient checks shared by the unit tests and the
// acceptance runner.

#pragma once

#include "sandhi/nn/rng.hpp"
#include "sandhi/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace sandhi::testing {

using nn::Tape;
using nn::Tensor;

using LossFn = std::function<Tensor(Tape&, std::vector<Tensor>&)>;

struct GradCheckResult {
    double worst = 0.0;     // max |analytic - numeric| / max(1, |analytic|)
    std::size_t checked = 0;
    std::string where;      // input/element of the worst entry
};

inline GradCheckResult grad_check(std::vector<Tensor> inputs, const LossFn& loss_fn, float h = 1e-3f) {
    for (auto& t : inputs) {
        t.set_requires_grad(true);
        t.drop_grad();
    }
    {
        Tape tape;
        Tensor loss = loss_fn(tape, inputs);
        tape.backward(loss);
    }
    GradCheckResult result;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        auto data = inputs[k].data();
        std::vector<float> analytic(data.size(), 0.0f);
        if (inputs[k].has_grad()) {
            std::copy(inputs[k].grad().begin(), inputs[k].grad().end(), analytic.begin());
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
            const float orig = data[i];
            Tape probe(false);
            data[i] = orig + h;
            const double up = loss_fn(probe, inputs).item();
            data[i] = orig - h;
            const double down = loss_fn(probe, inputs).item();
            data[i] = orig;
            const double numeric = (up - down) / (2.0 * h);
            const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(double(analytic[i])));
            ++result.checked;
            if (err > result.worst) {
                result.worst = err;
                result.where = "input " + std::to_string(k) + " element " + std::to_string(i) + " analytic " +
                               std::to_string(analytic[i]) + " numeric " + std::to_string(numeric);
            }
        }
    }
    return result;
}

inline Tensor random_tensor(nn::Rng& rng, nn::Shape shape, float lo = -1.0f, float hi = 1.0f) {
    std::vector<float> data(nn::numel(shape));
    for (auto& v : data) {
        v = rng.uniform(lo, hi);
    }
    return Tensor::from_data(std::move(shape), std::move(data));
}

// Contracts an arbitrary tensor to a scalar with fixed random weights so
// every output element contributes a distinct gradient.
inline Tensor weighted_sum(Tape& tape, const Tensor& x, const Tensor& weights) {
    return tape.sum(tape.mul(x, weights));
}

struct OpCase {
    std::string name;
    std::vector<Tensor> inputs;
    LossFn loss;
};

// One randomized instance of the named primitive. Sizes stay tiny so a
// full central-difference sweep is cheap.
inline std::vector<std::string> primitive_names() {
    return {"matmul",     "add",         "sub",           "mul",       "mul_scalar", "scale",
            "sigmoid",    "tanh",        "add_bias",      "softmax",   "log_softmax", "embedding",
            "dropout",    "concat",      "slice",         "reshape",   "swap_leading", "batch_dot",  "batch_weighted_sum",
            "nll",        "sum"};
}

inline OpCase make_op_case(const std::string& name, std::uint64_t seed) {
    nn::Rng rng(seed);
    auto dim = [&](std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(rng.next_u64() % (hi - lo + 1));
    };
    const std::size_t m = dim(1, 4), n = dim(1, 5), k = dim(1, 4);
    OpCase c;
    c.name = name;
    auto w_for = [&](nn::Shape s) { return random_tensor(rng, std::move(s)); };

    if (name == "matmul") {
        Tensor w = w_for({m, n});
        c.inputs = {random_tensor(rng, {m, k}), random_tensor(rng, {k, n})};
        c.loss = [w](Tape& t, std::vector<Tensor>& in) { return weighted_sum(t, t.matmul(in[0], in[1]), w); };
    } else if (name == "add" || name == "sub" || name == "mul") {
        Tensor w = w_for({m, n});
        c.inputs = {random_tensor(rng, {m, n}), random_tensor(rng, {m, n})};
        c.loss = [w, name](Tape& t, std::vector<Tensor>& in) {
            Tensor y = name == "add" ? t.add(in[0], in[1]) : name == "sub" ? t.sub(in[0], in[1]) : t.mul(in[0], in[1]);
            return weighted_sum(t, y, w);
        };
    } else if (name == "mul_scalar") {
        Tensor w = w_for({m, n});
        c.inputs = {random_tensor(rng, {m, n}), random_tensor(rng, {1})};
        c.loss = [w](Tape& t, std::vector<Tensor>& in) {
            return t.add(weighted_sum(t, t.mul(in[0], in[1]), w), weighted_sum(t, t.sub(in[1], in[0]), w));
        };
    } else if (name == "scale") {
        Tensor w = w_for({m, n});
        const float f = rng.uniform(-2.0f, 2.0f);
        c.inputs = {random_tensor(rng, {m, n})};
        c.loss = [w, f](Tape& t, std::vector<Tensor>& in) { return weighted_sum(t, t.scale(in[0], f), w); };
    } else if (name == "sigmoid" || name == "tanh") {
        Tensor w = w_for({m, n});
        c.inputs = {random_tensor(rng, {m, n}, -2.0f, 2.0f)};
        c.loss = [w, name](Tape& t, std::vector<Tensor>& in) {
            return weighted_sum(t, name == "tanh" ? t.tanh(in[0]) : t.sigmoid(in[0]), w);
        };
    } else if (name == "add_bias") {
        Tensor w = w_for({m, n});
        c.inputs = {random_tensor(rng, {m, n}), random_tensor(rng, {n})};
        c.loss = [w](Tape& t, std::vector<Tensor>& in) { return weighted_sum(t, t.add_bias(in[0], in[1]), w); };
    } else if (name == "softmax" || name == "log_softmax") {
        Tensor w = w_for({m, n});
        c.inputs = {random_tensor(rng, {m, n}, -3.0f, 3.0f)};
        c.loss = [w, name](Tape& t, std::vector<Tensor>& in) {
            return weighted_sum(t, name == "softmax" ? t.softmax_rows(in[0]) : t.log_softmax_rows(in[0]), w);
        };
    } else if (name == "embedding") {
        const std::size_t rows = dim(3, 8);
        std::vector<int> ids(rows);
        for (auto& id : ids) {
            id = static_cast<int>(rng.next_u64() % m);
        }
        Tensor w = w_for({rows, n});
        c.inputs = {random_tensor(rng, {m, n})};
        c.loss = [w, ids](Tape& t, std::vector<Tensor>& in) { return weighted_sum(t, t.embedding(in[0], ids), w); };
    } else if (name == "dropout") {
        Tensor w = w_for({m, n});
        const std::uint64_t mask_seed = rng.next_u64();
        c.inputs = {random_tensor(rng, {m, n})};
        c.loss = [w, mask_seed](Tape& t, std::vector<Tensor>& in) {
            nn::Rng r(mask_seed);
            return weighted_sum(t, t.dropout(in[0], 0.3f, true, r), w);
        };
    } else if (name == "concat") {
        const std::size_t axis = rng.next_u64() % 2;
        const std::size_t n2 = dim(1, 4);
        nn::Shape sa{m, n}, sb = axis == 0 ? nn::Shape{n2, n} : nn::Shape{m, n2};
        nn::Shape so = axis == 0 ? nn::Shape{m + n2, n} : nn::Shape{m, n + n2};
        Tensor w = w_for(so);
        c.inputs = {random_tensor(rng, sa), random_tensor(rng, sb)};
        c.loss = [w, axis](Tape& t, std::vector<Tensor>& in) {
            return weighted_sum(t, t.concat({in[0], in[1]}, axis), w);
        };
    } else if (name == "slice") {
        const std::size_t axis = rng.next_u64() % 3;
        nn::Shape s{m, n, k};
        const std::size_t b = rng.next_u64() % s[axis];
        const std::size_t e = b + 1 + rng.next_u64() % (s[axis] - b);
        nn::Shape so = s;
        so[axis] = e - b;
        Tensor w = w_for(so);
        c.inputs = {random_tensor(rng, s)};
        c.loss = [w, axis, b, e](Tape& t, std::vector<Tensor>& in) {
            return weighted_sum(t, t.slice(in[0], b, e, axis), w);
        };
    } else if (name == "reshape") {
        Tensor w = w_for({n, m});
        c.inputs = {random_tensor(rng, {m, n})};
        c.loss = [w, m, n](Tape& t, std::vector<Tensor>& in) {
            return weighted_sum(t, t.reshape(in[0], {n, m}), w);
        };
    } else if (name == "swap_leading") {
        Tensor w = w_for({n, m, k});
        c.inputs = {random_tensor(rng, {m, n, k})};
        c.loss = [w](Tape& t, std::vector<Tensor>& in) { return weighted_sum(t, t.swap_leading(in[0]), w); };
    } else if (name == "batch_dot") {
        Tensor w = w_for({m, n});
        c.inputs = {random_tensor(rng, {m, k}), random_tensor(rng, {m, n, k})};
        c.loss = [w](Tape& t, std::vector<Tensor>& in) { return weighted_sum(t, t.batch_dot(in[0], in[1]), w); };
    } else if (name == "batch_weighted_sum") {
        Tensor w = w_for({m, k});
        c.inputs = {random_tensor(rng, {m, n}), random_tensor(rng, {m, n, k})};
        c.loss = [w](Tape& t, std::vector<Tensor>& in) {
            return weighted_sum(t, t.batch_weighted_sum(in[0], in[1]), w);
        };
    } else if (name == "nll") {
        std::vector<int> targets(m);
        for (auto& tg : targets) {
            tg = static_cast<int>(rng.next_u64() % (n + 1)) - 1;  // -1 is ignored
        }
        c.inputs = {random_tensor(rng, {m, n}, -3.0f, 0.0f)};
        c.loss = [targets](Tape& t, std::vector<Tensor>& in) {
            return t.nll(t.log_softmax_rows(in[0]), targets, -1);
        };
    } else {
        c.name = "sum";
        c.inputs = {random_tensor(rng, {m, n})};
        c.loss = [](Tape& t, std::vector<Tensor>& in) { return t.sum(t.mul(in[0], in[0])); };
    }
    return c;
}

} // namespace sandhi::testing
