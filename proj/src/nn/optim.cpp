// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/nn/optim.hpp"

#include "sandhi/error.hpp"

#include <cmath>

namespace sandhi::nn {

void sgd_step(std::span<Tensor> params, float lr) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].has_grad()) {
            throw Error(ErrorCode::MissingGrad, "parameter " + std::to_string(i) + " (" +
                                                    to_string(params[i].shape()) + ") has no gradient");
        }
    }
    for (auto& p : params) {
        auto data = p.data();
        auto grad = p.grad();
        for (std::size_t j = 0; j < data.size(); ++j) {
            data[j] -= lr * grad[j];
        }
        p.zero_grad();
    }
}

double global_grad_norm(std::span<const Tensor> params) {
    double total = 0.0;
    for (const auto& p : params) {
        if (!p.has_grad()) {
            continue;
        }
        for (float g : p.grad()) {
            total += static_cast<double>(g) * g;
        }
    }
    return std::sqrt(total);
}

double clip_grad_norm(std::span<Tensor> params, double max_norm) {
    const double norm = global_grad_norm(params);
    if (norm > max_norm && norm > 0.0) {
        const auto factor = static_cast<float>(max_norm / norm);
        for (auto& p : params) {
            if (!p.has_grad()) {
                continue;
            }
            for (auto& g : p.grad()) {
                g *= factor;
            }
        }
    }
    return norm;
}

} // namespace sandhi::nn
