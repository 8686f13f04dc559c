// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sandhi/nn/tensor.hpp"

#include <span>

namespace sandhi::nn {

/// p <- p - lr * g for every tensor, then zeroes the gradients. Throws
/// MissingGrad if any tensor has no gradient buffer.
void sgd_step(std::span<Tensor> params, float lr);

/// L2 norm over all gradient buffers (missing buffers count as zero).
double global_grad_norm(std::span<const Tensor> params);

/// Rescales gradients so their global norm is at most max_norm. Returns the
/// norm measured before clipping.
double clip_grad_norm(std::span<Tensor> params, double max_norm);

} // namespace sandhi::nn
