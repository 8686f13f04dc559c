// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Dense f32 kernels behind the tape's matmul. Row-major throughout.

#pragma once

#include <cstddef>

namespace sandhi::nn::kernels {

// C[m,n] = A[m,k] * B[k,n]  (C += ... when accumulate)
void gemm_nn(const float* a, const float* b, float* c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate);

// C[m,k] += A[m,n] * B[k,n]^T
void gemm_nt_acc(const float* a, const float* b, float* c, std::size_t m, std::size_t n, std::size_t k);

// C[k,n] += A[m,k]^T * B[m,n]
void gemm_tn_acc(const float* a, const float* b, float* c, std::size_t m, std::size_t k, std::size_t n);

} // namespace sandhi::nn::kernels
