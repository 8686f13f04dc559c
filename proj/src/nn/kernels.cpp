// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "kernels.hpp"

#include <algorithm>
#include <vector>

namespace sandhi::nn::kernels {

namespace {

std::vector<float>& scratch() {
    thread_local std::vector<float> buf;
    return buf;
}

void transpose(const float* src, float* dst, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

} // namespace

void gemm_nn(const float* a, const float* b, float* c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
    if (!accumulate) {
        std::fill(c, c + m * n, 0.0f);
    }
    std::size_t i = 0;
    // Four output rows share each streamed row of B.
    for (; i + 4 <= m; i += 4) {
        float* __restrict c0 = c + (i + 0) * n;
        float* __restrict c1 = c + (i + 1) * n;
        float* __restrict c2 = c + (i + 2) * n;
        float* __restrict c3 = c + (i + 3) * n;
        for (std::size_t p = 0; p < k; ++p) {
            const float a0 = a[(i + 0) * k + p];
            const float a1 = a[(i + 1) * k + p];
            const float a2 = a[(i + 2) * k + p];
            const float a3 = a[(i + 3) * k + p];
            const float* __restrict br = b + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                const float bv = br[j];
                c0[j] += a0 * bv;
                c1[j] += a1 * bv;
                c2[j] += a2 * bv;
                c3[j] += a3 * bv;
            }
        }
    }
    for (; i < m; ++i) {
        float* __restrict cr = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const float av = a[i * k + p];
            if (av == 0.0f) {
                continue;
            }
            const float* __restrict br = b + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                cr[j] += av * br[j];
            }
        }
    }
}

void gemm_nt_acc(const float* a, const float* b, float* c, std::size_t m, std::size_t n, std::size_t k) {
    auto& bt = scratch();
    bt.resize(n * k);
    transpose(b, bt.data(), k, n);
    gemm_nn(a, bt.data(), c, m, n, k, true);
}

void gemm_tn_acc(const float* a, const float* b, float* c, std::size_t m, std::size_t k, std::size_t n) {
    auto& at = scratch();
    at.resize(m * k);
    transpose(a, at.data(), m, k);
    for (std::size_t p = 0; p < k; ++p) {
        float* __restrict cr = c + p * n;
        const float* ar = at.data() + p * m;
        for (std::size_t i = 0; i < m; ++i) {
            const float av = ar[i];
            if (av == 0.0f) {
                continue;
            }
            const float* __restrict br = b + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                cr[j] += av * br[j];
            }
        }
    }
}

} // namespace sandhi::nn::kernels
