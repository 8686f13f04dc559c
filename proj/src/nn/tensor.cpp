// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/nn/tensor.hpp"

#include "sandhi/error.hpp"

#include <algorithm>

namespace sandhi::nn {

std::size_t numel(const Shape& shape) noexcept {
    std::size_t n = 1;
    for (auto d : shape) {
        n *= d;
    }
    return n;
}

std::string to_string(const Shape& shape) {
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            s.push_back('x');
        }
        s += std::to_string(shape[i]);
    }
    return s.empty() ? "scalar" : s;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0f, requires_grad); }

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
    auto impl = std::make_shared<Impl>();
    impl->data.assign(nn::numel(shape), value);
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::from_data(Shape shape, std::vector<float> data, bool requires_grad) {
    if (data.size() != nn::numel(shape)) {
        throw Error(ErrorCode::ShapeMismatch, "data of " + std::to_string(data.size()) +
                                                  " elements does not fit shape " + to_string(shape));
    }
    auto impl = std::make_shared<Impl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(float value, bool requires_grad) { return full({1}, value, requires_grad); }

Tensor::Impl& Tensor::impl() const {
    if (!impl_) {
        throw Error(ErrorCode::ShapeMismatch, "use of an undefined tensor");
    }
    return *impl_;
}

const Shape& Tensor::shape() const { return impl().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
    const auto& s = shape();
    if (axis >= s.size()) {
        throw Error(ErrorCode::ShapeMismatch, "axis " + std::to_string(axis) + " out of range for " + to_string(s));
    }
    return s[axis];
}

std::size_t Tensor::numel() const { return impl().data.size(); }

std::span<float> Tensor::data() { return impl().data; }
std::span<const float> Tensor::data() const { return impl().data; }

float Tensor::item() const {
    if (numel() != 1) {
        throw Error(ErrorCode::NotScalar, "item() on tensor of shape " + to_string(shape()));
    }
    return impl().data[0];
}

bool Tensor::requires_grad() const { return impl().requires_grad; }
void Tensor::set_requires_grad(bool value) { impl().requires_grad = value; }

bool Tensor::has_grad() const { return !impl().grad.empty(); }
std::span<float> Tensor::grad() { return impl().grad; }
std::span<const float> Tensor::grad() const { return impl().grad; }

std::span<float> Tensor::ensure_grad() {
    auto& i = impl();
    if (i.grad.size() != i.data.size()) {
        i.grad.assign(i.data.size(), 0.0f);
    }
    return i.grad;
}

void Tensor::zero_grad() {
    auto& g = impl().grad;
    std::fill(g.begin(), g.end(), 0.0f);
}

void Tensor::drop_grad() {
    auto& g = impl().grad;
    g.clear();
    g.shrink_to_fit();
}

Tensor Tensor::clone() const {
    const auto& i = impl();
    return from_data(i.shape, i.data, i.requires_grad);
}

} // namespace sandhi::nn
