// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sandhi::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape) noexcept;
std::string to_string(const Shape& shape);

class Tape;

/// Row-major f32 array with an optional gradient buffer. Copies share
/// storage; a Tensor is a handle.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, float value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<float> data, bool requires_grad = false);
    static Tensor scalar(float value, bool requires_grad = false);

    bool defined() const noexcept { return impl_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const;

    std::span<float> data();
    std::span<const float> data() const;
    /// Value of a one-element tensor; throws NotScalar otherwise.
    float item() const;

    bool requires_grad() const;
    void set_requires_grad(bool value);

    bool has_grad() const;
    std::span<float> grad();
    std::span<const float> grad() const;
    /// Allocates a zero gradient if none exists.
    std::span<float> ensure_grad();
    void zero_grad();
    void drop_grad();

    /// Deep copy detached from any tape.
    Tensor clone() const;

    bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }

private:
    friend class Tape;

    struct Impl {
        Shape shape;
        std::vector<float> data;
        std::vector<float> grad;
        bool requires_grad = false;
        const Tape* tape = nullptr;
        std::uint64_t generation = 0;
        std::size_t node = 0;
    };

    explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
    Impl& impl() const;

    std::shared_ptr<Impl> impl_;
};

} // namespace sandhi::nn
