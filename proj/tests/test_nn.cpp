// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include "sandhi/error.hpp"
#include "sandhi/nn/optim.hpp"
#include "sandhi/nn/tape.hpp"
#include "support/gradcheck.hpp"

#include <cmath>
#include <numeric>

using namespace sandhi;
using namespace sandhi::nn;
using sandhi::testing::grad_check;
using sandhi::testing::random_tensor;

namespace {

Tensor leaf(Shape shape, std::vector<float> data) {
    return Tensor::from_data(std::move(shape), std::move(data), true);
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

} // namespace

TEST_CASE("tensor construction") {
    Tensor t = Tensor::zeros({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.rank() == 2);
    CHECK_FALSE(t.has_grad());
    CHECK(code_of([] { Tensor::from_data({2, 2}, {1, 2, 3}); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([&] { (void)t.item(); }) == ErrorCode::NotScalar);
    Tensor c = t.clone();
    CHECK_FALSE(c.same_storage(t));
    t.ensure_grad();
    CHECK(t.grad().size() == t.data().size());
}

TEST_CASE("matmul values") {
    Tape tape(false);
    Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    Tensor x = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor y = tape.matmul(eye, x);
    CHECK(std::vector<float>(y.data().begin(), y.data().end()) == std::vector<float>{1, 2, 3, 4, 5, 6});
    Tensor r = tape.matmul(Tensor::from_data({1, 2}, {1, 2}), Tensor::from_data({2, 1}, {3, 4}));
    CHECK(r.item() == 11.0f);
    CHECK(code_of([&] { tape.matmul(x, x); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("matmul against naive product") {
    Rng rng(5);
    for (std::size_t m : {1, 3, 4, 5, 9}) {
        for (std::size_t k : {1, 2, 7}) {
            for (std::size_t n : {1, 6, 17}) {
                Tensor a = random_tensor(rng, {m, k});
                Tensor b = random_tensor(rng, {k, n});
                Tape tape(false);
                Tensor c = tape.matmul(a, b);
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        double want = 0.0;
                        for (std::size_t p = 0; p < k; ++p) {
                            want += double(a.data()[i * k + p]) * b.data()[p * n + j];
                        }
                        CHECK(c.data()[i * n + j] == doctest::Approx(want).epsilon(1e-5));
                    }
                }
            }
        }
    }
}

TEST_CASE("elementwise values and gradients") {
    Tape tape;
    Tensor z = leaf({1}, {0.0f});
    Tensor s = tape.sigmoid(z);
    CHECK(s.item() == 0.5f);
    tape.backward(tape.sum(s));
    CHECK(z.grad()[0] == doctest::Approx(0.25));

    Tape tape2;
    Tensor z2 = leaf({1}, {0.0f});
    Tensor th = tape2.tanh(z2);
    CHECK(th.item() == 0.0f);
    tape2.backward(tape2.sum(th));
    CHECK(z2.grad()[0] == doctest::Approx(1.0));

    Tape tape3(false);
    Tensor x = Tensor::from_data({3}, {1.5f, -2.0f, 0.25f});
    Tensor zero = tape3.add(x, tape3.scale(x, -1.0f));
    for (float v : zero.data()) {
        CHECK(v == 0.0f);
    }
    CHECK(code_of([&] { tape3.add(x, Tensor::zeros({2})); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("softmax rows") {
    Tape tape(false);
    Tensor p = tape.softmax_rows(Tensor::from_data({1, 2}, {0, 0}));
    CHECK(p.data()[0] == 0.5f);
    CHECK(p.data()[1] == 0.5f);
    Tensor big = tape.softmax_rows(Tensor::from_data({1, 2}, {1000, 1000}));
    CHECK(big.data()[0] == 0.5f);
    CHECK(big.data()[1] == 0.5f);

    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor x = random_tensor(rng, {3, 7}, -10.0f, 10.0f);
        Tensor sm = tape.softmax_rows(x);
        Tensor lsm = tape.log_softmax_rows(x);
        for (std::size_t r = 0; r < 3; ++r) {
            double total = 0.0, lse = 0.0;
            for (std::size_t c = 0; c < 7; ++c) {
                total += sm.data()[r * 7 + c];
                lse += std::exp(double(lsm.data()[r * 7 + c]));
                CHECK(std::abs(std::exp(lsm.data()[r * 7 + c]) - sm.data()[r * 7 + c]) < 1e-6);
            }
            CHECK(std::abs(total - 1.0) < 1e-6);
            CHECK(std::abs(std::log(lse)) < 1e-5);
        }
    }
}

TEST_CASE("embedding gather and scatter") {
    Tape tape;
    Tensor table = leaf({3, 2}, {1, 2, 3, 4, 5, 6});
    std::vector<int> ids{0, 2, 2};
    Tensor rows = tape.embedding(table, ids);
    CHECK(rows.data()[0] == 1.0f);
    CHECK(rows.data()[2] == 5.0f);
    tape.backward(tape.sum(rows));
    CHECK(table.grad()[0] == 1.0f);
    CHECK(table.grad()[2] == 0.0f);
    CHECK(table.grad()[4] == 2.0f);
    std::vector<int> bad{3};
    CHECK(code_of([&] { tape.embedding(table, bad); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("dropout") {
    Rng rng(3);
    Tape tape(false);
    Tensor x = Tensor::full({100000}, 1.0f);
    CHECK(tape.dropout(x, 0.0f, true, rng).same_storage(x));
    CHECK(tape.dropout(x, 0.3f, false, rng).same_storage(x));
    Tensor y = tape.dropout(x, 0.3f, true, rng);
    const double mean = std::accumulate(y.data().begin(), y.data().end(), 0.0) / 100000.0;
    CHECK(std::abs(mean - 1.0) < 0.02);
    CHECK(code_of([&] { tape.dropout(x, 1.0f, true, rng); }) == ErrorCode::Config);
}

TEST_CASE("concat and slice round-trip") {
    Tape tape(false);
    Rng rng(9);
    Tensor a = random_tensor(rng, {2, 3});
    Tensor b = random_tensor(rng, {2, 4});
    CHECK(tape.concat({a}, 1).same_storage(a));
    Tensor ab = tape.concat({a, b}, 1);
    CHECK(ab.shape() == Shape{2, 7});
    Tensor a2 = tape.slice(ab, 0, 3, 1);
    Tensor b2 = tape.slice(ab, 3, 7, 1);
    CHECK(std::equal(a.data().begin(), a.data().end(), a2.data().begin()));
    CHECK(std::equal(b.data().begin(), b.data().end(), b2.data().begin()));
    CHECK(code_of([&] { tape.concat({a, b}, 0); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([&] { tape.slice(a, 2, 4, 1); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("backward basics") {
    Tape tape;
    Tensor x = leaf({3}, {1, -2, 3});
    tape.backward(tape.sum(x));
    for (float g : x.grad()) {
        CHECK(g == 1.0f);
    }
    Tape tape2;
    Tensor y = leaf({3}, {1, -2, 3});
    tape2.backward(tape2.sum(tape2.mul(y, y)));
    CHECK(y.grad()[0] == 2.0f);
    CHECK(y.grad()[1] == -4.0f);
    CHECK(y.grad()[2] == 6.0f);

    CHECK(code_of([&] { tape2.backward(tape2.add(y, y)); }) == ErrorCode::NotScalar);
    Tape other;
    Tensor foreign = other.sum(leaf({2}, {1, 1}));
    CHECK(code_of([&] { tape2.backward(foreign); }) == ErrorCode::DetachedFromTape);
    Tensor stale = tape2.sum(y);
    tape2.clear();
    CHECK(code_of([&] { tape2.backward(stale); }) == ErrorCode::DetachedFromTape);
}

TEST_CASE("diamond graph accumulates both paths and visits each node once") {
    // loss = sum(a*b + a*c) with b = 2a, c = a^2 -> dloss/da = 4a + 3a^2
    Tape tape;
    Tensor a = leaf({2}, {1.5f, -0.5f});
    Tensor b = tape.scale(a, 2.0f);
    Tensor c = tape.mul(a, a);
    Tensor loss = tape.sum(tape.add(tape.mul(a, b), tape.mul(a, c)));
    tape.backward(loss);
    for (std::size_t i = 0; i < 2; ++i) {
        const float v = a.data()[i];
        CHECK(a.grad()[i] == doctest::Approx(4 * v + 3 * v * v));
    }
    CHECK(tape.last_backward_visits() == tape.size());
}

TEST_CASE("finite differences for every primitive") {
    for (const auto& name : sandhi::testing::primitive_names()) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto c = sandhi::testing::make_op_case(name, seed * 7919 + 1);
            auto r = grad_check(c.inputs, c.loss);
            INFO(name, " seed ", seed, " ", r.where);
            REQUIRE(r.worst < 1e-3);
        }
    }
}

TEST_CASE("non-recording tape keeps no graph") {
    Tape tape(false);
    Tensor x = leaf({2}, {1, 2});
    Tensor y = tape.sum(tape.mul(x, x));
    CHECK(tape.size() == 0);
    CHECK(code_of([&] { tape.backward(y); }) == ErrorCode::DetachedFromTape);
}

TEST_CASE("sgd step") {
    std::vector<Tensor> params{leaf({1}, {1.0f})};
    params[0].ensure_grad()[0] = 2.0f;
    sgd_step(params, 0.5f);
    CHECK(params[0].data()[0] == 0.0f);
    CHECK(params[0].grad()[0] == 0.0f);

    params[0].ensure_grad()[0] = 3.0f;
    sgd_step(params, 0.0f);
    CHECK(params[0].data()[0] == 0.0f);

    std::vector<Tensor> fresh{leaf({1}, {1.0f})};
    CHECK(code_of([&] { sgd_step(fresh, 0.1f); }) == ErrorCode::MissingGrad);

    // f(p) = (p - 3)^2 from p = 0: one step with lr 0.1 lowers f.
    std::vector<Tensor> q{leaf({1}, {0.0f})};
    auto f = [](float p) { return (p - 3) * (p - 3); };
    const float before = f(q[0].data()[0]);
    Tape tape;
    Tensor d = tape.sub(q[0], Tensor::scalar(3.0f));
    tape.backward(tape.sum(tape.mul(d, d)));
    sgd_step(q, 0.1f);
    CHECK(f(q[0].data()[0]) < before);
}

TEST_CASE("gradient clipping") {
    std::vector<Tensor> p{leaf({2}, {0, 0})};
    p[0].ensure_grad()[0] = 3.0f;
    p[0].grad()[1] = 4.0f;
    CHECK(global_grad_norm(p) == doctest::Approx(5.0));
    CHECK(clip_grad_norm(p, 1.0) == doctest::Approx(5.0));
    CHECK(global_grad_norm(p) == doctest::Approx(1.0));
}
