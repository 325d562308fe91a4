#include <doctest.h>

#include <cmath>

#include "projcal/network.hpp"
#include "support/gradient_check.hpp"
#include "support/reference_net.hpp"

using namespace projcal;

TEST_CASE("every gradient matches central differences on three seeds") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const gradcheck::Result r = gradcheck::run(seed);
    CAPTURE(seed);
    CHECK(r.checked == PolicyWeights::zeros().parameter_count());
    CHECK(r.worst_f32 < 1e-2);
    CHECK(r.worst_f64 < 1e-5);
  }
}

TEST_CASE("frozen-gate loss agrees with the plain reference away from kinks") {
  const PolicyWeights w = PolicyWeights::he_init(4);
  InputTensor in;
  for (std::size_t i = 0; i < in.data.size(); ++i) in.data[i] = static_cast<float>((i % 17) / 17.0);
  const std::vector<double> x(in.data.begin(), in.data.end());
  refnet::FrozenGateLoss<double> frozen(refnet::Net<double>::from(w), x, 0.01, 0.02);
  refnet::Net<double> plain = refnet::Net<double>::from(w);
  for (std::size_t t : {0u, 3u, 4u, 6u, 7u}) {
    const double v = plain.w[t][1];
    CHECK(frozen.loss_with(t, 1, v) == doctest::Approx(refnet::half_squared_error(refnet::forward(plain, x), 0.01, 0.02)).epsilon(1e-12));
  }
}

TEST_CASE("perfect prediction gives zero loss and zero head-bias gradient") {
  const PolicyWeights w = PolicyWeights::he_init(2);
  InputTensor in;
  for (std::size_t i = 0; i < in.data.size(); ++i) in.data[i] = static_cast<float>((i % 29) / 29.0);
  const OffsetEstimate y = forward(w, in);
  const Gradients g = backward(w, in, y);
  CHECK(g.loss == 0.0);
  for (float v : g.grads.get("fc.bias").values) CHECK(v == 0.0f);
}

TEST_CASE("doubling the residual doubles the head gradient exactly") {
  const PolicyWeights w = PolicyWeights::he_init(3);
  InputTensor in;
  for (std::size_t i = 0; i < in.data.size(); ++i) in.data[i] = static_cast<float>((i % 23) / 23.0);
  const OffsetEstimate y = forward(w, in);
  const Gradients half = backward(w, in, y * 0.5);
  const Gradients full = backward(w, in, {0.0, 0.0});
  for (const char* name : {"fc.weight", "fc.bias"}) {
    const auto& a = half.grads.get(name).values;
    const auto& b = full.grads.get(name).values;
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(b[k] == 2.0f * a[k]);
  }
  CHECK(full.loss == doctest::Approx(4.0 * half.loss).epsilon(1e-6));
}

TEST_CASE("batch gradient is the sample mean") {
  const PolicyWeights w = PolicyWeights::he_init(6);
  InputTensor a, b;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    a.data[i] = static_cast<float>((i % 13) / 13.0);
    b.data[i] = static_cast<float>((i % 7) / 7.0);
  }
  const OffsetEstimate ta{0.01, 0.02}, tb{-0.03, 0.0};
  const InputTensor* inputs[] = {&a, &b};
  const OffsetEstimate targets[] = {ta, tb};
  const Gradients batch = backward_batch(w, inputs, targets);
  const Gradients ga = backward(w, a, ta), gb = backward(w, b, tb);
  CHECK(batch.loss == doctest::Approx(0.5 * (ga.loss + gb.loss)).epsilon(1e-6));
  const auto& v = batch.grads.get("conv2.weight").values;
  for (std::size_t k = 0; k < v.size(); k += 97) {
    const double expect = 0.5 * (ga.grads.get("conv2.weight").values[k] + gb.grads.get("conv2.weight").values[k]);
    CHECK(std::abs(v[k] - expect) <= 1e-6 * std::max(1.0, std::abs(expect)));
  }
}
