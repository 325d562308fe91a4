#pragma once

// Straight-loop re-implementation of the policy graph. Shares no code with
// the library: no im2col, no Eigen, its own index arithmetic.

#include <array>
#include <cstddef>
#include <vector>

#include "projcal/network.hpp"

namespace refnet {

inline constexpr int kChannels[4] = {2, 16, 32, 64};
inline constexpr int kSizes[4] = {64, 32, 16, 8};

template <typename T>
struct Net {
  std::array<std::vector<T>, 8> w;  // conv1.w, conv1.b, conv2.w, conv2.b, conv3.w, conv3.b, fc.w, fc.b

  static Net from(const projcal::PolicyWeights& pw) {
    Net n;
    for (std::size_t t = 0; t < 8; ++t) n.w[t].assign(pw.tensors[t].values.begin(), pw.tensors[t].values.end());
    return n;
  }
};

template <typename T>
struct State {
  std::array<std::vector<T>, 3> z;  // pre-activation, [channel][y][x]
  std::array<std::vector<T>, 3> a;  // post-ReLU
  std::array<T, 64> pooled{};
  std::array<T, 2> out{};
};

/// z[o] of conv layer `l` evaluated on `in` (all input channels), written to out[0 .. m*m).
template <typename T>
void conv_channel(const Net<T>& n, int l, int o, const std::vector<T>& in, T* out) {
  const int C = kChannels[l];
  const int N = kSizes[l];
  const int M = kSizes[l + 1];
  const std::vector<T>& W = n.w[2 * l];
  const T bias = n.w[2 * l + 1][o];
  for (int y = 0; y < M; ++y) {
    for (int x = 0; x < M; ++x) {
      T s = bias;
      for (int c = 0; c < C; ++c) {
        for (int dy = 0; dy < 3; ++dy) {
          const int iy = 2 * y - 1 + dy;
          if (iy < 0 || iy >= N) continue;
          for (int dx = 0; dx < 3; ++dx) {
            const int ix = 2 * x - 1 + dx;
            if (ix < 0 || ix >= N) continue;
            s += W[((o * C + c) * 3 + dy) * 3 + dx] * in[(c * N + iy) * N + ix];
          }
        }
      }
      out[y * M + x] = s;
    }
  }
}

/// Adds the layer-`l` response of a change `delta` in input channel `c` to every output channel of z.
template <typename T>
void add_channel_response(const Net<T>& n, int l, int c, const std::vector<T>& delta, std::vector<T>& z) {
  const int C = kChannels[l];
  const int O = kChannels[l + 1];
  const int N = kSizes[l];
  const int M = kSizes[l + 1];
  const std::vector<T>& W = n.w[2 * l];
  for (int o = 0; o < O; ++o) {
    for (int y = 0; y < M; ++y) {
      for (int x = 0; x < M; ++x) {
        T s = 0;
        for (int dy = 0; dy < 3; ++dy) {
          const int iy = 2 * y - 1 + dy;
          if (iy < 0 || iy >= N) continue;
          for (int dx = 0; dx < 3; ++dx) {
            const int ix = 2 * x - 1 + dx;
            if (ix < 0 || ix >= N) continue;
            s += W[((o * C + c) * 3 + dy) * 3 + dx] * delta[iy * N + ix];
          }
        }
        z[(o * M + y) * M + x] += s;
      }
    }
  }
}

template <typename T>
void pool_and_head(const Net<T>& n, const std::vector<T>& a3, State<T>& s) {
  const int P = kSizes[3] * kSizes[3];
  for (int c = 0; c < 64; ++c) {
    T sum = 0;
    for (int k = 0; k < P; ++k) sum += a3[c * P + k];
    s.pooled[c] = sum / T(P);
  }
  for (int r = 0; r < 2; ++r) {
    T v = n.w[7][r];
    for (int c = 0; c < 64; ++c) v += n.w[6][r * 64 + c] * s.pooled[c];
    s.out[r] = v;
  }
}

template <typename T>
State<T> forward(const Net<T>& n, const std::vector<T>& input) {
  State<T> s;
  const std::vector<T>* in = &input;
  for (int l = 0; l < 3; ++l) {
    const int M = kSizes[l + 1];
    const int P = M * M;
    s.z[l].assign(static_cast<std::size_t>(kChannels[l + 1]) * P, T(0));
    for (int o = 0; o < kChannels[l + 1]; ++o) conv_channel(n, l, o, *in, s.z[l].data() + o * P);
    s.a[l] = s.z[l];
    for (T& v : s.a[l]) v = v > T(0) ? v : T(0);
    in = &s.a[l];
  }
  pool_and_head(n, s.a[2], s);
  return s;
}

template <typename T>
T half_squared_error(const State<T>& s, T tx, T ty) {
  const T rx = s.out[0] - tx;
  const T ry = s.out[1] - ty;
  return T(0.5) * (rx * rx + ry * ry);
}

/// Loss with every ReLU gate frozen at its state in `base`. With the gates
/// fixed the network is linear in any single parameter, so the loss is an
/// exact quadratic in it and a central difference recovers the derivative
/// without truncation error, even where the perturbation would cross a kink.
template <typename T>
class FrozenGateLoss {
 public:
  FrozenGateLoss(Net<T> net, std::vector<T> input, T tx, T ty)
      : net_(std::move(net)), input_(std::move(input)), tx_(tx), ty_(ty), base_(forward(net_, input_)) {}

  const Net<T>& net() const { return net_; }

  /// Loss with parameter (tensor t, index k) replaced by `value`.
  T loss_with(std::size_t t, std::size_t k, T value) {
    const T saved = net_.w[t][k];
    net_.w[t][k] = value;
    const T loss = evaluate(t, k);
    net_.w[t][k] = saved;
    return loss;
  }

 private:
  static bool open(const std::vector<T>& z, std::size_t i) { return z[i] > T(0); }

  void gate(int l, std::vector<T>& v) const {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = open(base_.z[l], i) ? v[i] : T(0);
  }

  T evaluate(std::size_t t, std::size_t k) {
    State<T> s = base_;
    if (t >= 6) {
      pool_and_head(net_, s.a[2], s);
      return half_squared_error(s, tx_, ty_);
    }
    const int l = static_cast<int>(t / 2);
    const int fan = kChannels[l] * 9;
    const int o = (t % 2 == 0) ? static_cast<int>(k) / fan : static_cast<int>(k);
    const int M = kSizes[l + 1];
    const int P = M * M;

    // recompute the one affected channel of layer l
    std::vector<T> zo(static_cast<std::size_t>(P));
    conv_channel(net_, l, o, l == 0 ? input_ : base_.a[l - 1], zo.data());
    std::vector<T> delta(static_cast<std::size_t>(P));
    for (int i = 0; i < P; ++i) {
      const std::size_t g = static_cast<std::size_t>(o * P + i);
      delta[i] = (open(base_.z[l], g) ? zo[i] : T(0)) - base_.a[l][g];
      s.a[l][g] += delta[i];
    }
    // push the change through the remaining layers with frozen gates
    for (int next = l + 1; next < 3; ++next) {
      std::vector<T> z = base_.z[next];
      if (next == l + 1) {
        add_channel_response(net_, next, o, delta, z);
      } else {
        const int Pn = kSizes[next] * kSizes[next];
        for (int c = 0; c < kChannels[next]; ++c) {
          std::vector<T> d(static_cast<std::size_t>(Pn));
          bool any = false;
          for (int i = 0; i < Pn; ++i) {
            d[i] = s.a[next - 1][c * Pn + i] - base_.a[next - 1][c * Pn + i];
            any = any || d[i] != T(0);
          }
          if (any) add_channel_response(net_, next, c, d, z);
        }
      }
      gate(next, z);
      s.a[next] = std::move(z);
    }
    pool_and_head(net_, s.a[2], s);
    return half_squared_error(s, tx_, ty_);
  }

  Net<T> net_;
  std::vector<T> input_;
  T tx_, ty_;
  State<T> base_;
};

}  // namespace refnet
