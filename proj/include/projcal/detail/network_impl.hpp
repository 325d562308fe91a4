#pragma once

// Templated forward/backward for the fixed policy graph. Production code runs
// it in float; the gradient tests also run it in double.

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace projcal::detail {

inline constexpr int kTensorCount = 8;

struct ConvLayer {
  int in_channels;
  int out_channels;
  int in_size;
  constexpr int out_size() const { return in_size / 2; }
  constexpr int patch() const { return in_channels * 9; }
  constexpr int positions() const { return out_size() * out_size(); }
};

inline constexpr std::array<ConvLayer, 3> kConvLayers{{{2, 16, 64}, {16, 32, 32}, {32, 64, 16}}};
inline constexpr int kFeatures = 64;
inline constexpr int kOutputs = 2;

template <typename T>
using Params = std::array<std::span<const T>, kTensorCount>;

template <typename T>
using Grads = std::array<std::vector<T>, kTensorCount>;

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
struct Activations {
  std::array<MatR<T>, 3> cols;  // im2col of each conv input, [patch x positions]
  std::array<MatR<T>, 3> act;   // post-ReLU output, [channels x positions]
  Eigen::Matrix<T, kFeatures, 1> pooled;
  Eigen::Matrix<T, kOutputs, 1> output;
};

template <typename T>
void im2col(const ConvLayer& L, const T* in, MatR<T>& cols) {
  const int n = L.in_size;
  const int m = L.out_size();
  cols.resize(L.patch(), L.positions());
  for (int c = 0; c < L.in_channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        T* row = cols.row((c * 3 + ky) * 3 + kx).data();
        for (int oy = 0; oy < m; ++oy) {
          const int iy = 2 * oy + ky - 1;
          for (int ox = 0; ox < m; ++ox) {
            const int ix = 2 * ox + kx - 1;
            row[oy * m + ox] = (iy >= 0 && iy < n && ix >= 0 && ix < n) ? in[(c * n + iy) * n + ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const ConvLayer& L, const MatR<T>& dcols, T* din) {
  const int n = L.in_size;
  const int m = L.out_size();
  for (int c = 0; c < L.in_channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T* row = dcols.row((c * 3 + ky) * 3 + kx).data();
        for (int oy = 0; oy < m; ++oy) {
          const int iy = 2 * oy + ky - 1;
          if (iy < 0 || iy >= n) continue;
          for (int ox = 0; ox < m; ++ox) {
            const int ix = 2 * ox + kx - 1;
            if (ix < 0 || ix >= n) continue;
            din[(c * n + iy) * n + ix] += row[oy * m + ox];
          }
        }
      }
    }
  }
}

template <typename T>
void forward(const Params<T>& p, std::span<const T> input, Activations<T>& a) {
  const T* in = input.data();
  for (std::size_t l = 0; l < kConvLayers.size(); ++l) {
    const ConvLayer& L = kConvLayers[l];
    im2col(L, in, a.cols[l]);
    Eigen::Map<const MatR<T>> W(p[2 * l].data(), L.out_channels, L.patch());
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(p[2 * l + 1].data(), L.out_channels);
    a.act[l].noalias() = W * a.cols[l];
    a.act[l].colwise() += b;
    a.act[l] = a.act[l].cwiseMax(T(0));
    in = a.act[l].data();
  }
  a.pooled = a.act[2].rowwise().mean();
  Eigen::Map<const Eigen::Matrix<T, kOutputs, kFeatures, Eigen::RowMajor>> Wfc(p[6].data());
  Eigen::Map<const Eigen::Matrix<T, kOutputs, 1>> bfc(p[7].data());
  a.output = Wfc * a.pooled + bfc;
}

/// Accumulates dLoss/dparams into g given dLoss/doutput.
template <typename T>
void backward(const Params<T>& p, const Activations<T>& a, const Eigen::Matrix<T, kOutputs, 1>& dout, Grads<T>& g) {
  Eigen::Map<Eigen::Matrix<T, kOutputs, kFeatures, Eigen::RowMajor>> dWfc(g[6].data());
  Eigen::Map<Eigen::Matrix<T, kOutputs, 1>> dbfc(g[7].data());
  dWfc.noalias() += dout * a.pooled.transpose();
  dbfc += dout;

  Eigen::Map<const Eigen::Matrix<T, kOutputs, kFeatures, Eigen::RowMajor>> Wfc(p[6].data());
  const Eigen::Matrix<T, kFeatures, 1> dpooled = Wfc.transpose() * dout;

  const ConvLayer& L3 = kConvLayers[2];
  MatR<T> dz = dpooled.replicate(1, L3.positions()) / T(L3.positions());
  for (int l = 2; l >= 0; --l) {
    const ConvLayer& L = kConvLayers[static_cast<std::size_t>(l)];
    dz = (a.act[l].array() > T(0)).select(dz, T(0));
    Eigen::Map<MatR<T>> dW(g[2 * l].data(), L.out_channels, L.patch());
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(g[2 * l + 1].data(), L.out_channels);
    dW.noalias() += dz * a.cols[l].transpose();
    db += dz.rowwise().sum();
    if (l == 0) break;
    Eigen::Map<const MatR<T>> W(p[2 * l].data(), L.out_channels, L.patch());
    const MatR<T> dcols = W.transpose() * dz;
    MatR<T> din = MatR<T>::Zero(L.in_channels, L.in_size * L.in_size);
    col2im_add(L, dcols, din.data());
    dz = std::move(din);
  }
}

template <typename T>
T half_squared_error(const Eigen::Matrix<T, kOutputs, 1>& out, T tx, T ty) {
  const T rx = out(0) - tx;
  const T ry = out(1) - ty;
  return T(0.5) * (rx * rx + ry * ry);
}

}  // namespace projcal::detail
