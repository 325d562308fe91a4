#include "projcal/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "projcal/detail/network_impl.hpp"
#include "projcal/errors.hpp"
#include "projcal/rng.hpp"

namespace projcal {

namespace {

struct AxisWeight {
  int src;
  double weight;
};

// Overlap weights of each of `dst` output cells with `src` input cells.
std::vector<std::vector<AxisWeight>> area_weights(int src, int dst) {
  std::vector<std::vector<AxisWeight>> out(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int o = 0; o < dst; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    for (int s = static_cast<int>(std::floor(lo)); s < src && s < hi; ++s) {
      const double overlap = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
      if (overlap > 0.0) out[static_cast<std::size_t>(o)].push_back({s, overlap / scale});
    }
  }
  return out;
}

detail::Params<float> params_of(const PolicyWeights& w) {
  detail::Params<float> p;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = w.tensors[i].values;
  return p;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CorruptFileError("weights: truncated file");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

constexpr char kMagic[] = "PCALW001";
constexpr std::uint32_t kMaxNameLength = 256;
constexpr std::uint32_t kMaxRank = 8;

}  // namespace

InputTensor preprocess(const Image& image) {
  if (!image.valid()) throw ConfigError("image: invalid dimensions or pixel buffer");
  const int W = image.width;
  const int H = image.height;
  const auto wx = area_weights(W, kInputSize);
  const auto wy = area_weights(H, kInputSize);

  std::vector<double> red(static_cast<std::size_t>(W) * H);
  std::vector<double> lum(red.size());
  for (std::size_t i = 0; i < red.size(); ++i) {
    const double r = image.pixels[3 * i];
    const double g = image.pixels[3 * i + 1];
    const double b = image.pixels[3 * i + 2];
    red[i] = std::max(0.0, r - std::max(g, b)) / 255.0;
    lum[i] = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
  }

  InputTensor out;
  std::vector<double> rows(static_cast<std::size_t>(H) * kInputSize);
  for (int c = 0; c < kInputChannels; ++c) {
    const std::vector<double>& src = c == 0 ? red : lum;
    for (int y = 0; y < H; ++y) {
      for (int ox = 0; ox < kInputSize; ++ox) {
        double acc = 0.0;
        for (const AxisWeight& w : wx[static_cast<std::size_t>(ox)]) acc += w.weight * src[static_cast<std::size_t>(y) * W + w.src];
        rows[static_cast<std::size_t>(y) * kInputSize + ox] = acc;
      }
    }
    for (int oy = 0; oy < kInputSize; ++oy) {
      for (int ox = 0; ox < kInputSize; ++ox) {
        double acc = 0.0;
        for (const AxisWeight& w : wy[static_cast<std::size_t>(oy)]) acc += w.weight * rows[static_cast<std::size_t>(w.src) * kInputSize + ox];
        out.data[(static_cast<std::size_t>(c) * kInputSize + oy) * kInputSize + ox] =
            static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
    }
  }
  return out;
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : shape) n *= d;
  return n;
}

const std::vector<TensorSpec>& architecture() {
  static const std::vector<TensorSpec> specs = {
      {"conv1.weight", {16, 2, 3, 3}},  {"conv1.bias", {16}}, {"conv2.weight", {32, 16, 3, 3}},
      {"conv2.bias", {32}},             {"conv3.weight", {64, 32, 3, 3}}, {"conv3.bias", {64}},
      {"fc.weight", {2, 64}},           {"fc.bias", {2}},
  };
  return specs;
}

PolicyWeights PolicyWeights::zeros() {
  PolicyWeights w;
  for (const TensorSpec& spec : architecture()) {
    Tensor t{spec.name, spec.shape, {}};
    t.values.assign(t.element_count(), 0.0f);
    w.tensors.push_back(std::move(t));
  }
  return w;
}

PolicyWeights PolicyWeights::he_init(std::uint64_t seed) {
  PolicyWeights w = zeros();
  Rng rng(seed);
  for (Tensor& t : w.tensors) {
    if (t.shape.size() < 2) continue;  // biases stay zero
    std::size_t fan_in = 1;
    for (std::size_t i = 1; i < t.shape.size(); ++i) fan_in *= t.shape[i];
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (float& v : t.values) v = static_cast<float>(stddev * rng.normal());
  }
  return w;
}

const Tensor& PolicyWeights::get(const std::string& name) const {
  for (const Tensor& t : tensors) {
    if (t.name == name) return t;
  }
  throw ShapeMismatchError("weights: no tensor named '" + name + "'");
}

Tensor& PolicyWeights::get(const std::string& name) {
  return const_cast<Tensor&>(static_cast<const PolicyWeights&>(*this).get(name));
}

void PolicyWeights::validate() const {
  const auto& specs = architecture();
  if (tensors.size() != specs.size()) {
    throw ShapeMismatchError("weights: expected " + std::to_string(specs.size()) + " tensors, got " +
                             std::to_string(tensors.size()));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Tensor& t = tensors[i];
    if (t.name != specs[i].name) throw ShapeMismatchError("weights: expected tensor '" + std::string(specs[i].name) + "', got '" + t.name + "'");
    if (t.shape != specs[i].shape) throw ShapeMismatchError("weights: shape mismatch for '" + t.name + "'");
    if (t.values.size() != t.element_count()) throw ShapeMismatchError("weights: value count mismatch for '" + t.name + "'");
  }
}

bool PolicyWeights::all_finite() const {
  return std::all_of(tensors.begin(), tensors.end(), [](const Tensor& t) {
    return std::all_of(t.values.begin(), t.values.end(), [](float v) { return std::isfinite(v); });
  });
}

std::size_t PolicyWeights::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors) n += t.values.size();
  return n;
}

bool bitwise_equal(const PolicyWeights& a, const PolicyWeights& b) {
  if (a.tensors.size() != b.tensors.size()) return false;
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    const Tensor& x = a.tensors[i];
    const Tensor& y = b.tensors[i];
    if (x.name != y.name || x.shape != y.shape || x.values.size() != y.values.size()) return false;
    if (!x.values.empty() && std::memcmp(x.values.data(), y.values.data(), x.values.size() * sizeof(float)) != 0) return false;
  }
  return true;
}

OffsetEstimate forward(const PolicyWeights& weights, const InputTensor& input) {
  weights.validate();
  if (input.data.size() != kInputLength) throw ShapeMismatchError("input: expected 2 x 64 x 64 values");
  detail::Activations<float> act;
  detail::forward<float>(params_of(weights), input.data, act);
  return {act.output(0), act.output(1)};
}

Gradients backward(const PolicyWeights& weights, const InputTensor& input, const OffsetEstimate& target) {
  const InputTensor* ptr = &input;
  return backward_batch(weights, std::span<const InputTensor* const>(&ptr, 1), std::span<const OffsetEstimate>(&target, 1));
}

Gradients backward_batch(const PolicyWeights& weights, std::span<const InputTensor* const> inputs,
                         std::span<const OffsetEstimate> targets) {
  weights.validate();
  if (inputs.size() != targets.size() || inputs.empty()) throw ShapeMismatchError("batch: inputs and targets must be non-empty and equal length");
  const auto params = params_of(weights);
  detail::Grads<float> g;
  for (std::size_t i = 0; i < g.size(); ++i) g[i].assign(weights.tensors[i].values.size(), 0.0f);

  detail::Activations<float> act;
  float loss = 0.0f;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    if (inputs[s]->data.size() != kInputLength) throw ShapeMismatchError("input: expected 2 x 64 x 64 values");
    detail::forward<float>(params, inputs[s]->data, act);
    const float tx = static_cast<float>(targets[s].dx);
    const float ty = static_cast<float>(targets[s].dy);
    loss += detail::half_squared_error<float>(act.output, tx, ty);
    const Eigen::Vector2f dout(act.output(0) - tx, act.output(1) - ty);
    detail::backward<float>(params, act, dout, g);
  }

  Gradients out;
  out.grads = PolicyWeights::zeros();
  const float inv = 1.0f / static_cast<float>(inputs.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::vector<float>& dst = out.grads.tensors[i].values;
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = inputs.size() == 1 ? g[i][k] : g[i][k] * inv;
  }
  out.loss = inputs.size() == 1 ? loss : loss * inv;
  return out;
}

std::string encode_weights(const PolicyWeights& weights) {
  std::string out(kMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(weights.tensors.size()));
  for (const Tensor& t : weights.tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (std::uint32_t d : t.shape) put_u32(out, d);
    for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

PolicyWeights decode_weights(const std::string& bytes) {
  ByteReader in(bytes);
  if (in.take(8) != std::string(kMagic, 8)) throw CorruptFileError("weights: bad magic");
  const std::uint32_t count = in.u32();
  if (count > 1024) throw CorruptFileError("weights: implausible tensor count");
  PolicyWeights w;
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t;
    const std::uint32_t name_len = in.u32();
    if (name_len > kMaxNameLength) throw CorruptFileError("weights: implausible tensor name length");
    t.name = in.take(name_len);
    const std::uint32_t rank = in.u32();
    if (rank > kMaxRank) throw CorruptFileError("weights: implausible tensor rank");
    for (std::uint32_t r = 0; r < rank; ++r) t.shape.push_back(in.u32());
    const std::size_t n = t.element_count();
    if (n > bytes.size()) throw CorruptFileError("weights: truncated file");
    t.values.resize(n);
    for (float& v : t.values) v = std::bit_cast<float>(in.u32());
    w.tensors.push_back(std::move(t));
  }
  if (!in.done()) throw CorruptFileError("weights: trailing bytes");
  try {
    w.validate();
  } catch (const ShapeMismatchError& e) {
    throw CorruptFileError(e.what());
  }
  return w;
}

void save_weights(const std::filesystem::path& path, const PolicyWeights& weights) {
  weights.validate();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string data = encode_weights(weights);
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

PolicyWeights load_weights(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_weights(ss.str());
}

}  // namespace projcal
