#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "newstrend/ad/tensor.hpp"
#include "newstrend/model/hyper.hpp"
#include "newstrend/random.hpp"

namespace newstrend::model {

struct NamedTensor {
  std::string name;
  ad::TensorValue value;
};

inline constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);

// GRU gate tensors as indices into HanParams::tensors.
struct GruSlots {
  std::size_t w_r = kAbsent, u_r = kAbsent, b_r = kAbsent;
  std::size_t w_z = kAbsent, u_z = kAbsent, b_z = kAbsent;
  std::size_t w_h = kAbsent, u_h = kAbsent, b_h = kAbsent;
};

struct LinearSlots {
  std::size_t w = kAbsent, b = kAbsent;
};

struct ParamLayout {
  LinearSlots news;  // dim -> 1
  GruSlots fwd;
  GruSlots bwd;
  LinearSlots temporal;  // encoded -> attention_dim
  std::vector<std::size_t> theta;
  std::vector<LinearSlots> mlp;  // last layer maps to the 3 classes
};

// All trainable tensors in a fixed order. Ablated components own no tensors.
class HanParams {
 public:
  HanParams() = default;

  // Zero-valued tensors with the shapes implied by `hyper`.
  explicit HanParams(const HyperParams& hyper) : hyper_(hyper) {
    hyper.validate();
    const std::size_t d = hyper.dim, h = hyper.hidden;
    if (hyper.arch.news_attention) {
      layout_.news = {add("news.w", d, 1), add("news.b", 1, 1)};
    }
    layout_.fwd = add_gru("fwd", d, h);
    if (hyper.arch.bidirectional) layout_.bwd = add_gru("bwd", d, h);
    const std::size_t enc = hyper.encoded_dim();
    if (hyper.arch.temporal_attention) {
      const std::size_t a = hyper.attention_dim();
      layout_.temporal = {add("temporal.w", enc, a), add("temporal.b", 1, a)};
      for (std::size_t i = 0; i < hyper.window; ++i) {
        layout_.theta.push_back(add("theta." + std::to_string(i), a, 1));
      }
    }
    std::size_t in = enc;
    std::vector<std::size_t> widths = hyper.mlp_hidden;
    widths.push_back(3);
    for (std::size_t l = 0; l < widths.size(); ++l) {
      const std::string p = "mlp." + std::to_string(l);
      layout_.mlp.push_back({add(p + ".w", in, widths[l]), add(p + ".b", 1, widths[l])});
      in = widths[l];
    }
  }

  const HyperParams& hyper() const { return hyper_; }
  const ParamLayout& layout() const { return layout_; }

  std::size_t size() const { return tensors_.size(); }
  const NamedTensor& operator[](std::size_t i) const { return tensors_[i]; }
  NamedTensor& operator[](std::size_t i) { return tensors_[i]; }
  const ad::TensorValue& value(std::size_t i) const { return tensors_[i].value; }
  ad::TensorValue& value(std::size_t i) { return tensors_[i].value; }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }
  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.value.size();
    return n;
  }

  friend bool operator==(const HanParams& a, const HanParams& b) {
    if (!(a.hyper_ == b.hyper_) || a.tensors_.size() != b.tensors_.size()) return false;
    for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
      if (a.tensors_[i].name != b.tensors_[i].name || !(a.tensors_[i].value == b.tensors_[i].value)) return false;
    }
    return true;
  }

 private:
  HyperParams hyper_;
  ParamLayout layout_;
  std::vector<NamedTensor> tensors_;

  std::size_t add(std::string name, std::size_t rows, std::size_t cols) {
    tensors_.push_back({std::move(name), ad::TensorValue(ad::Shape{rows, cols})});
    return tensors_.size() - 1;
  }

  GruSlots add_gru(const std::string& p, std::size_t d, std::size_t h) {
    GruSlots s;
    s.w_r = add(p + ".w_r", d, h);
    s.u_r = add(p + ".u_r", h, h);
    s.b_r = add(p + ".b_r", 1, h);
    s.w_z = add(p + ".w_z", d, h);
    s.u_z = add(p + ".u_z", h, h);
    s.b_z = add(p + ".b_z", 1, h);
    s.w_h = add(p + ".w_h", d, h);
    s.u_h = add(p + ".u_h", h, h);
    s.b_h = add(p + ".b_h", 1, h);
    return s;
  }
};

// Closed-form scalar count for a configuration.
inline std::size_t expected_param_count(const HyperParams& h) {
  std::size_t n = 0;
  if (h.arch.news_attention) n += h.dim + 1;
  const std::size_t gru = 3 * (h.dim * h.hidden + h.hidden * h.hidden + h.hidden);
  n += h.arch.bidirectional ? 2 * gru : gru;
  const std::size_t enc = h.encoded_dim();
  if (h.arch.temporal_attention) {
    const std::size_t a = h.attention_dim();
    n += enc * a + a + h.window * a;
  }
  std::size_t in = enc;
  std::vector<std::size_t> widths = h.mlp_hidden;
  widths.push_back(3);
  for (std::size_t w : widths) {
    n += in * w + w;
    in = w;
  }
  return n;
}

// Bias tensors are named "<component>.b" or "<component>.b_<gate>".
inline bool is_bias(const std::string& name) {
  const auto dot = name.rfind('.');
  const std::string tail = dot == std::string::npos ? name : name.substr(dot + 1);
  return tail.starts_with("b");
}

// Xavier-uniform weights, zero biases.
inline HanParams init_params(const HyperParams& hyper, std::uint64_t seed) {
  HanParams p(hyper);
  Rng rng(seed);
  for (auto& t : p) {
    if (is_bias(t.name)) continue;
    const double fan_in = static_cast<double>(t.value.shape()[0]);
    const double fan_out = static_cast<double>(t.value.shape()[1]);
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& x : t.value.data()) x = rng.uniform(-s, s);
  }
  return p;
}

}  // namespace newstrend::model
