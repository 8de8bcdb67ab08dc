#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "newstrend/ad/tensor.hpp"
#include "newstrend/error.hpp"
#include "newstrend/model/params.hpp"

namespace newstrend::train {

enum class OptimizerKind { sgd, adam };

inline const char* optimizer_name(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

// sgd: p -= lr g. adam: bias-corrected moments, beta1 0.9, beta2 0.999, eps 1e-8.
class Optimizer {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  Optimizer(OptimizerKind kind, double lr, const model::HanParams& shape_of) : kind_(kind), lr_(lr) {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (kind == OptimizerKind::adam) {
      for (const auto& t : shape_of) {
        m_.emplace_back(t.value.size(), 0.0);
        v_.emplace_back(t.value.size(), 0.0);
      }
    }
  }

  std::size_t steps() const { return t_; }

  void step(model::HanParams& params, const std::vector<ad::TensorValue>& grads) {
    if (grads.size() != params.size()) throw ShapeError("gradient count does not match parameter count");
    ++t_;
    if (kind_ == OptimizerKind::sgd) {
      for (std::size_t k = 0; k < params.size(); ++k) {
        auto p = params.value(k).data();
        const auto g = grads[k].data();
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr_ * g[i];
      }
      return;
    }
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto p = params.value(k).data();
      const auto g = grads[k].data();
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
        p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
      }
    }
  }

 private:
  OptimizerKind kind_;
  double lr_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace newstrend::train
