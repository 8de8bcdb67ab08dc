#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "newstrend/corpus/labels.hpp"
#include "newstrend/error.hpp"

namespace newstrend::train {

// Closed-form minimizer of v l + (lambda/2)(v^2 - 2v) over v in [0, 1].
inline double spl_weight(double loss, double lambda) { return loss < lambda ? 1.0 - loss / lambda : 0.0; }

inline std::vector<double> spl_weights(std::span<const double> losses, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("spl lambda must be positive");
  std::vector<double> v(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) v[i] = spl_weight(losses[i], lambda);
  return v;
}

inline double spl_objective(std::span<const double> losses, std::span<const double> v, double lambda) {
  if (losses.size() != v.size()) throw ShapeError("spl_objective: losses and weights differ in length");
  double fit = 0.0, reg = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    fit += v[i] * losses[i];
    reg += v[i] * v[i] - 2.0 * v[i];
  }
  return fit + 0.5 * lambda * reg;
}

inline double active_fraction(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const auto n = std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; });
  return static_cast<double>(n) / static_cast<double>(v.size());
}

// Pace state. lambda grows by mu per epoch until it reaches active_threshold.
struct SplState {
  std::vector<double> v;
  double lambda = 0.0;
  double mu = 1.1;
  double active_threshold = 0.0;

  // lambda0 from the given quantile of the initial losses, unless `fixed`
  // is positive (infinity keeps every weight at exactly 1).
  static SplState start(std::span<const double> initial_losses, double quantile, double mu, double fixed = 0.0) {
    if (initial_losses.empty()) throw ConfigError("spl: no training losses");
    if (!(mu > 1.0)) throw ConfigError("spl mu must be > 1");
    SplState s;
    s.mu = mu;
    const double max_loss = *std::max_element(initial_losses.begin(), initial_losses.end());
    s.active_threshold = 2.0 * max_loss;
    if (fixed > 0.0) {
      s.lambda = fixed;
    } else {
      if (!(quantile > 0.0 && quantile <= 1.0)) throw ConfigError("spl lambda0 quantile must be in (0, 1]");
      s.lambda = corpus::quantile(std::vector<double>(initial_losses.begin(), initial_losses.end()), quantile);
      if (!(s.lambda > 0.0)) s.lambda = std::max(max_loss, 1e-12);
    }
    s.v.assign(initial_losses.size(), 1.0);
    return s;
  }

  void update_weights(std::span<const double> losses) { v = spl_weights(losses, lambda); }

  void grow() {
    if (lambda < active_threshold) lambda *= mu;
  }
};

}  // namespace newstrend::train
