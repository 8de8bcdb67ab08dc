#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"

namespace newstrend::corpus {

struct LabelThresholds {
  double down_cut = -0.0041;
  double up_cut = 0.0087;

  static LabelThresholds defaults() { return {}; }
};

inline double rise_percent(double open_t, double open_next) {
  if (!(open_t > 0.0)) throw InputError("rise_percent: open price must be positive, got " + std::to_string(open_t));
  return (open_next - open_t) / open_t;
}

// Linear interpolation between order statistics at h = (n - 1) p.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ConfigError("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

// Empirical tertiles.
inline LabelThresholds compute_thresholds(std::span<const double> rises) {
  std::vector<double> sorted(rises.begin(), rises.end());
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
  if (distinct < 3) throw InputError("compute_thresholds: need at least 3 distinct rise values");
  sorted.assign(rises.begin(), rises.end());
  std::sort(sorted.begin(), sorted.end());
  LabelThresholds th{quantile_sorted(sorted, 1.0 / 3.0), quantile_sorted(sorted, 2.0 / 3.0)};
  if (!(th.down_cut < th.up_cut)) throw InputError("compute_thresholds: tertiles coincide");
  return th;
}

inline Label label(double rp, const LabelThresholds& th) {
  if (rp < th.down_cut) return Label::down;
  if (rp > th.up_cut) return Label::up;
  return Label::preserve;
}

}  // namespace newstrend::corpus
