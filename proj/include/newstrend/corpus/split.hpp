#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"
#include "newstrend/random.hpp"

namespace newstrend::corpus {

// Chronological train/test cut over distinct target dates, then a seeded
// uniform validation draw removed from the train side.
inline DatasetSplit split_dataset(const std::vector<Sample>& samples, double train_frac, double val_frac_of_train,
                                  std::uint64_t seed) {
  if (samples.empty()) throw ConfigError("split_dataset: no samples");
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ConfigError("split_dataset: train fraction must lie in (0, 1), got " + std::to_string(train_frac));
  }
  if (!(val_frac_of_train >= 0.0 && val_frac_of_train < 1.0)) {
    throw ConfigError("split_dataset: validation fraction must lie in [0, 1)");
  }
  std::vector<Date> dates;
  for (const Sample& s : samples) dates.push_back(s.target_date);
  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
  const auto n_train_dates = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(dates.size())));
  if (n_train_dates == 0 || n_train_dates >= dates.size()) {
    throw ConfigError("split_dataset: cut leaves an empty train or test partition");
  }
  const Date first_test = dates[n_train_dates];

  std::vector<const Sample*> train_side;
  DatasetSplit split;
  for (const Sample& s : samples) {
    if (s.target_date < first_test) {
      train_side.push_back(&s);
    } else {
      split.test.push_back(s);
    }
  }
  std::size_t n_val = 0;
  if (val_frac_of_train > 0.0) {
    n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(val_frac_of_train * static_cast<double>(train_side.size()))));
  }
  if (n_val >= train_side.size()) throw ConfigError("split_dataset: validation draw leaves no training samples");

  std::vector<std::size_t> order(train_side.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<bool> in_val(train_side.size(), false);
  for (std::size_t i = 0; i < n_val; ++i) in_val[order[i]] = true;
  for (std::size_t i = 0; i < train_side.size(); ++i) {
    (in_val[i] ? split.validation : split.train).push_back(*train_side[i]);
  }
  return split;
}

}  // namespace newstrend::corpus
