#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"
#include "newstrend/model/han.hpp"

namespace newstrend::train {

using Confusion = std::array<std::array<std::size_t, corpus::kNumClasses>, corpus::kNumClasses>;

struct EvalResult {
  double accuracy = 0.0;
  Confusion confusion{};  // [true][predicted]
  std::size_t count = 0;
};

// Argmax; a tie that involves PRESERVE resolves to PRESERVE, other ties to
// the lower class index.
inline corpus::Label predict(std::span<const double> probs) {
  const double best = std::max({probs[0], probs[1], probs[2]});
  if (probs[static_cast<std::size_t>(corpus::Label::preserve)] == best) return corpus::Label::preserve;
  return probs[0] == best ? corpus::Label::down : corpus::Label::up;
}

inline EvalResult evaluate(const model::HanParams& params, std::span<const corpus::Sample> data) {
  if (data.empty()) throw InputError("evaluate: empty dataset");
  EvalResult r;
  std::size_t correct = 0;
  for (const corpus::Sample& s : data) {
    const model::ForwardTrace t = model::forward(params, s);
    const corpus::Label pred = predict(t.probs);
    ++r.confusion[static_cast<std::size_t>(s.label)][static_cast<std::size_t>(pred)];
    correct += pred == s.label ? 1 : 0;
  }
  r.count = data.size();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return r;
}

}  // namespace newstrend::train
