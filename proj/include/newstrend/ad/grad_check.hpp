#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "newstrend/ad/graph.hpp"

namespace newstrend::ad {

// Builds a scalar loss from the given parameter leaves.
using GraphBuilder = std::function<NodeId(Graph&, std::span<const NodeId>)>;

namespace detail {

inline double evaluate(const GraphBuilder& fn, std::span<const TensorValue> point) {
  Graph g;
  std::vector<NodeId> leaves;
  leaves.reserve(point.size());
  for (const TensorValue& t : point) leaves.push_back(g.parameter(t));
  return g.value(fn(g, leaves)).item();
}

}  // namespace detail

// Max over every leaf coordinate of
//   |analytic - central| / max(|analytic|, |central|, 1e-8).
inline double grad_check(const GraphBuilder& fn, std::span<const TensorValue> point, double eps) {
  if (!(eps > 0.0)) throw ConfigError("grad_check: eps must be positive");
  Graph g;
  std::vector<NodeId> leaves;
  leaves.reserve(point.size());
  for (const TensorValue& t : point) leaves.push_back(g.parameter(t));
  const GradientMap analytic = g.backward(fn(g, leaves));

  std::vector<TensorValue> probe(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t li = 0; li < probe.size(); ++li) {
    const TensorValue& ga = analytic.at(leaves[li]);
    for (std::size_t k = 0; k < probe[li].size(); ++k) {
      const double orig = probe[li][k];
      probe[li][k] = orig + eps;
      const double up = detail::evaluate(fn, probe);
      probe[li][k] = orig - eps;
      const double down = detail::evaluate(fn, probe);
      probe[li][k] = orig;
      const double central = (up - down) / (2.0 * eps);
      const double denom = std::max({std::abs(ga[k]), std::abs(central), 1e-8});
      worst = std::max(worst, std::abs(ga[k] - central) / denom);
    }
  }
  return worst;
}

}  // namespace newstrend::ad
