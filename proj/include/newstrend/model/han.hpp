#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "newstrend/ad/graph.hpp"
#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"
#include "newstrend/model/params.hpp"

namespace newstrend::model {

using ad::Graph;
using ad::NodeId;
using ad::TensorValue;

// Graph leaves for every tensor of a HanParams, in tensor order.
class BoundParams {
 public:
  BoundParams(Graph& g, const HanParams& p, bool trainable) : params_(&p) {
    nodes_.reserve(p.size());
    for (const auto& t : p) nodes_.push_back(trainable ? g.parameter(t.value) : g.constant(t.value));
  }
  // Leaves created elsewhere, one per tensor of `p` (values of `p` unused).
  BoundParams(const HanParams& p, std::span<const NodeId> nodes) : params_(&p), nodes_(nodes.begin(), nodes.end()) {
    if (nodes_.size() != p.size()) throw ShapeError("expected one node per parameter tensor");
  }

  const HanParams& params() const { return *params_; }
  const ParamLayout& layout() const { return params_->layout(); }
  const HyperParams& hyper() const { return params_->hyper(); }
  NodeId operator[](std::size_t slot) const { return nodes_.at(slot); }
  std::span<const NodeId> nodes() const { return nodes_; }

 private:
  const HanParams* params_;
  std::vector<NodeId> nodes_;
};

struct NewsAttentionOut {
  NodeId d;                      // [1, dim]
  std::optional<NodeId> alpha;   // [1, L]; absent for an empty day or when ablated
  std::size_t count = 0;
};

// u_i = sigmoid(n_i W_n + b_n), alpha = softmax(u), d = sum alpha_i n_i.
// Without news attention the day vector is the plain mean.
inline NewsAttentionOut news_attention(Graph& g, const BoundParams& p, const corpus::DailyCorpus& day) {
  const std::size_t dim = p.hyper().dim;
  NewsAttentionOut out;
  out.count = day.size();
  if (day.empty()) {
    out.d = g.constant(TensorValue(ad::Shape{1, dim}));
    return out;
  }
  if (day.dim() != dim) {
    throw ShapeError("news vectors of dim " + std::to_string(day.dim()) + " but model dim " + std::to_string(dim));
  }
  std::vector<NodeId> news;
  news.reserve(day.size());
  for (std::size_t i = 0; i < day.size(); ++i) news.push_back(g.constant(TensorValue::row(day.news(i))));
  if (!p.hyper().arch.news_attention) {
    out.d = g.mean(news);
    return out;
  }
  const LinearSlots& s = p.layout().news;
  std::vector<NodeId> scores;
  scores.reserve(news.size());
  for (NodeId n : news) scores.push_back(g.sigmoid(g.add(g.matmul(n, p[s.w]), p[s.b])));
  const NodeId alpha = g.softmax(g.concat(scores, 1));
  out.d = g.weighted_sum(alpha, news);
  out.alpha = alpha;
  return out;
}

// r = s(d W_r + h U_r + b_r), z = s(d W_z + h U_z + b_z),
// h~ = tanh(d W_h + r * (h U_h) + b_h), h' = (1 - z) h + z h~.
inline NodeId gru_cell(Graph& g, const BoundParams& p, const GruSlots& s, NodeId d, NodeId h) {
  const NodeId r = g.sigmoid(g.add(g.add(g.matmul(d, p[s.w_r]), g.matmul(h, p[s.u_r])), p[s.b_r]));
  const NodeId z = g.sigmoid(g.add(g.add(g.matmul(d, p[s.w_z]), g.matmul(h, p[s.u_z])), p[s.b_z]));
  const NodeId cand =
      g.tanh(g.add(g.add(g.matmul(d, p[s.w_h]), g.hadamard(r, g.matmul(h, p[s.u_h]))), p[s.b_h]));
  return g.add(h, g.hadamard(z, g.add(cand, g.scale(h, -1.0))));
}

// One GRU pass over `days`, left to right, from a zero state.
inline std::vector<NodeId> gru_scan(Graph& g, const BoundParams& p, const GruSlots& s, std::span<const NodeId> days) {
  std::vector<NodeId> states;
  states.reserve(days.size());
  NodeId h = g.constant(TensorValue(ad::Shape{1, p.hyper().hidden}));
  for (NodeId d : days) {
    h = gru_cell(g, p, s, d, h);
    states.push_back(h);
  }
  return states;
}

// h_i = [fwd_i, bwd_i], where bwd scans right to left.
inline std::vector<NodeId> bi_gru(Graph& g, const BoundParams& p, std::span<const NodeId> days) {
  std::vector<NodeId> fwd = gru_scan(g, p, p.layout().fwd, days);
  if (!p.hyper().arch.bidirectional) return fwd;
  std::vector<NodeId> rev(days.rbegin(), days.rend());
  std::vector<NodeId> bwd = gru_scan(g, p, p.layout().bwd, rev);
  std::vector<NodeId> out;
  out.reserve(days.size());
  for (std::size_t i = 0; i < days.size(); ++i) {
    out.push_back(g.concat(std::array{fwd[i], bwd[days.size() - 1 - i]}, 1));
  }
  return out;
}

struct TemporalOut {
  NodeId v;                     // [1, encoded]
  std::optional<NodeId> beta;   // [1, N]; absent when ablated
};

// o_i = sigmoid(h_i W_o + b_o), beta = softmax(theta_i . o_i), V = sum beta_i h_i.
inline TemporalOut temporal_attention(Graph& g, const BoundParams& p, std::span<const NodeId> states) {
  TemporalOut out;
  if (!p.hyper().arch.temporal_attention) {
    out.v = g.mean(states);
    return out;
  }
  const ParamLayout& l = p.layout();
  if (states.size() != l.theta.size()) {
    throw ShapeError("temporal attention over " + std::to_string(states.size()) + " states but " +
                     std::to_string(l.theta.size()) + " date parameters");
  }
  std::vector<NodeId> scores;
  scores.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const NodeId o = g.sigmoid(g.add(g.matmul(states[i], p[l.temporal.w]), p[l.temporal.b]));
    scores.push_back(g.matmul(o, p[l.theta[i]]));
  }
  const NodeId beta = g.softmax(g.concat(scores, 1));
  out.v = g.weighted_sum(beta, states);
  out.beta = beta;
  return out;
}

// tanh MLP, linear output layer, softmax over (DOWN, PRESERVE, UP).
inline NodeId classify(Graph& g, const BoundParams& p, NodeId v) {
  const auto& layers = p.layout().mlp;
  NodeId x = v;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    x = g.tanh(g.add(g.matmul(x, p[layers[l].w]), p[layers[l].b]));
  }
  return g.softmax(g.add(g.matmul(x, p[layers.back().w]), p[layers.back().b]));
}

struct HanNodes {
  std::vector<NewsAttentionOut> days;
  std::vector<NodeId> states;
  TemporalOut temporal;
  NodeId probs;
};

inline HanNodes build_forward(Graph& g, const BoundParams& p, const corpus::Sample& sample) {
  const std::size_t n = p.hyper().window;
  if (sample.window.size() != n) {
    throw ShapeError("sample window of " + std::to_string(sample.window.size()) + " days but model window " +
                     std::to_string(n));
  }
  HanNodes out;
  std::vector<NodeId> d;
  d.reserve(n);
  for (const corpus::CorpusRef& day : sample.window) {
    out.days.push_back(news_attention(g, p, *day));
    d.push_back(out.days.back().d);
  }
  out.states = bi_gru(g, p, d);
  out.temporal = temporal_attention(g, p, out.states);
  out.probs = classify(g, p, out.temporal.v);
  return out;
}

struct ForwardTrace {
  std::vector<std::vector<double>> alpha;  // per day, oldest first
  std::vector<double> beta;                // length N
  std::array<double, corpus::kNumClasses> probs{};
  double score = 0.0;
};

inline double trend_score(std::span<const double> probs) {
  return probs[static_cast<std::size_t>(corpus::Label::up)] - probs[static_cast<std::size_t>(corpus::Label::down)];
}

inline ForwardTrace trace_of(const Graph& g, const HanNodes& nodes) {
  ForwardTrace t;
  const std::size_t n = nodes.days.size();
  t.alpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& day = nodes.days[i];
    if (day.alpha) {
      const auto a = g.value(*day.alpha).data();
      t.alpha[i].assign(a.begin(), a.end());
    } else if (day.count > 0) {
      t.alpha[i].assign(day.count, 1.0 / static_cast<double>(day.count));
    }
  }
  if (nodes.temporal.beta) {
    const auto b = g.value(*nodes.temporal.beta).data();
    t.beta.assign(b.begin(), b.end());
  } else {
    t.beta.assign(n, 1.0 / static_cast<double>(n));
  }
  const auto p = g.value(nodes.probs).data();
  std::copy(p.begin(), p.end(), t.probs.begin());
  t.score = trend_score(t.probs);
  return t;
}

inline ForwardTrace forward(const HanParams& params, const corpus::Sample& sample) {
  Graph g;
  const BoundParams p(g, params, false);
  const HanNodes nodes = build_forward(g, p, sample);
  return trace_of(g, nodes);
}

// Cross-entropy -log p_label.
inline double sample_loss(const HanParams& params, const corpus::Sample& sample) {
  const ForwardTrace t = forward(params, sample);
  return -std::log(t.probs[static_cast<std::size_t>(sample.label)]);
}

}  // namespace newstrend::model
