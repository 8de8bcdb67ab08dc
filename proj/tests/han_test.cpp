#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "newstrend/ad/grad_check.hpp"
#include "newstrend/model/attention_export.hpp"
#include "newstrend/model/checkpoint.hpp"
#include "newstrend/model/han.hpp"
#include "newstrend/random.hpp"

using namespace newstrend;
using namespace newstrend::model;
using corpus::CorpusRef;
using corpus::DailyCorpus;
using corpus::Sample;

namespace {

using Vec = std::vector<double>;

// Straight-line reference arithmetic, independent of the graph.
double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec ref_softmax(const Vec& x) {
  const double m = *std::max_element(x.begin(), x.end());
  Vec y(x.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += y[i] = std::exp(x[i] - m);
  for (double& v : y) v /= s;
  return y;
}

Vec ref_vecmat(const Vec& x, const ad::TensorValue& w) {
  Vec y(w.shape()[1], 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += x[i] * w(i, j);
  }
  return y;
}

Vec ref_plus(Vec a, const ad::TensorValue& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

Vec ref_gru(const HanParams& p, const GruSlots& s, const Vec& d, const Vec& h) {
  const Vec ar = ref_plus(ref_vecmat(d, p.value(s.w_r)), p.value(s.b_r));
  const Vec br = ref_vecmat(h, p.value(s.u_r));
  const Vec az = ref_plus(ref_vecmat(d, p.value(s.w_z)), p.value(s.b_z));
  const Vec bz = ref_vecmat(h, p.value(s.u_z));
  const Vec ah = ref_plus(ref_vecmat(d, p.value(s.w_h)), p.value(s.b_h));
  const Vec bh = ref_vecmat(h, p.value(s.u_h));
  Vec out(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double r = ref_sigmoid(ar[j] + br[j]);
    const double z = ref_sigmoid(az[j] + bz[j]);
    const double cand = std::tanh(ah[j] + r * bh[j]);
    out[j] = (1.0 - z) * h[j] + z * cand;
  }
  return out;
}

struct RefNews {
  Vec d;
  Vec alpha;
};

RefNews ref_news(const HanParams& p, const DailyCorpus& day) {
  const std::size_t dim = p.hyper().dim;
  RefNews out{Vec(dim, 0.0), {}};
  if (day.empty()) return out;
  Vec u;
  for (std::size_t i = 0; i < day.size(); ++i) {
    double s = p.value(p.layout().news.b)[0];
    for (std::size_t k = 0; k < dim; ++k) s += day.news(i)[k] * p.value(p.layout().news.w)[k];
    u.push_back(ref_sigmoid(s));
  }
  out.alpha = ref_softmax(u);
  for (std::size_t i = 0; i < day.size(); ++i) {
    for (std::size_t k = 0; k < dim; ++k) out.d[k] += out.alpha[i] * day.news(i)[k];
  }
  return out;
}

std::vector<Vec> ref_bigru(const HanParams& p, const std::vector<Vec>& days) {
  const std::size_t n = days.size(), hid = p.hyper().hidden;
  std::vector<Vec> fwd(n), bwd(n);
  Vec h(hid, 0.0);
  for (std::size_t i = 0; i < n; ++i) fwd[i] = h = ref_gru(p, p.layout().fwd, days[i], h);
  h.assign(hid, 0.0);
  for (std::size_t i = n; i-- > 0;) bwd[i] = h = ref_gru(p, p.layout().bwd, days[i], h);
  std::vector<Vec> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = fwd[i];
    out[i].insert(out[i].end(), bwd[i].begin(), bwd[i].end());
  }
  return out;
}

struct RefTemporal {
  Vec v;
  Vec beta;
};

RefTemporal ref_temporal(const HanParams& p, const std::vector<Vec>& states) {
  const ParamLayout& l = p.layout();
  Vec scores;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Vec o = ref_plus(ref_vecmat(states[i], p.value(l.temporal.w)), p.value(l.temporal.b));
    double s = 0.0;
    for (std::size_t k = 0; k < o.size(); ++k) s += ref_sigmoid(o[k]) * p.value(l.theta[i])[k];
    scores.push_back(s);
  }
  RefTemporal out{Vec(states[0].size(), 0.0), ref_softmax(scores)};
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] += out.beta[i] * states[i][k];
  }
  return out;
}

Vec ref_classify(const HanParams& p, Vec x) {
  const auto& layers = p.layout().mlp;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    x = ref_plus(ref_vecmat(x, p.value(layers[l].w)), p.value(layers[l].b));
    if (l + 1 < layers.size()) {
      for (double& v : x) v = std::tanh(v);
    }
  }
  return ref_softmax(x);
}

HyperParams small_hyper(std::size_t dim = 4, std::size_t hidden = 3, std::size_t window = 3) {
  HyperParams h;
  h.dim = dim;
  h.hidden = hidden;
  h.window = window;
  h.mlp_hidden = {5};
  return h;
}

// Every tensor, biases included, uniform in [-scale, scale].
HanParams random_params(const HyperParams& h, std::uint64_t seed, double scale = 0.8) {
  HanParams p(h);
  Rng rng(seed);
  for (auto& t : p) {
    for (double& x : t.value.data()) x = rng.uniform(-scale, scale);
  }
  return p;
}

CorpusRef random_day(std::size_t dim, std::size_t count, Rng& rng, corpus::Date date = corpus::Date(2020, 1, 1)) {
  auto day = std::make_shared<DailyCorpus>(date, dim);
  Vec v(dim);
  for (std::size_t i = 0; i < count; ++i) {
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    day->push(v);
  }
  return day;
}

Sample random_sample(std::size_t dim, std::size_t window, std::size_t per_day, Rng& rng) {
  Sample s;
  s.stock_id = "S000";
  s.target_date = corpus::Date(2020, 2, 1);
  for (std::size_t i = 0; i < window; ++i) {
    s.window.push_back(random_day(dim, per_day, rng, corpus::Date(2020, 1, 1).plus_days(static_cast<std::int64_t>(i))));
  }
  s.label = corpus::Label::up;
  return s;
}

Vec values(const ad::Graph& g, ad::NodeId id) {
  const auto d = g.value(id).data();
  return {d.begin(), d.end()};
}

void expect_close(const Vec& a, const Vec& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

}  // namespace

TEST(NewsAttention, SingleNewsPassesThrough) {
  const HanParams p = random_params(small_hyper(), 1);
  Rng rng(2);
  const CorpusRef day = random_day(4, 1, rng);
  ad::Graph g;
  const BoundParams b(g, p, false);
  const NewsAttentionOut out = news_attention(g, b, *day);
  EXPECT_EQ(values(g, out.d), Vec(day->news(0).begin(), day->news(0).end()));
  ASSERT_TRUE(out.alpha);
  EXPECT_EQ(values(g, *out.alpha), Vec{1.0});
}

TEST(NewsAttention, IdenticalNewsSplitEvenly) {
  const HanParams p = random_params(small_hyper(), 3);
  auto day = std::make_shared<DailyCorpus>(corpus::Date(2020, 1, 1), 4);
  const Vec n{0.1, -0.4, 0.9, 0.3};
  day->push(n);
  day->push(n);
  ad::Graph g;
  const BoundParams b(g, p, false);
  const NewsAttentionOut out = news_attention(g, b, *day);
  expect_close(values(g, *out.alpha), {0.5, 0.5}, 1e-15);
  expect_close(values(g, out.d), n, 1e-15);
}

TEST(NewsAttention, MatchesScalarReference) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const HanParams p = random_params(small_hyper(), 10 + static_cast<std::uint64_t>(trial), 2.0);
    const CorpusRef day = random_day(4, 3, rng);
    ad::Graph g;
    const BoundParams b(g, p, false);
    const NewsAttentionOut out = news_attention(g, b, *day);
    const RefNews ref = ref_news(p, *day);
    expect_close(values(g, *out.alpha), ref.alpha, 1e-12);
    expect_close(values(g, out.d), ref.d, 1e-12);
  }
}

TEST(NewsAttention, EmptyDayIsZeroAndAblationAverages) {
  HyperParams h = small_hyper();
  const HanParams p = random_params(h, 5);
  ad::Graph g;
  const BoundParams b(g, p, false);
  const NewsAttentionOut empty = news_attention(g, b, DailyCorpus(corpus::Date(2020, 1, 1), 4));
  EXPECT_EQ(values(g, empty.d), Vec(4, 0.0));
  EXPECT_FALSE(empty.alpha);

  h.arch.news_attention = false;
  const HanParams q = random_params(h, 5);
  Rng rng(6);
  const CorpusRef day = random_day(4, 3, rng);
  ad::Graph g2;
  const BoundParams b2(g2, q, false);
  const NewsAttentionOut mean = news_attention(g2, b2, *day);
  Vec expect(4, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 4; ++k) expect[k] += day->news(i)[k] / 3.0;
  }
  expect_close(values(g2, mean.d), expect, 1e-15);
}

TEST(NewsAttention, RejectsDimensionMismatch) {
  const HanParams p = random_params(small_hyper(), 7);
  Rng rng(8);
  const CorpusRef day = random_day(5, 2, rng);
  ad::Graph g;
  const BoundParams b(g, p, false);
  EXPECT_THROW(news_attention(g, b, *day), ShapeError);
}

TEST(Gru, ZeroWeightsHalveState) {
  const HanParams p(small_hyper());  // all zeros
  ad::Graph g;
  const BoundParams b(g, p, false);
  const auto d = g.constant(ad::TensorValue::row({0.3, -0.2, 0.8, 1.0}));
  const auto h = g.constant(ad::TensorValue::row({1.0, -2.0, 4.0}));
  EXPECT_EQ(values(g, gru_cell(g, b, p.layout().fwd, d, h)), (Vec{0.5, -1.0, 2.0}));
  const auto zero = g.constant(ad::TensorValue::row({0.0, 0.0, 0.0}));
  EXPECT_EQ(values(g, gru_cell(g, b, p.layout().fwd, d, zero)), Vec(3, 0.0));
}

TEST(Gru, MatchesScalarReference) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const HanParams p = random_params(small_hyper(3, 2, 3), 30 + static_cast<std::uint64_t>(trial), 1.5);
    Vec d(3), h(2);
    for (double& x : d) x = rng.uniform(-1, 1);
    for (double& x : h) x = rng.uniform(-1, 1);
    ad::Graph g;
    const BoundParams b(g, p, false);
    const auto out = gru_cell(g, b, p.layout().bwd, g.constant(ad::TensorValue::row(d)), g.constant(ad::TensorValue::row(h)));
    expect_close(values(g, out), ref_gru(p, p.layout().bwd, d, h), 1e-12);
  }
}

TEST(Gru, RejectsShapeMismatch) {
  const HanParams p = random_params(small_hyper(), 11);
  ad::Graph g;
  const BoundParams b(g, p, false);
  const auto d = g.constant(ad::TensorValue::row({0.3, -0.2, 0.8}));
  const auto h = g.constant(ad::TensorValue::row({1.0, -2.0, 4.0}));
  EXPECT_THROW(gru_cell(g, b, p.layout().fwd, d, h), ShapeError);
}

TEST(BiGru, BackwardHalfIsReversedScan) {
  const HanParams p = random_params(small_hyper(), 12);
  Rng rng(13);
  ad::Graph g;
  const BoundParams b(g, p, false);
  std::vector<ad::NodeId> days;
  for (int i = 0; i < 3; ++i) {
    Vec v(4);
    for (double& x : v) x = rng.uniform(-1, 1);
    days.push_back(g.constant(ad::TensorValue::row(v)));
  }
  const auto states = bi_gru(g, b, days);
  std::vector<ad::NodeId> rev(days.rbegin(), days.rend());
  const auto scan = gru_scan(g, b, p.layout().bwd, rev);
  for (std::size_t i = 0; i < 3; ++i) {
    const Vec h = values(g, states[i]);
    EXPECT_EQ(Vec(h.begin() + 3, h.end()), values(g, scan[2 - i]));
  }
}

TEST(BiGru, SingleStepWithCopiedParamsHasEqualHalves) {
  HanParams p = random_params(small_hyper(4, 3, 1), 14);
  const ParamLayout& l = p.layout();
  const std::array<std::pair<std::size_t, std::size_t>, 9> pairs{{{l.fwd.w_r, l.bwd.w_r}, {l.fwd.u_r, l.bwd.u_r},
                                                                  {l.fwd.b_r, l.bwd.b_r}, {l.fwd.w_z, l.bwd.w_z},
                                                                  {l.fwd.u_z, l.bwd.u_z}, {l.fwd.b_z, l.bwd.b_z},
                                                                  {l.fwd.w_h, l.bwd.w_h}, {l.fwd.u_h, l.bwd.u_h},
                                                                  {l.fwd.b_h, l.bwd.b_h}}};
  for (auto [f, bw] : pairs) p.value(bw) = p.value(f);
  ad::Graph g;
  const BoundParams b(g, p, false);
  const auto d = g.constant(ad::TensorValue::row({0.5, -0.5, 0.25, 0.1}));
  const auto states = bi_gru(g, b, std::array{d});
  const Vec h = values(g, states[0]);
  ASSERT_EQ(h.size(), 6u);
  EXPECT_EQ(Vec(h.begin(), h.begin() + 3), Vec(h.begin() + 3, h.end()));
}

TEST(BiGru, MatchesScalarReference) {
  Rng rng(15);
  const HanParams p = random_params(small_hyper(4, 2, 3), 16, 1.2);
  std::vector<Vec> days(3, Vec(4));
  ad::Graph g;
  const BoundParams b(g, p, false);
  std::vector<ad::NodeId> nodes;
  for (auto& d : days) {
    for (double& x : d) x = rng.uniform(-1, 1);
    nodes.push_back(g.constant(ad::TensorValue::row(d)));
  }
  const auto states = bi_gru(g, b, nodes);
  const auto ref = ref_bigru(p, days);
  for (std::size_t i = 0; i < 3; ++i) expect_close(values(g, states[i]), ref[i], 1e-12);
}

TEST(BiGru, UnidirectionalKeepsForwardOnly) {
  HyperParams h = small_hyper();
  h.arch.bidirectional = false;
  const HanParams p = random_params(h, 17);
  ad::Graph g;
  const BoundParams b(g, p, false);
  const auto d = g.constant(ad::TensorValue::row({0.5, -0.5, 0.25, 0.1}));
  const auto states = bi_gru(g, b, std::array{d, d});
  EXPECT_EQ(g.value(states[1]).shape(), (ad::Shape{1, 3}));
}

TEST(TemporalAttention, SymmetricInputsGiveUniformWeights) {
  HanParams p = random_params(small_hyper(), 18);
  for (std::size_t i = 1; i < 3; ++i) p.value(p.layout().theta[i]) = p.value(p.layout().theta[0]);
  ad::Graph g;
  const BoundParams b(g, p, false);
  const Vec hv{0.1, 0.2, -0.3, 0.4, 0.5, -0.6};
  const auto h = g.constant(ad::TensorValue::row(hv));
  const TemporalOut out = temporal_attention(g, b, std::array{h, h, h});
  expect_close(values(g, *out.beta), Vec(3, 1.0 / 3.0), 1e-15);
  expect_close(values(g, out.v), hv, 1e-15);
}

TEST(TemporalAttention, SingleDay) {
  const HanParams p = random_params(small_hyper(4, 3, 1), 19);
  ad::Graph g;
  const BoundParams b(g, p, false);
  const Vec hv{0.1, 0.2, -0.3, 0.4, 0.5, -0.6};
  const TemporalOut out = temporal_attention(g, b, std::array{g.constant(ad::TensorValue::row(hv))});
  EXPECT_EQ(values(g, *out.beta), Vec{1.0});
  EXPECT_EQ(values(g, out.v), hv);
}

TEST(TemporalAttention, MatchesScalarReference) {
  Rng rng(20);
  for (int trial = 0; trial < 20; ++trial) {
    const HanParams p = random_params(small_hyper(), 40 + static_cast<std::uint64_t>(trial), 2.0);
    std::vector<Vec> states(3, Vec(6));
    ad::Graph g;
    const BoundParams b(g, p, false);
    std::vector<ad::NodeId> nodes;
    for (auto& s : states) {
      for (double& x : s) x = rng.uniform(-1, 1);
      nodes.push_back(g.constant(ad::TensorValue::row(s)));
    }
    const TemporalOut out = temporal_attention(g, b, nodes);
    const RefTemporal ref = ref_temporal(p, states);
    expect_close(values(g, *out.beta), ref.beta, 1e-12);
    expect_close(values(g, out.v), ref.v, 1e-12);
  }
}

TEST(TemporalAttention, RejectsWrongLength) {
  const HanParams p = random_params(small_hyper(), 21);
  ad::Graph g;
  const BoundParams b(g, p, false);
  const auto h = g.constant(ad::TensorValue::row({0.1, 0.2, -0.3, 0.4, 0.5, -0.6}));
  EXPECT_THROW(temporal_attention(g, b, std::array{h, h}), ShapeError);
}

TEST(Classify, ZeroWeightsUniform) {
  const HanParams p(small_hyper());
  ad::Graph g;
  const BoundParams b(g, p, false);
  const auto probs = classify(g, b, g.constant(ad::TensorValue::row({1, 2, 3, 4, 5, 6})));
  expect_close(values(g, probs), Vec(3, 1.0 / 3.0), 1e-15);
}

TEST(Classify, DistributionAndShiftInvariance) {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    HanParams p = random_params(small_hyper(), 60 + static_cast<std::uint64_t>(trial), 3.0);
    Vec v(6);
    for (double& x : v) x = rng.uniform(-2, 2);
    ad::Graph g;
    const BoundParams b(g, p, false);
    const Vec probs = values(g, classify(g, b, g.constant(ad::TensorValue::row(v))));
    EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-12);
    expect_close(probs, ref_classify(p, v), 1e-12);

    for (double& x : p.value(p.layout().mlp.back().b).data()) x += 7.5;
    ad::Graph g2;
    const BoundParams b2(g2, p, false);
    const Vec shifted = values(g2, classify(g2, b2, g2.constant(ad::TensorValue::row(v))));
    EXPECT_EQ(std::max_element(probs.begin(), probs.end()) - probs.begin(),
              std::max_element(shifted.begin(), shifted.end()) - shifted.begin());
    expect_close(shifted, probs, 1e-12);
  }
}

TEST(Forward, ComposesReferenceComponents) {
  Rng rng(23);
  const HanParams p = random_params(small_hyper(), 24, 1.5);
  const Sample s = random_sample(4, 3, 2, rng);
  const ForwardTrace t = forward(p, s);
  std::vector<Vec> days;
  for (std::size_t i = 0; i < 3; ++i) {
    const RefNews n = ref_news(p, *s.window[i]);
    expect_close(t.alpha[i], n.alpha, 1e-12);
    days.push_back(n.d);
  }
  const RefTemporal temporal = ref_temporal(p, ref_bigru(p, days));
  expect_close(t.beta, temporal.beta, 1e-12);
  const Vec probs = ref_classify(p, temporal.v);
  expect_close(Vec(t.probs.begin(), t.probs.end()), probs, 1e-12);
  EXPECT_NEAR(t.score, probs[2] - probs[0], 1e-12);
  EXPECT_NEAR(sample_loss(p, s), -std::log(probs[2]), 1e-12);
}

TEST(Forward, AllEmptyWindowGivesDistribution) {
  const HanParams p = random_params(small_hyper(), 25);
  Rng rng(26);
  const Sample s = random_sample(4, 3, 0, rng);
  const ForwardTrace t = forward(p, s);
  EXPECT_NEAR(t.probs[0] + t.probs[1] + t.probs[2], 1.0, 1e-12);
  for (const auto& a : t.alpha) EXPECT_TRUE(a.empty());
  for (double x : t.probs) EXPECT_GT(x, 0.0);
}

TEST(Forward, DeterministicAndNormalized) {
  const HanParams p = init_params(HyperParams{}, 27);
  Rng rng(28);
  Sample s = random_sample(32, 10, 4, rng);
  s.window[3] = std::make_shared<DailyCorpus>(corpus::Date(2020, 1, 4), 32);
  const ForwardTrace a = forward(p, s);
  const ForwardTrace b = forward(p, s);
  EXPECT_EQ(a.probs, b.probs);
  EXPECT_EQ(a.beta, b.beta);
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_NEAR(std::accumulate(a.beta.begin(), a.beta.end(), 0.0), 1.0, 1e-9);
  for (const auto& row : a.alpha) {
    if (row.empty()) continue;
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
    for (double x : row) EXPECT_GE(x, 0.0);
  }
  EXPECT_TRUE(a.alpha[3].empty());
  EXPECT_GE(a.score, -1.0);
  EXPECT_LE(a.score, 1.0);
}

TEST(Forward, PermutingNewsPermutesAlpha) {
  const HanParams p = random_params(small_hyper(), 29, 1.5);
  Rng rng(30);
  Sample s = random_sample(4, 3, 3, rng);
  const ForwardTrace a = forward(p, s);
  const std::array<std::size_t, 3> perm{2, 0, 1};
  auto shuffled = std::make_shared<DailyCorpus>(s.window[1]->date(), 4);
  for (std::size_t k : perm) shuffled->push(s.window[1]->news(k));
  s.window[1] = shuffled;
  const ForwardTrace b = forward(p, s);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(b.alpha[1][i], a.alpha[1][perm[i]], 1e-15);
  expect_close(Vec(b.probs.begin(), b.probs.end()), Vec(a.probs.begin(), a.probs.end()), 1e-12);
  expect_close(b.beta, a.beta, 1e-12);
}

TEST(Forward, RejectsWrongWindow) {
  const HanParams p = random_params(small_hyper(), 31);
  Rng rng(32);
  EXPECT_THROW(forward(p, random_sample(4, 2, 1, rng)), ShapeError);
}

TEST(Forward, EndToEndGradientCheck) {
  for (const Architecture arch : {Architecture{}, Architecture{false, false, true}, Architecture{true, true, false}}) {
    HyperParams h = small_hyper(4, 3, 3);
    h.arch = arch;
    const HanParams p = random_params(h, 33, 1.0);
    Rng rng(34);
    const Sample s = random_sample(4, 3, 2, rng);
    std::vector<ad::TensorValue> point;
    for (const auto& t : p) point.push_back(t.value);
    const ad::GraphBuilder fn = [&](ad::Graph& g, std::span<const ad::NodeId> leaves) {
      const BoundParams b(p, leaves);
      return g.cross_entropy(build_forward(g, b, s).probs, static_cast<std::size_t>(s.label));
    };
    EXPECT_LT(ad::grad_check(fn, point, 1e-6), 1e-4) << arch.name();
  }
}

TEST(Params, CountsPerArchitecture) {
  // dim 4, hidden 3, N 3, mlp {5}: news 5, one GRU 72, temporal (enc 6) 30,
  // head 35 + 18 (enc 6) or 20 + 18 (enc 3).
  const std::array<std::pair<Architecture, std::size_t>, 5> cases{{
      {{true, true, true}, 5 + 144 + 30 + 53},
      {{true, false, true}, 5 + 144 + 53},
      {{false, true, true}, 144 + 30 + 53},
      {{false, false, true}, 144 + 53},
      {{false, false, false}, 72 + 38},
  }};
  for (const auto& [arch, count] : cases) {
    HyperParams h = small_hyper();
    h.arch = arch;
    EXPECT_EQ(HanParams(h).scalar_count(), count) << arch.name();
    EXPECT_EQ(expected_param_count(h), count) << arch.name();
  }
  HyperParams full;
  EXPECT_EQ(HanParams(full).scalar_count(), expected_param_count(full));
  EXPECT_EQ(Architecture{}.name(), "HAN");
  EXPECT_EQ((Architecture{false, false, true}.name()), "News-RNN");
  EXPECT_EQ((Architecture{false, false, false}.name()), "One-RNN");
  EXPECT_EQ((Architecture{true, false, true}.name()), "News-ATT");
  EXPECT_EQ((Architecture{false, true, true}.name()), "Temp-ATT");
}

TEST(Params, InitializationBoundsAndSeed) {
  const HyperParams h;
  const HanParams a = init_params(h, 1);
  const HanParams b = init_params(h, 1);
  const HanParams c = init_params(h, 2);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  for (const auto& t : a) {
    const double s = std::sqrt(6.0 / static_cast<double>(t.value.shape()[0] + t.value.shape()[1]));
    for (double x : t.value.data()) {
      if (is_bias(t.name)) {
        EXPECT_EQ(x, 0.0) << t.name;
      } else {
        EXPECT_LE(std::abs(x), s) << t.name;
      }
    }
  }
}

TEST(Checkpoint, RoundTripIsBitwise) {
  HyperParams h = small_hyper();
  h.mlp_hidden = {7, 2};
  h.arch.temporal_attention = false;
  const HanParams p = random_params(h, 35);
  std::stringstream buf;
  save_checkpoint(buf, p);
  const HanParams back = load_checkpoint(buf, "memory");
  EXPECT_TRUE(back == p);
  EXPECT_EQ(back.hyper(), h);
}

TEST(Checkpoint, RejectsBadMagicVersionAndTruncation) {
  const HanParams p = random_params(small_hyper(), 36);
  std::stringstream buf;
  save_checkpoint(buf, p);
  const std::string bytes = buf.str();

  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream s1(bad);
  EXPECT_THROW(load_checkpoint(s1, "m"), CheckpointError);

  std::string version = bytes;
  version[5] = 9;
  std::stringstream s2(version);
  EXPECT_THROW(load_checkpoint(s2, "m"), CheckpointError);

  std::stringstream s3(bytes.substr(0, bytes.size() - 4));
  EXPECT_THROW(load_checkpoint(s3, "m"), CheckpointError);

  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.bin"), CheckpointError);
}

TEST(AttentionExport, RowsAndSums) {
  const HanParams p = random_params(small_hyper(), 37);
  Rng rng(38);
  std::vector<Sample> samples{random_sample(4, 3, 2, rng), random_sample(4, 3, 1, rng)};
  samples[1].stock_id = "S001";
  samples[1].window[0] = std::make_shared<DailyCorpus>(corpus::Date(2020, 1, 1), 4);
  std::stringstream alpha, beta;
  export_attention(samples, p, alpha, beta);

  std::string line;
  std::getline(beta, line);
  EXPECT_EQ(line, "stock_id,target_date,day_offset,beta");
  std::map<std::string, std::pair<int, double>> per_sample;
  std::set<std::string> offsets;
  while (std::getline(beta, line)) {
    const auto f = corpus::split_csv_line(line);
    ASSERT_EQ(f.size(), 4u);
    auto& [rows, sum] = per_sample[f[0]];
    ++rows;
    sum += std::stod(f[3]);
    offsets.insert(f[2]);
  }
  ASSERT_EQ(per_sample.size(), 2u);
  for (const auto& [id, rs] : per_sample) {
    EXPECT_EQ(rs.first, 3) << id;
    EXPECT_NEAR(rs.second, 1.0, 1e-9) << id;
  }
  EXPECT_EQ(offsets, (std::set<std::string>{"-3", "-2", "-1"}));

  std::getline(alpha, line);
  EXPECT_EQ(line, "stock_id,target_date,day_offset,news_index,alpha");
  int alpha_rows = 0;
  while (std::getline(alpha, line)) ++alpha_rows;
  EXPECT_EQ(alpha_rows, 3 * 2 + 2 * 1);
}
