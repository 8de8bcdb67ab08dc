#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "newstrend/backtest/backtest.hpp"
#include "newstrend/random.hpp"

using namespace newstrend;
using namespace newstrend::backtest;

namespace {

std::vector<Date> dates(std::size_t n) {
  std::vector<Date> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Date(2021, 3, 1).plus_days(static_cast<std::int64_t>(i)));
  return out;
}

struct Scenario {
  std::vector<Date> dates;
  PriceSeries prices;
  std::vector<Scores> scores;
};

Scenario random_scenario(Rng& rng, std::size_t stocks, std::size_t days) {
  Scenario s;
  s.dates = dates(days);
  std::vector<double> p(stocks);
  for (double& x : p) x = rng.uniform(5.0, 50.0);
  for (std::size_t d = 0; d < days; ++d) {
    Prices row;
    for (std::size_t i = 0; i < stocks; ++i) {
      p[i] *= 1.0 + rng.uniform(-0.05, 0.05);
      row["S" + std::to_string(i)] = p[i];
    }
    s.prices.push_back(row);
    if (d + 1 < days) {
      Scores sc;
      for (std::size_t i = 0; i < stocks; ++i) sc["S" + std::to_string(i)] = rng.uniform(-1.0, 1.0);
      s.scores.push_back(sc);
    }
  }
  return s;
}

// Zero-cost equal weighting over the selected names, compounded day by day.
double brute_force_final(const Scenario& s, std::size_t k, double initial) {
  double w = initial;
  for (std::size_t d = 0; d + 1 < s.dates.size(); ++d) {
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [id, v] : s.scores[d]) ranked.emplace_back(-v, id);
    std::sort(ranked.begin(), ranked.end());
    const std::size_t n = std::min(k, ranked.size());
    double growth = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& id = ranked[i].second;
      growth += s.prices[d + 1].at(id) / s.prices[d].at(id);
    }
    w *= growth / static_cast<double>(n);
  }
  return w;
}

}  // namespace

TEST(Score, TrendScoreExamples) {
  EXPECT_NEAR(model::trend_score(std::vector<double>{0.2, 0.3, 0.5}), 0.3, 1e-15);
  EXPECT_EQ(model::trend_score(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}), 0.0);
}

TEST(SelectTopK, Examples) {
  EXPECT_EQ(select_top_k({{"A", 0.9}, {"B", 0.5}, {"C", 0.1}}, 2), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(select_top_k({{"B", 0.5}, {"A", 0.5}}, 1), (std::vector<std::string>{"A"}));
  EXPECT_EQ(select_top_k({{"A", 0.1}, {"B", 0.2}, {"C", 0.3}}, 10), (std::vector<std::string>{"C", "B", "A"}));
}

TEST(SelectTopK, InvariantUnderMonotoneTransform) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    Scores s, t;
    for (int i = 0; i < 30; ++i) {
      const double x = std::round(rng.uniform(-1, 1) * 20) / 20;  // induce ties
      s["S" + std::to_string(i)] = x;
      t["S" + std::to_string(i)] = std::exp(3 * x) + 2.0;
    }
    const std::size_t k = 1 + rng.below(30);
    EXPECT_EQ(select_top_k(s, k), select_top_k(t, k));
  }
}

TEST(Rebalance, FirstBuyWithoutCost) {
  PortfolioState s{1.0, {}};
  const std::vector<std::string> targets{"A"};
  const double cost = rebalance(s, targets, {{"A", 100.0}}, 0.0, Date(2021, 1, 4));
  EXPECT_EQ(cost, 0.0);
  EXPECT_DOUBLE_EQ(s.holdings.at("A"), 0.01);
  EXPECT_EQ(s.cash, 0.0);
}

TEST(Rebalance, FirstBuyWithCost) {
  PortfolioState s{1.0, {}};
  const std::vector<std::string> targets{"A"};
  std::vector<Trade> log;
  const double cost = rebalance(s, targets, {{"A", 100.0}}, 0.003, Date(2021, 1, 4), &log);
  EXPECT_NEAR(cost, 0.003, 1e-15);
  EXPECT_NEAR(s.holdings.at("A"), 0.00997, 1e-15);
  EXPECT_EQ(s.cash, 0.0);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].side, Side::buy);
  EXPECT_EQ(log[0].price, 100.0);
}

TEST(Rebalance, BalancedHoldingsTradeNothing) {
  PortfolioState s{0.0, {{"A", 2.0}, {"B", 4.0}}};
  const std::vector<std::string> targets{"B", "A"};
  std::vector<Trade> log;
  const double cost = rebalance(s, targets, {{"A", 10.0}, {"B", 5.0}}, 0.003, Date(2021, 1, 4), &log);
  EXPECT_EQ(cost, 0.0);
  EXPECT_TRUE(log.empty());
  EXPECT_EQ(s.holdings.at("A"), 2.0);
  EXPECT_EQ(s.holdings.at("B"), 4.0);
}

TEST(Rebalance, SellsDroppedNamesAndEqualizes) {
  PortfolioState s{0.0, {{"A", 1.0}, {"C", 3.0}}};
  const std::vector<std::string> targets{"A", "B"};
  const Prices p{{"A", 10.0}, {"B", 2.0}, {"C", 4.0}};
  rebalance(s, targets, p, 0.0, Date(2021, 1, 4));
  EXPECT_FALSE(s.holdings.contains("C"));
  EXPECT_NEAR(s.holdings.at("A") * 10.0, 11.0, 1e-12);
  EXPECT_NEAR(s.holdings.at("B") * 2.0, 11.0, 1e-12);
  EXPECT_NEAR(s.cash, 0.0, 1e-12);
}

TEST(Rebalance, MissingPriceCarriesPosition) {
  PortfolioState s{0.0, {{"A", 1.0}, {"C", 3.0}}};
  const std::vector<std::string> targets{"A"};
  std::vector<std::string> warnings;
  rebalance(s, targets, {{"A", 10.0}}, 0.003, Date(2021, 1, 4), nullptr, &warnings);
  EXPECT_EQ(s.holdings.at("C"), 3.0);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("C"), std::string::npos);
  EXPECT_THROW(rebalance(s, std::vector<std::string>{"Z"}, {{"A", 10.0}}, 0.0, Date(2021, 1, 4)), InputError);
}

TEST(Rebalance, LedgerConservation) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Scenario sc = random_scenario(rng, 12, 15);
    PortfolioState s{1.0, {}};
    Prices last;
    for (std::size_t d = 0; d + 1 < sc.dates.size(); ++d) {
      const double before = wealth(s, sc.prices[d], last);
      const auto targets = select_top_k(sc.scores[d], 1 + rng.below(6));
      const double cost = rebalance(s, targets, sc.prices[d], rng.uniform(0.0, 0.01), sc.dates[d]);
      EXPECT_NEAR(wealth(s, sc.prices[d], last), before - cost, 1e-9);
      EXPECT_GE(s.cash, -1e-12);
      for (const auto& [id, sh] : s.holdings) EXPECT_GE(sh, 0.0) << id;
    }
  }
}

TEST(RunBacktest, SingleStockWithoutCost) {
  BacktestConfig cfg;
  cfg.k = 1;
  cfg.cost_rate = 0.0;
  const auto ds = dates(2);
  const PriceSeries p{{{"A", 100.0}}, {{"A", 110.0}}};
  const std::vector<Scores> sc{{{"A", 0.5}}};
  const BacktestResult r = run_backtest(ds, p, sc, cfg);
  EXPECT_NEAR(r.total_return, 0.10, 1e-12);
  EXPECT_EQ(r.curve.front(), 1.0);
  EXPECT_EQ(r.dates.size(), 2u);
}

TEST(RunBacktest, SingleStockWithCostMatchesHandLedger) {
  BacktestConfig cfg;
  cfg.k = 1;
  const auto ds = dates(2);
  const PriceSeries p{{{"A", 100.0}}, {{"A", 110.0}}};
  const std::vector<Scores> sc{{{"A", 0.5}}};
  const BacktestResult r = run_backtest(ds, p, sc, cfg);
  EXPECT_NEAR(r.total_return, 1.1 * 0.997 * 0.997 - 1.0, 1e-12);
  EXPECT_NEAR(r.total_return, 0.09341, 1e-5);
  ASSERT_EQ(r.trades.size(), 2u);
  EXPECT_EQ(r.trades[1].side, Side::sell);
  EXPECT_NEAR(r.total_cost, 0.003 + 0.003 * 0.997 * 1.1, 1e-15);
}

TEST(RunBacktest, ConstantPricesConserveCapital) {
  Rng rng(3);
  BacktestConfig cfg;
  cfg.cost_rate = 0.0;
  cfg.k = 3;
  cfg.initial_capital = 250.0;
  Scenario sc = random_scenario(rng, 8, 20);
  for (auto& row : sc.prices) row = sc.prices.front();
  const BacktestResult r = run_backtest(sc.dates, sc.prices, sc.scores, cfg);
  EXPECT_NEAR(r.curve.back(), 250.0, 1e-9);
}

TEST(RunBacktest, PermanentSingleSelectionTracksPrice) {
  Rng rng(4);
  BacktestConfig cfg;
  cfg.cost_rate = 0.0;
  cfg.k = 1;
  Scenario sc = random_scenario(rng, 4, 30);
  for (auto& s : sc.scores) s["S2"] = 5.0;
  const BacktestResult r = run_backtest(sc.dates, sc.prices, sc.scores, cfg);
  EXPECT_DOUBLE_EQ(r.curve.back() / r.curve.front(), sc.prices.back().at("S2") / sc.prices.front().at("S2"));
}

TEST(RunBacktest, ZeroCostMatchesBruteForceAccounting) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Scenario sc = random_scenario(rng, 10, 25);
    BacktestConfig cfg;
    cfg.cost_rate = 0.0;
    cfg.k = 1 + rng.below(10);
    const BacktestResult r = run_backtest(sc.dates, sc.prices, sc.scores, cfg);
    EXPECT_NEAR(r.curve.back(), brute_force_final(sc, cfg.k, 1.0), 1e-9);
  }
}

TEST(RunBacktest, HigherCostNeverHelps) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Scenario sc = random_scenario(rng, 10, 20);
    BacktestConfig cfg;
    cfg.k = 1 + rng.below(5);
    double prev = std::numeric_limits<double>::infinity();
    for (double c : {0.0, 0.001, 0.003, 0.01, 0.05}) {
      cfg.cost_rate = c;
      const double v = run_backtest(sc.dates, sc.prices, sc.scores, cfg).curve.back();
      EXPECT_LE(v, prev + 1e-12);
      prev = v;
    }
  }
}

TEST(RunBacktest, FullTurnoverCostsAtLeastDeltaTrading) {
  Rng rng(7);
  const Scenario sc = random_scenario(rng, 10, 30);
  BacktestConfig cfg;
  cfg.k = 4;
  const BacktestResult delta = run_backtest(sc.dates, sc.prices, sc.scores, cfg);
  cfg.full_turnover = true;
  const BacktestResult full = run_backtest(sc.dates, sc.prices, sc.scores, cfg);
  EXPECT_GT(full.total_cost, delta.total_cost);
}

TEST(RunBacktest, RejectsBadInputs) {
  BacktestConfig cfg;
  const auto ds = dates(1);
  EXPECT_THROW(run_backtest(ds, PriceSeries{{{"A", 1.0}}}, std::vector<Scores>{}, cfg), ConfigError);
  cfg.k = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.k = 1;
  cfg.cost_rate = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(MarketBaseline, Examples) {
  const PriceSeries same{{{"A", 10.0}, {"B", 20.0}}, {{"A", 11.0}, {"B", 22.0}}};
  EXPECT_NEAR(market_baseline(same, 1.0).back(), 1.1, 1e-15);
  const PriceSeries opposite{{{"A", 10.0}, {"B", 20.0}}, {{"A", 11.0}, {"B", 18.0}}};
  EXPECT_NEAR(market_baseline(opposite, 1.0).back(), 1.0, 1e-15);
  const PriceSeries single{{{"A", 4.0}}, {{"A", 5.0}}, {{"A", 3.0}}};
  const auto curve = market_baseline(single, 2.0);
  EXPECT_NEAR(curve[1], 2.5, 1e-15);
  EXPECT_NEAR(curve[2], 1.5, 1e-15);
  const PriceSeries gap{{{"A", 10.0}, {"B", 10.0}}, {{"A", 12.0}}, {{"A", 12.0}, {"B", 8.0}}};
  const auto g = market_baseline(gap, 1.0);
  EXPECT_NEAR(g[1], 1.1, 1e-15);
  EXPECT_NEAR(g[2], 1.0, 1e-15);
}

TEST(AnnualizedReturn, Examples) {
  EXPECT_EQ(annualized_return(std::vector<double>(10, 3.0), 250), 0.0);
  std::vector<double> half(126, 1.0);
  half.back() = 1.1;
  EXPECT_NEAR(annualized_return(half, 250), 0.21, 1e-12);
  EXPECT_NEAR(annualized_return(std::vector<double>{1.0, 1.001}, 250), std::pow(1.001, 250) - 1, 1e-12);
  EXPECT_NEAR(annualized_return(std::vector<double>{1.0, 1.001}, 250), 0.284, 1e-3);
  EXPECT_THROW(annualized_return(std::vector<double>{1.0}, 250), ConfigError);
}

TEST(Output, CurveAndTradeFiles) {
  BacktestConfig cfg;
  cfg.k = 1;
  const auto ds = dates(3);
  const PriceSeries p{{{"A", 100.0}, {"B", 50.0}}, {{"A", 110.0}, {"B", 55.0}}, {{"A", 100.0}, {"B", 60.0}}};
  const std::vector<Scores> sc{{{"A", 0.5}, {"B", 0.1}}, {{"A", 0.1}, {"B", 0.5}}};
  const BacktestResult r = run_backtest(ds, p, sc, cfg);
  std::ostringstream curve, trades;
  write_curve(curve, r);
  write_trades(trades, r);
  const std::string c = curve.str();
  EXPECT_EQ(std::count(c.begin(), c.end(), '\n'), 4);
  EXPECT_TRUE(c.starts_with("date,portfolio_value,baseline_value\n2021-03-01,1,1\n"));
  EXPECT_TRUE(trades.str().starts_with("date,stock_id,side,shares,price,cost\n2021-03-01,A,BUY,"));
}
