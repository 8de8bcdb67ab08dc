#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "newstrend/corpus/io.hpp"
#include "newstrend/corpus/samples.hpp"
#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"
#include "newstrend/model/han.hpp"

namespace newstrend::backtest {

using corpus::Date;
using Scores = std::map<std::string, double>;
using Prices = std::map<std::string, double>;

struct BacktestConfig {
  std::size_t k = 20;
  double cost_rate = 0.003;
  double initial_capital = 1.0;
  std::size_t trading_days_per_year = 250;
  // Liquidate and re-buy every position daily instead of trading deltas.
  bool full_turnover = false;

  void validate() const {
    if (k < 1) throw ConfigError("backtest.k must be >= 1");
    if (!(cost_rate >= 0.0 && cost_rate < 1.0)) throw ConfigError("backtest.cost_rate must be in [0, 1)");
    if (!(initial_capital > 0.0)) throw ConfigError("backtest.initial_capital must be > 0");
    if (trading_days_per_year < 1) throw ConfigError("backtest.trading_days_per_year must be >= 1");
  }
};

struct PortfolioState {
  double cash = 0.0;
  std::map<std::string, double> holdings;  // shares
};

enum class Side { buy, sell };

struct Trade {
  Date date;
  std::string stock_id;
  Side side = Side::buy;
  double shares = 0.0;
  double price = 0.0;
  double cost = 0.0;
};

struct BacktestResult {
  std::vector<Date> dates;
  std::vector<double> curve;     // wealth at each open before trading; last entry after liquidation
  std::vector<double> baseline;
  double total_return = 0.0;
  double annualized_return = 0.0;
  double baseline_annualized_return = 0.0;
  double total_cost = 0.0;
  std::vector<Trade> trades;
  std::vector<std::string> warnings;
};

// probs[UP] - probs[DOWN] per stock.
inline Scores score_stocks(const model::HanParams& params, std::span<const corpus::Sample* const> samples) {
  Scores out;
  for (const corpus::Sample* s : samples) out[s->stock_id] = model::forward(params, *s).score;
  return out;
}

// Highest scores first; equal scores in lexicographic stock order.
inline std::vector<std::string> select_top_k(const Scores& scores, std::size_t k) {
  std::vector<std::pair<std::string, double>> v(scores.begin(), scores.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, v.size()); ++i) out.push_back(v[i].first);
  return out;
}

// Marked value; positions without a price today use `last`.
inline double wealth(const PortfolioState& s, const Prices& today, const Prices& last) {
  double w = s.cash;
  for (const auto& [id, sh] : s.holdings) {
    auto it = today.find(id);
    if (it == today.end()) it = last.find(id);
    if (it == last.end()) throw InputError("no price ever observed for held stock " + id);
    w += sh * it->second;
  }
  return w;
}

class Ledger {
 public:
  Ledger(PortfolioState& s, Date date, double cost_rate, std::vector<Trade>* log)
      : s_(s), date_(date), c_(cost_rate), log_(log) {}

  double cost() const { return cost_; }

  void sell(const std::string& id, double shares, double price) {
    if (shares <= 0.0) return;
    const double notional = shares * price;
    const double fee = c_ * notional;
    s_.cash += notional - fee;
    double& held = s_.holdings[id];
    held -= shares;
    if (held <= 0.0) s_.holdings.erase(id);
    record(id, Side::sell, shares, price, fee);
  }

  // Spends `amount` of cash; the fee comes out of the amount invested.
  void buy(const std::string& id, double amount, double price) {
    if (amount <= 0.0) return;
    const double fee = c_ * amount;
    const double shares = (amount - fee) / price;
    s_.cash -= amount;
    s_.holdings[id] += shares;
    record(id, Side::buy, shares, price, fee);
  }

 private:
  PortfolioState& s_;
  Date date_;
  double c_;
  std::vector<Trade>* log_;
  double cost_ = 0.0;

  void record(const std::string& id, Side side, double shares, double price, double fee) {
    cost_ += fee;
    if (log_) log_->push_back({date_, id, side, shares, price, fee});
  }
};

inline constexpr double kTradeTolerance = 1e-12;

// Sells non-targets, then trades each target toward wealth / |targets|.
// Held stocks without a price today are carried untouched. Returns the cost.
inline double rebalance(PortfolioState& s, std::span<const std::string> targets, const Prices& prices,
                        double cost_rate, Date date, std::vector<Trade>* log = nullptr,
                        std::vector<std::string>* warnings = nullptr, bool full_turnover = false) {
  if (targets.empty()) return 0.0;
  for (const std::string& t : targets) {
    if (!prices.contains(t)) throw InputError("target " + t + " has no open price on " + date.str());
  }
  Ledger ledger(s, date, cost_rate, log);
  const std::map<std::string, double> held = s.holdings;
  for (const auto& [id, sh] : held) {
    const bool target = std::find(targets.begin(), targets.end(), id) != targets.end();
    if (target && !full_turnover) continue;
    auto p = prices.find(id);
    if (p == prices.end()) {
      if (warnings) warnings->push_back(date.str() + ": no open for held " + id + ", position carried");
      continue;
    }
    ledger.sell(id, sh, p->second);
  }

  double investable = s.cash;
  for (const std::string& t : targets) {
    if (auto it = s.holdings.find(t); it != s.holdings.end()) investable += it->second * prices.at(t);
  }
  const double per = investable / static_cast<double>(targets.size());

  std::vector<std::pair<std::string, double>> deficits;
  double deficit_total = 0.0;
  for (const std::string& t : targets) {
    auto it = s.holdings.find(t);
    const double value = it == s.holdings.end() ? 0.0 : it->second * prices.at(t);
    const double diff = value - per;
    if (std::abs(diff) <= kTradeTolerance * per) continue;
    if (diff > 0.0) {
      ledger.sell(t, diff / prices.at(t), prices.at(t));
    } else {
      deficits.emplace_back(t, -diff);
      deficit_total += -diff;
    }
  }
  // Cash after overweight sales funds the deficits pro rata; the last buy
  // takes the remainder so no cash is left over.
  const double pool = s.cash;
  for (std::size_t i = 0; i < deficits.size(); ++i) {
    const auto& [t, need] = deficits[i];
    const double amount = i + 1 == deficits.size() ? s.cash : std::min(s.cash, pool * (need / deficit_total));
    ledger.buy(t, amount, prices.at(t));
  }
  return ledger.cost();
}

inline double annualized_return(std::span<const double> curve, std::size_t trading_days_per_year) {
  if (curve.size() < 2) throw ConfigError("annualized_return: curve needs at least 2 points");
  const double periods = static_cast<double>(curve.size() - 1);
  return std::pow(curve.back() / curve.front(), static_cast<double>(trading_days_per_year) / periods) - 1.0;
}

// Open prices on each date, keyed by stock (missing entries allowed).
using PriceSeries = std::vector<Prices>;

inline PriceSeries price_series(const corpus::PriceTable& table, std::span<const Date> dates) {
  PriceSeries out;
  for (Date d : dates) {
    const std::size_t i = table.index_of(d);
    Prices p;
    for (const auto& [id, opens] : table.opens) {
      if (!std::isnan(opens[i])) p[id] = opens[i];
    }
    out.push_back(std::move(p));
  }
  return out;
}

// Equal-weight buy-and-hold of every stock priced on the first date, no costs.
inline std::vector<double> market_baseline(const PriceSeries& prices, double initial_capital) {
  if (prices.size() < 2) throw ConfigError("market_baseline: needs at least 2 dates");
  if (prices.front().empty()) throw InputError("market_baseline: no prices on the first date");
  std::map<std::string, double> shares;
  const double each = initial_capital / static_cast<double>(prices.front().size());
  for (const auto& [id, p] : prices.front()) shares[id] = each / p;
  Prices last = prices.front();
  std::vector<double> curve;
  for (const Prices& day : prices) {
    for (const auto& [id, p] : day) last[id] = p;
    double v = 0.0;
    for (const auto& [id, sh] : shares) v += sh * last.at(id);
    curve.push_back(v);
  }
  return curve;
}

// dates has one more entry than scores: positions set on dates[i] from
// scores[i] are liquidated at the open of the final date.
inline BacktestResult run_backtest(std::span<const Date> dates, const PriceSeries& prices,
                                   std::span<const Scores> scores, const BacktestConfig& cfg) {
  cfg.validate();
  if (dates.size() < 2) throw ConfigError("backtest needs at least 2 trading dates");
  if (prices.size() != dates.size() || scores.size() + 1 != dates.size()) {
    throw ShapeError("backtest: expected one price row per date and one score map per trading date");
  }
  BacktestResult r;
  r.dates.assign(dates.begin(), dates.end());
  PortfolioState s{cfg.initial_capital, {}};
  Prices last;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    for (const auto& [id, p] : prices[i]) last[id] = p;
    r.curve.push_back(wealth(s, prices[i], last));
    if (i + 1 < dates.size()) {
      const std::vector<std::string> targets = select_top_k(scores[i], cfg.k);
      r.total_cost += rebalance(s, targets, prices[i], cfg.cost_rate, dates[i], &r.trades, &r.warnings,
                                cfg.full_turnover);
    }
  }
  // Final liquidation at the last open (last observed price if missing).
  Ledger ledger(s, dates.back(), cfg.cost_rate, &r.trades);
  const std::map<std::string, double> held = s.holdings;
  for (const auto& [id, sh] : held) {
    if (!prices.back().contains(id)) {
      r.warnings.push_back(dates.back().str() + ": no open for " + id + ", liquidated at last observed price");
    }
    ledger.sell(id, sh, last.at(id));
  }
  r.total_cost += ledger.cost();
  s.holdings.clear();
  r.curve.back() = s.cash;
  r.baseline = market_baseline(prices, cfg.initial_capital);
  r.total_return = r.curve.back() / r.curve.front() - 1.0;
  r.annualized_return = annualized_return(r.curve, cfg.trading_days_per_year);
  r.baseline_annualized_return = annualized_return(r.baseline, cfg.trading_days_per_year);
  return r;
}

// Model-driven run over a sample set: each distinct target date is a trading
// date, and positions are closed on the following calendar day.
inline BacktestResult run_backtest(const model::HanParams& params, std::span<const corpus::Sample> samples,
                                   const corpus::PriceTable& table, const BacktestConfig& cfg) {
  std::map<Date, std::vector<const corpus::Sample*>> by_date;
  for (const corpus::Sample& s : samples) by_date[s.target_date].push_back(&s);
  if (by_date.empty()) throw InputError("backtest: no samples");
  std::vector<Date> dates;
  std::vector<Scores> scores;
  for (const auto& [d, xs] : by_date) {
    dates.push_back(d);
    scores.push_back(score_stocks(params, xs));
  }
  const std::size_t last = table.index_of(dates.back());
  if (last + 1 >= table.calendar.size()) throw InputError("backtest: no trading date after " + dates.back().str());
  dates.push_back(table.calendar[last + 1]);
  return run_backtest(dates, price_series(table, dates), scores, cfg);
}

inline void write_curve(std::ostream& out, const BacktestResult& r) {
  out << "date,portfolio_value,baseline_value\n";
  for (std::size_t i = 0; i < r.dates.size(); ++i) {
    out << r.dates[i].str() << ',' << corpus::fmt_double(r.curve[i]) << ',' << corpus::fmt_double(r.baseline[i])
        << '\n';
  }
}

inline void write_trades(std::ostream& out, const BacktestResult& r) {
  out << "date,stock_id,side,shares,price,cost\n";
  for (const Trade& t : r.trades) {
    out << t.date.str() << ',' << t.stock_id << ',' << (t.side == Side::buy ? "BUY" : "SELL") << ','
        << corpus::fmt_double(t.shares) << ',' << corpus::fmt_double(t.price) << ',' << corpus::fmt_double(t.cost)
        << '\n';
  }
}

}  // namespace newstrend::backtest
