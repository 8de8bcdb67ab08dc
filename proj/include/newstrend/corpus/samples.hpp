#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "newstrend/corpus/embeddings.hpp"
#include "newstrend/corpus/labels.hpp"
#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"

namespace newstrend::corpus {

struct SkipEntry {
  std::string stock_id;
  Date date;
  std::string reason;
};

struct SampleSet {
  std::vector<Sample> samples;
  std::vector<SkipEntry> skipped;
};

// Sorted set of dates present in the price file.
inline std::vector<Date> trading_calendar(const std::vector<PriceBar>& prices) {
  std::vector<Date> cal;
  cal.reserve(prices.size());
  for (const PriceBar& p : prices) cal.push_back(p.date);
  std::sort(cal.begin(), cal.end());
  cal.erase(std::unique(cal.begin(), cal.end()), cal.end());
  return cal;
}

// stock -> calendar index -> open (NaN where missing).
struct PriceTable {
  std::vector<Date> calendar;
  std::map<std::string, std::vector<double>> opens;

  static PriceTable from(const std::vector<PriceBar>& prices) {
    PriceTable t;
    t.calendar = trading_calendar(prices);
    for (const PriceBar& p : prices) {
      auto [it, inserted] = t.opens.try_emplace(p.stock_id, t.calendar.size(), std::nan(""));
      const std::size_t i = t.index_of(p.date);
      if (!std::isnan(it->second[i])) {
        throw InputError("duplicate price for " + p.stock_id + " on " + p.date.str());
      }
      it->second[i] = p.open;
    }
    return t;
  }

  std::size_t index_of(Date d) const {
    auto it = std::lower_bound(calendar.begin(), calendar.end(), d);
    if (it == calendar.end() || *it != d) throw InputError("date " + d.str() + " is not a trading date");
    return static_cast<std::size_t>(it - calendar.begin());
  }

  // Open of `stock` on calendar day i, or NaN.
  double open(const std::string& stock, std::size_t i) const {
    auto it = opens.find(stock);
    return it == opens.end() ? std::nan("") : it->second[i];
  }
};

// News are bucketed onto trading days: day i collects timestamps in
// (calendar[i-1], calendar[i]]; day 0 collects its own date only. Within a
// bucket the earliest news are kept (stable in input order) up to max_news.
inline SampleSet build_samples(const std::vector<NewsRecord>& news, const std::vector<PriceBar>& prices,
                               const WordEmbeddings& emb, const Vocabulary& vocab, std::size_t window,
                               std::size_t max_news, const LabelThresholds& th) {
  if (window < 1) throw ConfigError("window length N must be >= 1");
  if (max_news < 1) throw ConfigError("max news per day must be >= 1");
  const PriceTable table = PriceTable::from(prices);
  const std::vector<Date>& cal = table.calendar;

  std::map<std::string, std::vector<const NewsRecord*>> by_stock;
  for (const NewsRecord& r : news) by_stock[r.stock_id].push_back(&r);
  for (auto& [_, rs] : by_stock) {
    std::stable_sort(rs.begin(), rs.end(), [](const NewsRecord* a, const NewsRecord* b) {
      return a->timestamp < b->timestamp;
    });
  }

  SampleSet out;
  for (const auto& [stock, opens] : table.opens) {
    // Corpus per calendar day; shared by every window that covers it.
    std::vector<std::shared_ptr<DailyCorpus>> days(cal.size());
    for (std::size_t i = 0; i < cal.size(); ++i) days[i] = std::make_shared<DailyCorpus>(cal[i], emb.dim());
    if (auto it = by_stock.find(stock); it != by_stock.end()) {
      for (const NewsRecord* r : it->second) {
        auto pos = std::lower_bound(cal.begin(), cal.end(), r->timestamp);
        if (pos == cal.end()) continue;
        const auto i = static_cast<std::size_t>(pos - cal.begin());
        if (i == 0 && r->timestamp != cal[0]) continue;
        if (days[i]->size() >= max_news) continue;
        days[i]->push(embed_news(*r, emb, vocab));
      }
    }
    for (std::size_t i = window; i + 1 < cal.size(); ++i) {
      const double o_t = opens[i];
      const double o_next = opens[i + 1];
      if (std::isnan(o_t)) {
        out.skipped.push_back({stock, cal[i], "missing open at t"});
        continue;
      }
      if (std::isnan(o_next)) {
        out.skipped.push_back({stock, cal[i], "missing open at t+1"});
        continue;
      }
      Sample s;
      s.stock_id = stock;
      s.target_date = cal[i];
      s.window.reserve(window);
      for (std::size_t k = i - window; k < i; ++k) s.window.push_back(days[k]);
      s.rise_percent = rise_percent(o_t, o_next);
      s.label = label(s.rise_percent, th);
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

inline void relabel(std::vector<Sample>& samples, const LabelThresholds& th) {
  for (Sample& s : samples) s.label = label(s.rise_percent, th);
}

}  // namespace newstrend::corpus
