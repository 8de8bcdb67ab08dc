#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "newstrend/corpus/labels.hpp"
#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"
#include "newstrend/random.hpp"

namespace newstrend::corpus {

struct SynthConfig {
  std::size_t stocks = 50;
  std::size_t days = 300;
  std::size_t vocab_size = 500;
  std::size_t dim = 32;
  std::size_t signal_words_per_class = 5;
  double signal_fidelity = 0.9;
  double mean_news_per_day = 3.0;
  double no_news_day_prob = 0.15;
  // Fraction of targets whose label is redrawn at random after the signal
  // news for the original class has been planted.
  double corrupt_fraction = 0.0;
  std::size_t title_words = 4;
  std::size_t content_words = 12;
  std::size_t signal_words_per_news = 6;  // content words drawn from the class set
  Date start = Date(2015, 1, 5);
};

struct SignalNews {
  std::string stock_id;
  Date date;
  std::size_t index = 0;  // position within the stock's news for that date
  Label planted_class = Label::preserve;
};

struct SynthTarget {
  std::string stock_id;
  Date date;
  Label label = Label::preserve;  // class of the generated rise
  bool corrupted = false;
};

struct SynthReport {
  SynthConfig config;
  std::uint64_t seed = 0;
  std::array<std::vector<std::string>, kNumClasses> signal_words;
  std::vector<SignalNews> signal_news;
  std::vector<SynthTarget> targets;
};

struct SynthData {
  std::vector<NewsRecord> news;
  std::vector<PriceBar> prices;
  SynthReport report;
};

namespace detail {

// Rises are kept at least this far from the default cut points so that
// recomputing them from rounded prices cannot change their class.
inline constexpr double kBandMargin = 5e-4;
inline constexpr double kBandEdge = 0.04;

inline double draw_rise(Rng& rng, Label c) {
  const LabelThresholds th = LabelThresholds::defaults();
  switch (c) {
    case Label::down: return rng.uniform(-kBandEdge, th.down_cut - kBandMargin);
    case Label::preserve: return rng.uniform(th.down_cut + kBandMargin, th.up_cut - kBandMargin);
    case Label::up: return rng.uniform(th.up_cut + kBandMargin, kBandEdge);
  }
  return 0.0;
}

inline std::string stock_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%03zu", i);
  return buf;
}

inline std::string word_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "w%04zu", i);
  return buf;
}

}  // namespace detail

// Planted-signal dataset. Trading days are consecutive weekdays from
// cfg.start. For each stock and target day t the label is drawn uniformly;
// the news of day t-1 (the last window day of target t) contain, with
// probability signal_fidelity, one item whose content mixes words of the
// label's signal set, otherwise of a uniformly drawn class.
inline SynthData synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  if (!(cfg.signal_fidelity > 1.0 / 3.0 && cfg.signal_fidelity <= 1.0)) {
    throw ConfigError("signal_fidelity must lie in (1/3, 1]");
  }
  if (cfg.stocks == 0 || cfg.days < 2) throw ConfigError("synth: need >= 1 stock and >= 2 days");
  const std::size_t n_signal = kNumClasses * cfg.signal_words_per_class;
  if (cfg.vocab_size <= n_signal) throw ConfigError("synth: vocab_size must exceed the signal word count");
  if (cfg.signal_words_per_news > cfg.content_words) {
    throw ConfigError("synth: signal_words_per_news exceeds content_words");
  }
  if (!(cfg.no_news_day_prob >= 0.0 && cfg.no_news_day_prob <= 1.0) ||
      !(cfg.corrupt_fraction >= 0.0 && cfg.corrupt_fraction <= 1.0) || !(cfg.mean_news_per_day >= 1.0)) {
    throw ConfigError("synth: probabilities must lie in [0, 1] and mean_news_per_day >= 1");
  }

  Rng rng(seed);
  SynthData out;
  out.report.config = cfg;
  out.report.seed = seed;

  // Word identities are shuffled so signal words are not a contiguous range.
  std::vector<std::size_t> ids(cfg.vocab_size);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  rng.shuffle(std::span<std::size_t>(ids));
  std::array<std::vector<std::string>, kNumClasses> signal;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t k = 0; k < cfg.signal_words_per_class; ++k) {
      signal[c].push_back(detail::word_name(ids[c * cfg.signal_words_per_class + k]));
    }
  }
  std::vector<std::string> noise;
  for (std::size_t i = n_signal; i < ids.size(); ++i) noise.push_back(detail::word_name(ids[i]));
  out.report.signal_words = signal;

  std::vector<Date> calendar;
  for (Date d = cfg.start; calendar.size() < cfg.days; d = d.plus_days(1)) {
    if (d.is_weekday()) calendar.push_back(d);
  }

  auto noise_words = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += noise[rng.below(noise.size())];
    }
    return s;
  };

  for (std::size_t si = 0; si < cfg.stocks; ++si) {
    const std::string stock = detail::stock_name(si);
    // Target classes for t = 0 .. days-2; the planted class can differ from
    // the recorded label only for corrupted targets.
    std::vector<Label> planted(cfg.days - 1);
    std::vector<Label> labels(cfg.days - 1);
    std::vector<bool> corrupted(cfg.days - 1, false);
    double open = rng.uniform(10.0, 100.0);
    std::vector<double> opens = {open};
    for (std::size_t t = 0; t + 1 < cfg.days; ++t) {
      planted[t] = static_cast<Label>(rng.below(kNumClasses));
      labels[t] = planted[t];
      if (cfg.corrupt_fraction > 0.0 && rng.bernoulli(cfg.corrupt_fraction)) {
        corrupted[t] = true;
        labels[t] = static_cast<Label>(rng.below(kNumClasses));
      }
      open = open * (1.0 + detail::draw_rise(rng, labels[t]));
      opens.push_back(open);
    }
    for (std::size_t t = 0; t < cfg.days; ++t) out.prices.push_back({calendar[t], stock, opens[t]});
    for (std::size_t t = 0; t + 1 < cfg.days; ++t) {
      out.report.targets.push_back({stock, calendar[t], labels[t], corrupted[t]});
    }

    for (std::size_t j = 0; j < cfg.days; ++j) {
      if (rng.bernoulli(cfg.no_news_day_prob)) continue;
      const std::size_t count = std::max<std::uint64_t>(1, rng.poisson(cfg.mean_news_per_day));
      // Day j is the last window day of target j + 1.
      const bool has_target = j + 1 + 1 < cfg.days;
      std::size_t signal_pos = count;
      Label sig_class = Label::preserve;
      if (has_target) {
        signal_pos = rng.below(count);
        sig_class = rng.bernoulli(cfg.signal_fidelity) ? planted[j + 1] : static_cast<Label>(rng.below(kNumClasses));
      }
      for (std::size_t k = 0; k < count; ++k) {
        NewsRecord r;
        r.timestamp = calendar[j];
        r.stock_id = stock;
        r.title = noise_words(cfg.title_words);
        if (k == signal_pos) {
          std::vector<std::string> words;
          const auto& set = signal[static_cast<std::size_t>(sig_class)];
          for (std::size_t w = 0; w < cfg.signal_words_per_news; ++w) words.push_back(set[rng.below(set.size())]);
          for (std::size_t w = cfg.signal_words_per_news; w < cfg.content_words; ++w) {
            words.push_back(noise[rng.below(noise.size())]);
          }
          rng.shuffle(std::span<std::string>(words));
          for (std::size_t w = 0; w < words.size(); ++w) {
            if (w) r.content += ' ';
            r.content += words[w];
          }
          out.report.signal_news.push_back({stock, calendar[j], k, sig_class});
        } else {
          r.content = noise_words(cfg.content_words);
        }
        out.news.push_back(std::move(r));
      }
    }
  }
  return out;
}

inline nlohmann::ordered_json synth_config_to_json(const SynthConfig& c) {
  nlohmann::ordered_json j;
  j["stocks"] = c.stocks;
  j["days"] = c.days;
  j["vocab_size"] = c.vocab_size;
  j["dim"] = c.dim;
  j["signal_words_per_class"] = c.signal_words_per_class;
  j["signal_fidelity"] = c.signal_fidelity;
  j["mean_news_per_day"] = c.mean_news_per_day;
  j["no_news_day_prob"] = c.no_news_day_prob;
  j["corrupt_fraction"] = c.corrupt_fraction;
  j["title_words"] = c.title_words;
  j["content_words"] = c.content_words;
  j["signal_words_per_news"] = c.signal_words_per_news;
  j["start"] = c.start.str();
  return j;
}

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.stocks = j.value("stocks", c.stocks);
  c.days = j.value("days", c.days);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.dim = j.value("dim", c.dim);
  c.signal_words_per_class = j.value("signal_words_per_class", c.signal_words_per_class);
  c.signal_fidelity = j.value("signal_fidelity", c.signal_fidelity);
  c.mean_news_per_day = j.value("mean_news_per_day", c.mean_news_per_day);
  c.no_news_day_prob = j.value("no_news_day_prob", c.no_news_day_prob);
  c.corrupt_fraction = j.value("corrupt_fraction", c.corrupt_fraction);
  c.title_words = j.value("title_words", c.title_words);
  c.content_words = j.value("content_words", c.content_words);
  c.signal_words_per_news = j.value("signal_words_per_news", c.signal_words_per_news);
  if (j.contains("start")) {
    const auto d = Date::parse(j.at("start").get<std::string>());
    if (!d) throw ConfigError("synth.start is not a YYYY-MM-DD date");
    c.start = *d;
  }
  return c;
}

inline nlohmann::ordered_json synth_report_to_json(const SynthReport& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["config"] = synth_config_to_json(r.config);
  nlohmann::ordered_json words;
  for (std::size_t c = 0; c < kNumClasses; ++c) words[kLabelNames[c]] = r.signal_words[c];
  j["signal_words"] = words;
  nlohmann::ordered_json news = nlohmann::ordered_json::array();
  for (const SignalNews& s : r.signal_news) {
    news.push_back({{"stock_id", s.stock_id}, {"date", s.date.str()}, {"index", s.index},
                    {"class", label_name(s.planted_class)}});
  }
  j["signal_news"] = std::move(news);
  std::array<std::size_t, kNumClasses> counts{};
  std::size_t n_corrupted = 0;
  for (const SynthTarget& t : r.targets) {
    ++counts[static_cast<std::size_t>(t.label)];
    n_corrupted += t.corrupted ? 1 : 0;
  }
  nlohmann::ordered_json balance;
  for (std::size_t c = 0; c < kNumClasses; ++c) balance[kLabelNames[c]] = counts[c];
  j["label_counts"] = balance;
  j["corrupted_targets"] = n_corrupted;
  return j;
}

}  // namespace newstrend::corpus
