#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string>

#include "json.hpp"

#include "newstrend/backtest/backtest.hpp"
#include "newstrend/corpus/pipeline.hpp"
#include "newstrend/corpus/synth.hpp"
#include "newstrend/error.hpp"
#include "newstrend/model/hyper.hpp"
#include "newstrend/train/trainer.hpp"

namespace newstrend::cli {

namespace fs = std::filesystem;

struct Paths {
  std::optional<std::string> news;
  std::optional<std::string> prices;
  std::optional<std::string> embeddings;
  std::optional<std::string> stopwords;
  std::string output_dir = "out";

  std::string out(const std::string& file) const { return (fs::path(output_dir) / file).string(); }
};

struct RunConfig {
  Paths paths;
  corpus::PipelineConfig data;
  corpus::SynthConfig synth;
  model::HyperParams model;
  train::TrainConfig train;
  backtest::BacktestConfig backtest;
  std::uint64_t seed = 0;

  // Copies the single seed into every component.
  void propagate_seed() {
    data.seed = seed;
    train.seed = seed;
  }

  // The model input geometry always follows the data section.
  void sync_model() {
    model.dim = data.dim;
    model.window = data.window;
    model.max_news = data.max_news;
  }

  void validate() const {
    model.validate();
    train.validate();
    backtest.validate();
    if (!(data.train_fraction > 0.0 && data.train_fraction < 1.0)) {
      throw ConfigError("data.train_fraction must be in (0, 1)");
    }
    if (!(data.val_fraction >= 0.0 && data.val_fraction < 1.0)) throw ConfigError("data.val_fraction must be in [0, 1)");
    if (data.min_count < 1) throw ConfigError("data.min_count must be >= 1");
  }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(section + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + section);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

// Accepts a number or the strings "inf" / "infinity".
inline double read_extended(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(what + " must be a number or \"inf\"");
}

inline std::optional<std::string> read_path(const json& obj, const char* key, const fs::path& base) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  const fs::path p(obj.at(key).get<std::string>());
  return (p.is_absolute() ? p : base / p).lexically_normal().string();
}

inline void parse_paths(const json& j, const fs::path& base, Paths& p) {
  check_keys(j, "paths", {"news", "prices", "embeddings", "stopwords", "output_dir"});
  p.news = read_path(j, "news", base);
  p.prices = read_path(j, "prices", base);
  p.embeddings = read_path(j, "embeddings", base);
  p.stopwords = read_path(j, "stopwords", base);
  if (auto o = read_path(j, "output_dir", base)) p.output_dir = *o;
  for (const auto* opt : {&p.embeddings, &p.stopwords}) {
    if (*opt && !fs::exists(**opt)) throw InputError("file not found: " + **opt);
  }
}

inline void parse_data(const json& j, corpus::PipelineConfig& d) {
  check_keys(j, "data", {"window", "max_news_per_day", "min_count", "dim", "thresholds", "train_fraction",
                         "val_fraction"});
  read(j, "window", d.window);
  read(j, "max_news_per_day", d.max_news);
  read(j, "min_count", d.min_count);
  read(j, "dim", d.dim);
  read(j, "train_fraction", d.train_fraction);
  read(j, "val_fraction", d.val_fraction);
  if (!j.contains("thresholds")) return;
  const json& t = j.at("thresholds");
  if (t.is_string()) {
    const auto mode = t.get<std::string>();
    if (mode == "default") {
      d.threshold_mode = corpus::ThresholdMode::defaults;
    } else if (mode == "quantile") {
      d.threshold_mode = corpus::ThresholdMode::quantile;
    } else {
      throw ConfigError("data.thresholds must be \"default\", \"quantile\" or {\"down\", \"up\"}");
    }
    return;
  }
  check_keys(t, "data.thresholds", {"down", "up"});
  d.threshold_mode = corpus::ThresholdMode::fixed;
  d.fixed_thresholds.down_cut = t.at("down").get<double>();
  d.fixed_thresholds.up_cut = t.at("up").get<double>();
  if (!(d.fixed_thresholds.down_cut < d.fixed_thresholds.up_cut)) {
    throw ConfigError("data.thresholds: down must be below up");
  }
}

inline void parse_model(const json& j, model::HyperParams& m) {
  check_keys(j, "model", {"hidden", "mlp_hidden", "temporal_dim", "news_attention", "temporal_attention",
                          "bidirectional"});
  read(j, "hidden", m.hidden);
  read(j, "mlp_hidden", m.mlp_hidden);
  read(j, "temporal_dim", m.temporal_dim);
  read(j, "news_attention", m.arch.news_attention);
  read(j, "temporal_attention", m.arch.temporal_attention);
  read(j, "bidirectional", m.arch.bidirectional);
}

inline void parse_train(const json& j, train::TrainConfig& t) {
  check_keys(j, "train", {"epochs", "batch_size", "learning_rate", "optimizer", "spl", "lambda0_quantile", "mu",
                          "lambda0"});
  read(j, "epochs", t.epochs);
  read(j, "batch_size", t.batch_size);
  read(j, "learning_rate", t.learning_rate);
  if (j.contains("optimizer")) t.optimizer = train::parse_optimizer(j.at("optimizer").get<std::string>());
  read(j, "spl", t.spl_enabled);
  read(j, "lambda0_quantile", t.lambda0_quantile);
  read(j, "mu", t.mu);
  if (j.contains("lambda0") && !j.at("lambda0").is_null()) {
    t.lambda0 = read_extended(j.at("lambda0"), "train.lambda0");
  }
}

inline void parse_backtest(const json& j, backtest::BacktestConfig& b) {
  check_keys(j, "backtest", {"k", "cost_rate", "initial_capital", "trading_days_per_year", "full_turnover"});
  read(j, "k", b.k);
  read(j, "cost_rate", b.cost_rate);
  read(j, "initial_capital", b.initial_capital);
  read(j, "trading_days_per_year", b.trading_days_per_year);
  read(j, "full_turnover", b.full_turnover);
}

inline void parse_synth(const json& j, corpus::SynthConfig& s) {
  check_keys(j, "synth", {"stocks", "days", "vocab_size", "dim", "signal_words_per_class", "signal_fidelity",
                          "mean_news_per_day", "no_news_day_prob", "corrupt_fraction", "title_words",
                          "content_words", "signal_words_per_news", "start"});
  s = corpus::synth_config_from_json(j);
}

}  // namespace detail

// Parses a config document; relative paths resolve against `base`.
inline RunConfig parse_config(const nlohmann::json& j, const fs::path& base) {
  RunConfig c;
  try {
    detail::check_keys(j, "config", {"seed", "paths", "data", "model", "train", "backtest", "synth"});
    if (!j.contains("seed") || j.at("seed").is_null()) throw ConfigError("config: 'seed' is required");
    const auto& seed = j.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) throw ConfigError("config: 'seed' must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("paths")) detail::parse_paths(j.at("paths"), base, c.paths);
    if (j.contains("data")) detail::parse_data(j.at("data"), c.data);
    if (j.contains("model")) detail::parse_model(j.at("model"), c.model);
    if (j.contains("train")) detail::parse_train(j.at("train"), c.train);
    if (j.contains("backtest")) detail::parse_backtest(j.at("backtest"), c.backtest);
    if (j.contains("synth")) detail::parse_synth(j.at("synth"), c.synth);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.propagate_seed();
  c.sync_model();
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": malformed config (" + e.what() + ")");
  }
  return parse_config(j, fs::path(path).parent_path());
}

// Throws InputError naming `what` when the path is unset or missing.
inline const std::string& require_file(const std::optional<std::string>& path, const std::string& what) {
  if (!path) throw ConfigError("paths." + what + " is required for this command");
  if (!fs::exists(*path)) throw InputError(what + " file not found: " + *path);
  return *path;
}

}  // namespace newstrend::cli
