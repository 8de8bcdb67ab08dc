#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "newstrend/backtest/backtest.hpp"
#include "newstrend/cli/config.hpp"
#include "newstrend/corpus/dataset_io.hpp"
#include "newstrend/corpus/io.hpp"
#include "newstrend/corpus/pipeline.hpp"
#include "newstrend/corpus/synth.hpp"
#include "newstrend/error.hpp"
#include "newstrend/model/attention_export.hpp"
#include "newstrend/model/checkpoint.hpp"
#include "newstrend/train/evaluate.hpp"
#include "newstrend/train/trainer.hpp"

namespace newstrend::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kConfigError = 3, kCheckpointError = 4 };

// Command-line values that replace config entries.
struct Overrides {
  std::optional<std::string> spl;
  std::vector<std::string> ablate;
  std::optional<std::size_t> k;
  std::optional<std::size_t> epochs;
  std::optional<std::string> lambda0;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<std::string> checkpoint;
};

inline double parse_extended(const std::string& text, const std::string& what) {
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError(what + " expects a number or inf, got '" + text + "'");
  return v;
}

inline void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.spl) {
    if (*o.spl == "on") {
      c.train.spl_enabled = true;
    } else if (*o.spl == "off") {
      c.train.spl_enabled = false;
    } else {
      throw ConfigError("--spl expects on or off, got '" + *o.spl + "'");
    }
  }
  for (const std::string& a : o.ablate) {
    if (a == "news_attention") {
      c.model.arch.news_attention = false;
    } else if (a == "temporal_attention") {
      c.model.arch.temporal_attention = false;
    } else if (a == "bidirectional") {
      c.model.arch.bidirectional = false;
    } else {
      throw ConfigError("--ablate expects news_attention, temporal_attention or bidirectional, got '" + a + "'");
    }
  }
  if (o.k) c.backtest.k = *o.k;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.lambda0) c.train.lambda0 = parse_extended(*o.lambda0, "--spl-lambda0");
  if (o.seed) c.seed = *o.seed;
  if (o.output_dir) c.paths.output_dir = *o.output_dir;
  c.propagate_seed();
  c.validate();
}

struct Context {
  RunConfig config;
  std::string checkpoint;
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline void ensure_output_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.paths.output_dir, ec);
  if (ec) throw InputError("cannot create output directory " + c.paths.output_dir + ": " + ec.message());
}

inline std::string dataset_path(const RunConfig& c) { return c.paths.out("dataset.bin"); }

inline corpus::PreparedDataset load_prepared(const RunConfig& c) {
  const std::string p = dataset_path(c);
  if (!fs::exists(p)) throw InputError("prepared dataset not found: " + p + " (run prepare or synth first)");
  return corpus::load_dataset(p);
}

// Hyperparameters for a dataset: geometry comes from the data on disk.
inline model::HyperParams hyper_for(const RunConfig& c, const corpus::PreparedDataset& ds) {
  model::HyperParams h = c.model;
  h.dim = ds.dim;
  h.window = ds.window;
  h.validate();
  return h;
}

inline model::HanParams load_model_for(const Context& ctx, const corpus::PreparedDataset& ds) {
  model::HanParams p = model::load_checkpoint(ctx.checkpoint);
  if (p.hyper().dim != ds.dim || p.hyper().window != ds.window) {
    throw ShapeError("checkpoint expects dim " + std::to_string(p.hyper().dim) + " and window " +
                     std::to_string(p.hyper().window) + ", dataset has dim " + std::to_string(ds.dim) +
                     " and window " + std::to_string(ds.window));
  }
  return p;
}

inline void write_thresholds(const std::string& path, const corpus::PreparedDataset& ds,
                             corpus::ThresholdMode mode) {
  std::ofstream out = corpus::open_output(path);
  const char* name = mode == corpus::ThresholdMode::quantile ? "quantile"
                     : mode == corpus::ThresholdMode::fixed  ? "fixed"
                                                             : "default";
  out << "mode,down_cut,up_cut\n";
  out << name << ',' << corpus::fmt_double(ds.thresholds.down_cut) << ',' << corpus::fmt_double(ds.thresholds.up_cut)
      << '\n';
}

inline void write_class_balance(const std::string& path, const corpus::DatasetSplit& split) {
  std::ofstream out = corpus::open_output(path);
  out << "split,samples,DOWN,PRESERVE,UP\n";
  const std::array<std::pair<const char*, const std::vector<corpus::Sample>*>, 3> parts = {
      {{"train", &split.train}, {"validation", &split.validation}, {"test", &split.test}}};
  for (const auto& [name, part] : parts) {
    std::array<std::size_t, corpus::kNumClasses> counts{};
    for (const corpus::Sample& s : *part) ++counts[static_cast<std::size_t>(s.label)];
    out << name << ',' << part->size() << ',' << counts[0] << ',' << counts[1] << ',' << counts[2] << '\n';
  }
}

}  // namespace detail

inline int cmd_prepare(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto news = corpus::read_news(require_file(c.paths.news, "news"));
  const auto prices = corpus::read_prices(require_file(c.paths.prices, "prices"));
  const auto stopwords = c.paths.stopwords ? corpus::read_stopwords(*c.paths.stopwords)
                                           : std::unordered_set<std::string>{};
  const corpus::PipelineOutput r = corpus::prepare_dataset(news, prices, stopwords, c.paths.embeddings, c.data);
  detail::ensure_output_dir(c);
  corpus::save_dataset(detail::dataset_path(c), r.dataset);
  detail::write_thresholds(c.paths.out("thresholds.csv"), r.dataset, c.data.threshold_mode);
  detail::write_class_balance(c.paths.out("class_balance.csv"), r.dataset.split);
  corpus::write_skip_report(c.paths.out("skips.csv"), r.skipped);
  const auto& sp = r.dataset.split;
  ctx.out << "prepared " << sp.train.size() << " train, " << sp.validation.size() << " validation, "
          << sp.test.size() << " test samples; vocabulary " << r.vocabulary_size << "; skipped " << r.skipped.size()
          << '\n';
  return kOk;
}

// Writes the raw synthetic corpus and its ground truth, then prepares it
// with the configured pipeline so train can follow directly.
inline int cmd_synth(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const corpus::SynthData data = corpus::synth_generate(c.synth, c.seed);
  detail::ensure_output_dir(c);
  corpus::write_news(c.paths.out("news.jsonl"), data.news);
  corpus::write_prices(c.paths.out("prices.csv"), data.prices);
  {
    std::ofstream rep = corpus::open_output(c.paths.out("synth_report.json"));
    rep << corpus::synth_report_to_json(data.report).dump(2) << '\n';
  }
  corpus::PipelineConfig pc = c.data;
  pc.dim = c.synth.dim;
  const corpus::PipelineOutput r = corpus::prepare_dataset(data.news, data.prices, {}, std::nullopt, pc);
  corpus::save_dataset(detail::dataset_path(c), r.dataset);
  detail::write_thresholds(c.paths.out("thresholds.csv"), r.dataset, pc.threshold_mode);
  detail::write_class_balance(c.paths.out("class_balance.csv"), r.dataset.split);
  corpus::write_skip_report(c.paths.out("skips.csv"), r.skipped);
  ctx.out << "synthesized " << data.news.size() << " news for " << c.synth.stocks << " stocks over " << c.synth.days
          << " days; " << r.dataset.split.train.size() + r.dataset.split.validation.size() +
                              r.dataset.split.test.size()
          << " samples\n";
  return kOk;
}

inline int cmd_train(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const corpus::PreparedDataset ds = detail::load_prepared(c);
  const model::HyperParams h = detail::hyper_for(c, ds);
  const auto& sp = ds.split;
  const train::TrainResult r = train::acs_train(sp.train, sp.validation, sp.test, c.train, h);
  detail::ensure_output_dir(c);
  model::save_checkpoint(ctx.checkpoint, r.best);
  {
    std::ofstream hist = corpus::open_output(c.paths.out("history.csv"));
    train::write_history(hist, r.history);
  }
  const train::EpochRecord& best = train::best_record(r.history);
  ctx.out << h.arch.name() << " best epoch " << r.history.best_epoch << ", validation accuracy "
          << corpus::fmt_double(best.val_acc) << ", test accuracy " << corpus::fmt_double(best.test_acc) << '\n';
  return kOk;
}

inline int cmd_eval(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const corpus::PreparedDataset ds = detail::load_prepared(c);
  const model::HanParams params = detail::load_model_for(ctx, ds);
  detail::ensure_output_dir(c);
  std::ofstream out = corpus::open_output(c.paths.out("metrics.csv"));
  out << "split,samples,accuracy,true_label,pred_DOWN,pred_PRESERVE,pred_UP\n";
  const std::array<std::pair<const char*, const std::vector<corpus::Sample>*>, 3> parts = {
      {{"train", &ds.split.train}, {"validation", &ds.split.validation}, {"test", &ds.split.test}}};
  for (const auto& [name, part] : parts) {
    if (part->empty()) continue;
    const train::EvalResult e = train::evaluate(params, *part);
    for (std::size_t t = 0; t < corpus::kNumClasses; ++t) {
      out << name << ',' << e.count << ',' << corpus::fmt_double(e.accuracy) << ',' << corpus::kLabelNames[t];
      for (std::size_t p = 0; p < corpus::kNumClasses; ++p) out << ',' << e.confusion[t][p];
      out << '\n';
    }
    ctx.out << name << " accuracy " << corpus::fmt_double(e.accuracy) << " (" << e.count << " samples)\n";
  }
  return kOk;
}

inline int cmd_attn(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const corpus::PreparedDataset ds = detail::load_prepared(c);
  const model::HanParams params = detail::load_model_for(ctx, ds);
  detail::ensure_output_dir(c);
  model::export_attention(ds.split.test, params, c.paths.out("attention_alpha.csv"),
                          c.paths.out("attention_beta.csv"));
  ctx.out << "attention exported for " << ds.split.test.size() << " test samples\n";
  return kOk;
}

inline int cmd_backtest(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const corpus::PreparedDataset ds = detail::load_prepared(c);
  const model::HanParams params = detail::load_model_for(ctx, ds);
  const auto table = corpus::PriceTable::from(corpus::read_prices(require_file(c.paths.prices, "prices")));
  const backtest::BacktestResult r = backtest::run_backtest(params, ds.split.test, table, c.backtest);
  detail::ensure_output_dir(c);
  {
    std::ofstream curve = corpus::open_output(c.paths.out("backtest_curve.csv"));
    backtest::write_curve(curve, r);
  }
  {
    std::ofstream trades = corpus::open_output(c.paths.out("trades.csv"));
    backtest::write_trades(trades, r);
  }
  for (const std::string& w : r.warnings) ctx.err << "warning: " << w << '\n';
  ctx.out << "top-" << c.backtest.k << " total return " << corpus::fmt_double(r.total_return) << ", annualized "
          << corpus::fmt_double(r.annualized_return) << ", baseline annualized "
          << corpus::fmt_double(r.baseline_annualized_return) << ", costs " << corpus::fmt_double(r.total_cost)
          << '\n';
  return kOk;
}

// Entry point; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"News-driven stock trend prediction with hierarchical attention"};
  app.require_subcommand(1);
  std::string config_path;
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", o.seed, "Override the config seed");
    sub->add_option("--output-dir", o.output_dir, "Override paths.output_dir");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--checkpoint", o.checkpoint, "Checkpoint path (default: <output_dir>/checkpoint.bin)");
  };

  CLI::App* prepare = app.add_subcommand("prepare", "Build the windowed dataset from news and prices");
  CLI::App* synth = app.add_subcommand("synth", "Generate and prepare a planted-signal corpus");
  CLI::App* train_cmd = app.add_subcommand("train", "Train and write the best-validation checkpoint");
  CLI::App* eval = app.add_subcommand("eval", "Accuracy and confusion per split");
  CLI::App* attn = app.add_subcommand("attn", "Dump news and temporal attention on the test split");
  CLI::App* bt = app.add_subcommand("backtest", "Top-k daily rebalancing on the test period");
  for (CLI::App* s : {prepare, synth, train_cmd, eval, attn, bt}) add_common(s);
  for (CLI::App* s : {train_cmd, eval, attn, bt}) add_model(s);
  train_cmd->add_option("--spl", o.spl, "on or off");
  train_cmd->add_option("--ablate", o.ablate, "Disable news_attention, temporal_attention or bidirectional")
      ->take_all();
  train_cmd->add_option("--epochs", o.epochs, "Override train.epochs");
  train_cmd->add_option("--spl-lambda0", o.lambda0, "Fixed initial lambda (number or inf)");
  bt->add_option("--k", o.k, "Number of stocks held");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig cfg = load_config(config_path);
    apply_overrides(cfg, o);
    Context ctx{cfg, o.checkpoint.value_or(cfg.paths.out("checkpoint.bin")), out, err};
    if (prepare->parsed()) return cmd_prepare(ctx);
    if (synth->parsed()) return cmd_synth(ctx);
    if (train_cmd->parsed()) return cmd_train(ctx);
    if (eval->parsed()) return cmd_eval(ctx);
    if (attn->parsed()) return cmd_attn(ctx);
    return cmd_backtest(ctx);
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kCheckpointError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace newstrend::cli
