#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "newstrend/corpus/dataset_io.hpp"
#include "newstrend/corpus/embeddings.hpp"
#include "newstrend/corpus/labels.hpp"
#include "newstrend/corpus/samples.hpp"
#include "newstrend/corpus/split.hpp"
#include "newstrend/corpus/text.hpp"

namespace newstrend::corpus {

enum class ThresholdMode { defaults, quantile, fixed };

struct PipelineConfig {
  std::size_t window = 10;
  std::size_t max_news = 8;
  std::size_t min_count = 5;
  std::size_t dim = 32;
  ThresholdMode threshold_mode = ThresholdMode::defaults;
  LabelThresholds fixed_thresholds;
  double train_fraction = 2.0 / 3.0;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct PipelineOutput {
  PreparedDataset dataset;
  std::vector<SkipEntry> skipped;
  std::size_t vocabulary_size = 0;
};

inline std::uint64_t embedding_seed(std::uint64_t seed) { return mix64(seed ^ 0x6a09e667f3bcc909ULL); }
inline std::uint64_t split_seed(std::uint64_t seed) { return mix64(seed ^ 0xbb67ae8584caa73bULL); }

// Vocabulary over all news, embeddings (file or deterministic fallback),
// windows, chronological split, then labels. Quantile thresholds are fitted
// on the rises of the train period (train + validation) only.
inline PipelineOutput prepare_dataset(const std::vector<NewsRecord>& news, const std::vector<PriceBar>& prices,
                                      const std::unordered_set<std::string>& stopwords,
                                      const std::optional<std::string>& embeddings_path, const PipelineConfig& cfg) {
  const Vocabulary vocab = build_vocabulary(news, stopwords, cfg.min_count);
  const WordEmbeddings emb = embeddings_path ? load_embeddings(*embeddings_path, vocab, embedding_seed(cfg.seed))
                                             : deterministic_embeddings(vocab, cfg.dim, embedding_seed(cfg.seed));
  LabelThresholds th =
      cfg.threshold_mode == ThresholdMode::fixed ? cfg.fixed_thresholds : LabelThresholds::defaults();
  if (!(th.down_cut < th.up_cut)) throw ConfigError("label thresholds must satisfy down < up");
  SampleSet set = build_samples(news, prices, emb, vocab, cfg.window, cfg.max_news, th);
  if (set.samples.empty()) throw InputError("no samples: every stock lacks a full window of prices");

  PipelineOutput out;
  out.skipped = std::move(set.skipped);
  out.vocabulary_size = vocab.size();
  out.dataset.dim = emb.dim();
  out.dataset.window = cfg.window;
  out.dataset.split = split_dataset(set.samples, cfg.train_fraction, cfg.val_fraction, split_seed(cfg.seed));
  if (cfg.threshold_mode == ThresholdMode::quantile) {
    std::vector<double> rises;
    for (const auto* part : {&out.dataset.split.train, &out.dataset.split.validation}) {
      for (const Sample& s : *part) rises.push_back(s.rise_percent);
    }
    th = compute_thresholds(rises);
    relabel(out.dataset.split.train, th);
    relabel(out.dataset.split.validation, th);
    relabel(out.dataset.split.test, th);
  }
  out.dataset.thresholds = th;
  return out;
}

}  // namespace newstrend::corpus
