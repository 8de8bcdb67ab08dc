#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "newstrend/binary_io.hpp"
#include "newstrend/corpus/labels.hpp"
#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"

namespace newstrend::corpus {

inline constexpr std::string_view kDatasetMagic = "NTDSET";
inline constexpr std::uint32_t kDatasetVersion = 1;

struct PreparedDataset {
  std::size_t dim = 0;
  std::size_t window = 0;
  LabelThresholds thresholds;
  DatasetSplit split;
};

// Daily corpora are written once and referenced by index from each sample.
inline void save_dataset(const std::string& path, const PreparedDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out.write(kDatasetMagic.data(), static_cast<std::streamsize>(kDatasetMagic.size()));
  bin::put(out, kDatasetVersion);
  bin::put<std::uint64_t>(out, ds.dim);
  bin::put<std::uint64_t>(out, ds.window);
  bin::put(out, ds.thresholds.down_cut);
  bin::put(out, ds.thresholds.up_cut);

  std::map<const DailyCorpus*, std::uint64_t> ids;
  std::vector<const DailyCorpus*> order;
  for (const auto* part : {&ds.split.train, &ds.split.validation, &ds.split.test}) {
    for (const Sample& s : *part) {
      for (const CorpusRef& c : s.window) {
        if (ids.emplace(c.get(), order.size()).second) order.push_back(c.get());
      }
    }
  }
  bin::put<std::uint64_t>(out, order.size());
  for (const DailyCorpus* c : order) {
    bin::put<std::int64_t>(out, c->date().serial());
    bin::put<std::uint64_t>(out, c->size());
    bin::put_doubles(out, c->flat());
  }
  for (const auto* part : {&ds.split.train, &ds.split.validation, &ds.split.test}) {
    bin::put<std::uint64_t>(out, part->size());
    for (const Sample& s : *part) {
      bin::put_string(out, s.stock_id);
      bin::put<std::int64_t>(out, s.target_date.serial());
      bin::put<std::uint8_t>(out, static_cast<std::uint8_t>(s.label));
      bin::put(out, s.rise_percent);
      for (const CorpusRef& c : s.window) bin::put<std::uint64_t>(out, ids.at(c.get()));
    }
  }
  if (!out) throw InputError("write failed for " + path);
}

inline PreparedDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset " + path);
  bin::Reader<InputError> r{in, path};
  r.expect_magic(kDatasetMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kDatasetVersion) {
    throw InputError(path + ": dataset version " + std::to_string(version) + " unsupported");
  }
  PreparedDataset ds;
  ds.dim = r.get_count(1 << 20);
  ds.window = r.get_count(1 << 20);
  ds.thresholds.down_cut = r.get<double>();
  ds.thresholds.up_cut = r.get<double>();
  const auto n_corpora = r.get_count();
  std::vector<CorpusRef> corpora;
  corpora.reserve(n_corpora);
  std::vector<double> buf;
  for (std::uint64_t i = 0; i < n_corpora; ++i) {
    const Date d = Date::from_serial(r.get<std::int64_t>());
    const auto n = r.get_count(1 << 20);
    auto c = std::make_shared<DailyCorpus>(d, ds.dim);
    buf.resize(ds.dim);
    for (std::uint64_t k = 0; k < n; ++k) {
      r.get_doubles(buf);
      c->push(buf);
    }
    corpora.push_back(std::move(c));
  }
  for (auto* part : {&ds.split.train, &ds.split.validation, &ds.split.test}) {
    const auto n = r.get_count();
    part->reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      Sample s;
      s.stock_id = r.get_string();
      s.target_date = Date::from_serial(r.get<std::int64_t>());
      const auto lab = r.get<std::uint8_t>();
      if (lab >= kNumClasses) throw InputError(path + ": bad label");
      s.label = static_cast<Label>(lab);
      s.rise_percent = r.get<double>();
      for (std::size_t k = 0; k < ds.window; ++k) {
        const auto id = r.get<std::uint64_t>();
        if (id >= corpora.size()) throw InputError(path + ": corpus index out of range");
        s.window.push_back(corpora[id]);
      }
      part->push_back(std::move(s));
    }
  }
  return ds;
}

}  // namespace newstrend::corpus
