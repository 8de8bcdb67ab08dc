#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

#include "newstrend/binary_io.hpp"
#include "newstrend/error.hpp"
#include "newstrend/model/params.hpp"

namespace newstrend::model {

inline constexpr std::string_view kCheckpointMagic = "NTHAN";
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(std::ostream& out, const HanParams& p) {
  const HyperParams& h = p.hyper();
  out.write(kCheckpointMagic.data(), static_cast<std::streamsize>(kCheckpointMagic.size()));
  bin::put(out, kCheckpointVersion);
  for (std::size_t v : {h.dim, h.hidden, h.window, h.max_news, h.temporal_dim}) bin::put<std::uint64_t>(out, v);
  bin::put<std::uint64_t>(out, h.mlp_hidden.size());
  for (std::size_t w : h.mlp_hidden) bin::put<std::uint64_t>(out, w);
  for (bool b : {h.arch.news_attention, h.arch.temporal_attention, h.arch.bidirectional}) {
    bin::put<std::uint8_t>(out, b ? 1 : 0);
  }
  bin::put<std::uint64_t>(out, p.size());
  for (const NamedTensor& t : p) {
    bin::put_string(out, t.name);
    const auto dims = t.value.shape().dims();
    bin::put<std::uint64_t>(out, dims.size());
    for (std::size_t d : dims) bin::put<std::uint64_t>(out, d);
    bin::put_doubles(out, t.value.data());
  }
}

inline void save_checkpoint(const std::string& path, const HanParams& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path);
  save_checkpoint(out, p);
  if (!out) throw CheckpointError("failed writing checkpoint " + path);
}

inline HanParams load_checkpoint(std::istream& in, const std::string& what) {
  bin::Reader<CheckpointError> r{in, what};
  r.expect_magic(kCheckpointMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(what + ": checkpoint version " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  }
  HyperParams h;
  h.dim = r.get<std::uint64_t>();
  h.hidden = r.get<std::uint64_t>();
  h.window = r.get<std::uint64_t>();
  h.max_news = r.get<std::uint64_t>();
  h.temporal_dim = r.get<std::uint64_t>();
  h.mlp_hidden.resize(r.get_count(1024));
  for (auto& w : h.mlp_hidden) w = r.get<std::uint64_t>();
  h.arch.news_attention = r.get<std::uint8_t>() != 0;
  h.arch.temporal_attention = r.get<std::uint8_t>() != 0;
  h.arch.bidirectional = r.get<std::uint8_t>() != 0;

  HanParams p;
  try {
    p = HanParams(h);
  } catch (const ConfigError& e) {
    throw CheckpointError(what + ": invalid hyperparameters: " + e.what());
  }
  if (r.get_count() != p.size()) throw CheckpointError(what + ": tensor count does not match hyperparameters");
  for (auto& t : p) {
    const std::string name = r.get_string();
    if (name != t.name) throw CheckpointError(what + ": expected tensor " + t.name + ", found " + name);
    const auto rank = r.get_count(ad::Shape::kMaxRank);
    const auto dims = t.value.shape().dims();
    bool match = rank == dims.size();
    for (std::size_t i = 0; i < rank; ++i) {
      const auto d = r.get<std::uint64_t>();
      match = match && d == dims[i];
    }
    if (!match) throw CheckpointError(what + ": tensor " + name + " does not have shape " + t.value.shape().str());
    r.get_doubles(t.value.data());
  }
  return p;
}

inline HanParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  return load_checkpoint(in, path);
}

}  // namespace newstrend::model
