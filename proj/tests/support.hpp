#pragma once

#include <filesystem>
#include <string>

#include "newstrend/corpus/pipeline.hpp"
#include "newstrend/corpus/synth.hpp"

namespace testsupport {

inline newstrend::corpus::PipelineOutput synth_dataset(const newstrend::corpus::SynthConfig& sc, std::uint64_t seed,
                                                       std::size_t window = 10) {
  const auto data = newstrend::corpus::synth_generate(sc, seed);
  newstrend::corpus::PipelineConfig pc;
  pc.window = window;
  pc.dim = sc.dim;
  pc.seed = seed;
  return newstrend::corpus::prepare_dataset(data.news, data.prices, {}, std::nullopt, pc);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("newstrend_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testsupport
