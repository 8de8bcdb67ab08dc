#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>

#include "newstrend/corpus/io.hpp"
#include "newstrend/model/han.hpp"

namespace newstrend::model {

// day_offset runs from -N (oldest window day) to -1 (day before target).
inline void export_attention(std::span<const corpus::Sample> samples, const HanParams& params, std::ostream& alpha,
                             std::ostream& beta) {
  alpha << "stock_id,target_date,day_offset,news_index,alpha\n";
  beta << "stock_id,target_date,day_offset,beta\n";
  for (const corpus::Sample& s : samples) {
    const ForwardTrace t = forward(params, s);
    const auto n = static_cast<std::int64_t>(t.beta.size());
    const std::string key = s.stock_id + "," + s.target_date.str() + ",";
    for (std::int64_t i = 0; i < n; ++i) {
      const std::string offset = std::to_string(i - n);
      for (std::size_t k = 0; k < t.alpha[static_cast<std::size_t>(i)].size(); ++k) {
        alpha << key << offset << ',' << k << ',' << corpus::fmt_double(t.alpha[static_cast<std::size_t>(i)][k])
              << '\n';
      }
      beta << key << offset << ',' << corpus::fmt_double(t.beta[static_cast<std::size_t>(i)]) << '\n';
    }
  }
}

inline void export_attention(std::span<const corpus::Sample> samples, const HanParams& params,
                             const std::string& alpha_path, const std::string& beta_path) {
  std::ofstream alpha = corpus::open_output(alpha_path);
  std::ofstream beta = corpus::open_output(beta_path);
  export_attention(samples, params, alpha, beta);
  if (!alpha || !beta) throw InputError("failed writing attention dump to " + alpha_path + " / " + beta_path);
}

}  // namespace newstrend::model
