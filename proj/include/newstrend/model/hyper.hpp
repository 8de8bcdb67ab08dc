#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "newstrend/error.hpp"

namespace newstrend::model {

// Which HAN components are active. All on is the full model; the baselines
// switch single components off.
struct Architecture {
  bool news_attention = true;
  bool temporal_attention = true;
  bool bidirectional = true;

  // Baseline name for this switch combination.
  std::string name() const {
    if (!bidirectional) {
      if (!news_attention && !temporal_attention) return "One-RNN";
      return "One-RNN+" + std::string(news_attention ? "news" : "") +
             (news_attention && temporal_attention ? "+" : "") + (temporal_attention ? "temporal" : "");
    }
    if (news_attention && temporal_attention) return "HAN";
    if (news_attention) return "News-ATT";
    if (temporal_attention) return "Temp-ATT";
    return "News-RNN";
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct HyperParams {
  std::size_t dim = 32;
  std::size_t hidden = 32;
  std::size_t window = 10;
  std::size_t max_news = 8;
  std::vector<std::size_t> mlp_hidden = {64, 32};
  // Width of o_i and theta_i; 0 means "same as hidden".
  std::size_t temporal_dim = 0;
  Architecture arch;

  std::size_t encoded_dim() const { return arch.bidirectional ? 2 * hidden : hidden; }
  std::size_t attention_dim() const { return temporal_dim == 0 ? hidden : temporal_dim; }

  void validate() const {
    if (dim < 1) throw ConfigError("model.dim must be >= 1");
    if (hidden < 1) throw ConfigError("model.hidden must be >= 1");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (max_news < 1) throw ConfigError("max_news_per_day must be >= 1");
    for (std::size_t w : mlp_hidden) {
      if (w < 1) throw ConfigError("model.mlp_hidden widths must be >= 1");
    }
  }

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

}  // namespace newstrend::model
