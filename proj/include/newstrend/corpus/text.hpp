#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"

namespace newstrend::corpus {

// Lowercased runs of ASCII alphanumerics.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Title tokens followed by content tokens.
inline std::vector<std::string> tokenize(const NewsRecord& r) {
  std::vector<std::string> t = tokenize(r.title);
  std::vector<std::string> c = tokenize(r.content);
  t.insert(t.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
  return t;
}

class Vocabulary {
 public:
  Vocabulary() = default;

  // Words ordered by index.
  explicit Vocabulary(std::vector<std::pair<std::string, std::size_t>> words_with_counts) {
    for (auto& [w, c] : words_with_counts) {
      index_.emplace(w, words_.size());
      counts_.push_back(c);
      words_.push_back(std::move(w));
    }
  }

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  std::size_t count(std::size_t i) const { return counts_.at(i); }
  const std::vector<std::string>& words() const { return words_; }

  std::optional<std::size_t> find(std::string_view w) const {
    auto it = index_.find(std::string(w));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view w) const { return find(w).has_value(); }

 private:
  std::vector<std::string> words_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Keeps words with count >= min_count that are not stopwords; index order is
// descending count, ties lexicographic.
inline Vocabulary build_vocabulary(const std::vector<NewsRecord>& news, const std::unordered_set<std::string>& stopwords,
                                   std::size_t min_count = 5) {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const NewsRecord& r : news) {
    for (std::string& tok : tokenize(r)) ++counts[std::move(tok)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [w, c] : counts) {
    if (c >= min_count && !stopwords.count(w)) kept.emplace_back(w, c);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return Vocabulary(std::move(kept));
}

}  // namespace newstrend::corpus
