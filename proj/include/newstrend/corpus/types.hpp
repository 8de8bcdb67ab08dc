#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "newstrend/corpus/date.hpp"
#include "newstrend/error.hpp"

namespace newstrend::corpus {

struct NewsRecord {
  Date timestamp;
  std::string stock_id;
  std::string title;
  std::string content;
};

struct PriceBar {
  Date date;
  std::string stock_id;
  double open = 0.0;
};

enum class Label : std::size_t { down = 0, preserve = 1, up = 2 };
inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<const char*, kNumClasses> kLabelNames = {"DOWN", "PRESERVE", "UP"};

inline const char* label_name(Label l) { return kLabelNames[static_cast<std::size_t>(l)]; }

// News vectors published for one stock on one trading day, stored as an
// L x dim row-major block (L may be zero).
class DailyCorpus {
 public:
  DailyCorpus() = default;
  DailyCorpus(Date date, std::size_t dim) : date_(date), dim_(dim) {}

  Date date() const { return date_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : flat_.size() / dim_; }
  bool empty() const { return flat_.empty(); }

  std::span<const double> news(std::size_t i) const { return {flat_.data() + i * dim_, dim_}; }
  std::span<const double> flat() const { return flat_; }

  void push(std::span<const double> vec) {
    if (vec.size() != dim_) {
      throw ShapeError("news vector of length " + std::to_string(vec.size()) + " in corpus of dim " +
                       std::to_string(dim_));
    }
    flat_.insert(flat_.end(), vec.begin(), vec.end());
  }

 private:
  Date date_;
  std::size_t dim_ = 0;
  std::vector<double> flat_;
};

using CorpusRef = std::shared_ptr<const DailyCorpus>;

struct Sample {
  std::string stock_id;
  Date target_date;
  std::vector<CorpusRef> window;  // oldest first, dates t-N .. t-1
  Label label = Label::preserve;
  double rise_percent = 0.0;
};

struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
};

}  // namespace newstrend::corpus
