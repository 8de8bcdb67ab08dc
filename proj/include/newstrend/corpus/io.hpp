#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "newstrend/corpus/samples.hpp"
#include "newstrend/corpus/text.hpp"
#include "newstrend/corpus/types.hpp"
#include "newstrend/error.hpp"

namespace newstrend::corpus {

// Shortest form that round-trips a double.
inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

// One JSON object per line: {"timestamp", "stock_id", "title", "content"}.
inline std::vector<NewsRecord> read_news(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<NewsRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(where + "malformed JSON (" + e.what() + ")");
    }
    NewsRecord r;
    try {
      const auto ts = j.at("timestamp").get<std::string>();
      const auto d = Date::parse(ts);
      if (!d) throw InputError(where + "unparseable timestamp '" + ts + "'");
      r.timestamp = *d;
      r.stock_id = j.at("stock_id").get<std::string>();
      r.title = j.value("title", std::string());
      r.content = j.value("content", std::string());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(where + "bad record (" + e.what() + ")");
    }
    if (r.stock_id.empty()) throw InputError(where + "empty stock_id");
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_news(const std::string& path, const std::vector<NewsRecord>& news) {
  std::ofstream out = open_output(path);
  for (const NewsRecord& r : news) {
    nlohmann::ordered_json j;
    j["timestamp"] = r.timestamp.str();
    j["stock_id"] = r.stock_id;
    j["title"] = r.title;
    j["content"] = r.content;
    out << j.dump() << '\n';
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

// Header "date,stock_id,open".
inline std::vector<PriceBar> read_prices(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"date", "stock_id", "open"}) {
    throw InputError(path + ":1: expected header 'date,stock_id,open'");
  }
  std::vector<PriceBar> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) throw InputError(where + "expected 3 fields");
    const auto d = Date::parse(cells[0]);
    if (!d) throw InputError(where + "unparseable date '" + cells[0] + "'");
    if (cells[1].empty()) throw InputError(where + "empty stock_id");
    double open = 0.0;
    try {
      std::size_t used = 0;
      open = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument(cells[2]);
    } catch (const std::exception&) {
      throw InputError(where + "malformed open price '" + cells[2] + "'");
    }
    if (!(open > 0.0)) throw InputError(where + "open price must be positive");
    out.push_back({*d, cells[1], open});
  }
  return out;
}

inline void write_prices(const std::string& path, const std::vector<PriceBar>& prices) {
  std::ofstream out = open_output(path);
  out << "date,stock_id,open\n";
  for (const PriceBar& p : prices) out << p.date.str() << ',' << p.stock_id << ',' << fmt_double(p.open) << '\n';
}

// One word per line; blank lines ignored; words lowercased.
inline std::unordered_set<std::string> read_stopwords(const std::string& path) {
  std::ifstream in = open_input(path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    for (std::string& tok : tokenize(line)) out.insert(std::move(tok));
  }
  return out;
}

inline void write_skip_report(const std::string& path, const std::vector<SkipEntry>& skipped) {
  std::ofstream out = open_output(path);
  out << "stock_id,date,reason\n";
  for (const SkipEntry& s : skipped) out << s.stock_id << ',' << s.date.str() << ',' << s.reason << '\n';
}

}  // namespace newstrend::corpus
