#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace newstrend::corpus {

// Calendar day.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days d) : days_(d) {}
  constexpr Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}) {}

  // Accepts "YYYY-MM-DD", optionally followed by a 'T' or ' ' time part,
  // which is ignored.
  static std::optional<Date> parse(std::string_view text) {
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
    }
    y = (text[0] - '0') * 1000 + (text[1] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
    m = static_cast<unsigned>((text[5] - '0') * 10 + (text[6] - '0'));
    d = static_cast<unsigned>((text[8] - '0') * 10 + (text[9] - '0'));
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date(std::chrono::sys_days(ymd));
  }

  std::string str() const {
    const std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }

  constexpr std::int64_t serial() const { return days_.time_since_epoch().count(); }
  static constexpr Date from_serial(std::int64_t n) { return Date(std::chrono::sys_days(std::chrono::days(n))); }

  constexpr Date plus_days(std::int64_t n) const { return Date(days_ + std::chrono::days(n)); }
  bool is_weekday() const {
    const std::chrono::weekday wd{days_};
    return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
  }

  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace newstrend::corpus
