#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "newstrend/error.hpp"

namespace newstrend::bin {

// Little-endian host layout, length-prefixed strings and arrays.
template <typename T>
  requires std::is_trivially_copyable_v<T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void put_doubles(std::ostream& out, std::span<const double> xs) {
  out.write(reinterpret_cast<const char*>(xs.data()), static_cast<std::streamsize>(xs.size() * sizeof(double)));
}

template <typename Error>
struct Reader {
  std::istream& in;
  std::string what;

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  T get() {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error(what + ": truncated file");
    return v;
  }

  std::uint64_t get_count(std::uint64_t limit = (1ULL << 34)) {
    const auto n = get<std::uint64_t>();
    if (n > limit) throw Error(what + ": implausible length " + std::to_string(n));
    return n;
  }

  std::string get_string() {
    std::string s(get_count(1ULL << 20), '\0');
    in.read(s.data(), static_cast<std::streamsize>(s.size()));
    if (!in) throw Error(what + ": truncated file");
    return s;
  }

  void get_doubles(std::span<double> xs) {
    in.read(reinterpret_cast<char*>(xs.data()), static_cast<std::streamsize>(xs.size() * sizeof(double)));
    if (!in) throw Error(what + ": truncated file");
  }

  void expect_magic(std::string_view magic) {
    std::string got(magic.size(), '\0');
    in.read(got.data(), static_cast<std::streamsize>(got.size()));
    if (!in || got != magic) throw Error(what + ": bad magic (expected " + std::string(magic) + ")");
  }
};

}  // namespace newstrend::bin
