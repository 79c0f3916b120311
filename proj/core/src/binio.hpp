#pragma once

// Little-endian primitive encoding shared by the take and parameter files.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "ictus/error.hpp"

namespace ictus::detail {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    buf_.append(p, sizeof(T));
  }
  void put_bytes(std::string_view bytes) { buf_.append(bytes); }
  void put_string(std::string_view s) {
    put<std::uint64_t>(s.size());
    put_bytes(s);
  }
  void put_doubles(const double* data, std::size_t n) {
    buf_.append(reinterpret_cast<const char*>(data), n * sizeof(double));
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::string get_string() {
    const auto n = get<std::uint64_t>();
    return std::string(get_bytes(static_cast<std::size_t>(n)));
  }
  void get_doubles(double* out, std::size_t n) {
    if (n > remaining() / sizeof(double)) throw Error(Errc::truncated, "file ends inside a numeric array");
    std::memcpy(out, data_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) throw Error(Errc::truncated, "unexpected end of file");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace ictus::detail
