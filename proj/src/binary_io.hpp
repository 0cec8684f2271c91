#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "sanvaad/error.hpp"

namespace sanvaad::detail {

template <typename UInt>
void append_le(std::string& buf, UInt value) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    buf.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

inline void append_f32(std::string& buf, float value) {
  append_le(buf, std::bit_cast<std::uint32_t>(value));
}

template <typename UInt>
UInt load_le(const char* p) {
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    value |= static_cast<UInt>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return value;
}

inline float load_f32(const char* p) { return std::bit_cast<float>(load_le<std::uint32_t>(p)); }

/// Bounds-checked cursor over an in-memory byte buffer.
class ByteReader {
 public:
  ByteReader(const std::string& data, ErrorCode truncated_code)
      : data_(data), code_(truncated_code) {}

  const char* take(std::size_t n) {
    if (n > data_.size() - pos_) {
      throw Error(code_, "unexpected end of data (truncated file)");
    }
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  template <typename UInt>
  UInt read() { return load_le<UInt>(take(sizeof(UInt))); }
  float read_f32() { return load_f32(take(4)); }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
  ErrorCode code_;
};

inline std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace sanvaad::detail
