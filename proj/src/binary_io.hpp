#ifndef GFM_SRC_BINARY_IO_HPP
#define GFM_SRC_BINARY_IO_HPP

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include "gfm/common.hpp"

// Little-endian stream helpers shared by the GFMD and GFMC formats.

namespace gfm::detail {

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw_io("cannot open '" + path + "' for writing");
  }
  void u8(uint8_t v) { raw(&v, 1); }
  void u16(uint16_t v) { raw(&v, 2); }
  void u32(uint32_t v) { raw(&v, 4); }
  void f64(double v) {
    auto bits = std::bit_cast<uint64_t>(v);
    raw(&bits, 8);
  }
  void str(const std::string& s) {
    if (s.size() > 0xffff) throw_io("string too long for format");
    u16(static_cast<uint16_t>(s.size()));
    raw(s.data(), s.size());
  }
  void bytes(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void f64_block(const double* p, int64_t n) { raw(p, static_cast<size_t>(n) * 8); }
  void close() {
    out_.close();
    if (!out_) throw_io("write to '" + path_ + "' failed");
  }

 private:
  void raw(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw_io("write to '" + path_ + "' failed");
  }
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw_io("cannot open '" + path + "'");
  }
  uint8_t u8() {
    uint8_t v;
    raw(&v, 1);
    return v;
  }
  uint16_t u16() {
    uint16_t v;
    raw(&v, 2);
    return v;
  }
  uint32_t u32() {
    uint32_t v;
    raw(&v, 4);
    return v;
  }
  double f64() {
    uint64_t bits;
    raw(&bits, 8);
    return std::bit_cast<double>(bits);
  }
  std::string str() {
    const uint16_t n = u16();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  std::string bytes() {
    const uint32_t n = u32();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  void f64_block(double* p, int64_t n) { raw(p, static_cast<size_t>(n) * 8); }
  size_t offset() const { return offset_; }
  bool at_eof() {
    in_.peek();
    return in_.eof();
  }
  const std::string& path() const { return path_; }

 private:
  void raw(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n)
      throw_io("'" + path_ + "': truncated at byte " +
               std::to_string(offset_ + static_cast<size_t>(in_.gcount())));
    offset_ += n;
  }
  std::ifstream in_;
  std::string path_;
  size_t offset_ = 0;
};

}  // namespace gfm::detail

#endif  // GFM_SRC_BINARY_IO_HPP
