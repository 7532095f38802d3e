#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace mtg {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path + " for reading");
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(Errc::io, "read failed for " + path);
  return s;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot open " + path + " for writing");
  out.write(content.data(), std::streamsize(content.size()));
  out.flush();
  if (!out) fail(Errc::io, "write failed for " + path);
}

// Little-endian binary stream helpers for the checkpoint and dataset formats.
// The formats are defined little-endian; a big-endian host would need swaps.
class BinWriter {
 public:
  explicit BinWriter(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) fail(Errc::io, "cannot open " + path + " for writing");
  }
  void bytes(const void* p, size_t n) { out_.write(static_cast<const char*>(p), std::streamsize(n)); }
  void u8(uint8_t v) { bytes(&v, 1); }
  void u16(uint16_t v) { bytes(&v, 2); }
  void u32(uint32_t v) { bytes(&v, 4); }
  void u64(uint64_t v) { bytes(&v, 8); }
  void i32(int32_t v) { bytes(&v, 4); }
  void i64(int64_t v) { bytes(&v, 8); }
  void f32(float v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  void str(const std::string& s) {
    if (s.size() > UINT32_MAX) fail(Errc::invalid_argument, "string too long for binary format");
    u32(uint32_t(s.size()));
    bytes(s.data(), s.size());
  }
  void close() {
    out_.flush();
    if (!out_) fail(Errc::io, "write failed for " + path_);
    out_.close();
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) fail(Errc::io, "cannot open " + path + " for reading");
  }
  void bytes(void* p, size_t n) {
    in_.read(static_cast<char*>(p), std::streamsize(n));
    if (size_t(in_.gcount()) != n) fail(Errc::parse, path_ + ": truncated file");
  }
  uint8_t u8() { uint8_t v; bytes(&v, 1); return v; }
  uint16_t u16() { uint16_t v; bytes(&v, 2); return v; }
  uint32_t u32() { uint32_t v; bytes(&v, 4); return v; }
  uint64_t u64() { uint64_t v; bytes(&v, 8); return v; }
  int32_t i32() { int32_t v; bytes(&v, 4); return v; }
  int64_t i64() { int64_t v; bytes(&v, 8); return v; }
  float f32() { float v; bytes(&v, 4); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  std::string str(uint32_t max_len = 1u << 20) {
    uint32_t n = u32();
    if (n > max_len) fail(Errc::parse, path_ + ": string length " + std::to_string(n) + " out of range");
    std::string s(n, '\0');
    if (n) bytes(s.data(), n);
    return s;
  }
  bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
};

}  // namespace mtg
