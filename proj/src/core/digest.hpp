#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace mtg {

// Streaming SHA-256. Used for artifact digests in run manifests, so the
// output must match the standard test vectors exactly.
class Sha256 {
 public:
  Sha256();
  void update(const void* data, size_t len);
  std::array<uint8_t, 32> finish();

 private:
  void block(const uint8_t* p);
  uint32_t h_[8];
  uint64_t total_ = 0;
  uint8_t buf_[64];
  size_t buflen_ = 0;
};

std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::string& path);  // throws Error(io) on open/read failure

}  // namespace mtg
