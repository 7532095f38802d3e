#pragma once

#include <stdexcept>
#include <string>

namespace mtg {

// Error categories. The numeric values are part of the C API contract
// (mtg_status in include/mtg.h) and of the CLI exit status.
enum class Errc {
  invalid_argument = 1,
  shape_mismatch = 2,
  state = 3,
  io = 4,
  parse = 5,
  numeric = 6,
  digest_mismatch = 7,
  internal = 8,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::state: return "state";
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::numeric: return "numeric";
    case Errc::digest_mismatch: return "digest_mismatch";
    case Errc::internal: return "internal";
  }
  return "internal";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace mtg
