#pragma once

#include <stdexcept>
#include <string>

namespace spinline {

enum class Errc : int {
  ok = 0,
  invalid_argument = 1,
  domain = 2,
  no_convergence = 3,
  io = 4,
  internal = 5,
};

// All core failures derive from this so the C layer can map them to codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, const std::string& what, Errc code = Errc::invalid_argument) {
  if (!ok) fail(code, what);
}

}  // namespace spinline
