#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinline/spinline.h"

namespace cli {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grids: "a,b,c" lists, "a:b:n" linear (inclusive), "log:a:b:n" geometric.
std::vector<double> parse_grid(const std::string& text, const std::string& name);
std::vector<int> parse_int_grid(const std::string& text, const std::string& name);
std::string join(const std::vector<std::string>& parts, const std::string& sep = ",");

// Throws std::runtime_error carrying spl_last_error() when st != SPL_OK.
void check(spl_status st, const std::string& what);

std::uint64_t fnv1a(const std::string& text);
std::string hex(std::uint64_t v);
std::string utc_timestamp();

// Shortest round-trip text for a double; "nan" and "inf" spelled out.
std::string num(double x);
std::string tag(double x);  // compact label for file names

struct Provenance {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  void write(std::ostream& out) const;
};

// Runs f(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

struct CellError {
  std::string cell;
  std::string message;
};

}  // namespace cli
