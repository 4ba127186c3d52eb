#include "cli_util.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>
#include <thread>

namespace cli {

namespace {

double to_double(const std::string& s, const std::string& name) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) throw UsageError(name + ": empty value");
  const std::string t = s.substr(b, e - b + 1);
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) throw UsageError(name + ": cannot parse '" + t + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text, const std::string& name) {
  if (text.find(':') != std::string::npos) {
    auto parts = split(text, ':');
    bool geometric = false;
    if (!parts.empty() && parts[0] == "log") {
      geometric = true;
      parts.erase(parts.begin());
    }
    if (parts.size() != 3) throw UsageError(name + ": range must be a:b:n or log:a:b:n");
    const double a = to_double(parts[0], name), b = to_double(parts[1], name);
    const double nd = to_double(parts[2], name);
    if (nd < 1 || nd != std::floor(nd)) throw UsageError(name + ": point count must be a positive integer");
    const int n = static_cast<int>(nd);
    if (geometric && (a <= 0.0 || b <= 0.0)) throw UsageError(name + ": log range needs positive ends");
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k) {
      const double t = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
      v[k] = geometric ? a * std::pow(b / a, t) : a + (b - a) * t;
    }
    if (n > 1) v.back() = b;
    return v;
  }
  std::vector<double> v;
  for (const auto& p : split(text, ',')) v.push_back(to_double(p, name));
  if (v.empty()) throw UsageError(name + ": empty grid");
  return v;
}

std::vector<int> parse_int_grid(const std::string& text, const std::string& name) {
  std::vector<int> out;
  for (double x : parse_grid(text, name)) {
    if (x != std::round(x)) throw UsageError(name + ": values must be integers");
    out.push_back(static_cast<int>(std::lround(x)));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

void check(spl_status st, const std::string& what) {
  if (st != SPL_OK) throw std::runtime_error(what + ": " + spl_last_error());
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string tag(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

void Provenance::write(std::ostream& out) const {
  out << "# spinline " << spl_version() << " " << command << "\n";
  out << "# config_hash=fnv1a64:" << config_hash << "\n";
  out << "# seed=" << seed << "\n";
  out << "# constants=" << spl_constant_set() << "\n";
  out << "# generated=" << utc_timestamp() << "\n";
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace cli
