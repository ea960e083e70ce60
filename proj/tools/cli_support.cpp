#include "cli_support.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mrcwpt/error.hpp"

namespace mrcwpt::cli {

namespace {

double to_number(const std::string& s, const std::string& spec) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || !std::isfinite(v))
    throw ValidationError("'" + s + "' is not a finite number in '" + spec + "'", "sweep");
  return v;
}

}  // namespace

std::vector<double> sweep_values(double a, double b, double step) {
  if (!(step > 0.0)) throw ValidationError("step must be > 0", "sweep");
  if (!(b >= a)) throw ValidationError("end must not be below start", "sweep");
  const double k = std::round((b - a) / step);
  if (k > 1e7) throw ValidationError("more than 1e7 points", "sweep");
  const auto K = static_cast<std::size_t>(k);
  std::vector<double> out(K + 1);
  for (std::size_t i = 0; i < K; ++i) out[i] = a + static_cast<double>(i) * step;
  out[K] = b;
  return out;
}

Sweep parse_sweep(const std::string& spec, std::size_t receivers) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ValidationError("expected name=a:b:step, got '" + spec + "'", "sweep");
  Sweep s;
  s.name = spec.substr(0, eq);
  const std::string range = spec.substr(eq + 1);
  const auto c1 = range.find(':'), c2 = range.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos || range.find(':', c2 + 1) != std::string::npos)
    throw ValidationError("expected a:b:step, got '" + range + "'", "sweep");
  s.values = sweep_values(to_number(range.substr(0, c1), spec), to_number(range.substr(c1 + 1, c2 - c1 - 1), spec),
                          to_number(range.substr(c2 + 1), spec));

  if (s.name == "w") {
    s.base = "w";
    return s;
  }
  const auto us = s.name.rfind('_');
  if (us == std::string::npos || us + 1 == s.name.size())
    throw ValidationError("unknown sweep variable '" + s.name + "'", "sweep");
  s.base = s.name.substr(0, us);
  const std::string idx = s.name.substr(us + 1);
  if (idx.find_first_not_of("0123456789") != std::string::npos)
    throw ValidationError("unknown sweep variable '" + s.name + "'", "sweep");
  const unsigned long n = std::stoul(idx);
  if (n < 1 || n > receivers)
    throw ValidationError("receiver index " + idx + " outside 1.." + std::to_string(receivers), "sweep");
  s.index = n - 1;
  return s;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

std::string resolve_scenario(const std::string& arg, const std::string& dir) {
  namespace fs = std::filesystem;
  if (fs::exists(arg)) return arg;
  const bool bare = arg.find('/') == std::string::npos && fs::path(arg).extension().empty();
  if (bare) {
    const fs::path p = fs::path(dir) / (arg + ".yaml");
    if (fs::exists(p)) return p.string();
  }
  throw ValidationError("no such file or bundled scenario: '" + arg + "'", "scenario");
}

}  // namespace mrcwpt::cli
