#pragma once

// Two-column "t,f" CSV files on a uniform grid t_j = j/N.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "dtfa/core.hpp"
#include "dtfa/error.hpp"

namespace dtfa::bench {

/// Largest accepted |t_j - j/N|·N, i.e. deviation relative to the spacing.
inline constexpr double kGridTolerance = 1e-9;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace detail

inline Signal load_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  std::vector<double> t, f;
  std::string line;
  std::size_t line_no = 0;
  bool seen_row = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = detail::trim(line);
    if (row.empty() || row.front() == '#') continue;
    const auto comma = row.find(',');
    double tv = 0.0, fv = 0.0;
    const bool ok = comma != std::string_view::npos && row.find(',', comma + 1) == std::string_view::npos &&
                    detail::parse_double(row.substr(0, comma), tv) && detail::parse_double(row.substr(comma + 1), fv);
    if (!ok) {
      if (!seen_row && t.empty() && comma != std::string_view::npos) {
        seen_row = true;  // header line
        continue;
      }
      fail(ErrorKind::parse, path + ":" + std::to_string(line_no) + ": expected two numeric columns t,f");
    }
    if (!std::isfinite(tv) || !std::isfinite(fv))
      fail(ErrorKind::parse, path + ":" + std::to_string(line_no) + ": non-finite value");
    seen_row = true;
    t.push_back(tv);
    f.push_back(fv);
  }
  if (in.bad()) fail(ErrorKind::io, "read error on '" + path + "'");
  if (t.size() < 2) fail(ErrorKind::parse, path + ": need at least two rows");
  const double n = static_cast<double>(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double deviation = std::abs(t[j] * n - static_cast<double>(j));
    if (deviation > kGridTolerance)
      fail(ErrorKind::non_uniform_grid, path + ": t at row " + std::to_string(j) + " deviates from j/N by " +
                                            std::to_string(deviation) + " spacings");
  }
  return Signal(TimeGrid(t.size()), std::move(f));
}

/// Writes t,f with 17 significant digits, enough for an exact round trip.
inline void write_signal_csv(const std::string& path, const Signal& signal) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
  std::fprintf(out, "t,f\n");
  const auto times = signal.times();
  for (std::size_t j = 0; j < signal.size(); ++j) std::fprintf(out, "%.17g,%.17g\n", times[j], signal.values()[j]);
  if (std::fclose(out) != 0) fail(ErrorKind::io, "cannot write '" + path + "'");
}

}  // namespace dtfa::bench
