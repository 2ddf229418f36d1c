#pragma once

// Trial log serialization. One header line, comma separated, '\n' line
// endings, floats with 9 significant digits.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curvecast/experiment.hpp"

namespace curvecast {

inline constexpr std::string_view kTrialCsvHeader =
    "participant_id,technique,distance_multiple,lateral_offset_m,amplitude_m,width_m,"
    "id_bits,repetition,seed,movement_time_s,success,endpoint_azimuth_rad,"
    "endpoint_height_m,target_azimuth_rad,target_height_m,click_diameter_m,"
    "start_azimuth_rad,start_height_m";

class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline void put_float(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  os << buf;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(begin));
      return out;
    }
    out.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

template <class T>
T parse_int(std::string_view s, std::size_t line, std::string_view field) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw CsvError(line, "bad integer in field '" + std::string(field) + "': '" + std::string(s) + "'");
  }
  return v;
}

inline double parse_float(std::string_view s, std::size_t line, std::string_view field) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw CsvError(line, "bad number in field '" + std::string(field) + "': '" + tmp + "'");
  }
  return v;
}

}  // namespace detail

inline void write_csv(const std::vector<TrialRecord>& records, std::ostream& os) {
  os << kTrialCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.participant_id << ',' << to_string(r.technique) << ',';
    detail::put_float(os, r.distance_multiple); os << ',';
    detail::put_float(os, r.lateral_offset_m); os << ',';
    detail::put_float(os, r.amplitude_m); os << ',';
    detail::put_float(os, r.width_m); os << ',';
    detail::put_float(os, r.id_bits); os << ',';
    os << r.repetition << ',' << r.seed << ',';
    detail::put_float(os, r.movement_time_s); os << ',';
    os << (r.success ? 1 : 0) << ',';
    detail::put_float(os, r.endpoint_azimuth_rad); os << ',';
    detail::put_float(os, r.endpoint_height_m); os << ',';
    detail::put_float(os, r.target_azimuth_rad); os << ',';
    detail::put_float(os, r.target_height_m); os << ',';
    detail::put_float(os, r.click_diameter_m); os << ',';
    detail::put_float(os, r.start_azimuth_rad); os << ',';
    detail::put_float(os, r.start_height_m);
    os << '\n';
  }
}

inline void write_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(records, os);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

inline std::vector<TrialRecord> read_csv(std::istream& is) {
  std::vector<TrialRecord> out;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw CsvError(1, "missing header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrialCsvHeader) throw CsvError(lineno, "unexpected header");
  const auto names = detail::split_fields(kTrialCsvHeader);

  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != names.size()) {
      throw CsvError(lineno, "expected " + std::to_string(names.size()) + " fields, found " +
                                 std::to_string(f.size()));
    }
    TrialRecord r;
    std::size_t i = 0;
    auto num = [&] { const auto k = i++; return detail::parse_float(f[k], lineno, names[k]); };
    r.participant_id = detail::parse_int<int>(f[i], lineno, names[i]); ++i;
    try {
      r.technique = parse_technique(f[i]);
    } catch (const std::invalid_argument& e) {
      throw CsvError(lineno, e.what());
    }
    ++i;
    r.distance_multiple = num();
    r.lateral_offset_m = num();
    r.amplitude_m = num();
    r.width_m = num();
    r.id_bits = num();
    r.repetition = detail::parse_int<int>(f[i], lineno, names[i]); ++i;
    r.seed = detail::parse_int<std::uint64_t>(f[i], lineno, names[i]); ++i;
    r.movement_time_s = num();
    const int success = detail::parse_int<int>(f[i], lineno, names[i]);
    if (success != 0 && success != 1) throw CsvError(lineno, "success must be 0 or 1");
    r.success = success == 1; ++i;
    r.endpoint_azimuth_rad = num();
    r.endpoint_height_m = num();
    r.target_azimuth_rad = num();
    r.target_height_m = num();
    r.click_diameter_m = num();
    r.start_azimuth_rad = num();
    r.start_height_m = num();
    out.push_back(r);
  }
  return out;
}

inline std::vector<TrialRecord> read_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(is);
}

}  // namespace curvecast
