#include "qpaths/harness/result_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <istream>
#include <stdexcept>

namespace qpaths::harness {

namespace {

template <class Int>
Int parse_int(std::string_view text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("malformed integer '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("malformed number '" + std::string(text) + "'");
  }
  return v;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    out << to_string(r.mode) << ',' << format_double(r.q) << ',' << r.T << ',' << r.seed << ','
        << format_double(r.log_lower) << ',' << format_double(r.log_upper) << ','
        << format_double(r.z_estimate) << ',' << format_double(r.ess) << ',' << r.n_invalid << ','
        << format_double(r.wall_ms) << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::invalid_argument("line 1: expected header '" + std::string(kCsvHeader) + "'");
  }
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto f = split(line);
      if (f.size() != 10) throw std::invalid_argument("expected 10 fields");
      ResultRow r;
      r.mode = parse_mode(f[0]);
      r.q = parse_double(f[1]);
      r.T = parse_int<std::size_t>(f[2]);
      r.seed = parse_int<std::uint64_t>(f[3]);
      r.log_lower = parse_double(f[4]);
      r.log_upper = parse_double(f[5]);
      r.z_estimate = parse_double(f[6]);
      r.ess = parse_double(f[7]);
      r.n_invalid = parse_int<std::size_t>(f[8]);
      r.wall_ms = parse_double(f[9]);
      rows.push_back(r);
    } catch (const std::exception& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

void write_jsonl(std::ostream& out, const std::vector<ResultRow>& rows) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  for (const ResultRow& r : rows) {
    nlohmann::ordered_json j;
    j["mode"] = std::string(to_string(r.mode));
    j["q"] = num(r.q);
    j["T"] = r.T;
    j["seed"] = r.seed;
    j["log_lower"] = num(r.log_lower);
    j["log_upper"] = num(r.log_upper);
    j["z_estimate"] = num(r.z_estimate);
    j["ess"] = num(r.ess);
    j["n_invalid"] = r.n_invalid;
    j["wall_ms"] = num(r.wall_ms);
    out << j.dump() << '\n';
  }
}

void write_density_grid_csv(std::ostream& out, const std::vector<DensityGridRow>& rows) {
  out << kDensityGridHeader << '\n';
  for (const DensityGridRow& r : rows) {
    out << format_double(r.q) << ',' << format_double(r.beta) << ',' << format_double(r.z) << ','
        << format_double(r.log_density) << '\n';
  }
}

}  // namespace qpaths::harness
