#include "altune/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "altune/config.hpp"

namespace altune {

namespace {

constexpr const char* kRegressionHeader = "bullet_speed,bullet_size,fire_rate,hits";
constexpr const char* kPreferenceHeader = "drag,thrust,prev_drag,prev_thrust,label";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void expect_header(std::istream& in, const char* header) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != header)
    throw std::runtime_error(std::string("line 1: expected header '") + header + "'");
}

DesignPoint read_point(const std::vector<std::string>& fields, std::size_t count, std::size_t line_no,
                       const ParameterSpace& space) {
  DesignPoint p;
  for (std::size_t i = 0; i < count; ++i) p.values.push_back(to_double(fields[i], line_no));
  if (!space.contains(p))
    throw std::runtime_error("line " + std::to_string(line_no) + ": point outside the parameter space");
  return p;
}

void write_point(std::ostream& out, const DesignPoint& p) {
  for (double v : p.values) out << format_double(v) << ',';
}

template <typename T, typename F>
std::vector<T> read_rows(std::istream& in, const char* header, std::size_t columns, F&& parse) {
  expect_header(in, header);
  std::vector<T> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != columns)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                               " fields, got " + std::to_string(fields.size()));
    rows.push_back(parse(fields, line_no));
  }
  return rows;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_regression_csv(std::ostream& out, const std::vector<RegressionSample>& samples) {
  out << kRegressionHeader << '\n';
  for (const auto& s : samples) {
    write_point(out, s.point);
    out << format_double(s.hits) << '\n';
  }
}

std::vector<RegressionSample> read_regression_csv(std::istream& in, const ParameterSpace& space) {
  if (space.dimension() != 3) throw std::invalid_argument("regression data needs a 3-d space");
  return read_rows<RegressionSample>(in, kRegressionHeader, 4, [&](const auto& f, std::size_t n) {
    RegressionSample s{read_point(f, 3, n, space), to_double(f[3], n)};
    if (s.hits < 0.0) throw std::runtime_error("line " + std::to_string(n) + ": negative hits");
    return s;
  });
}

void write_preference_csv(std::ostream& out, const std::vector<PreferenceSample>& samples) {
  out << kPreferenceHeader << '\n';
  for (const auto& s : samples) {
    write_point(out, s.point);
    out << to_string(s.label) << '\n';
  }
}

std::vector<PreferenceSample> read_preference_csv(std::istream& in, const ParameterSpace& space) {
  if (space.dimension() != 4) throw std::invalid_argument("preference data needs a 4-d space");
  return read_rows<PreferenceSample>(in, kPreferenceHeader, 5, [&](const auto& f, std::size_t n) {
    PreferenceSample s;
    s.point = read_point(f, 4, n, space);
    try {
      s.label = parse_preference(f[4]);
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("line " + std::to_string(n) + ": label must be better or worse");
    }
    return s;
  });
}

void save_regression_csv(const std::filesystem::path& path, const std::vector<RegressionSample>& samples) {
  auto out = open_out(path);
  write_regression_csv(out, samples);
}

std::vector<RegressionSample> load_regression_csv(const std::filesystem::path& path,
                                                  const ParameterSpace& space) {
  auto in = open_in(path);
  return read_regression_csv(in, space);
}

void save_preference_csv(const std::filesystem::path& path, const std::vector<PreferenceSample>& samples) {
  auto out = open_out(path);
  write_preference_csv(out, samples);
}

std::vector<PreferenceSample> load_preference_csv(const std::filesystem::path& path,
                                                  const ParameterSpace& space) {
  auto in = open_in(path);
  return read_preference_csv(in, space);
}

}  // namespace altune
