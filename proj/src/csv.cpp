#include "wot/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wot/error.hpp"

namespace wot {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0 into 0
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_surface_csv(const std::string& path, const std::vector<std::vector<double>>& points,
                       const std::vector<double>& payoff, const std::vector<double>& transform) {
  if (points.size() != payoff.size() || points.size() != transform.size())
    throw ArgumentError("surface columns differ in length");
  auto out = open_out(path);
  const std::size_t d = points.empty() ? 1 : points.front().size();
  for (std::size_t k = 0; k < d; ++k) out << 'x' << (k + 1) << ',';
  out << "f,f_C\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (double x : points[i]) out << format_number(x) << ',';
    out << format_number(payoff[i]) << ',' << format_number(transform[i]) << '\n';
  }
  finish(out, path);
}

void write_surface_csv(const std::string& path, const CTransformGrid& grid) {
  write_surface_csv(path, grid.points, grid.payoff, grid.values);
}

void write_training_csv(const std::string& path, const std::vector<double>& raw,
                        const std::vector<double>& moving_average) {
  if (raw.size() != moving_average.size()) throw ArgumentError("training columns differ in length");
  auto out = open_out(path);
  out << "epoch,raw,ma100\n";
  for (std::size_t k = 0; k < raw.size(); ++k)
    out << (k + 1) << ',' << format_number(raw[k]) << ',' << format_number(moving_average[k]) << '\n';
  finish(out, path);
}

void write_bounds_csv(const std::string& path, const std::vector<PriceBounds>& rows) {
  auto out = open_out(path);
  out << "t,lower,lower_se,reference,reference_se,upper,upper_se\n";
  for (const auto& r : rows)
    out << format_number(r.t) << ',' << format_number(r.lower) << ',' << format_number(r.lower_se) << ','
        << format_number(r.reference) << ',' << format_number(r.reference_se) << ',' << format_number(r.upper)
        << ',' << format_number(r.upper_se) << '\n';
  finish(out, path);
}

void write_dim_sweep_csv(const std::string& path, const std::vector<DimSweepRow>& rows) {
  auto out = open_out(path);
  out << "d,option,upper,se,wall_seconds\n";
  for (const auto& r : rows)
    out << r.d << ',' << r.option << ',' << format_number(r.upper) << ',' << format_number(r.se) << ','
        << format_number(r.wall_seconds) << '\n';
  finish(out, path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  CsvTable table;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header) {
      table.header = std::move(cells);
      header = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

}  // namespace wot
