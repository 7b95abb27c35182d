#pragma once

#include <string>
#include <vector>

#include "wot/ctransform.hpp"
#include "wot/risk.hpp"

namespace wot {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

/// Header `x1[,x2,...],f,f_C`, one row per grid point in grid order.
void write_surface_csv(const std::string& path, const std::vector<std::vector<double>>& points,
                       const std::vector<double>& payoff, const std::vector<double>& transform);
void write_surface_csv(const std::string& path, const CTransformGrid& grid);

/// Header `epoch,raw,ma100`; epochs are numbered from 1.
void write_training_csv(const std::string& path, const std::vector<double>& raw,
                        const std::vector<double>& moving_average);

/// Header `t,lower,lower_se,reference,reference_se,upper,upper_se`.
void write_bounds_csv(const std::string& path, const std::vector<PriceBounds>& rows);

struct DimSweepRow {
  int d = 1;
  std::string option;
  double upper = 0.0;
  double se = 0.0;
  double wall_seconds = 0.0;
};
/// Header `d,option,upper,se,wall_seconds`.
void write_dim_sweep_csv(const std::string& path, const std::vector<DimSweepRow>& rows);

/// Reads a CSV with a header line into (header, rows of cells).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::string& path);

}  // namespace wot
