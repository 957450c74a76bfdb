// csvio.hpp: CSV tables with '#' metadata, tabulated curves, binary grids.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mk/errors.hpp"

namespace mk {

struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;  // '# key: value'
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// Two-column (x, value) curve; '#' comment lines allowed; x strictly
// increasing is enforced by the consumer (spline construction).
std::pair<std::vector<double>, std::vector<double>> read_tabulated(
    const std::filesystem::path& path);

// Dense binary grid. Layout, all little-endian:
//   8 bytes magic "MKGRID1\n", u64 n_q, u64 n_p,
//   f64 q_min, q_max, p_min, p_max,
//   n_q*n_p f64 values, row-major with q as the slow index.
struct GridData {
  std::uint64_t n_q = 0, n_p = 0;
  double q_min = 0, q_max = 0, p_min = 0, p_max = 0;
  std::vector<double> values;
};

void write_grid(const std::filesystem::path& path, const GridData& grid);
GridData read_grid(const std::filesystem::path& path);

}  // namespace mk
