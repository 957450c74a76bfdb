#include "mk/csvio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "grid files are little-endian; byte swapping is not implemented");

namespace mk {
namespace {

constexpr char grid_magic[8] = {'M', 'K', 'G', 'R', 'I', 'D', '1', '\n'};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DomainError("bad numeric token '" + tok + "' in " + where);
  }
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  for (const auto& [key, value] : table.metadata)
    out << "# " << key << ": " << value << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << table.columns[c] << (c + 1 < table.columns.size() ? "," : "");
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw DomainError("csv row width does not match column count");
    for (std::size_t c = 0; c < row.size(); ++c)
      out << row[c] << (c + 1 < row.size() ? "," : "");
    out << "\n";
  }
  if (!out) throw DomainError("write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string::npos) {
        table.metadata.emplace_back(body, "");
      } else {
        table.metadata.emplace_back(trim(body.substr(0, colon)),
                                    trim(body.substr(colon + 1)));
      }
      continue;
    }
    std::vector<std::string> tokens;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) tokens.push_back(trim(tok));
    if (!have_header) {
      table.columns = tokens;
      have_header = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(tokens.size());
    for (const auto& t : tokens) row.push_back(parse_number(t, path.string()));
    if (row.size() != table.columns.size())
      throw DomainError("ragged csv row in " + path.string());
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::pair<std::vector<double>, std::vector<double>> read_tabulated(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::vector<double> xs, ys;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    for (auto& ch : line)
      if (ch == ',' || ch == '\t') ch = ' ';
    std::stringstream ss(line);
    double x = 0, y = 0;
    if (!(ss >> x >> y))
      throw DomainError("expected two numeric columns in " + path.string());
    std::string rest;
    if (ss >> rest)
      throw DomainError("trailing token '" + rest + "' in " + path.string());
    xs.push_back(x);
    ys.push_back(y);
  }
  if (xs.size() < 2)
    throw DomainError("tabulated curve in " + path.string() +
                      " needs at least two rows");
  return {std::move(xs), std::move(ys)};
}

void write_grid(const std::filesystem::path& path, const GridData& grid) {
  if (grid.values.size() != grid.n_q * grid.n_p)
    throw DomainError("grid value count does not match dims");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out.write(grid_magic, sizeof(grid_magic));
  auto put = [&out](const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  put(&grid.n_q, 8);
  put(&grid.n_p, 8);
  put(&grid.q_min, 8);
  put(&grid.q_max, 8);
  put(&grid.p_min, 8);
  put(&grid.p_max, 8);
  put(grid.values.data(), 8 * grid.values.size());
  if (!out) throw DomainError("write failed for " + path.string());
}

GridData read_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, grid_magic, 8) != 0)
    throw DomainError(path.string() + " is not a grid file");
  GridData grid;
  auto get = [&in](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  };
  get(&grid.n_q, 8);
  get(&grid.n_p, 8);
  get(&grid.q_min, 8);
  get(&grid.q_max, 8);
  get(&grid.p_min, 8);
  get(&grid.p_max, 8);
  if (!in) throw DomainError("truncated grid header in " + path.string());
  if (grid.n_q == 0 || grid.n_p == 0 || grid.n_q * grid.n_p > (1ull << 28))
    throw DomainError("unreasonable grid dims in " + path.string());
  grid.values.resize(grid.n_q * grid.n_p);
  get(grid.values.data(), 8 * grid.values.size());
  if (!in) throw DomainError("truncated grid data in " + path.string());
  return grid;
}

}  // namespace mk
