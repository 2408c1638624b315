#pragma once

// CSV panel ingestion and the standardized / 0-100 views of a manifest matrix.

#include "error.hpp"

#include <Eigen/Dense>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace latentpath {

struct Entity {
  std::string code;
  std::optional<int> year;

  friend bool operator==(const Entity&, const Entity&) = default;
  friend auto operator<=>(const Entity&, const Entity&) = default;
};

inline std::string to_string(const Entity& e) {
  return e.year ? e.code + "/" + std::to_string(*e.year) : e.code;
}

/// Names of the key columns in a panel file. An empty `year` means the file
/// has no year column and entities are keyed by code alone.
struct EntityColumns {
  std::string id = "country";
  std::string year = "year";
};

/// Entity x variable numeric panel. Missing cells are stored as NaN until
/// complete_cases removes them.
struct Dataset {
  std::vector<Entity> entities;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;

  [[nodiscard]] Eigen::Index rows() const { return values.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return values.cols(); }

  [[nodiscard]] std::optional<Eigen::Index> find_column(std::string_view name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j] == name) return static_cast<Eigen::Index>(j);
    return std::nullopt;
  }

  [[nodiscard]] Eigen::Index column_index(std::string_view name) const {
    if (auto j = find_column(name)) return *j;
    throw InputError("unknown column '" + std::string(name) + "'");
  }

  /// Copy of the named columns, in the order given.
  [[nodiscard]] Eigen::MatrixXd select(const std::vector<std::string>& names) const {
    Eigen::MatrixXd out(rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t k = 0; k < names.size(); ++k)
      out.col(static_cast<Eigen::Index>(k)) = values.col(column_index(names[k]));
    return out;
  }

  /// Checks the structural invariants; throws InputError on violation.
  void validate() const {
    if (values.rows() != static_cast<Eigen::Index>(entities.size()) ||
        values.cols() != static_cast<Eigen::Index>(columns.size()))
      throw InputError("dataset shape does not match its entity/column labels");
    std::set<std::string> names;
    for (const auto& c : columns)
      if (!names.insert(c).second) throw InputError("duplicate column '" + c + "'");
    std::set<Entity> keys;
    for (const auto& e : entities)
      if (!keys.insert(e).second) throw InputError("duplicate entity key '" + to_string(e) + "'");
  }
};

/// Summary of one column. `sd` uses the population divisor n.
struct ColumnStats {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;

  [[nodiscard]] bool degenerate() const { return sd == 0.0; }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "N/A" || s == "NaN" || s == "nan" || s == ".." ||
         s == "null";
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

inline std::optional<int> parse_int(const std::string& s) {
  auto v = parse_number(s);
  if (!v || *v != std::floor(*v) || std::abs(*v) > 1e9) return std::nullopt;
  return static_cast<int>(*v);
}

}  // namespace detail

/// Parses a comma-separated panel from a stream. `source` names the input in
/// error messages. Rows are kept in file order; when `year` is set only rows
/// with that year survive.
inline Dataset parse_csv(std::istream& in, const std::string& source,
                         const EntityColumns& keys = {}, std::optional<int> year = std::nullopt) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty file, header row expected");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header;
  for (auto& f : detail::split_csv_line(line)) header.push_back(detail::trim(f));

  auto locate = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return j;
    return std::nullopt;
  };
  const auto id_col = locate(keys.id);
  if (!id_col) throw InputError(source + ": entity column '" + keys.id + "' not in header");
  std::optional<std::size_t> year_col;
  if (!keys.year.empty()) {
    year_col = locate(keys.year);
    if (!year_col) throw InputError(source + ": year column '" + keys.year + "' not in header");
  } else if (year) {
    throw InputError(source + ": year filter requested but no year column configured");
  }

  Dataset d;
  std::vector<std::size_t> numeric;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == *id_col || (year_col && j == *year_col)) continue;
    numeric.push_back(j);
    d.columns.push_back(header[j]);
  }

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    ++data_row;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << source << ": row " << data_row << " (line " << line_no << ") has " << fields.size()
          << " fields, header has " << header.size();
      throw InputError(msg.str());
    }
    Entity e{detail::trim(fields[*id_col]), std::nullopt};
    if (year_col) {
      const auto y = detail::parse_int(detail::trim(fields[*year_col]));
      if (!y) {
        std::ostringstream msg;
        msg << source << ": row " << data_row << " (line " << line_no << "), column " << keys.year
            << ": '" << fields[*year_col] << "' is not an integer year";
        throw InputError(msg.str());
      }
      e.year = *y;
    }
    if (year && e.year != *year) continue;
    std::vector<double> vals;
    vals.reserve(numeric.size());
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      const std::string cell = detail::trim(fields[numeric[k]]);
      if (detail::is_missing_token(cell)) {
        vals.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto v = detail::parse_number(cell);
      if (!v) {
        std::ostringstream msg;
        msg << source << ": row " << data_row << " (line " << line_no << "), column "
            << d.columns[k] << ": '" << cell << "' is not numeric";
        throw InputError(msg.str());
      }
      vals.push_back(*v);
    }
    d.entities.push_back(std::move(e));
    rows.push_back(std::move(vals));
  }

  d.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

  try {
    d.validate();
  } catch (const InputError& err) {
    throw InputError(source + ": " + err.what());
  }
  return d;
}

inline Dataset load_csv(const std::string& path, const EntityColumns& keys = {},
                        std::optional<int> year = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  return parse_csv(in, path, keys, year);
}

/// Writes the dataset in the format parse_csv reads, at full precision.
inline void write_csv(std::ostream& out, const Dataset& d, const EntityColumns& keys = {}) {
  const bool with_year = !keys.year.empty();
  out << keys.id;
  if (with_year) out << ',' << keys.year;
  for (const auto& c : d.columns) out << ',' << c;
  out << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    const auto& e = d.entities[static_cast<std::size_t>(i)];
    out << e.code;
    if (with_year) out << ',' << e.year.value_or(0);
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      out << ',';
      if (std::isfinite(d.values(i, j))) out << d.values(i, j);
      else out << "NA";
    }
    out << '\n';
  }
}

struct CompleteCases {
  Dataset data;
  std::size_t dropped = 0;
};

/// Keeps the rows with a finite value in every listed column.
inline CompleteCases complete_cases(const Dataset& d, const std::vector<std::string>& columns) {
  std::vector<Eigen::Index> idx;
  for (const auto& c : columns) idx.push_back(d.column_index(c));
  CompleteCases out;
  out.data.columns = d.columns;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    bool ok = true;
    for (auto j : idx) ok = ok && std::isfinite(d.values(i, j));
    if (ok) keep.push_back(i);
  }
  out.dropped = static_cast<std::size_t>(d.rows()) - keep.size();
  if (keep.size() < 3) {
    throw InputError("complete-case filter leaves " + std::to_string(keep.size()) +
                     " rows; fewer than 3 rows, estimation impossible");
  }
  out.data.values.resize(static_cast<Eigen::Index>(keep.size()), d.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.data.values.row(static_cast<Eigen::Index>(r)) = d.values.row(keep[r]);
    out.data.entities.push_back(d.entities[static_cast<std::size_t>(keep[r])]);
  }
  return out;
}

inline ColumnStats column_stats(std::string name, const Eigen::Ref<const Eigen::VectorXd>& x) {
  ColumnStats s;
  s.name = std::move(name);
  if (x.size() == 0) return s;
  s.mean = x.mean();
  s.sd = std::sqrt((x.array() - s.mean).square().sum() / static_cast<double>(x.size()));
  s.min = x.minCoeff();
  s.max = x.maxCoeff();
  return s;
}

struct Standardized {
  Eigen::MatrixXd z;
  std::vector<ColumnStats> stats;
};

/// Z-scores of the named columns with the population (divisor n) sd.
inline Standardized standardize(const Dataset& d, const std::vector<std::string>& columns) {
  Standardized out;
  out.z.resize(d.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd x = d.values.col(d.column_index(columns[k]));
    if (!x.allFinite()) throw InputError("column '" + columns[k] + "' has missing values");
    auto s = column_stats(columns[k], x);
    if (s.sd <= 0.0) throw NumericError("column '" + columns[k] + "' has zero variance");
    Eigen::VectorXd z = (x.array() - s.mean) / s.sd;
    // second pass removes the rounding residue of the first
    z.array() -= z.mean();
    z /= std::sqrt(z.squaredNorm() / static_cast<double>(z.size()));
    out.z.col(kk) = z;
    out.stats.push_back(std::move(s));
  }
  return out;
}

/// Min-max map of each named column onto [0, 100]; inverted columns put the
/// smallest raw value at 100.
inline Eigen::MatrixXd scale_0_100(const Dataset& d, const std::vector<std::string>& columns,
                                   const std::vector<bool>& invert) {
  if (invert.size() != columns.size())
    throw InputError("scale_0_100: one invert flag per column required");
  Eigen::MatrixXd out(d.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd x = d.values.col(d.column_index(columns[k]));
    if (!x.allFinite()) throw InputError("column '" + columns[k] + "' has missing values");
    const double lo = x.minCoeff();
    const double hi = x.maxCoeff();
    if (!(hi > lo)) throw NumericError("column '" + columns[k] + "' has a degenerate range (max = min)");
    if (invert[k]) out.col(kk) = (hi - x.array()) / (hi - lo) * 100.0;
    else out.col(kk) = (x.array() - lo) / (hi - lo) * 100.0;
  }
  return out;
}

inline void write_stats_csv(std::ostream& out, const std::vector<ColumnStats>& stats) {
  out << "name,mean,sd,min,max\n" << std::setprecision(17);
  for (const auto& s : stats)
    out << s.name << ',' << s.mean << ',' << s.sd << ',' << s.min << ',' << s.max << '\n';
}

}  // namespace latentpath
