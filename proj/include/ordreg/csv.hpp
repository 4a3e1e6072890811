#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ordreg/model.hpp"

namespace ordreg {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Eigen::Index column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("no column named '" + name + "'");
    return static_cast<Eigen::Index>(it - header.begin());
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
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
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double(const std::string& field, size_t row, const std::string& col) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  if (begin == end) {
    throw DataError("missing value at row " + std::to_string(row) + ", column '" + col + "'");
  }
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw DataError("non-numeric value '" + field + "' at row " + std::to_string(row) +
                    ", column '" + col + "'");
  }
  return value;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  table.header = detail::split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw DataError("row " + std::to_string(table.rows.size() + 2) + " of '" + path +
                      "' has " + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

// Response handling for ingestion: either one categorical column (levels
// ordered by first appearance unless given explicitly) or K+1 count columns.
struct IngestOptions {
  std::string response_column;
  std::vector<std::string> levels;
  std::vector<std::string> count_columns;
};

inline Dataset ingest_csv(const std::string& path, const IngestOptions& opts) {
  if (opts.response_column.empty() == opts.count_columns.empty()) {
    throw ConfigError("specify exactly one of a response column or count columns");
  }
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) throw DataError("'" + path + "' has no data rows");

  std::vector<Eigen::Index> response_cols;
  std::vector<char> is_response(table.header.size(), 0);
  if (!opts.response_column.empty()) {
    const Eigen::Index c = table.column(opts.response_column);
    response_cols.push_back(c);
    is_response[static_cast<size_t>(c)] = 1;
  } else {
    if (opts.count_columns.size() < 2) {
      throw ConfigError("need at least 2 count columns");
    }
    for (const auto& name : opts.count_columns) {
      const Eigen::Index c = table.column(name);
      response_cols.push_back(c);
      is_response[static_cast<size_t>(c)] = 1;
    }
  }

  Dataset data;
  for (size_t c = 0; c < table.header.size(); ++c) {
    if (!is_response[c]) data.x_names.push_back(table.header[c]);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
  const Eigen::Index p = static_cast<Eigen::Index>(data.x_names.size());
  data.x.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index xj = 0;
    for (size_t c = 0; c < table.header.size(); ++c) {
      if (is_response[c]) continue;
      data.x(i, xj++) = detail::parse_double(table.rows[static_cast<size_t>(i)][c],
                                             static_cast<size_t>(i) + 2, table.header[c]);
    }
  }

  if (!opts.response_column.empty()) {
    // Categorical response: expand to one-hot counts.
    std::vector<std::string> levels = opts.levels;
    const size_t rc = static_cast<size_t>(response_cols[0]);
    if (levels.empty()) {
      for (const auto& row : table.rows) {
        if (std::find(levels.begin(), levels.end(), row[rc]) == levels.end()) {
          levels.push_back(row[rc]);
        }
      }
    }
    if (levels.size() < 2) throw DataError("response has fewer than 2 categories");
    data.y = MatrixXd::Zero(n, static_cast<Eigen::Index>(levels.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::string& value = table.rows[static_cast<size_t>(i)][rc];
      const auto it = std::find(levels.begin(), levels.end(), value);
      if (it == levels.end()) {
        throw DataError("unknown response level '" + value + "' at row " +
                        std::to_string(i + 2));
      }
      data.y(i, static_cast<Eigen::Index>(it - levels.begin())) = 1.0;
    }
    data.y_names = levels;
  } else {
    data.y.resize(n, static_cast<Eigen::Index>(response_cols.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (size_t c = 0; c < response_cols.size(); ++c) {
        const size_t col = static_cast<size_t>(response_cols[c]);
        data.y(i, static_cast<Eigen::Index>(c)) =
            detail::parse_double(table.rows[static_cast<size_t>(i)][col],
                                 static_cast<size_t>(i) + 2, table.header[col]);
      }
    }
    data.y_names = opts.count_columns;
  }
  data.validate();
  return data;
}

}  // namespace ordreg
