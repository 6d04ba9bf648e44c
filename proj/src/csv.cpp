#include "quadinfer/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "quadinfer/errors.hpp"

namespace quadinfer {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

double parse_cell(const std::string& text, int row, const std::string& column) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError("row " + std::to_string(row) + ", column '" + column +
                     "': cannot parse '" + text + "' as a number");
  }
  return value;
}

} // namespace

Dataset ingest_csv(const std::string& path, const CsvIngestOptions& opts,
                   CsvIngestInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open input file '" + path + "'");
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("'" + path + "': missing header row");
  }
  const std::vector<std::string> header = split_row(line);
  const int cols = static_cast<int>(header.size());

  // Resolve the response column: by header name first, then by 0-based index.
  int response_col = -1;
  for (int j = 0; j < cols; ++j) {
    if (header[j] == opts.response) {
      response_col = j;
      break;
    }
  }
  if (response_col < 0 && all_digits(opts.response)) {
    const int idx = std::atoi(opts.response.c_str());
    if (idx >= 0 && idx < cols) response_col = idx;
  }
  if (response_col < 0) {
    throw ConfigError("response column '" + opts.response + "' not found in '" +
                      path + "'");
  }

  const auto is_missing = [&](const std::string& cell) {
    return std::find(opts.missing_tokens.begin(), opts.missing_tokens.end(),
                     cell) != opts.missing_tokens.end();
  };

  // Parse all rows; missing predictor cells become NaN markers for imputation.
  std::vector<double> y_values;
  std::vector<std::vector<double>> x_rows;
  int file_row = 1; // the header was row 1
  int imputed = 0;
  while (std::getline(in, line)) {
    ++file_row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_row(line);
    if (static_cast<int>(cells.size()) != cols) {
      throw ParseError("row " + std::to_string(file_row) + " has " +
                       std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(cols));
    }
    std::vector<double> row;
    row.reserve(cols - 1);
    for (int j = 0; j < cols; ++j) {
      if (j == response_col) {
        if (is_missing(cells[j])) {
          throw ParseError("row " + std::to_string(file_row) + ", column '" +
                           header[j] + "': the response cannot be missing");
        }
        y_values.push_back(parse_cell(cells[j], file_row, header[j]));
      } else if (is_missing(cells[j])) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        row.push_back(parse_cell(cells[j], file_row, header[j]));
      }
    }
    x_rows.push_back(std::move(row));
  }

  const int n = static_cast<int>(y_values.size());
  const int p = cols - 1;
  if (p < 1) {
    throw DimensionError("'" + path + "' has no predictor columns");
  }
  if (n < 2) {
    throw DimensionError("'" + path + "' has fewer than 2 data rows");
  }

  std::vector<std::string> predictor_names;
  predictor_names.reserve(p);
  for (int j = 0; j < cols; ++j) {
    if (j != response_col) predictor_names.push_back(header[j]);
  }

  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = x_rows[i][j];
  }

  // Impute missing predictor cells with the column mean of the observed values.
  for (int j = 0; j < p; ++j) {
    double sum = 0.0;
    int seen = 0;
    for (int i = 0; i < n; ++i) {
      if (!std::isnan(x(i, j))) {
        sum += x(i, j);
        ++seen;
      }
    }
    if (seen == 0) {
      throw DimensionError("column '" + predictor_names[j] +
                           "' has no observed values");
    }
    const double mean = sum / seen;
    for (int i = 0; i < n; ++i) {
      if (std::isnan(x(i, j))) {
        x(i, j) = mean;
        ++imputed;
      }
    }
  }

  Dataset d;
  d.y = Eigen::Map<Eigen::VectorXd>(y_values.data(), n);
  d.x = std::move(x);
  if (opts.center) d = center_dataset(d);

  auto [repaired, dropped] = repair_rank(d.x, opts.rank_tol);
  d.x = std::move(repaired);
  d.dropped_columns = dropped;

  if (info != nullptr) {
    info->response_name = header[response_col];
    info->dropped_columns = dropped;
    info->dropped_names.clear();
    info->column_names.clear();
    std::size_t next_drop = 0;
    for (int j = 0; j < p; ++j) {
      if (next_drop < dropped.size() && dropped[next_drop] == j) {
        info->dropped_names.push_back(predictor_names[j]);
        ++next_drop;
      } else {
        info->column_names.push_back(predictor_names[j]);
      }
    }
    info->imputed_cells = imputed;
    info->rows = n;
  }
  return d;
}

} // namespace quadinfer
