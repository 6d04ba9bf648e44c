#pragma once

#include <string>
#include <vector>

#include "quadinfer/dataset.hpp"

namespace quadinfer {

struct CsvIngestOptions {
  // Response column: header name, or (if no header matches and the string is
  // all digits) a 0-based column index.
  std::string response = "y";
  bool center = true;
  // Cell contents treated as missing and imputed by the column mean of the
  // observed values.
  std::vector<std::string> missing_tokens = {"", "NA"};
  double rank_tol = kRankTol;
};

struct CsvIngestInfo {
  std::string response_name;
  std::vector<std::string> column_names;  // retained predictors, original order
  std::vector<int> dropped_columns;       // indices into the original predictor order
  std::vector<std::string> dropped_names;
  int imputed_cells = 0;
  int rows = 0;
};

// Reads a comma-delimited UTF-8 file with a header row into a Dataset:
// missing cells imputed by column means, then optional centering, then rank
// repair.  Throws ParseError (bad cell, with row/column location), ConfigError
// (missing response column), DimensionError (no usable rows/predictors).
Dataset ingest_csv(const std::string& path, const CsvIngestOptions& opts,
                   CsvIngestInfo* info = nullptr);

} // namespace quadinfer
