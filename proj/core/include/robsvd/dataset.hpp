#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "robsvd/error.hpp"
#include "robsvd/matrix.hpp"

namespace robsvd {

struct Dataset {
  std::vector<std::string> column_names;  // empty without a header row
  Matrix matrix;
  bool standardized = false;
  std::vector<double> column_means;
  std::vector<double> column_sds;
};

/// Unparseable CSV cell; line and column are 1-based.
class CsvParseError : public Error {
 public:
  CsvParseError(std::size_t line, std::size_t column, std::string token);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& token() const noexcept { return token_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string token_;
};

/// Numeric CSV with ',' or ';' separators (detected from the first line).
/// Throws CsvParseError, IndexedError(RaggedRows, line).
Dataset parse_csv(std::string_view text, bool has_header);
Dataset load_csv(const std::filesystem::path& path, bool has_header);

/// Centres every column and scales it to unit variance (divisor m, or m - 1
/// with `ddof1`). Throws IndexedError(ZeroVarianceColumn, j).
Dataset standardize(const Dataset& ds, bool ddof1 = false);

/// Maps a matrix in standardized coordinates back to the original units.
Matrix unstandardize(const Dataset& ds, const Matrix& z);

}  // namespace robsvd
