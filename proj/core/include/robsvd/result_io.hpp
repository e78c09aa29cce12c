#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "robsvd/matrix.hpp"

namespace robsvd {

/// Ordered key = value document. Scalars print on one line; vectors and
/// matrices print a shape header followed by tab-separated rows:
///
///   s = 0.5
///   weights = vector 3
///   1	0.9	0.2
///   approximation = matrix 2 2
///   1	2
///   3	4
class ResultDocument {
 public:
  using Value = std::variant<double, std::string, std::vector<double>, Matrix>;
  struct Entry {
    std::string key;
    Value value;
  };

  void set(std::string key, Value value);
  const Value* find(std::string_view key) const;

  double number(std::string_view key) const;
  const std::string& text(std::string_view key) const;
  const std::vector<double>& vector(std::string_view key) const;
  const Matrix& matrix(std::string_view key) const;

  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// Doubles are written with 17 significant digits, so parse(serialize(d))
  /// reproduces every value exactly.
  std::string serialize() const;
  /// Throws CsvParseError (ParseError) with the offending line.
  static ResultDocument parse(std::string_view text);

 private:
  std::vector<Entry> entries_;
};

/// Row-per-line TSV rendering with a fixed number of decimals.
std::string format_matrix(const Matrix& m, int decimals = 4);

}  // namespace robsvd
