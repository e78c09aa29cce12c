#include "robsvd/dataset.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace robsvd {

CsvParseError::CsvParseError(std::size_t line, std::size_t column, std::string token)
    : Error(ErrorCode::ParseError,
            fmt::format("parse error at line {}, column {}: '{}'", line, column, token)),
      line_(line),
      column_(column),
      token_(std::move(token)) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_number(std::string_view token, double& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size() && std::isfinite(value);
}

}  // namespace

Dataset parse_csv(std::string_view text, bool has_header) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t start = 0, number = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
    ++number;
    if (!trim(line).empty()) lines.emplace_back(number, line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (lines.empty()) throw CsvParseError(1, 1, "");

  const char sep = lines.front().second.find(';') != std::string_view::npos ? ';' : ',';
  Dataset ds;
  std::size_t first = 0;
  if (has_header) {
    for (auto name : split(lines.front().second, sep)) ds.column_names.emplace_back(name);
    first = 1;
  }
  if (first >= lines.size()) throw CsvParseError(lines.back().first + 1, 1, "");

  std::size_t cols = 0;
  std::vector<double> data;
  for (std::size_t r = first; r < lines.size(); ++r) {
    auto [line_no, line] = lines[r];
    auto cells = split(line, sep);
    if (r == first) cols = cells.size();
    if (cells.size() != cols) {
      throw IndexedError(ErrorCode::RaggedRows, line_no,
                         fmt::format("line {} has {} fields, expected {}", line_no, cells.size(), cols));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_number(cells[c], v)) throw CsvParseError(line_no, c + 1, std::string(cells[c]));
      data.push_back(v);
    }
  }
  if (has_header && ds.column_names.size() != cols) {
    throw IndexedError(ErrorCode::RaggedRows, lines.front().first,
                       "header field count does not match the body");
  }
  std::size_t rows = data.size() / cols;
  ds.matrix = Matrix(rows, cols, std::move(data));
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), has_header);
}

Dataset standardize(const Dataset& ds, bool ddof1) {
  const Matrix& x = ds.matrix;
  const std::size_t m = x.rows(), n = x.cols();
  if (ddof1 && m < 2) throw Error(ErrorCode::InvalidArgument, "standardize: need two rows for ddof1");
  Dataset out = ds;
  out.standardized = true;
  out.column_means.assign(n, 0.0);
  out.column_sds.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += x(i, j);
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
    double sd = std::sqrt(ss / static_cast<double>(ddof1 ? m - 1 : m));
    if (!(sd > 1e-300) || sd <= 1e-14 * std::abs(mean)) {
      throw IndexedError(ErrorCode::ZeroVarianceColumn, j,
                         fmt::format("standardize: column {} has zero variance", j + 1));
    }
    out.column_means[j] = mean;
    out.column_sds[j] = sd;
    for (std::size_t i = 0; i < m; ++i) out.matrix(i, j) = (x(i, j) - mean) / sd;
  }
  return out;
}

Matrix unstandardize(const Dataset& ds, const Matrix& z) {
  if (!ds.standardized) return z;
  Matrix out = z;
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j)
      out(i, j) = z(i, j) * ds.column_sds[j] + ds.column_means[j];
  return out;
}

}  // namespace robsvd
