#include "robsvd/result_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>

#include "robsvd/dataset.hpp"
#include "robsvd/error.hpp"

namespace robsvd {

namespace {

std::string number_text(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

bool read_number(std::string_view token, double& v) {
  if (token == "inf") {
    v = INFINITY;
    return true;
  }
  if (token == "-inf") {
    v = -INFINITY;
    return true;
  }
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t pos = line.find(sep, start);
    auto f = trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (!f.empty()) out.push_back(f);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void ResultDocument::set(std::string key, Value value) {
  for (auto& e : entries_) {
    if (e.key == key) {
      e.value = std::move(value);
      return;
    }
  }
  entries_.push_back({std::move(key), std::move(value)});
}

const ResultDocument::Value* ResultDocument::find(std::string_view key) const {
  for (const auto& e : entries_)
    if (e.key == key) return &e.value;
  return nullptr;
}

template <class T>
static const T& get(const ResultDocument& doc, std::string_view key) {
  const auto* v = doc.find(key);
  if (v == nullptr || !std::holds_alternative<T>(*v)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("result: no entry '{}' of that kind", key));
  }
  return std::get<T>(*v);
}

double ResultDocument::number(std::string_view key) const { return get<double>(*this, key); }
const std::string& ResultDocument::text(std::string_view key) const {
  return get<std::string>(*this, key);
}
const std::vector<double>& ResultDocument::vector(std::string_view key) const {
  return get<std::vector<double>>(*this, key);
}
const Matrix& ResultDocument::matrix(std::string_view key) const { return get<Matrix>(*this, key); }

std::string ResultDocument::serialize() const {
  std::string out;
  for (const auto& e : entries_) {
    out += e.key;
    out += " = ";
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) {
            out += number_text(v);
            out += '\n';
          } else if constexpr (std::is_same_v<T, std::string>) {
            out += '"';
            out += v;
            out += "\"\n";
          } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            out += fmt::format("vector {}\n", v.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
              if (i) out += '\t';
              out += number_text(v[i]);
            }
            out += '\n';
          } else {
            out += fmt::format("matrix {} {}\n", v.rows(), v.cols());
            for (std::size_t i = 0; i < v.rows(); ++i) {
              for (std::size_t j = 0; j < v.cols(); ++j) {
                if (j) out += '\t';
                out += number_text(v(i, j));
              }
              out += '\n';
            }
          }
        },
        e.value);
  }
  return out;
}

ResultDocument ResultDocument::parse(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    lines.push_back(text.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }

  ResultDocument doc;
  std::size_t i = 0;
  auto read_row = [&](std::size_t expected, std::vector<double>& dst) {
    if (i >= lines.size()) throw CsvParseError(i + 1, 1, "");
    auto cells = fields(lines[i], '\t');
    if (cells.size() != expected) {
      throw CsvParseError(i + 1, 1, std::string(lines[i]));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!read_number(cells[c], v)) throw CsvParseError(i + 1, c + 1, std::string(cells[c]));
      dst.push_back(v);
    }
    ++i;
  };

  while (i < lines.size()) {
    std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') {
      ++i;
      continue;
    }
    std::size_t eq = line.find(" = ");
    if (eq == std::string_view::npos) throw CsvParseError(i + 1, 1, std::string(line));
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 3));
    ++i;
    auto words = fields(value, ' ');
    std::size_t r = 0, c = 0;
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      doc.set(std::move(key), std::string(value.substr(1, value.size() - 2)));
    } else if (words.size() == 2 && words[0] == "vector" &&
        std::from_chars(words[1].data(), words[1].data() + words[1].size(), r).ec == std::errc()) {
      std::vector<double> v;
      if (r > 0) read_row(r, v);
      doc.set(std::move(key), std::move(v));
    } else if (words.size() == 3 && words[0] == "matrix" &&
               std::from_chars(words[1].data(), words[1].data() + words[1].size(), r).ec ==
                   std::errc() &&
               std::from_chars(words[2].data(), words[2].data() + words[2].size(), c).ec ==
                   std::errc()) {
      std::vector<double> data;
      for (std::size_t k = 0; k < r; ++k) read_row(c, data);
      doc.set(std::move(key), Matrix(r, c, std::move(data)));
    } else {
      double v = 0.0;
      if (read_number(value, v)) doc.set(std::move(key), v);
      else doc.set(std::move(key), std::string(value));
    }
  }
  return doc;
}

std::string format_matrix(const Matrix& m, int decimals) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += '\t';
      out += fmt::format("{:.{}f}", m(i, j), decimals);
    }
    out += '\n';
  }
  return out;
}

}  // namespace robsvd
