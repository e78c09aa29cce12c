#include <gtest/gtest.h>

#include <random>

#include "robsvd/dataset.hpp"
#include "robsvd/result_io.hpp"

using namespace robsvd;

TEST(Csv, PlainAndHeader) {
  auto ds = parse_csv("1,2\n3,4", false);
  EXPECT_EQ(ds.matrix, Matrix::from_rows({{1, 2}, {3, 4}}));
  auto hd = parse_csv("a,b\n1,2\n", true);
  EXPECT_EQ(hd.column_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(hd.matrix, Matrix::from_rows({{1, 2}}));
}

TEST(Csv, SemicolonBlankLinesAndBom) {
  auto ds = parse_csv("\xEF\xBB\xBFx;y\r\n1.5;-2\r\n\r\n3;4e1\r\n", true);
  EXPECT_EQ(ds.column_names[0], "x");
  EXPECT_EQ(ds.matrix, Matrix::from_rows({{1.5, -2}, {3, 40}}));
}

TEST(Csv, ParseErrorLocatesToken) {
  try {
    (void)parse_csv("1,x", false);
    FAIL();
  } catch (const CsvParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 2u);
    EXPECT_EQ(e.token(), "x");
  }
}

TEST(Csv, RaggedRows) {
  try {
    (void)parse_csv("1,2\n3\n", false);
    FAIL();
  } catch (const IndexedError& e) {
    EXPECT_EQ(e.code(), ErrorCode::RaggedRows);
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(Standardize, UnitColumns) {
  Dataset ds;
  ds.matrix = Matrix::from_rows({{0, 1}, {2, 5}});
  auto z = standardize(ds);
  EXPECT_EQ(z.matrix(0, 0), -1.0);
  EXPECT_EQ(z.matrix(1, 0), 1.0);
  EXPECT_TRUE(z.standardized);
  EXPECT_LT(max_abs(unstandardize(z, z.matrix) - ds.matrix), 1e-14);
}

TEST(Standardize, IdempotentAndMoments) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd(3.0, 2.0);
  Dataset ds;
  ds.matrix = Matrix(30, 4);
  for (double& v : ds.matrix.data()) v = nd(gen);
  auto z = standardize(ds);
  for (std::size_t j = 0; j < 4; ++j) {
    auto c = z.matrix.column(j);
    double mean = 0, var = 0;
    for (double v : c) mean += v / c.size();
    for (double v : c) var += (v - mean) * (v - mean) / c.size();
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-10);
  }
  EXPECT_LT(max_abs(standardize(z).matrix - z.matrix), 1e-10);
}

TEST(Standardize, ZeroVariance) {
  Dataset ds;
  ds.matrix = Matrix::from_rows({{1, 3}, {2, 3}});
  try {
    (void)standardize(ds);
    FAIL();
  } catch (const IndexedError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVarianceColumn);
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(ResultDocument, RoundTrip) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> nd;
  ResultDocument doc;
  doc.set("s", 0.1 + 0.2);
  doc.set("k1", INFINITY);
  doc.set("q", std::string("4"));
  std::vector<double> v;
  for (int i = 0; i < 7; ++i) v.push_back(nd(gen) * 1e-7);
  doc.set("weights", v);
  Matrix m(3, 2);
  for (double& x : m.data()) x = nd(gen) * 1e5;
  doc.set("approximation", m);
  doc.set("empty", std::vector<double>{});
  doc.set("label", std::string("vector 3"));

  auto back = ResultDocument::parse(doc.serialize());
  EXPECT_EQ(back.number("s"), 0.1 + 0.2);
  EXPECT_EQ(back.number("k1"), INFINITY);
  EXPECT_EQ(back.text("q"), "4");
  EXPECT_EQ(back.vector("weights"), v);
  EXPECT_EQ(back.matrix("approximation"), m);
  EXPECT_TRUE(back.vector("empty").empty());
  EXPECT_EQ(back.text("label"), "vector 3");
  EXPECT_EQ(back.serialize(), doc.serialize());
}

TEST(ResultDocument, MalformedInput) {
  EXPECT_THROW((void)ResultDocument::parse("a = matrix 2 2\n1\t2\n"), CsvParseError);
  EXPECT_THROW((void)ResultDocument::parse("no equals sign\n"), CsvParseError);
  ResultDocument doc;
  EXPECT_THROW((void)doc.number("missing"), Error);
}
