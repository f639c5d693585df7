#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rnng/beam/search.hpp"
#include "rnng/corpus/tree.hpp"
#include "rnng/metrics/metrics.hpp"
#include "rnng/metrics/table.hpp"
#include "table_model.hpp"

using namespace rnng;
using namespace rnng::metrics;

namespace {

BracketScore score(const char* gold, const char* predicted) {
  return score_brackets(corpus::parse_bracketed(gold), corpus::parse_bracketed(predicted));
}

}  // namespace

TEST_CASE("halving the beam mass costs one bit") {
  CHECK(surprisal(std::log(0.8), std::log(0.4)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(surprisal(-3.0, -3.0) == 0.0);
  CHECK_THROWS_AS(surprisal(std::log(0.4), std::log(0.8)), ConsistencyError);
}

TEST_CASE("entropy of a renormalized beam") {
  const std::vector<double> lp = {std::log(0.5), std::log(0.25), std::log(0.25)};
  CHECK(entropy(lp) == doctest::Approx(1.5).epsilon(1e-15));
  const std::vector<double> scaled = {std::log(0.05), std::log(0.025), std::log(0.025)};
  CHECK(entropy(scaled) == doctest::Approx(1.5).epsilon(1e-14));
  const std::vector<double> single = {-7.0};
  CHECK(entropy(single) == 0.0);
  CHECK(entropy_delta(1.5, 1.0) == doctest::Approx(-0.5));
}

TEST_CASE("distance counts search passes") {
  const auto m = testing::hand_trace_model();
  const std::vector<testing::TableModel::State> start = {{"", 0.0}};
  const auto w =
      beam::advance_word(m, std::span<const testing::TableModel::State>(start), 0, 2, 0, testing::hand_trace_config());
  CHECK(distance(w.record) == 3);
}

TEST_CASE("metric rows from a hand trace") {
  const auto m = testing::hand_trace_model();
  const auto cfg = testing::hand_trace_config();
  const std::vector<testing::TableModel::State> start = {{"", 0.0}};
  const auto w1 = beam::advance_word(m, std::span<const testing::TableModel::State>(start), 0, 2, 0, cfg);
  const auto w2 = beam::advance_word(m, std::span<const testing::TableModel::State>(w1.beam), 0, 2, 1, cfg);
  const std::vector<beam::SearchRecord> records = {w1.record, w2.record};
  const std::vector<std::string> tokens = {"the", "Gryphon"};
  const auto rows = metric_rows(3, tokens, records);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].sent == 3);
  CHECK(rows[0].distance == 3);
  CHECK(rows[1].distance == 2);
  CHECK(std::abs(rows[0].surprisal + std::log2(0.21)) < 1e-12);
  CHECK(std::abs(rows[1].surprisal - std::log2(2.5)) < 1e-12);
  const double z = 0.21 + 0.18 + 0.12;
  double h = 0.0;
  for (double p : {0.21, 0.18, 0.12}) h -= p / z * std::log2(p / z);
  CHECK(std::abs(rows[0].entropy - h) < 1e-12);
  CHECK(rows[0].entropy_delta == rows[0].entropy);
  CHECK(std::abs(rows[1].entropy_delta - (rows[1].entropy - rows[0].entropy)) < 1e-15);
  CHECK_FALSE(rows[0].content);
  CHECK(rows[1].content);
}

TEST_CASE("bracket scores") {
  CHECK(score("(S (NP a) (VP b))", "(S (NP a) (VP b))").f1 == 100.0);
  const BracketScore partial = score("(S (NP a) (VP b))", "(S (NP a) b)");
  CHECK(partial.matched == 2);
  CHECK(partial.gold == 3);
  CHECK(partial.predicted == 2);
  CHECK(partial.precision == doctest::Approx(100.0));
  CHECK(partial.recall == doctest::Approx(200.0 / 3.0));
  CHECK(partial.f1 == doctest::Approx(80.0).epsilon(1e-12));
  const BracketScore disjoint = score("(S (NP a b) c)", "(S a (VP b c))");
  CHECK(disjoint.matched == 1);
  CHECK(disjoint.f1 == doctest::Approx(50.0));
  CHECK(score("(S (X a) (X b))", "(S (X a) (Y b))").matched == 2);
}

TEST_CASE("corpus bracket scores are micro averaged") {
  const std::vector<corpus::Tree> gold = {corpus::parse_bracketed("(S (NP a) (VP b))"),
                                          corpus::parse_bracketed("(S c)")};
  const std::vector<corpus::Tree> pred = {corpus::parse_bracketed("(S (NP a) b)"), corpus::parse_bracketed("(S c)")};
  const BracketScore s = bracket_f1(gold, pred);
  CHECK(s.matched == 3);
  CHECK(s.gold == 4);
  CHECK(s.predicted == 3);
  const std::vector<corpus::Tree> wrong = {corpus::parse_bracketed("(S (NP a) b)"), corpus::parse_bracketed("(S d)")};
  CHECK_THROWS_AS(bracket_f1(gold, wrong), std::invalid_argument);
}

TEST_CASE("metrics table round trip") {
  std::vector<MetricRow> rows = {{0, 0, "Alice", 3, 4.25, 1.5, 1.5, true, false},
                                 {0, 1, "was", 1, 0.1 + 0.2, 1.0 / 3.0, 1.0 / 3.0 - 1.5, false, false},
                                 {1, 0, "x", 80, 0.0, 0.0, 0.0, true, true}};
  std::stringstream ss;
  write_metrics(ss, rows);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  CHECK(header == kMetricsHeader);
  CHECK(read_metrics(ss) == rows);

  std::stringstream empty;
  write_metrics(empty, {});
  CHECK(empty.str() == std::string(kMetricsHeader) + "\n");
  CHECK(read_metrics(empty).empty());

  std::stringstream bad("sent\tidx\n");
  CHECK_THROWS(read_metrics(bad));
  CHECK(parse_double(format_double(0.1 + 0.2)) == 0.1 + 0.2);
}
