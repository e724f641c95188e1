#include <doctest.h>

#include <random>
#include <sstream>

#include "atlas/error.hpp"
#include "atlas/relevance.hpp"
#include "support.hpp"

using namespace atlas;

namespace {

std::vector<RelevanceScore> score_fixture(const test::CountsFixture& f,
                                          kernels::Execution exec = kernels::Execution::serial) {
  std::vector<KeywordId> ids;
  for (const auto& kw : f.keywords.all()) ids.push_back(kw.id);
  std::vector<RelevanceScore> out(ids.size());
  const auto& fn = find_boost_function("lift");
  if (exec == kernels::Execution::parallel) score_keywords_parallel(ids, f.counts, fn, out);
  else score_keywords_serial(ids, f.counts, fn, out);
  return out;
}

std::vector<KeywordId> ids_of(const RelevanceRanking& r) {
  std::vector<KeywordId> out;
  for (const auto& e : r.entries) out.push_back(e.id);
  return out;
}

}  // namespace

TEST_SUITE("relevance") {

TEST_CASE("boost examples") {
  CHECK(visibility_boost({1000, 50, 100000, 10000000}) == Ratio(5));
  CHECK(to_double(visibility_boost({1000, 50, 100000, 10000000})) == 5.0);
  // Independent term: h_kc / h_c = h_k / h_all.
  CHECK(visibility_boost({10, 1, 1000, 10000}) == Ratio(1));
  CHECK(visibility_boost({0, 0, 1000, 10000}) == Ratio(0));
  CHECK_THROWS_AS(visibility_boost({10, 1, 0, 10000}), ConfigError);
  CHECK_THROWS_AS(visibility_boost({10, 1, 1000, 0}), ConfigError);
}

TEST_CASE("score examples") {
  CHECK(relevance_score(1000, Ratio(5)) == Ratio(5000));
  CHECK(relevance_score(0, Ratio(17, 3)) == Ratio(0));
  CHECK(relevance_score(1234, Ratio(1)) == Ratio(1234));
}

TEST_CASE("boost registry") {
  CHECK(find_boost_function(kDefaultBoostFunction).name == "lift");
  CHECK(boost_function_names() == std::vector<std::string_view>{"lift"});
  CHECK_THROWS_AS(find_boost_function("pagerank"), ConfigError);
}

TEST_CASE("rank examples") {
  const auto kws = test::make_keywords({"a", "b"});
  const std::vector<RelevanceScore> distinct{RelevanceScore::from_score(static_cast<KeywordId>(0), 5.0),
                                             RelevanceScore::from_score(static_cast<KeywordId>(1), 7.0)};
  CHECK(ids_of(rank_by_relevance(distinct)) == std::vector{static_cast<KeywordId>(1), static_cast<KeywordId>(0)});
  const std::vector<RelevanceScore> tied{RelevanceScore::from_score(static_cast<KeywordId>(1), 3.0),
                                         RelevanceScore::from_score(static_cast<KeywordId>(0), 3.0)};
  CHECK(ids_of(rank_by_relevance(tied)) == std::vector{static_cast<KeywordId>(0), static_cast<KeywordId>(1)});
  CHECK(rank_by_relevance(distinct, 1).entries.size() == 1);
}

TEST_CASE("lift collapses to context hits") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = test::random_counts_fixture(rng, 20 + trial);
    const auto scores = score_fixture(f);
    CHECK(ids_of(rank_by_relevance(scores)) == test::rank_by_context_hits(f));
  }
}

TEST_CASE("score is zero exactly when h_k or h_kc is zero") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::int64_t> small(0, 3);
  for (int i = 0; i < 500; ++i) {
    HitCounts c{small(rng), 0, 1 + small(rng), 10 + small(rng)};
    c.keyword_in_context = std::min(c.keyword, small(rng));
    const auto s = RelevanceScore::compute(KeywordId{}, c, find_boost_function("lift"));
    CHECK((s.exact_score == 0) == (c.keyword == 0 || c.keyword_in_context == 0));
    CHECK(s.exact_score == c.keyword * s.exact_boost);
  }
}

TEST_CASE("homogeneity under count scaling") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    auto f = test::random_counts_fixture(rng, 15);
    const auto base = score_fixture(f);
    const std::int64_t factor = 1 + trial % 7;
    for (auto& c : f.counts) {
      c.keyword *= factor;
      c.keyword_in_context *= factor;
      c.context *= factor;
      c.total *= factor;
    }
    const auto scaled = score_fixture(f);
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(scaled[i].exact_boost == base[i].exact_boost);
      CHECK(scaled[i].exact_score == factor * base[i].exact_score);
    }
    CHECK(ids_of(rank_by_relevance(scaled)) == ids_of(rank_by_relevance(base)));
  }
}

TEST_CASE("parallel scoring matches serial") {
  std::mt19937_64 rng(23);
  const auto f = test::random_counts_fixture(rng, 300);
  const auto a = score_fixture(f, kernels::Execution::serial);
  const auto b = score_fixture(f, kernels::Execution::parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].exact_score == b[i].exact_score);
    CHECK(a[i].score == b[i].score);
  }
}

TEST_CASE("gather and score from a store") {
  const auto kws = test::make_keywords({"chaos", "emergence"});
  HitStore store;
  auto put = [&](const QueryExpression& q, std::int64_t n) { store.put({q.render(), n, {}, HitSource::cache}); };
  put(QueryExpression::total(), 10000000);
  put(QueryExpression::context_only(kDefaultContext), 100000);
  put(QueryExpression::single("chaos"), 1000);
  put(QueryExpression::single("chaos", kDefaultContext), 50);
  put(QueryExpression::single("emergence"), 10);
  put(QueryExpression::single("emergence", kDefaultContext), 20);
  const auto scores = score_all(kws, store, kDefaultContext, find_boost_function("lift"));
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].score == 5000.0);
  CHECK(scores[0].boost == 5.0);
  CHECK(check_narrowing(kws, scores).size() == 1);

  std::stringstream csv;
  write_relevance_csv(csv, kws, rank_by_relevance(scores), scores);
  const auto rows = read_relevance_csv(csv);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].keyword == "chaos");
  CHECK(rows[0].score == 5000.0);
  CHECK(rows[0].keyword_hits == 1000);

  HitStore partial;
  partial.put({"", 1, {}, HitSource::cache});
  try {
    score_all(kws, partial, kDefaultContext, find_boost_function("lift"));
    FAIL("expected a dependency error");
  } catch (const DependencyError& e) {
    CHECK(e.required_stage() == "harvest");
  }
}

}  // TEST_SUITE
