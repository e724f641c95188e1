#pragma once

// Visibility boost and relevance scores.
//
// Boost functions are rational functions of the four hit counts, so they are
// evaluated in exact rational arithmetic. The relevance score h_k * boost is
// then exact too, and rankings compare exact values: two keywords whose scores
// agree mathematically always tie and fall back to label order.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "atlas/catalog.hpp"
#include "atlas/kernels.hpp"
#include "atlas/openalex.hpp"

namespace atlas {

using Ratio = boost::multiprecision::cpp_rational;

struct HitCounts {
  std::int64_t keyword = 0;             // h_k: the keyword alone
  std::int64_t keyword_in_context = 0;  // h_kc: keyword AND context
  std::int64_t context = 0;             // h_c: context alone
  std::int64_t total = 0;               // h_all: whole catalogue
};

struct BoostFunction {
  std::string_view name;
  Ratio (*evaluate)(const HitCounts&);
};

// Lift: (h_kc / h_c) / (h_k / h_all), or 0 when h_k = 0.
// Throws ConfigError when h_c or h_all is zero.
Ratio visibility_boost(const HitCounts& counts);

inline constexpr std::string_view kDefaultBoostFunction = "lift";
// Throws ConfigError for an unknown name.
const BoostFunction& find_boost_function(std::string_view name);
std::vector<std::string_view> boost_function_names();

Ratio relevance_score(std::int64_t keyword_hits, const Ratio& boost);
double to_double(const Ratio& value);

struct RelevanceScore {
  KeywordId id{};
  HitCounts counts;
  Ratio exact_boost;
  Ratio exact_score;
  double boost = 0;
  double score = 0;

  static RelevanceScore compute(KeywordId id, const HitCounts& counts, const BoostFunction& fn);
  // For callers that only have a score value (tests, reloaded rankings).
  static RelevanceScore from_score(KeywordId id, double score);
};

struct RankedScore {
  KeywordId id;
  double score;
  friend bool operator==(const RankedScore&, const RankedScore&) = default;
};

struct RelevanceRanking {
  std::vector<RankedScore> entries;
};

// Score descending, ties by label ascending (ids follow label order).
RelevanceRanking rank_by_relevance(std::span<const RelevanceScore> scores,
                                   std::optional<std::size_t> top_n = std::nullopt);

// Per-keyword scoring loop; output is in input order.
void score_keywords_serial(std::span<const KeywordId> ids, std::span<const HitCounts> counts, const BoostFunction& fn,
                           std::span<RelevanceScore> out);
void score_keywords_parallel(std::span<const KeywordId> ids, std::span<const HitCounts> counts,
                             const BoostFunction& fn, std::span<RelevanceScore> out);

// Gathers counts from the store for every keyword (in id order). A missing
// query raises DependencyError pointing at the harvest stage.
std::vector<HitCounts> gather_counts(const KeywordSet& keywords, const HitStore& store, const ContextPair& context);

std::vector<RelevanceScore> score_all(const KeywordSet& keywords, const HitStore& store, const ContextPair& context,
                                      const BoostFunction& fn,
                                      kernels::Execution exec = kernels::Execution::serial);

// Warnings for counts that break query narrowing (h_kc > h_k).
std::vector<std::string> check_narrowing(const KeywordSet& keywords, std::span<const RelevanceScore> scores);

// `rank,keyword,score,h_k,h_kc,boost`
void write_relevance_csv(std::ostream& out, const KeywordSet& keywords, const RelevanceRanking& ranking,
                         std::span<const RelevanceScore> scores);

struct RelevanceRow {
  std::string keyword;
  double score;
  std::int64_t keyword_hits;
  std::int64_t keyword_in_context;
  double boost;
};
std::vector<RelevanceRow> read_relevance_csv(std::istream& in);

}  // namespace atlas
