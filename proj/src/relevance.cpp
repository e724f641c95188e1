#include "atlas/relevance.hpp"

#include <algorithm>
#include <exception>
#include <istream>
#include <ostream>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"

namespace atlas {

namespace {

using boost::multiprecision::cpp_int;

const BoostFunction kBoostFunctions[] = {
    {"lift", &visibility_boost},
};

void check_counts(const HitCounts& c) {
  if (c.keyword < 0 || c.keyword_in_context < 0 || c.context < 0 || c.total < 0) {
    throw ContractError("hit counts must be non-negative");
  }
}

}  // namespace

Ratio visibility_boost(const HitCounts& c) {
  check_counts(c);
  if (c.context == 0) throw ConfigError("the context query has no hits; the harvest is unusable");
  if (c.total == 0) throw ConfigError("the catalogue total is zero; the harvest is unusable");
  if (c.keyword == 0) return Ratio(0);
  return Ratio(cpp_int(c.keyword_in_context) * c.total, cpp_int(c.context) * c.keyword);
}

const BoostFunction& find_boost_function(std::string_view name) {
  for (const auto& fn : kBoostFunctions) {
    if (fn.name == name) return fn;
  }
  throw ConfigError("unknown boost function '" + std::string(name) + "'");
}

std::vector<std::string_view> boost_function_names() {
  std::vector<std::string_view> names;
  for (const auto& fn : kBoostFunctions) names.push_back(fn.name);
  return names;
}

Ratio relevance_score(std::int64_t keyword_hits, const Ratio& boost) {
  if (keyword_hits < 0 || boost < 0) throw ContractError("relevance_score needs h_k >= 0 and boost >= 0");
  return Ratio(keyword_hits) * boost;
}

double to_double(const Ratio& value) { return value.convert_to<double>(); }

RelevanceScore RelevanceScore::compute(KeywordId id, const HitCounts& counts, const BoostFunction& fn) {
  RelevanceScore s;
  s.id = id;
  s.counts = counts;
  s.exact_boost = fn.evaluate(counts);
  s.exact_score = relevance_score(counts.keyword, s.exact_boost);
  s.boost = to_double(s.exact_boost);
  s.score = to_double(s.exact_score);
  return s;
}

RelevanceScore RelevanceScore::from_score(KeywordId id, double score) {
  RelevanceScore s;
  s.id = id;
  s.exact_score = Ratio(score);
  s.score = score;
  return s;
}

RelevanceRanking rank_by_relevance(std::span<const RelevanceScore> scores, std::optional<std::size_t> top_n) {
  std::vector<const RelevanceScore*> order;
  order.reserve(scores.size());
  for (const auto& s : scores) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const RelevanceScore* a, const RelevanceScore* b) {
    if (a->exact_score != b->exact_score) return a->exact_score > b->exact_score;
    return a->id < b->id;
  });
  if (top_n && order.size() > *top_n) order.resize(*top_n);
  RelevanceRanking ranking;
  for (const auto* s : order) ranking.entries.push_back({s->id, s->score});
  return ranking;
}

void score_keywords_serial(std::span<const KeywordId> ids, std::span<const HitCounts> counts, const BoostFunction& fn,
                           std::span<RelevanceScore> out) {
  if (ids.size() != counts.size() || out.size() != counts.size()) throw ContractError("scoring spans differ in length");
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = RelevanceScore::compute(ids[i], counts[i], fn);
}

void score_keywords_parallel(std::span<const KeywordId> ids, std::span<const HitCounts> counts,
                             const BoostFunction& fn, std::span<RelevanceScore> out) {
  if (ids.size() != counts.size() || out.size() != counts.size()) throw ContractError("scoring spans differ in length");
  // Exceptions may not leave an OpenMP region; keep the first and rethrow.
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(counts.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = RelevanceScore::compute(ids[k], counts[k], fn);
    } catch (...) {
#pragma omp critical(atlas_scoring_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<HitCounts> gather_counts(const KeywordSet& keywords, const HitStore& store, const ContextPair& context) {
  std::vector<std::string> missing;
  auto lookup = [&](const QueryExpression& q) -> std::int64_t {
    const auto text = q.render();
    if (auto rec = store.find(text)) return rec->count;
    missing.push_back(text);
    return 0;
  };
  const auto context_hits = lookup(QueryExpression::context_only(context));
  const auto total_hits = lookup(QueryExpression::total());
  std::vector<HitCounts> out;
  out.reserve(keywords.size());
  for (const auto& kw : keywords.all()) {
    out.push_back({lookup(QueryExpression::single(kw.canonical)),
                   lookup(QueryExpression::single(kw.canonical, context)), context_hits, total_hits});
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " hit count(s) missing from the cache (first: '" +
                      missing.front() + "'); run the harvest stage first";
    throw DependencyError("harvest", msg);
  }
  return out;
}

std::vector<RelevanceScore> score_all(const KeywordSet& keywords, const HitStore& store, const ContextPair& context,
                                      const BoostFunction& fn, kernels::Execution exec) {
  const auto counts = gather_counts(keywords, store, context);
  std::vector<KeywordId> ids;
  for (const auto& kw : keywords.all()) ids.push_back(kw.id);
  std::vector<RelevanceScore> out(counts.size());
  if (exec == kernels::Execution::parallel) {
    score_keywords_parallel(ids, counts, fn, out);
  } else {
    score_keywords_serial(ids, counts, fn, out);
  }
  return out;
}

std::vector<std::string> check_narrowing(const KeywordSet& keywords, std::span<const RelevanceScore> scores) {
  std::vector<std::string> warnings;
  for (const auto& s : scores) {
    if (s.counts.keyword_in_context > s.counts.keyword) {
      warnings.push_back("'" + keywords[s.id].canonical + "': hits with context (" +
                         std::to_string(s.counts.keyword_in_context) + ") exceed hits alone (" +
                         std::to_string(s.counts.keyword) + ")");
    }
  }
  return warnings;
}

void write_relevance_csv(std::ostream& out, const KeywordSet& keywords, const RelevanceRanking& ranking,
                         std::span<const RelevanceScore> scores) {
  std::map<KeywordId, const RelevanceScore*> by_id;
  for (const auto& s : scores) by_id[s.id] = &s;
  out << "rank,keyword,score,h_k,h_kc,boost\n";
  std::size_t rank = 0;
  for (const auto& e : ranking.entries) {
    const auto& s = *by_id.at(e.id);
    out << ++rank << ',' << csv::quote(keywords[e.id].canonical) << ',' << csv::format_double(s.score) << ','
        << s.counts.keyword << ',' << s.counts.keyword_in_context << ',' << csv::format_double(s.boost) << '\n';
  }
}

std::vector<RelevanceRow> read_relevance_csv(std::istream& in) {
  csv::Reader reader(in, "rank,keyword,score,h_k,h_kc,boost");
  std::vector<RelevanceRow> rows;
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    rows.push_back({f[1], csv::parse_double(f[2], row->line), csv::parse_int(f[3], row->line),
                    csv::parse_int(f[4], row->line), csv::parse_double(f[5], row->line)});
  }
  return rows;
}

}  // namespace atlas
