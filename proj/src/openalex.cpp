#include "atlas/openalex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "atlas/error.hpp"

namespace atlas {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Query rendering

void QueryExpression::add(Clause clause) {
  auto check = [](const std::string& p) {
    if (p.empty()) throw ContractError("query phrase must be non-empty");
    if (p.find('"') != std::string::npos) throw ContractError("query phrase may not contain '\"': " + p);
  };
  check(clause.phrase);
  if (clause.alternative) check(*clause.alternative);
  clauses_.push_back(std::move(clause));
}

void QueryExpression::add_context(const std::optional<ContextPair>& context) {
  if (context) add({context->first, context->second});
}

QueryExpression QueryExpression::single(std::string phrase, const std::optional<ContextPair>& context) {
  QueryExpression q;
  q.add({std::move(phrase), std::nullopt});
  q.add_context(context);
  return q;
}

QueryExpression QueryExpression::pair(std::string a, std::string b, const std::optional<ContextPair>& context) {
  QueryExpression q;
  q.add({std::move(a), std::nullopt});
  q.add({std::move(b), std::nullopt});
  q.add_context(context);
  return q;
}

QueryExpression QueryExpression::context_only(const ContextPair& context) {
  QueryExpression q;
  q.add_context(context);
  return q;
}

std::string QueryExpression::render() const {
  std::string out;
  for (const auto& c : clauses_) {
    if (!out.empty()) out += " AND ";
    if (c.alternative) {
      out += "(\"" + c.phrase + "\" OR \"" + *c.alternative + "\")";
    } else {
      out += "\"" + c.phrase + "\"";
    }
  }
  return out;
}

QueryExpression build_query(std::span<const std::string> primary, const std::optional<ContextPair>& context) {
  if (primary.size() == 1) return QueryExpression::single(primary[0], context);
  if (primary.size() == 2) return QueryExpression::pair(primary[0], primary[1], context);
  throw ContractError("a query takes one keyword or a pair of keywords");
}

// ---------------------------------------------------------------------------
// Timestamps

std::string format_timestamp(TimePoint t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count());
}

TimePoint parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char tail = 0;
  const std::string copy(text);
  if (std::sscanf(copy.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%c", &y, &mo, &d, &h, &mi, &s, &tail) != 7 || tail != 'Z' ||
      copy.size() != 20) {
    throw ConfigError("bad timestamp '" + copy + "', expected YYYY-MM-DDTHH:MM:SSZ");
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw ConfigError("bad timestamp '" + copy + "'");
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

// ---------------------------------------------------------------------------
// Cache

HitStore::HitStore(const HitStore& other) {
  std::lock_guard lock(other.mutex_);
  entries_ = other.entries_;
}

HitStore& HitStore::operator=(const HitStore& other) {
  if (this == &other) return *this;
  auto copy = other.snapshot();
  std::lock_guard lock(mutex_);
  entries_ = std::move(copy);
  return *this;
}

std::optional<HitRecord> HitStore::find(std::string_view query) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(query);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void HitStore::put(HitRecord record) {
  if (record.count < 0) throw ContractError("hit count must be non-negative");
  std::lock_guard lock(mutex_);
  auto key = record.query;
  entries_.insert_or_assign(std::move(key), std::move(record));
}

std::size_t HitStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::map<std::string, HitRecord, std::less<>> HitStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

HitStore HitStore::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("cache file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("cache file must hold a JSON object");
  HitStore store;
  for (const auto& [query, entry] : doc.items()) {
    if (!entry.is_object() || !entry.contains("count") || !entry.contains("fetched_at") ||
        !entry["count"].is_number_integer() || !entry["fetched_at"].is_string()) {
      throw ConfigError("cache entry for '" + query + "' needs integer 'count' and string 'fetched_at'");
    }
    const auto count = entry["count"].get<std::int64_t>();
    if (count < 0) throw ConfigError("negative count in cache entry '" + query + "'");
    store.entries_.emplace(query, HitRecord{query, count, parse_timestamp(entry["fetched_at"].get<std::string>()),
                                            HitSource::cache});
  }
  return store;
}

HitStore HitStore::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return HitStore{};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read cache file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string HitStore::serialize() const {
  json doc = json::object();
  for (const auto& [query, rec] : snapshot()) {
    doc[query] = {{"count", rec.count}, {"fetched_at", format_timestamp(rec.fetched_at)}};
  }
  return doc.dump(2) + "\n";
}

void HitStore::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write cache file " + tmp.string());
    out << serialize();
  }
  std::filesystem::rename(tmp, path);
}

bool operator==(const HitStore& a, const HitStore& b) {
  const auto x = a.snapshot();
  const auto y = b.snapshot();
  return std::equal(x.begin(), x.end(), y.begin(), y.end(), [](const auto& l, const auto& r) {
    return l.first == r.first && l.second.count == r.second.count && l.second.fetched_at == r.second.fetched_at;
  });
}

// ---------------------------------------------------------------------------
// Rate limiting

void SystemClock::sleep_for(std::chrono::nanoseconds duration) {
  if (duration > std::chrono::nanoseconds::zero()) std::this_thread::sleep_for(duration);
}

RateLimiter::RateLimiter(Clock& clock, double requests_per_second, std::int64_t max_requests)
    : clock_(clock), max_requests_(max_requests) {
  if (!(requests_per_second > 0)) throw ConfigError("requests_per_second must be positive");
  if (max_requests < 0) throw ConfigError("max_requests must be non-negative");
  interval_ = std::chrono::nanoseconds(static_cast<std::int64_t>(std::ceil(1e9 / requests_per_second)));
}

void RateLimiter::acquire() {
  std::chrono::system_clock::time_point slot;
  std::chrono::system_clock::time_point now;
  {
    std::lock_guard lock(mutex_);
    if (issued_.load() >= max_requests_) {
      throw TransportError("request ceiling of " + std::to_string(max_requests_) + " reached for this run");
    }
    now = clock_.now();
    slot = next_slot_ ? std::max(now, *next_slot_) : now;
    next_slot_ = slot + interval_;
    ++issued_;
  }
  clock_.sleep_for(slot - now);
}

// ---------------------------------------------------------------------------
// Client

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
        c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

std::string works_target(const QueryExpression& expr, std::string_view mailto) {
  std::string target = "/works?";
  if (!expr.is_total()) target += "search=" + percent_encode(expr.render()) + "&";
  target += "per-page=1&select=id";
  if (!mailto.empty()) target += "&mailto=" + percent_encode(mailto);
  return target;
}

std::int64_t parse_works_count(std::string_view body) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) throw ServiceError("works response is not a JSON object");
  auto meta = doc.find("meta");
  if (meta == doc.end() || !meta->is_object()) throw ServiceError("works response lacks 'meta'");
  auto count = meta->find("count");
  if (count == meta->end() || !count->is_number_integer() || count->get<std::int64_t>() < 0) {
    throw ServiceError("works response lacks a non-negative integer 'meta.count'");
  }
  return count->get<std::int64_t>();
}

OpenAlexClient::OpenAlexClient(Transport* transport, Clock& clock, RateBudget budget, std::string mailto,
                               std::uint64_t jitter_seed)
    : transport_(transport),
      clock_(clock),
      budget_(budget),
      mailto_(std::move(mailto)),
      limiter_(clock, budget.requests_per_second, budget.max_requests),
      rng_(jitter_seed) {
  if (budget_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  if (budget_.concurrency < 1) throw ConfigError("concurrency must be >= 1");
}

bool OpenAlexClient::is_fresh(const HitRecord& record) const {
  if (!budget_.max_age) return true;
  const auto age = clock_.now() - record.fetched_at;
  return age <= *budget_.max_age;
}

std::chrono::nanoseconds OpenAlexClient::backoff_delay(int attempt) {
  double u;
  {
    std::lock_guard lock(rng_mutex_);
    u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  }
  const double seconds =
      budget_.backoff_base_seconds * std::pow(budget_.backoff_factor, attempt) * (1.0 + budget_.backoff_jitter * u);
  return std::chrono::nanoseconds(static_cast<std::int64_t>(seconds * 1e9));
}

std::int64_t OpenAlexClient::fetch(const std::string& target, const std::string& query) {
  std::string last_problem;
  for (int attempt = 0; attempt < budget_.max_attempts; ++attempt) {
    if (attempt > 0) clock_.sleep_for(backoff_delay(attempt - 1));
    limiter_.acquire();
    HttpResponse response;
    try {
      response = transport_->get(target);
    } catch (const TransportError& e) {
      last_problem = e.what();
      continue;
    }
    if (response.status == 200) return parse_works_count(response.body);
    if (response.status == 429 || response.status >= 500) {
      last_problem = "HTTP " + std::to_string(response.status);
      continue;
    }
    throw QueryError(response.status, "HTTP " + std::to_string(response.status) + " for query '" + query + "'");
  }
  throw TransportError("giving up on query '" + query + "' after " + std::to_string(budget_.max_attempts) +
                       " attempts: " + last_problem);
}

HitRecord OpenAlexClient::count_works(const QueryExpression& expr, HitStore& store, FetchMode mode) {
  const std::string query = expr.render();
  if (auto cached = store.find(query)) {
    // Offline runs replay whatever is stored; age only matters when a refresh is possible.
    if (mode == FetchMode::offline || is_fresh(*cached)) {
      cached->source = HitSource::cache;
      return *cached;
    }
  }
  if (mode == FetchMode::offline || transport_ == nullptr) throw ReplayError({query});
  const auto count = fetch(works_target(expr, mailto_), query);
  HitRecord record{query, count, std::chrono::floor<std::chrono::seconds>(clock_.now()), HitSource::network};
  store.put(record);
  return record;
}

// ---------------------------------------------------------------------------
// Harvest

QueryExpression pair_query(const KeywordSet& keywords, KeywordPair pair) {
  auto [a, b] = pair;
  if (b < a) std::swap(a, b);
  return QueryExpression::pair(keywords[a].canonical, keywords[b].canonical);
}

std::vector<QueryExpression> plan_queries(const KeywordSet& keywords, std::span<const KeywordPair> pairs,
                                          const ContextPair& context) {
  std::vector<QueryExpression> plan;
  std::set<std::string> seen;
  auto push = [&](QueryExpression q) {
    if (seen.insert(q.render()).second) plan.push_back(std::move(q));
  };
  push(QueryExpression::context_only(context));
  push(QueryExpression::total());
  for (const auto& kw : keywords.all()) push(QueryExpression::single(kw.canonical));
  for (const auto& kw : keywords.all()) push(QueryExpression::single(kw.canonical, context));
  for (const auto& p : pairs) {
    if (!keywords.contains(p.first) || !keywords.contains(p.second)) {
      throw ContractError("harvest pair references an unknown keyword id");
    }
    if (p.first == p.second) throw ContractError("harvest pair must join two distinct keywords");
    push(pair_query(keywords, p));
  }
  return plan;
}

HarvestReport harvest(const KeywordSet& keywords, std::span<const KeywordPair> pairs, const ContextPair& context,
                      HitStore& store, OpenAlexClient& client, FetchMode mode) {
  const auto plan = plan_queries(keywords, pairs, context);
  HarvestReport report;
  report.planned = plan.size();

  std::vector<const QueryExpression*> pending;
  for (const auto& q : plan) {
    auto cached = store.find(q.render());
    if (cached && (mode == FetchMode::offline || client.is_fresh(*cached))) {
      ++report.cached;
    } else {
      pending.push_back(&q);
    }
  }

  const auto before = client.requests_issued();
  std::mutex report_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;

  auto worker = [&] {
    while (!stop.load()) {
      const auto i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const auto& q = *pending[i];
      try {
        client.count_works(q, store, mode);
        std::lock_guard lock(report_mutex);
        ++report.fetched;
      } catch (const ReplayError&) {
        std::lock_guard lock(report_mutex);
        report.failures.push_back({q.render(), "missing from cache", true});
      } catch (const Error& e) {
        std::lock_guard lock(report_mutex);
        report.failures.push_back({q.render(), e.what(), false});
        if (client.budget().fail_fast) {
          if (!first_error) first_error = std::current_exception();
          stop = true;
        }
      }
    }
  };

  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(client.budget().concurrency), pending.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  report.requests = client.requests_issued() - before;
  std::sort(report.failures.begin(), report.failures.end(),
            [](const HarvestFailure& a, const HarvestFailure& b) { return a.query < b.query; });
  if (first_error) std::rethrow_exception(first_error);
  return report;
}

}  // namespace atlas
