#pragma once

// Hit counts from the OpenAlex works catalogue: query rendering, a persistent
// query cache, a rate-limited client, and the harvest driver.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atlas/catalog.hpp"

namespace atlas {

using TimePoint = std::chrono::sys_seconds;

struct ContextPair {
  std::string first;
  std::string second;
};

inline const ContextPair kDefaultContext{"complex systems", "complexity science"};

// AND over clauses; a clause is a quoted phrase or a parenthesized OR of two.
// The zero-clause expression stands for the whole catalogue and renders as "".
class QueryExpression {
 public:
  static QueryExpression total() { return QueryExpression{}; }
  static QueryExpression single(std::string phrase, const std::optional<ContextPair>& context = std::nullopt);
  static QueryExpression pair(std::string a, std::string b, const std::optional<ContextPair>& context = std::nullopt);
  static QueryExpression context_only(const ContextPair& context);

  bool is_total() const noexcept { return clauses_.empty(); }
  std::string render() const;

 private:
  struct Clause {
    std::string phrase;
    std::optional<std::string> alternative;
  };
  void add(Clause clause);
  void add_context(const std::optional<ContextPair>& context);

  std::vector<Clause> clauses_;
};

// `primary` holds one or two phrases.
QueryExpression build_query(std::span<const std::string> primary, const std::optional<ContextPair>& context);

enum class HitSource { network, cache };

struct HitRecord {
  std::string query;
  std::int64_t count = 0;
  TimePoint fetched_at{};
  HitSource source = HitSource::cache;
};

std::string format_timestamp(TimePoint t);
TimePoint parse_timestamp(std::string_view text);

// Rendered query -> record. Writes are serialized; reads return copies.
class HitStore {
 public:
  HitStore() = default;
  HitStore(const HitStore& other);
  HitStore& operator=(const HitStore& other);

  std::optional<HitRecord> find(std::string_view query) const;
  void put(HitRecord record);
  std::size_t size() const;
  std::map<std::string, HitRecord, std::less<>> snapshot() const;

  // Cache file: JSON object {query: {"count": n, "fetched_at": "YYYY-MM-DDTHH:MM:SSZ"}}.
  static HitStore load(const std::filesystem::path& path);
  static HitStore parse(std::string_view json_text);
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const HitStore& a, const HitStore& b);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, HitRecord, std::less<>> entries_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Issues one GET for `target` (path plus query string). Connection-level
// failures are reported by throwing TransportError.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const std::string& target) = 0;
};

// Time source for timestamps, rate limiting, and backoff sleeps.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::chrono::system_clock::time_point now() = 0;
  virtual void sleep_for(std::chrono::nanoseconds duration) = 0;
};

class SystemClock final : public Clock {
 public:
  std::chrono::system_clock::time_point now() override { return std::chrono::system_clock::now(); }
  void sleep_for(std::chrono::nanoseconds duration) override;
};

struct RateBudget {
  double requests_per_second = 5.0;
  std::int64_t max_requests = 100000;  // per run, retries included
  int max_attempts = 5;
  double backoff_base_seconds = 1.0;
  double backoff_factor = 2.0;
  double backoff_jitter = 0.25;  // each delay is scaled by 1 + jitter * U[0, 1)
  int concurrency = 1;
  bool fail_fast = false;
  std::optional<std::chrono::seconds> max_age;  // never expire when empty
};

// Spaces request start times at least 1/rps apart and enforces the per-run
// ceiling. Thread-safe.
class RateLimiter {
 public:
  RateLimiter(Clock& clock, double requests_per_second, std::int64_t max_requests);
  void acquire();
  std::int64_t issued() const noexcept { return issued_.load(); }

 private:
  Clock& clock_;
  std::chrono::nanoseconds interval_;
  std::int64_t max_requests_;
  std::mutex mutex_;
  std::optional<std::chrono::system_clock::time_point> next_slot_;
  std::atomic<std::int64_t> issued_{0};
};

enum class FetchMode { live, offline };

// "/works?search=...&per-page=1&select=id&mailto=..."
std::string works_target(const QueryExpression& expr, std::string_view mailto);
std::string percent_encode(std::string_view text);
// Reads meta.count from a works response body.
std::int64_t parse_works_count(std::string_view body);

class OpenAlexClient {
 public:
  // `transport` may be null; the client then serves the cache only and any
  // network need becomes a ReplayError.
  OpenAlexClient(Transport* transport, Clock& clock, RateBudget budget, std::string mailto,
                 std::uint64_t jitter_seed = 0);

  HitRecord count_works(const QueryExpression& expr, HitStore& store, FetchMode mode);

  std::int64_t requests_issued() const noexcept { return limiter_.issued(); }
  const RateBudget& budget() const noexcept { return budget_; }
  bool is_fresh(const HitRecord& record) const;

 private:
  std::int64_t fetch(const std::string& target, const std::string& query);
  std::chrono::nanoseconds backoff_delay(int attempt);

  Transport* transport_;
  Clock& clock_;
  RateBudget budget_;
  std::string mailto_;
  RateLimiter limiter_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

struct HarvestFailure {
  std::string query;
  std::string message;
  bool replay_miss = false;
};

struct HarvestReport {
  std::size_t planned = 0;  // distinct queries the harvest needs
  std::size_t fetched = 0;  // queries answered by the network during this call
  std::size_t cached = 0;   // queries already in the store
  std::int64_t requests = 0;
  std::vector<HarvestFailure> failures;  // sorted by query
};

using KeywordPair = std::pair<KeywordId, KeywordId>;

// Every distinct query a harvest over these inputs needs, in a fixed order:
// context, total, each keyword, each keyword AND context, each pair.
std::vector<QueryExpression> plan_queries(const KeywordSet& keywords, std::span<const KeywordPair> pairs,
                                          const ContextPair& context);

// Pairs are rendered with the lower id's label first.
QueryExpression pair_query(const KeywordSet& keywords, KeywordPair pair);

HarvestReport harvest(const KeywordSet& keywords, std::span<const KeywordPair> pairs, const ContextPair& context,
                      HitStore& store, OpenAlexClient& client, FetchMode mode);

}  // namespace atlas
