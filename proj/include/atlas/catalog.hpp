#pragma once

// Keyword catalogue built from the hand-curated mention files.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace atlas {

enum class KeywordId : std::uint32_t {};

constexpr std::uint32_t to_index(KeywordId id) noexcept { return static_cast<std::uint32_t>(id); }

enum class Source : std::uint8_t { social_media = 0, books = 1, online_resources = 2 };

std::string_view to_string(Source source) noexcept;
std::optional<Source> parse_source(std::string_view tag) noexcept;

class SourceSet {
 public:
  void insert(Source s) noexcept { bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(s)); }
  bool contains(Source s) const noexcept { return bits_ & (1u << static_cast<unsigned>(s)); }
  bool empty() const noexcept { return bits_ == 0; }
  // Semicolon-separated tags in enum order, e.g. "social_media;books".
  std::string to_string() const;
  static SourceSet parse(std::string_view text, std::size_t line_no);
  friend bool operator==(SourceSet, SourceSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

struct MentionRecord {
  std::string raw_text;
  Source source;
  std::string origin;
};

// Normalized alias -> canonical label.
using AliasTable = std::map<std::string, std::string, std::less<>>;

struct Keyword {
  KeywordId id;
  std::string canonical;
  std::set<std::string> aliases;
  SourceSet sources;
  int mention_count = 0;
};

// Keywords indexed by id, where ids are dense and assigned in label order.
class KeywordSet {
 public:
  KeywordSet() = default;
  // Takes keywords with arbitrary ids; reassigns ids by ascending label.
  explicit KeywordSet(std::vector<Keyword> keywords);

  std::size_t size() const noexcept { return keywords_.size(); }
  bool empty() const noexcept { return keywords_.empty(); }
  const Keyword& operator[](KeywordId id) const;
  std::span<const Keyword> all() const noexcept { return keywords_; }
  std::optional<KeywordId> find(std::string_view canonical) const;
  bool contains(KeywordId id) const noexcept { return to_index(id) < keywords_.size(); }

  friend bool operator==(const KeywordSet& a, const KeywordSet& b);

 private:
  std::vector<Keyword> keywords_;
  std::map<std::string, KeywordId, std::less<>> by_label_;
};

struct RankEntry {
  KeywordId id;
  int mention_count;
  friend bool operator==(const RankEntry&, const RankEntry&) = default;
};

struct FrequencyRanking {
  std::vector<RankEntry> entries;
  int threshold = 3;
  friend bool operator==(const FrequencyRanking&, const FrequencyRanking&) = default;
};

constexpr int kDefaultMentionThreshold = 3;

// Lowercase, collapse internal whitespace, trim, then map through the alias table.
std::string normalize_keyword(std::string_view raw, const AliasTable& aliases);

// `mention-file`: header `keyword,source,origin`.
std::vector<MentionRecord> parse_mentions(std::istream& in);
// `alias-file`: header `alias,canonical`. Both columns are normalized; an
// alias whose target is itself an alias is rejected.
AliasTable parse_aliases(std::istream& in);
// Optional curated keyword list with header `keyword`; entries get mention_count 0
// unless they also appear in the mentions.
std::vector<std::string> parse_keyword_list(std::istream& in);

struct Tally {
  KeywordSet keywords;
  FrequencyRanking ranking;
};

// Counts one mention per record.
Tally tally_mentions(std::span<const MentionRecord> records, const AliasTable& aliases, int threshold,
                     std::span<const std::string> curated = {});

FrequencyRanking rank_by_mentions(const KeywordSet& keywords, int threshold);

// Persisted ingest output: `id,keyword,mentions,sources,aliases`.
void write_keywords_csv(std::ostream& out, const KeywordSet& keywords);
KeywordSet read_keywords_csv(std::istream& in);
// `rank,keyword,mentions`.
void write_mention_ranking_csv(std::ostream& out, const KeywordSet& keywords, const FrequencyRanking& ranking);

}  // namespace atlas
