#include "atlas/catalog.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "atlas/csv.hpp"
#include "atlas/error.hpp"

namespace atlas {

namespace {

constexpr std::string_view kSourceTags[] = {"social_media", "books", "online_resources"};

bool is_space(char c) noexcept { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Lowercase + whitespace collapse, without alias lookup. Non-ASCII bytes pass through.
std::string fold(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

}  // namespace

std::string_view to_string(Source source) noexcept { return kSourceTags[static_cast<unsigned>(source)]; }

std::optional<Source> parse_source(std::string_view tag) noexcept {
  for (unsigned i = 0; i < std::size(kSourceTags); ++i) {
    if (kSourceTags[i] == tag) return static_cast<Source>(i);
  }
  return std::nullopt;
}

std::string SourceSet::to_string() const {
  std::string out;
  for (unsigned i = 0; i < std::size(kSourceTags); ++i) {
    if (!contains(static_cast<Source>(i))) continue;
    if (!out.empty()) out.push_back(';');
    out += kSourceTags[i];
  }
  return out;
}

SourceSet SourceSet::parse(std::string_view text, std::size_t line_no) {
  SourceSet set;
  while (!text.empty()) {
    const auto cut = text.find(';');
    const auto tag = text.substr(0, cut);
    auto source = parse_source(tag);
    if (!source) throw ParseError(line_no, "unknown source tag '" + std::string(tag) + "'");
    set.insert(*source);
    if (cut == std::string_view::npos) break;
    text.remove_prefix(cut + 1);
  }
  return set;
}

KeywordSet::KeywordSet(std::vector<Keyword> keywords) : keywords_(std::move(keywords)) {
  std::sort(keywords_.begin(), keywords_.end(),
            [](const Keyword& a, const Keyword& b) { return a.canonical < b.canonical; });
  std::map<std::string, std::string, std::less<>> alias_owner;
  for (std::size_t i = 0; i < keywords_.size(); ++i) {
    auto& kw = keywords_[i];
    if (kw.canonical.empty() || kw.canonical != fold(kw.canonical)) {
      throw ContractError("keyword label is not in canonical form: '" + kw.canonical + "'");
    }
    kw.id = static_cast<KeywordId>(i);
    if (!by_label_.emplace(kw.canonical, kw.id).second) {
      throw ContractError("duplicate keyword label '" + kw.canonical + "'");
    }
  }
  for (const auto& kw : keywords_) {
    for (const auto& alias : kw.aliases) {
      if (by_label_.contains(alias)) throw ContractError("alias '" + alias + "' collides with a keyword label");
      auto [it, inserted] = alias_owner.emplace(alias, kw.canonical);
      if (!inserted) throw ContractError("alias '" + alias + "' claimed by two keywords");
    }
  }
}

const Keyword& KeywordSet::operator[](KeywordId id) const {
  if (!contains(id)) throw ContractError("unknown keyword id " + std::to_string(to_index(id)));
  return keywords_[to_index(id)];
}

std::optional<KeywordId> KeywordSet::find(std::string_view canonical) const {
  auto it = by_label_.find(canonical);
  if (it == by_label_.end()) return std::nullopt;
  return it->second;
}

bool operator==(const KeywordSet& a, const KeywordSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.keywords_[i];
    const auto& y = b.keywords_[i];
    if (x.id != y.id || x.canonical != y.canonical || x.aliases != y.aliases || !(x.sources == y.sources) ||
        x.mention_count != y.mention_count) {
      return false;
    }
  }
  return true;
}

std::string normalize_keyword(std::string_view raw, const AliasTable& aliases) {
  std::string folded = fold(raw);
  if (folded.empty()) throw NormalizationError("keyword is empty after trimming");
  if (auto it = aliases.find(folded); it != aliases.end()) return it->second;
  return folded;
}

std::vector<MentionRecord> parse_mentions(std::istream& in) {
  csv::Reader reader(in, "keyword,source,origin");
  std::vector<MentionRecord> records;
  while (auto row = reader.next()) {
    auto& f = row->fields;
    if (f[0].empty()) throw ParseError(row->line, "empty keyword");
    auto source = parse_source(f[1]);
    if (!source) throw ParseError(row->line, "unknown source tag '" + f[1] + "'");
    records.push_back({std::move(f[0]), *source, std::move(f[2])});
  }
  return records;
}

AliasTable parse_aliases(std::istream& in) {
  csv::Reader reader(in, "alias,canonical");
  AliasTable table;
  std::map<std::string, std::size_t> first_line;
  while (auto row = reader.next()) {
    const AliasTable none;
    std::string alias, canonical;
    try {
      alias = normalize_keyword(row->fields[0], none);
      canonical = normalize_keyword(row->fields[1], none);
    } catch (const NormalizationError& e) {
      throw ParseError(row->line, e.what());
    }
    if (alias == canonical) continue;
    auto [it, inserted] = table.emplace(alias, canonical);
    if (!inserted && it->second != canonical) {
      throw ParseError(row->line, "alias '" + alias + "' maps to both '" + it->second + "' and '" + canonical + "'");
    }
    first_line.emplace(alias, row->line);
  }
  for (const auto& [alias, canonical] : table) {
    if (table.contains(canonical)) {
      throw ParseError(first_line[alias], "alias '" + alias + "' points at '" + canonical + "', which is itself an alias");
    }
  }
  return table;
}

std::vector<std::string> parse_keyword_list(std::istream& in) {
  csv::Reader reader(in, "keyword");
  std::vector<std::string> out;
  while (auto row = reader.next()) out.push_back(std::move(row->fields[0]));
  return out;
}

FrequencyRanking rank_by_mentions(const KeywordSet& keywords, int threshold) {
  if (threshold < 0) throw ContractError("mention threshold must be >= 0");
  FrequencyRanking ranking;
  ranking.threshold = threshold;
  for (const auto& kw : keywords.all()) {
    if (kw.mention_count >= threshold) ranking.entries.push_back({kw.id, kw.mention_count});
  }
  // Ids follow label order, so the id breaks ties by label.
  std::sort(ranking.entries.begin(), ranking.entries.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.mention_count != b.mention_count) return a.mention_count > b.mention_count;
    return a.id < b.id;
  });
  return ranking;
}

Tally tally_mentions(std::span<const MentionRecord> records, const AliasTable& aliases, int threshold,
                     std::span<const std::string> curated) {
  if (threshold < 0) throw ContractError("mention threshold must be >= 0");
  std::map<std::string, Keyword, std::less<>> by_label;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    std::string label;
    try {
      label = normalize_keyword(rec.raw_text, aliases);
    } catch (const NormalizationError& e) {
      throw NormalizationError("mention record " + std::to_string(i + 1) + " ('" + rec.raw_text +
                               "', origin '" + rec.origin + "'): " + e.what());
    }
    auto& kw = by_label[label];
    kw.canonical = label;
    kw.sources.insert(rec.source);
    ++kw.mention_count;
  }
  for (const auto& raw : curated) {
    std::string label;
    try {
      label = normalize_keyword(raw, aliases);
    } catch (const NormalizationError& e) {
      throw NormalizationError("curated keyword '" + raw + "': " + e.what());
    }
    by_label[label].canonical = label;
  }
  for (const auto& [alias, canonical] : aliases) {
    if (auto it = by_label.find(canonical); it != by_label.end()) it->second.aliases.insert(alias);
  }
  std::vector<Keyword> keywords;
  keywords.reserve(by_label.size());
  for (auto& [label, kw] : by_label) keywords.push_back(std::move(kw));
  Tally tally{KeywordSet(std::move(keywords)), {}};
  tally.ranking = rank_by_mentions(tally.keywords, threshold);
  return tally;
}

void write_keywords_csv(std::ostream& out, const KeywordSet& keywords) {
  out << "id,keyword,mentions,sources,aliases\n";
  for (const auto& kw : keywords.all()) {
    std::string aliases;
    for (const auto& a : kw.aliases) {
      if (!aliases.empty()) aliases.push_back(';');
      aliases += a;
    }
    out << to_index(kw.id) << ',' << csv::quote(kw.canonical) << ',' << kw.mention_count << ','
        << kw.sources.to_string() << ',' << csv::quote(aliases) << '\n';
  }
}

KeywordSet read_keywords_csv(std::istream& in) {
  csv::Reader reader(in, "id,keyword,mentions,sources,aliases");
  std::vector<Keyword> keywords;
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    Keyword kw;
    const auto id = csv::parse_int(f[0], row->line);
    if (id != static_cast<long long>(keywords.size())) throw ParseError(row->line, "keyword ids must be dense and ordered");
    kw.id = static_cast<KeywordId>(id);
    kw.canonical = f[1];
    kw.mention_count = static_cast<int>(csv::parse_int(f[2], row->line));
    kw.sources = SourceSet::parse(f[3], row->line);
    std::string_view rest = f[4];
    while (!rest.empty()) {
      const auto cut = rest.find(';');
      kw.aliases.emplace(rest.substr(0, cut));
      if (cut == std::string_view::npos) break;
      rest.remove_prefix(cut + 1);
    }
    keywords.push_back(std::move(kw));
  }
  KeywordSet set(std::move(keywords));
  return set;
}

void write_mention_ranking_csv(std::ostream& out, const KeywordSet& keywords, const FrequencyRanking& ranking) {
  out << "rank,keyword,mentions\n";
  std::size_t rank = 0;
  for (const auto& e : ranking.entries) {
    out << ++rank << ',' << csv::quote(keywords[e.id].canonical) << ',' << e.mention_count << '\n';
  }
}

}  // namespace atlas
