#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "termassoc/util.hpp"

namespace termassoc {

// One bibliographic record flowing through the pipeline: the score record
// joined with its metadata.
struct Document {
  std::string id;
  std::optional<std::string> doi;  // normalized, see normalize_doi
  std::string title;
  std::string journal;
  std::string abstract_raw;
  std::optional<std::string> abstract_clean;  // set by the cleaning stage
  std::vector<std::string> keywords;
  std::string unit;   // empty = unclassified
  std::string panel;
  int score = 0;      // 0..4
  std::string submitter;

  bool operator==(const Document&) const = default;
};

struct ScoreRecord {
  std::string id;
  std::optional<std::string> doi;
  std::string title;
  std::string journal;
  std::string unit;
  std::string panel;
  int score = 0;
  std::string submitter;
};

struct MetadataRecord {
  std::string id;
  std::optional<std::string> doi;
  std::string title;
  std::string journal;
  std::string abstract;
  std::vector<std::string> keywords;
};

template <typename T>
struct ParseResult {
  std::vector<T> records;
  std::vector<Diagnostic> diagnostics;

  std::size_t error_count() const {
    std::size_t n = 0;
    for (const auto& d : diagnostics) n += d.severity == Diagnostic::Severity::error;
    return n;
  }
};

// JSON-lines readers. Malformed lines produce an error diagnostic carrying
// the line number and are skipped; blank lines are ignored. A stream that
// cannot be read throws IoError.
ParseResult<ScoreRecord> parse_score_records(std::istream& in);
ParseResult<MetadataRecord> parse_metadata_records(std::istream& in);
ParseResult<Document> parse_documents(std::istream& in);

std::string document_to_json(const Document& doc);
void write_documents(std::ostream& out, const std::vector<Document>& docs);

// Lowercase with surrounding whitespace stripped; nullopt when empty.
std::optional<std::string> normalize_doi(std::string_view raw);

// Title and journal concatenated, lowercased, all whitespace removed.
std::string title_journal_key(std::string_view title, std::string_view journal);

// Identity used to detect copies of one article: DOI when present, else the
// title/journal key.
std::string article_identity(const Document& doc);

// ---------------------------------------------------------------------------
// Linkage

enum class MatchKind { doi, title_journal };

std::string_view to_string(MatchKind kind);

struct Match {
  std::string record_id;
  std::string metadata_id;
  MatchKind kind = MatchKind::doi;

  bool operator==(const Match&) const = default;
};

struct SuspiciousMatch {
  Match match;
  std::string reason;
};

struct LinkResult {
  std::vector<Match> matched;
  std::vector<std::string> unmatched;
  std::vector<SuspiciousMatch> suspicious;
  std::vector<Diagnostic> diagnostics;
};

inline constexpr std::size_t kSuspiciousTitleChars = 20;

// Metadata indexed by normalized DOI and by title/journal key.
class MetadataIndex {
 public:
  explicit MetadataIndex(std::vector<MetadataRecord> records);

  const MetadataRecord* find_doi(std::string_view doi) const;

  // Exactly one record with this key, or nullptr. Sets *collision when two
  // or more records share the key.
  const MetadataRecord* find_key(const std::string& key, bool* collision = nullptr) const;

  const MetadataRecord* find_id(std::string_view id) const;
  std::size_t size() const { return records_.size(); }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<MetadataRecord> records_;  // sorted by id
  std::unordered_map<std::string, std::size_t> by_doi_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_key_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<Diagnostic> diagnostics_;
};

LinkResult link_by_doi(const std::vector<ScoreRecord>& records, const MetadataIndex& index);

// Operates on the records left unmatched by link_by_doi.
LinkResult link_by_title_journal(const std::vector<ScoreRecord>& unmatched,
                                 const MetadataIndex& index);

// DOI first, then title/journal on the remainder. Output sorted by record id.
LinkResult link_records(const std::vector<ScoreRecord>& records, const MetadataIndex& index);

// One Document per matched record, sorted by id.
std::vector<Document> build_linked_documents(const std::vector<ScoreRecord>& records,
                                             const MetadataIndex& index,
                                             const LinkResult& links);

struct LinkSummary {
  std::size_t by_doi = 0;
  std::size_t by_title_journal = 0;
  std::size_t unmatched = 0;
  std::size_t suspicious = 0;
};

LinkSummary summarize(const LinkResult& links);

// CSV: record_id,metadata_id,match_kind,suspicious,reason
void write_link_report(std::ostream& out, const LinkResult& links);

// ---------------------------------------------------------------------------
// Score groups

struct ScoreGroup {
  std::string label;
  std::vector<int> scores;
};

// Ordered partition of the quality scores 1..4 into analysis groups. Score 0
// belongs to no group.
class GroupScheme {
 public:
  // low = {1,2}, 3 = {3}, 4 = {4}
  static GroupScheme default_scheme();

  // Throws ConfigError unless the groups are disjoint, cover 1..4, exclude 0,
  // have distinct non-empty labels, and number at least two.
  explicit GroupScheme(std::vector<ScoreGroup> groups);

  std::optional<std::size_t> group_of(int score) const;
  std::size_t size() const { return groups_.size(); }
  const std::vector<ScoreGroup>& groups() const { return groups_; }
  std::vector<std::string> labels() const;

 private:
  std::vector<ScoreGroup> groups_;
};

// ---------------------------------------------------------------------------
// Dedup and filtering

enum class DedupScope { unit, panel, all };

std::string_view to_string(DedupScope scope);
DedupScope parse_dedup_scope(std::string_view text);
std::string scope_value(const Document& doc, DedupScope scope);

struct DedupResult {
  std::vector<Document> documents;
  std::size_t random_draws = 0;  // even-count ties resolved by the generator
};

// Collapses copies of one article within a unit (or panel, or the whole
// corpus) to a single document carrying the median score. Odd counts take
// the middle value; even counts pick one of the two middle values with a
// generator seeded from (seed, identity) when they differ. The surviving
// document is the copy with the smallest id. Output is sorted by
// (identity, scope value), so it does not depend on input order.
DedupResult dedup_within_unit(std::vector<Document> docs, DedupScope scope, std::uint64_t seed);

// Drops documents with an empty unit.
std::vector<Document> drop_unclassified(std::vector<Document> docs, std::size_t* removed = nullptr);

struct RetentionCounts {
  std::size_t input = 0;
  std::size_t removed_score0 = 0;
  std::size_t removed_short = 0;
  std::size_t kept = 0;
};

struct FilterResult {
  std::vector<Document> documents;
  std::map<std::string, RetentionCounts> per_unit;
};

inline constexpr std::size_t kDefaultMinAbstractChars = 500;

// Removes score-0 documents and documents whose cleaned abstract has fewer
// than min_abstract_chars scalar values. Throws OrderingError if any
// document has not been cleaned.
FilterResult filter_documents(std::vector<Document> docs,
                              std::size_t min_abstract_chars = kDefaultMinAbstractChars);

}  // namespace termassoc
