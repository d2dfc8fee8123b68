#include "termassoc/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace termassoc {

using nlohmann::json;

namespace {

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::optional<std::string> opt_string(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return it->dump();
  throw FieldError(std::string("field '") + key + "' must be a string");
}

std::string string_or_empty(const json& obj, const char* key) {
  return opt_string(obj, key).value_or("");
}

std::string required_string(const json& obj, const char* key) {
  auto value = opt_string(obj, key);
  if (!value || value->empty()) throw FieldError(std::string("missing field '") + key + "'");
  return *value;
}

int required_score(const json& obj) {
  const auto it = obj.find("score");
  if (it == obj.end() || it->is_null()) throw FieldError("missing field 'score'");
  if (!it->is_number_integer()) throw FieldError("field 'score' must be an integer");
  const auto score = it->get<long long>();
  if (score < 0 || score > 4) throw FieldError("score " + std::to_string(score) + " outside 0..4");
  return static_cast<int>(score);
}

std::vector<std::string> string_list(const json& obj, const char* key) {
  std::vector<std::string> out;
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw FieldError(std::string("field '") + key + "' must be an array");
  for (const auto& item : *it) {
    if (!item.is_string()) throw FieldError(std::string("field '") + key + "' must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

// Reads JSON-lines, handing each object to `convert`. Conversion failures
// become per-line diagnostics.
template <typename T, typename Convert>
ParseResult<T> parse_lines(std::istream& in, Convert convert) {
  if (!in.good()) throw IoError("input stream is not readable");
  ParseResult<T> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      result.diagnostics.push_back(
          {line_no, Diagnostic::Severity::error, "malformed JSON object"});
      continue;
    }
    try {
      result.records.push_back(convert(obj, line_no, result.diagnostics));
    } catch (const FieldError& e) {
      result.diagnostics.push_back({line_no, Diagnostic::Severity::error, e.what()});
    } catch (const json::exception& e) {
      result.diagnostics.push_back({line_no, Diagnostic::Severity::error, e.what()});
    }
  }
  if (in.bad()) throw IoError("read error after line " + std::to_string(line_no));
  return result;
}

std::string abstract_field(const json& obj, std::size_t line_no,
                           std::vector<Diagnostic>& diagnostics) {
  auto abstract = opt_string(obj, "abstract");
  if (!abstract) {
    diagnostics.push_back({line_no, Diagnostic::Severity::warning, "missing abstract"});
    return {};
  }
  return *abstract;
}

// Rejects every record of a unit that appears with more than one panel.
void check_unit_panels(ParseResult<ScoreRecord>& result) {
  std::map<std::string, std::set<std::string>> panels;
  for (const auto& r : result.records) {
    if (!r.unit.empty()) panels[r.unit].insert(r.panel);
  }
  std::set<std::string> conflicting;
  for (const auto& [unit, set] : panels) {
    if (set.size() > 1) conflicting.insert(unit);
  }
  if (conflicting.empty()) return;
  std::vector<ScoreRecord> kept;
  for (auto& r : result.records) {
    if (conflicting.count(r.unit)) {
      result.diagnostics.push_back({0, Diagnostic::Severity::error,
                                    "record " + r.id + ": unit " + r.unit +
                                        " appears under several panels"});
    } else {
      kept.push_back(std::move(r));
    }
  }
  result.records = std::move(kept);
}

}  // namespace

std::optional<std::string> normalize_doi(std::string_view raw) {
  auto doi = utf8::lowercase(trim(raw));
  if (doi.empty()) return std::nullopt;
  return doi;
}

std::string title_journal_key(std::string_view title, std::string_view journal) {
  std::string joined(title);
  joined.append(journal);
  return strip_whitespace(utf8::lowercase(joined));
}

std::string article_identity(const Document& doc) {
  if (doc.doi) return "doi:" + *doc.doi;
  return "tj:" + title_journal_key(doc.title, doc.journal);
}

ParseResult<ScoreRecord> parse_score_records(std::istream& in) {
  std::set<std::string> seen;
  auto result = parse_lines<ScoreRecord>(
      in, [&](const json& obj, std::size_t, std::vector<Diagnostic>&) {
        ScoreRecord r;
        r.id = required_string(obj, "id");
        if (!seen.insert(r.id).second) throw FieldError("duplicate record id '" + r.id + "'");
        if (auto doi = opt_string(obj, "doi")) r.doi = normalize_doi(*doi);
        r.title = string_or_empty(obj, "title");
        r.journal = string_or_empty(obj, "journal");
        r.unit = trim(string_or_empty(obj, "unit"));
        r.panel = trim(string_or_empty(obj, "panel"));
        r.score = required_score(obj);
        r.submitter = string_or_empty(obj, "submitter");
        return r;
      });
  check_unit_panels(result);
  return result;
}

ParseResult<MetadataRecord> parse_metadata_records(std::istream& in) {
  return parse_lines<MetadataRecord>(
      in, [](const json& obj, std::size_t line_no, std::vector<Diagnostic>& diags) {
        MetadataRecord r;
        r.id = required_string(obj, "id");
        if (auto doi = opt_string(obj, "doi")) r.doi = normalize_doi(*doi);
        r.title = string_or_empty(obj, "title");
        r.journal = string_or_empty(obj, "journal");
        r.abstract = abstract_field(obj, line_no, diags);
        r.keywords = string_list(obj, "keywords");
        return r;
      });
}

ParseResult<Document> parse_documents(std::istream& in) {
  return parse_lines<Document>(
      in, [](const json& obj, std::size_t line_no, std::vector<Diagnostic>& diags) {
        Document d;
        d.id = required_string(obj, "id");
        if (auto doi = opt_string(obj, "doi")) d.doi = normalize_doi(*doi);
        d.title = string_or_empty(obj, "title");
        d.journal = string_or_empty(obj, "journal");
        d.abstract_raw = abstract_field(obj, line_no, diags);
        d.abstract_clean = opt_string(obj, "abstract_clean");
        d.keywords = string_list(obj, "keywords");
        d.unit = trim(string_or_empty(obj, "unit"));
        d.panel = trim(string_or_empty(obj, "panel"));
        d.score = required_score(obj);
        d.submitter = string_or_empty(obj, "submitter");
        return d;
      });
}

std::string document_to_json(const Document& doc) {
  json obj = json::object();
  obj["id"] = doc.id;
  obj["doi"] = doc.doi ? json(*doc.doi) : json(nullptr);
  obj["title"] = doc.title;
  obj["journal"] = doc.journal;
  obj["abstract"] = doc.abstract_raw;
  if (doc.abstract_clean) obj["abstract_clean"] = *doc.abstract_clean;
  obj["keywords"] = doc.keywords;
  obj["unit"] = doc.unit;
  obj["panel"] = doc.panel;
  obj["score"] = doc.score;
  obj["submitter"] = doc.submitter;
  return obj.dump();
}

void write_documents(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) out << document_to_json(d) << '\n';
}

// ---------------------------------------------------------------------------

std::string_view to_string(MatchKind kind) {
  return kind == MatchKind::doi ? "doi" : "title_journal";
}

MetadataIndex::MetadataIndex(std::vector<MetadataRecord> records) : records_(std::move(records)) {
  std::stable_sort(records_.begin(), records_.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    by_id_.emplace(r.id, i);
    if (r.doi) {
      auto [it, inserted] = by_doi_.emplace(*r.doi, i);
      if (!inserted) {
        diagnostics_.push_back({0, Diagnostic::Severity::warning,
                                "duplicate DOI " + *r.doi + " in metadata; using " +
                                    records_[it->second].id + ", ignoring " + r.id});
      }
    }
    const auto key = title_journal_key(r.title, r.journal);
    if (!strip_whitespace(r.title).empty()) by_key_[key].push_back(i);
  }
}

const MetadataRecord* MetadataIndex::find_doi(std::string_view doi) const {
  const auto it = by_doi_.find(std::string(doi));
  return it == by_doi_.end() ? nullptr : &records_[it->second];
}

const MetadataRecord* MetadataIndex::find_key(const std::string& key, bool* collision) const {
  if (collision) *collision = false;
  const auto it = by_key_.find(key);
  if (it == by_key_.end()) return nullptr;
  if (it->second.size() > 1) {
    if (collision) *collision = true;
    return nullptr;
  }
  return &records_[it->second.front()];
}

const MetadataRecord* MetadataIndex::find_id(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

LinkResult link_by_doi(const std::vector<ScoreRecord>& records, const MetadataIndex& index) {
  LinkResult result;
  for (const auto& r : records) {
    const MetadataRecord* meta = r.doi ? index.find_doi(*r.doi) : nullptr;
    if (meta) {
      result.matched.push_back({r.id, meta->id, MatchKind::doi});
    } else {
      result.unmatched.push_back(r.id);
    }
  }
  return result;
}

LinkResult link_by_title_journal(const std::vector<ScoreRecord>& unmatched,
                                 const MetadataIndex& index) {
  LinkResult result;
  for (const auto& r : unmatched) {
    const auto title = strip_whitespace(utf8::lowercase(r.title));
    if (title.empty()) {
      result.unmatched.push_back(r.id);
      continue;
    }
    bool collision = false;
    const auto* meta = index.find_key(title_journal_key(r.title, r.journal), &collision);
    if (collision) {
      result.diagnostics.push_back({0, Diagnostic::Severity::warning,
                                    "record " + r.id +
                                        ": several metadata records share its title/journal key"});
    }
    if (!meta) {
      result.unmatched.push_back(r.id);
      continue;
    }
    Match match{r.id, meta->id, MatchKind::title_journal};
    result.matched.push_back(match);
    const auto chars = utf8::length(title);
    if (chars < kSuspiciousTitleChars) {
      result.suspicious.push_back(
          {match, "short title (" + std::to_string(chars) + " chars)"});
    }
  }
  return result;
}

LinkResult link_records(const std::vector<ScoreRecord>& records, const MetadataIndex& index) {
  LinkResult result = link_by_doi(records, index);
  std::set<std::string> pending(result.unmatched.begin(), result.unmatched.end());
  std::vector<ScoreRecord> remaining;
  for (const auto& r : records) {
    if (pending.count(r.id)) remaining.push_back(r);
  }
  LinkResult second = link_by_title_journal(remaining, index);

  result.unmatched = std::move(second.unmatched);
  result.matched.insert(result.matched.end(), second.matched.begin(), second.matched.end());
  result.suspicious = std::move(second.suspicious);
  result.diagnostics = index.diagnostics();
  result.diagnostics.insert(result.diagnostics.end(), second.diagnostics.begin(),
                            second.diagnostics.end());

  std::sort(result.matched.begin(), result.matched.end(),
            [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
  std::sort(result.unmatched.begin(), result.unmatched.end());
  std::sort(result.suspicious.begin(), result.suspicious.end(),
            [](const auto& a, const auto& b) { return a.match.record_id < b.match.record_id; });
  std::sort(result.diagnostics.begin(), result.diagnostics.end(),
            [](const auto& a, const auto& b) { return a.message < b.message; });
  return result;
}

std::vector<Document> build_linked_documents(const std::vector<ScoreRecord>& records,
                                             const MetadataIndex& index,
                                             const LinkResult& links) {
  std::unordered_map<std::string, const ScoreRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);

  std::vector<Document> docs;
  docs.reserve(links.matched.size());
  for (const auto& m : links.matched) {
    const auto rec_it = by_id.find(m.record_id);
    const auto* meta = index.find_id(m.metadata_id);
    if (rec_it == by_id.end() || meta == nullptr) continue;
    const ScoreRecord& r = *rec_it->second;
    Document d;
    d.id = r.id;
    d.doi = meta->doi ? meta->doi : r.doi;
    d.title = meta->title.empty() ? r.title : meta->title;
    d.journal = meta->journal.empty() ? r.journal : meta->journal;
    d.abstract_raw = meta->abstract;
    d.keywords = meta->keywords;
    d.unit = r.unit;
    d.panel = r.panel;
    d.score = r.score;
    d.submitter = r.submitter;
    docs.push_back(std::move(d));
  }
  std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return docs;
}

LinkSummary summarize(const LinkResult& links) {
  LinkSummary s;
  for (const auto& m : links.matched) {
    (m.kind == MatchKind::doi ? s.by_doi : s.by_title_journal)++;
  }
  s.unmatched = links.unmatched.size();
  s.suspicious = links.suspicious.size();
  return s;
}

void write_link_report(std::ostream& out, const LinkResult& links) {
  std::map<std::string, const SuspiciousMatch*> flagged;
  for (const auto& s : links.suspicious) flagged.emplace(s.match.record_id, &s);

  struct Row {
    std::string record_id, metadata_id, kind, suspicious, reason;
  };
  std::vector<Row> rows;
  for (const auto& m : links.matched) {
    const auto it = flagged.find(m.record_id);
    const bool is_flagged = it != flagged.end();
    rows.push_back({m.record_id, m.metadata_id, std::string(to_string(m.kind)),
                    is_flagged ? "true" : "false", is_flagged ? it->second->reason : ""});
  }
  for (const auto& id : links.unmatched) rows.push_back({id, "", "unmatched", "false", ""});
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.record_id < b.record_id; });

  out << "record_id,metadata_id,match_kind,suspicious,reason\n";
  for (const auto& row : rows) {
    out << csv_field(row.record_id) << ',' << csv_field(row.metadata_id) << ',' << row.kind
        << ',' << row.suspicious << ',' << csv_field(row.reason) << '\n';
  }
}

// ---------------------------------------------------------------------------

GroupScheme GroupScheme::default_scheme() {
  return GroupScheme({{"low", {1, 2}}, {"3", {3}}, {"4", {4}}});
}

GroupScheme::GroupScheme(std::vector<ScoreGroup> groups) : groups_(std::move(groups)) {
  if (groups_.size() < 2) throw ConfigError("a group scheme needs at least two groups");
  std::set<int> covered;
  std::set<std::string> labels;
  for (auto& g : groups_) {
    if (g.label.empty()) throw ConfigError("group label must not be empty");
    if (!labels.insert(g.label).second) throw ConfigError("duplicate group label " + g.label);
    if (g.scores.empty()) throw ConfigError("group " + g.label + " has no scores");
    std::sort(g.scores.begin(), g.scores.end());
    for (int s : g.scores) {
      if (s < 1 || s > 4) {
        throw ConfigError("group " + g.label + ": score " + std::to_string(s) +
                          " cannot be grouped (allowed 1..4)");
      }
      if (!covered.insert(s).second) {
        throw ConfigError("score " + std::to_string(s) + " appears in two groups");
      }
    }
  }
  if (covered.size() != 4) throw ConfigError("groups must cover scores 1..4");
}

std::optional<std::size_t> GroupScheme::group_of(int score) const {
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    const auto& s = groups_[i].scores;
    if (std::find(s.begin(), s.end(), score) != s.end()) return i;
  }
  return std::nullopt;
}

std::vector<std::string> GroupScheme::labels() const {
  std::vector<std::string> out;
  for (const auto& g : groups_) out.push_back(g.label);
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(DedupScope scope) {
  switch (scope) {
    case DedupScope::unit: return "unit";
    case DedupScope::panel: return "panel";
    case DedupScope::all: return "all";
  }
  return "all";
}

DedupScope parse_dedup_scope(std::string_view text) {
  if (text == "unit") return DedupScope::unit;
  if (text == "panel") return DedupScope::panel;
  if (text == "all") return DedupScope::all;
  throw ConfigError("unknown dedup scope '" + std::string(text) + "'");
}

std::string scope_value(const Document& doc, DedupScope scope) {
  switch (scope) {
    case DedupScope::unit: return doc.unit;
    case DedupScope::panel: return doc.panel;
    case DedupScope::all: return {};
  }
  return {};
}

DedupResult dedup_within_unit(std::vector<Document> docs, DedupScope scope, std::uint64_t seed) {
  struct Keyed {
    std::string identity;
    std::string scope;
    Document doc;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(docs.size());
  for (auto& d : docs) {
    auto identity = article_identity(d);
    auto value = scope_value(d, scope);
    keyed.push_back({std::move(identity), std::move(value), std::move(d)});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.identity != b.identity) return a.identity < b.identity;
    if (a.scope != b.scope) return a.scope < b.scope;
    return a.doc.id < b.doc.id;
  });

  DedupResult result;
  std::vector<int> scores;
  for (std::size_t begin = 0; begin < keyed.size();) {
    std::size_t end = begin + 1;
    while (end < keyed.size() && keyed[end].identity == keyed[begin].identity &&
           keyed[end].scope == keyed[begin].scope) {
      ++end;
    }
    scores.clear();
    for (std::size_t i = begin; i < end; ++i) scores.push_back(keyed[i].doc.score);
    std::sort(scores.begin(), scores.end());

    const std::size_t n = scores.size();
    int median = scores[n / 2];
    if (n % 2 == 0) {
      const int lower = scores[n / 2 - 1];
      const int upper = scores[n / 2];
      median = lower;
      if (lower != upper) {
        const auto draw = splitmix64(seed ^ fnv1a64(keyed[begin].identity));
        median = (draw >> 63) ? upper : lower;
        ++result.random_draws;
      }
    }
    Document representative = std::move(keyed[begin].doc);
    representative.score = median;
    result.documents.push_back(std::move(representative));
    begin = end;
  }
  return result;
}

std::vector<Document> drop_unclassified(std::vector<Document> docs, std::size_t* removed) {
  const auto before = docs.size();
  std::erase_if(docs, [](const Document& d) { return d.unit.empty(); });
  if (removed) *removed = before - docs.size();
  return docs;
}

FilterResult filter_documents(std::vector<Document> docs, std::size_t min_abstract_chars) {
  FilterResult result;
  for (auto& d : docs) {
    if (!d.abstract_clean) {
      throw OrderingError("document " + d.id + " has no cleaned abstract; clean before filtering");
    }
    auto& counts = result.per_unit[d.unit];
    ++counts.input;
    if (d.score == 0) {
      ++counts.removed_score0;
    } else if (utf8::length(*d.abstract_clean) < min_abstract_chars) {
      ++counts.removed_short;
    } else {
      ++counts.kept;
      result.documents.push_back(std::move(d));
    }
  }
  return result;
}

}  // namespace termassoc
