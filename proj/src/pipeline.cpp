#include "termassoc/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "termassoc/textproc.hpp"

namespace termassoc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("no ") + what + " file configured");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot read ") + what + " file " + path.string());
  return in;
}

std::string read_text(const fs::path& path, const char* what) {
  auto in = open_input(path, what);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes through a temporary file so readers never see a partial file.
void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

void report_diagnostics(const std::vector<Diagnostic>& diagnostics, const std::string& source) {
  for (const auto& d : diagnostics) {
    std::string where = source;
    if (d.line) where += ":" + std::to_string(d.line);
    log(d.severity == Diagnostic::Severity::error ? LogLevel::warn : LogLevel::info,
        where + ": " + d.message);
  }
}

std::vector<Document> read_documents(const fs::path& path) {
  auto in = open_input(path, "documents");
  auto parsed = parse_documents(in);
  report_diagnostics(parsed.diagnostics, path.string());
  return std::move(parsed.records);
}

fs::path resolve(const fs::path& base, const json& obj, const char* key) {
  if (!obj.contains(key) || obj[key].is_null()) return {};
  fs::path p = obj[key].get<std::string>();
  return p.is_absolute() || base.empty() ? p : base / p;
}

// Natural order so "unit:2" sorts before "unit:10".
bool natural_less(const std::string& a, const std::string& b) {
  const bool a_num = !a.empty() && std::all_of(a.begin(), a.end(), ::isdigit);
  const bool b_num = !b.empty() && std::all_of(b.begin(), b.end(), ::isdigit);
  if (a_num && b_num && a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

struct ScopeRequest {
  bool all_units = false;
  bool all_panels = false;
  bool whole = false;
  std::set<std::string> units;
  std::set<std::string> panels;

  bool wants(DedupScope kind) const {
    switch (kind) {
      case DedupScope::unit: return all_units || !units.empty();
      case DedupScope::panel: return all_panels || !panels.empty();
      case DedupScope::all: return whole;
    }
    return false;
  }

  bool wants(DedupScope kind, const std::string& value) const {
    switch (kind) {
      case DedupScope::unit: return all_units || units.count(value);
      case DedupScope::panel: return all_panels || panels.count(value);
      case DedupScope::all: return whole;
    }
    return false;
  }
};

ScopeRequest parse_scopes(const std::vector<std::string>& scopes) {
  ScopeRequest req;
  for (const auto& raw : scopes) {
    const auto s = trim(raw);
    if (s == "unit") {
      req.all_units = true;
    } else if (s == "panel") {
      req.all_panels = true;
    } else if (s == "all") {
      req.whole = true;
    } else if (s.rfind("unit:", 0) == 0 && s.size() > 5) {
      req.units.insert(s.substr(5));
    } else if (s.rfind("panel:", 0) == 0 && s.size() > 6) {
      req.panels.insert(s.substr(6));
    } else {
      throw ConfigError("unknown scope '" + s + "' (use unit, panel, all, unit:ID or panel:ID)");
    }
  }
  if (scopes.empty()) throw ConfigError("no scopes requested");
  return req;
}

json analysis_json(const AnalysisConfig& a) {
  json groups = json::array();
  for (const auto& g : a.groups.groups()) groups.push_back({{"label", g.label}, {"scores", g.scores}});
  return json{{"groups", groups},
              {"n_max", a.n_max},
              {"min_df", a.min_doc_frequency},
              {"alpha", a.alpha},
              {"top_k", a.top_k},
              {"seed", a.seed},
              {"scopes", a.scopes},
              {"min_abstract_chars", a.min_abstract_chars},
              {"drop_unclassified", a.drop_unclassified}};
}

void apply_analysis_json(const json& obj, AnalysisConfig& a) {
  if (obj.contains("groups")) {
    std::vector<ScoreGroup> groups;
    for (const auto& g : obj["groups"]) {
      groups.push_back({g.at("label").get<std::string>(), g.at("scores").get<std::vector<int>>()});
    }
    a.groups = GroupScheme(std::move(groups));
  }
  a.n_max = obj.value("n_max", a.n_max);
  a.min_doc_frequency = obj.value("min_df", a.min_doc_frequency);
  a.alpha = obj.value("alpha", a.alpha);
  a.top_k = obj.value("top_k", a.top_k);
  a.seed = obj.value("seed", a.seed);
  if (obj.contains("scopes")) a.scopes = obj["scopes"].get<std::vector<std::string>>();
  a.min_abstract_chars = obj.value("min_abstract_chars", a.min_abstract_chars);
  a.drop_unclassified = obj.value("drop_unclassified", a.drop_unclassified);
}

}  // namespace

// ---------------------------------------------------------------------------

PipelineConfig PipelineConfig::from_json(std::string_view text, const fs::path& base_dir) {
  const json obj = json::parse(text, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw ConfigError("config is not a JSON object");
  PipelineConfig c;
  try {
    c.scores = resolve(base_dir, obj, "scores");
    c.metadata = resolve(base_dir, obj, "metadata");
    c.documents = resolve(base_dir, obj, "documents");
    c.rules = resolve(base_dir, obj, "rules");
    c.synth_spec = resolve(base_dir, obj, "synth_spec");
    if (auto out = resolve(base_dir, obj, "output_dir"); !out.empty()) c.output_dir = out;
    c.threads = obj.value("threads", c.threads);
    c.n_sims = obj.value("n_sims", c.n_sims);
    if (obj.contains("analysis")) apply_analysis_json(obj["analysis"], c.analysis);
    if (obj.contains("seed")) c.analysis.seed = obj["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.analysis.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  return from_json(read_text(path, "config"), path.parent_path());
}

RuleSet PipelineConfig::load_rules() const {
  return rules.empty() ? default_rules() : RuleSet::load(rules);
}

fs::path PipelineConfig::documents_path() const {
  return documents.empty() ? output_dir / "linked.jsonl" : documents;
}

std::string PipelineConfig::analysis_hash() const {
  const std::string canonical = analysis_json(analysis).dump() + "\n" + load_rules().to_json();
  return hex64(fnv1a64(canonical));
}

std::string scope_file_stem(const std::string& scope_id) {
  std::string out;
  for (char c : scope_id) {
    const bool keep = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                      (c >= 'A' && c <= 'Z') || c == '-';
    out.push_back(keep ? c : '_');
  }
  return out;
}

std::string RunManifest::to_json() const {
  json scope_list = json::array();
  for (const auto& s : scopes) {
    scope_list.push_back({{"id", s.id},
                          {"n_docs", s.n_docs},
                          {"m", s.m},
                          {"threshold", s.threshold},
                          {"illustrative", s.illustrative},
                          {"significant", s.significant}});
  }
  json skipped_list = json::array();
  for (const auto& s : skipped) skipped_list.push_back({{"id", s.id}, {"reason", s.reason}});
  json retention_obj = json::object();
  for (const auto& [kind, units] : retention) {
    json per_unit = json::object();
    for (const auto& [unit, c] : units) {
      per_unit[unit] = {{"input", c.input},
                        {"removed_score0", c.removed_score0},
                        {"removed_short", c.removed_short},
                        {"kept", c.kept}};
    }
    retention_obj[kind] = per_unit;
  }
  return json{{"config_hash", config_hash},
              {"seed", seed},
              {"unclassified_removed", unclassified_removed},
              {"scopes", scope_list},
              {"skipped", skipped_list},
              {"retention", retention_obj}}
             .dump(2) +
         "\n";
}

// ---------------------------------------------------------------------------

ScopeAnalysis analyze_documents(const std::vector<Document>& docs, const AnalysisConfig& config,
                                unsigned threads) {
  std::vector<const Document*> grouped_docs;
  std::vector<std::size_t> groups;
  for (const auto& d : docs) {
    if (auto g = config.groups.group_of(d.score)) {
      grouped_docs.push_back(&d);
      groups.push_back(*g);
    }
  }
  ScopeAnalysis out;
  out.n_docs.assign(config.groups.size(), 0);
  for (auto g : groups) ++out.n_docs[g];
  for (std::size_t g = 0; g < out.n_docs.size(); ++g) {
    if (out.n_docs[g] == 0) {
      throw Error("group " + config.groups.groups()[g].label + " has no documents");
    }
  }

  std::vector<DocTermSet> term_sets(grouped_docs.size());
  const SentenceSplitter splitter;
  parallel_for(grouped_docs.size(), threads, [&](std::size_t i) {
    term_sets[i] = extract_terms(*grouped_docs[i], config.n_max, splitter);
  });
  const auto tables =
      build_tables(term_sets, groups, config.groups.size(), config.min_doc_frequency, threads);
  out.scored = score_terms(tables, config.alpha, threads);
  return out;
}

AnalysisOutput analyze_corpus(std::vector<Document> docs, const AnalysisConfig& config,
                              const std::string& config_hash, unsigned threads) {
  config.validate();
  const ScopeRequest request = parse_scopes(config.scopes);

  AnalysisOutput output;
  RunManifest& manifest = output.manifest;
  manifest.config_hash = config_hash;
  manifest.seed = config.seed;
  if (config.drop_unclassified) {
    docs = drop_unclassified(std::move(docs), &manifest.unclassified_removed);
  }

  for (DedupScope kind : {DedupScope::unit, DedupScope::panel, DedupScope::all}) {
    if (!request.wants(kind)) continue;
    auto deduped = dedup_within_unit(docs, kind, config.seed);
    auto filtered = filter_documents(std::move(deduped.documents), config.min_abstract_chars);
    manifest.retention[std::string(to_string(kind))] = filtered.per_unit;

    std::map<std::string, std::vector<Document>> partitions;
    for (auto& d : filtered.documents) {
      partitions[scope_value(d, kind)].push_back(std::move(d));
    }
    std::vector<std::string> values;
    for (const auto& [value, _] : partitions) values.push_back(value);
    std::sort(values.begin(), values.end(), natural_less);

    for (const auto& value : values) {
      if (!request.wants(kind, value)) continue;
      const std::string id =
          kind == DedupScope::all ? "all" : std::string(to_string(kind)) + ":" + value;
      if (kind != DedupScope::all && value.empty()) {
        manifest.skipped.push_back({id, "documents without a " + std::string(to_string(kind))});
        continue;
      }
      try {
        auto analysis = analyze_documents(partitions[value], config, threads);
        ScopeSummary summary;
        summary.id = id;
        summary.n_docs = analysis.n_docs;
        auto report = build_scope_report(id, config.groups.labels(), std::move(analysis.scored),
                                         config.top_k);
        summary.m = report.m;
        summary.threshold = report.threshold;
        summary.illustrative = report.illustrative;
        summary.significant = static_cast<std::size_t>(
            std::count_if(report.rows.begin(), report.rows.end(),
                          [](const TermResult& r) { return r.significant; }));
        manifest.scopes.push_back(std::move(summary));
        output.reports.push_back(std::move(report));
      } catch (const Error& e) {
        log(LogLevel::warn, "skipping scope " + id + ": " + e.what());
        manifest.skipped.push_back({id, e.what()});
      }
    }
  }
  return output;
}

// ---------------------------------------------------------------------------

LinkSummary run_link(const PipelineConfig& config) {
  auto scores_in = open_input(config.scores, "scores");
  auto meta_in = open_input(config.metadata, "metadata");
  auto scores = parse_score_records(scores_in);
  auto metadata = parse_metadata_records(meta_in);
  report_diagnostics(scores.diagnostics, config.scores.string());
  report_diagnostics(metadata.diagnostics, config.metadata.string());
  if (metadata.records.empty()) {
    log(LogLevel::warn, "metadata file is empty; every record will be unmatched");
  }

  const MetadataIndex index(std::move(metadata.records));
  const auto links = link_records(scores.records, index);
  report_diagnostics(links.diagnostics, "link");
  const auto docs = build_linked_documents(scores.records, index, links);
  const auto summary = summarize(links);

  std::ostringstream report;
  write_link_report(report, links);
  std::ostringstream linked;
  write_documents(linked, docs);
  const json summary_json{{"records", scores.records.size()},
                          {"matched_doi", summary.by_doi},
                          {"matched_title_journal", summary.by_title_journal},
                          {"unmatched", summary.unmatched},
                          {"suspicious", summary.suspicious},
                          {"score_parse_errors", scores.error_count()},
                          {"metadata_parse_errors", metadata.error_count()}};

  write_atomic(config.output_dir / "link_report.csv", report.str());
  write_atomic(config.output_dir / "linked.jsonl", linked.str());
  write_atomic(config.output_dir / "link_summary.json", summary_json.dump(2) + "\n");
  log(LogLevel::info, "linked " + std::to_string(summary.by_doi) + " by DOI, " +
                          std::to_string(summary.by_title_journal) + " by title/journal, " +
                          std::to_string(summary.unmatched) + " unmatched, " +
                          std::to_string(summary.suspicious) + " suspicious");
  return summary;
}

std::size_t run_dedup(const PipelineConfig& config, DedupScope scope) {
  auto docs = read_documents(config.documents_path());
  const auto result = dedup_within_unit(std::move(docs), scope, config.analysis.seed);
  std::ostringstream out;
  write_documents(out, result.documents);
  write_atomic(config.output_dir / ("deduped_" + std::string(to_string(scope)) + ".jsonl"),
               out.str());
  return result.documents.size();
}

std::size_t run_clean(const PipelineConfig& config) {
  const auto rules = config.load_rules();
  auto docs = read_documents(config.documents_path());
  clean_documents(docs, rules, config.threads);
  std::ostringstream out;
  write_documents(out, docs);
  write_atomic(config.output_dir / "cleaned.jsonl", out.str());
  return docs.size();
}

RunManifest run_analyze(const PipelineConfig& config) {
  const fs::path manifest_path = config.output_dir / "manifest.json";
  const fs::path report_dir = config.output_dir / "reports";
  std::error_code ec;
  fs::remove(manifest_path, ec);
  fs::remove_all(report_dir, ec);

  const auto rules = config.load_rules();
  const auto hash = config.analysis_hash();
  auto docs = read_documents(config.documents_path());
  clean_documents(docs, rules, config.threads);
  auto output = analyze_corpus(std::move(docs), config.analysis, hash, config.threads);

  fs::create_directories(report_dir);
  for (const auto& report : output.reports) {
    const auto stem = scope_file_stem(report.scope);
    for (auto [format, ext] : {std::pair{ReportFormat::csv, ".csv"},
                               std::pair{ReportFormat::jsonl, ".jsonl"},
                               std::pair{ReportFormat::text, ".txt"}}) {
      std::ostringstream out;
      emit_report(out, report, format);
      write_atomic(report_dir / (stem + ext), out.str());
    }
  }
  write_atomic(manifest_path, output.manifest.to_json());
  return output.manifest;
}

void run_report(const fs::path& jsonl, ReportFormat format, std::ostream& out) {
  auto in = open_input(jsonl, "report");
  const auto reports = parse_report_jsonl(in);
  bool first = true;
  for (const auto& r : reports) {
    if (format == ReportFormat::text && !first) out << '\n';
    emit_report(out, r, format, format != ReportFormat::csv || first);
    first = false;
  }
}

DetectorMetrics run_synth(const PipelineConfig& config) {
  auto spec = SyntheticSpec::from_json(read_text(config.synth_spec, "synthetic spec"));
  if (config.synth_seed) spec.seed = *config.synth_seed;
  const auto metrics = evaluate_detector(spec, config.analysis, config.n_sims, config.threads);
  write_atomic(config.output_dir / "metrics.json", metrics.to_json() + "\n");
  return metrics;
}

std::size_t run_generate(const PipelineConfig& config) {
  auto spec = SyntheticSpec::from_json(read_text(config.synth_spec, "synthetic spec"));
  if (config.synth_seed) spec.seed = *config.synth_seed;
  const auto docs = generate_corpus(spec);
  std::ostringstream scores;
  std::ostringstream metadata;
  write_synthetic_corpus(docs, scores, metadata);
  write_atomic(config.output_dir / "scores.jsonl", scores.str());
  write_atomic(config.output_dir / "metadata.jsonl", metadata.str());
  return docs.size();
}

RunManifest run_pipeline(const PipelineConfig& config) {
  run_link(config);
  PipelineConfig analyze = config;
  analyze.documents = config.output_dir / "linked.jsonl";
  return run_analyze(analyze);
}

}  // namespace termassoc
