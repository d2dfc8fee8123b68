#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "termassoc/cleanse.hpp"
#include "termassoc/corpus.hpp"
#include "termassoc/report.hpp"
#include "termassoc/stats.hpp"
#include "termassoc/synth.hpp"

namespace termassoc {

struct PipelineConfig {
  std::filesystem::path scores;
  std::filesystem::path metadata;
  std::filesystem::path documents;  // linked corpus; defaults to <output_dir>/linked.jsonl
  std::filesystem::path rules;      // empty = built-in default rules
  std::filesystem::path output_dir = "termassoc-out";
  std::filesystem::path synth_spec;
  AnalysisConfig analysis;
  unsigned threads = 1;
  std::size_t n_sims = 20;
  // Replaces the synthetic spec's own seed when set.
  std::optional<std::uint64_t> synth_seed;

  // Relative paths resolve against the config file's directory.
  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig from_json(std::string_view text, const std::filesystem::path& base_dir);

  RuleSet load_rules() const;
  std::filesystem::path documents_path() const;

  // Hash of everything that affects analysis output (analysis settings and
  // rule set). Paths and thread count are excluded.
  std::string analysis_hash() const;
};

// Extraction, contingency tables and scoring for documents that are already
// deduplicated, cleaned and filtered. Documents whose score has no group are
// ignored. Throws Error when a group is empty.
struct ScopeAnalysis {
  std::vector<std::uint64_t> n_docs;  // per group
  ScoredTerms scored;
};

ScopeAnalysis analyze_documents(const std::vector<Document>& docs, const AnalysisConfig& config,
                                unsigned threads = 1);

struct ScopeSummary {
  std::string id;
  std::vector<std::uint64_t> n_docs;
  std::size_t m = 0;
  double threshold = 0.0;
  bool illustrative = false;
  std::size_t significant = 0;
};

struct SkippedScope {
  std::string id;
  std::string reason;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t unclassified_removed = 0;
  std::vector<ScopeSummary> scopes;
  std::vector<SkippedScope> skipped;
  // dedup scope kind -> unit -> counts
  std::map<std::string, std::map<std::string, RetentionCounts>> retention;

  std::string to_json() const;
};

struct AnalysisOutput {
  RunManifest manifest;
  std::vector<ScopeReport> reports;
};

// Runs dedup, filter, extraction, statistics and reporting for every
// requested scope over cleaned documents. Pure; writes nothing.
AnalysisOutput analyze_corpus(std::vector<Document> docs, const AnalysisConfig& config,
                              const std::string& config_hash, unsigned threads = 1);

// Stage commands. Each reads its inputs from files named in the config and
// writes into output_dir. Throw on fatal errors.
LinkSummary run_link(const PipelineConfig& config);
std::size_t run_dedup(const PipelineConfig& config, DedupScope scope);
std::size_t run_clean(const PipelineConfig& config);
RunManifest run_analyze(const PipelineConfig& config);
void run_report(const std::filesystem::path& jsonl, ReportFormat format, std::ostream& out);
DetectorMetrics run_synth(const PipelineConfig& config);
std::size_t run_generate(const PipelineConfig& config);
RunManifest run_pipeline(const PipelineConfig& config);

// "unit:4" -> "unit_4"
std::string scope_file_stem(const std::string& scope_id);

}  // namespace termassoc
