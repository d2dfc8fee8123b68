// termassoc: term/quality association pipeline.
//
//   termassoc link     --config cfg.json   match score records to metadata
//   termassoc dedup    --config cfg.json   collapse multiply-submitted articles
//   termassoc clean    --config cfg.json   strip journal boilerplate from abstracts
//   termassoc analyze  --config cfg.json   per-scope chi-square reports + manifest
//   termassoc report   --input r.jsonl     re-render a JSON-lines report
//   termassoc synth    --config cfg.json   detector recall / FWER on synthetic corpora
//   termassoc pipeline --config cfg.json   link then analyze

#include <algorithm>
#include <iostream>

#include "CLI11.hpp"
#include "termassoc/pipeline.hpp"

using namespace termassoc;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scopes;
  std::optional<std::size_t> n_max;
  std::optional<double> alpha;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> min_df;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::string> scores;
  std::optional<std::string> metadata;
  std::optional<std::string> documents;
  std::optional<std::string> rules;
  std::optional<std::string> spec;
  std::optional<std::size_t> sims;
};

PipelineConfig make_config(const Overrides& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : PipelineConfig::load(o.config);
  if (o.seed) {
    c.analysis.seed = *o.seed;
    c.synth_seed = *o.seed;
  }
  if (o.scopes) {
    c.analysis.scopes.clear();
    for (auto& s : split(*o.scopes, ',')) {
      if (!trim(s).empty()) c.analysis.scopes.push_back(trim(s));
    }
  }
  if (o.n_max) c.analysis.n_max = *o.n_max;
  if (o.alpha) c.analysis.alpha = *o.alpha;
  if (o.top_k) c.analysis.top_k = *o.top_k;
  if (o.min_df) c.analysis.min_doc_frequency = *o.min_df;
  if (o.threads) c.threads = std::max(1U, *o.threads);
  if (o.out) c.output_dir = *o.out;
  if (o.scores) c.scores = *o.scores;
  if (o.metadata) c.metadata = *o.metadata;
  if (o.documents) c.documents = *o.documents;
  if (o.rules) c.rules = *o.rules;
  if (o.spec) c.synth_spec = *o.spec;
  if (o.sims) c.n_sims = *o.sims;
  c.analysis.validate();
  return c;
}

ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "jsonl") return ReportFormat::jsonl;
  if (s == "text") return ReportFormat::text;
  throw ConfigError("unknown report format '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Term association with quality scores: chi-square + Bonferroni over sentence-bounded n-grams"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, "JSON config file");
  app.add_option("--seed", o.seed, "Seed for median tie-breaks and simulations");
  app.add_option("--scopes", o.scopes, "Comma list: unit, panel, all, unit:ID, panel:ID");
  app.add_option("--nmax", o.n_max, "Longest phrase in tokens (1-8)");
  app.add_option("--alpha", o.alpha, "Family-wise significance level");
  app.add_option("--top-k", o.top_k, "Rows per scope report");
  app.add_option("--min-df", o.min_df, "Minimum documents containing a term");
  app.add_option("--threads", o.threads, "Worker threads");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--scores", o.scores, "Scores JSON-lines file");
  app.add_option("--metadata", o.metadata, "Metadata JSON-lines file");
  app.add_option("--documents", o.documents, "Linked documents JSON-lines file");
  app.add_option("--rules", o.rules, "Cleaning rule file");

  auto* link = app.add_subcommand("link", "Match score records to metadata by DOI, then title+journal");
  auto* dedup = app.add_subcommand("dedup", "Collapse copies of an article to a median score");
  std::string dedup_scope = "unit";
  dedup->add_option("--scope", dedup_scope, "unit, panel or all")->check(CLI::IsMember({"unit", "panel", "all"}));
  auto* clean = app.add_subcommand("clean", "Apply the cleaning rules to abstracts");
  auto* analyze = app.add_subcommand("analyze", "Per-scope term association reports");
  auto* report = app.add_subcommand("report", "Render a JSON-lines report as text or CSV");
  std::string report_input;
  std::string report_format = "text";
  report->add_option("--input", report_input, "Report JSON-lines file")->required();
  report->add_option("--format", report_format, "text, csv or jsonl")
      ->check(CLI::IsMember({"text", "csv", "jsonl"}));
  auto* synth = app.add_subcommand("synth", "Measure recall and FWER on synthetic corpora");
  bool generate = false;
  synth->add_option("--spec", o.spec, "Synthetic corpus spec (JSON)");
  synth->add_option("--sims", o.sims, "Number of simulations");
  synth->add_flag("--generate", generate, "Write one corpus (scores + metadata) instead of metrics");
  auto* pipeline = app.add_subcommand("pipeline", "link followed by analyze");

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) {
      run_report(report_input, parse_format(report_format), std::cout);
      return 0;
    }
    const PipelineConfig config = make_config(o);
    if (link->parsed()) {
      const auto s = run_link(config);
      std::cout << "matched by DOI: " << s.by_doi << "\n"
                << "matched by title/journal: " << s.by_title_journal << "\n"
                << "unmatched: " << s.unmatched << "\n"
                << "suspicious: " << s.suspicious << "\n";
    } else if (dedup->parsed()) {
      const auto n = run_dedup(config, parse_dedup_scope(dedup_scope));
      std::cout << "documents after dedup: " << n << "\n";
    } else if (clean->parsed()) {
      std::cout << "cleaned documents: " << run_clean(config) << "\n";
    } else if (analyze->parsed() || pipeline->parsed()) {
      const auto manifest = pipeline->parsed() ? run_pipeline(config) : run_analyze(config);
      for (const auto& s : manifest.scopes) {
        std::cout << s.id << ": m=" << s.m << " threshold=" << format_double(s.threshold)
                  << " significant=" << s.significant << (s.illustrative ? " (illustrative)" : "")
                  << "\n";
      }
      for (const auto& s : manifest.skipped) std::cout << s.id << ": skipped (" << s.reason << ")\n";
    } else if (synth->parsed()) {
      if (generate) {
        std::cout << "generated documents: " << run_generate(config) << "\n";
      } else {
        const auto m = run_synth(config);
        std::cout << "simulations: " << m.n_sims << "\n"
                  << "recall: " << (m.recall ? format_double(*m.recall) : "n/a") << "\n"
                  << "fwer: " << format_double(m.fwer) << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "termassoc: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
