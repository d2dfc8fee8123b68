#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "termassoc/stats.hpp"

namespace termassoc {

struct ScopeReport {
  std::string scope;                      // "unit:4", "panel:A", "all"
  std::vector<std::string> group_labels;  // first label is the lowest-score group
  std::size_t m = 0;                      // tested terms
  double threshold = 0.0;                 // Bonferroni critical statistic
  bool illustrative = false;              // no row reaches the threshold
  std::vector<TermResult> rows;           // chi2 descending, then term ascending

  bool operator==(const ScopeReport&) const = default;
};

// Highest chi2 first; equal statistics in lexicographic term order.
bool ranks_before(const TermResult& a, const TermResult& b);

// The top_k results in rank order. Warns and returns empty for empty input.
std::vector<TermResult> rank_terms(std::vector<TermResult> results, std::size_t top_k);

// Drops every term whose tokens occur contiguously inside another listed
// term pointing at the same group. The longer term stays whatever its rank.
std::vector<TermResult> subsume(const std::vector<TermResult>& ranked);

// Ranks all results and fills up to top_k rows with subsumption applied
// before truncation: the output equals subsume() of the shortest ranked
// prefix that yields top_k rows (or of everything).
std::vector<TermResult> select_terms(std::vector<TermResult> results, std::size_t top_k);

ScopeReport build_scope_report(std::string scope, std::vector<std::string> group_labels,
                               ScoredTerms scored, std::size_t top_k);

enum class ReportFormat { csv, jsonl, text };

// scope,term,n,chi2,p_value,significant,illustrative,direction,prop_<label>...,m,threshold
std::string csv_header(const std::vector<std::string>& group_labels);

void emit_report(std::ostream& out, const ScopeReport& report, ReportFormat format,
                 bool with_header = true);

// Groups JSON-lines rows back into reports, in order of first appearance.
std::vector<ScopeReport> parse_report_jsonl(std::istream& in);

}  // namespace termassoc
