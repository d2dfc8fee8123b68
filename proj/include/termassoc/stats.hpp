#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "termassoc/corpus.hpp"
#include "termassoc/textproc.hpp"

namespace termassoc {

// Per-term document counts over the analysis groups: group_sizes[g] = N_g
// documents in group g, present[g] = k_g of them contain the term.
struct ContingencyTable {
  std::vector<std::uint64_t> group_sizes;
  std::vector<std::uint64_t> present;

  // Throws std::invalid_argument unless there are at least two groups,
  // 0 <= k_g <= N_g, and the corpus is non-empty.
  void validate() const;
  std::uint64_t documents() const;
  std::uint64_t documents_with_term() const;

  bool operator==(const ContingencyTable&) const = default;
};

struct ChiSquare {
  double statistic = 0.0;
  // The term is present in no document or in every document.
  bool degenerate = false;
};

// Pearson statistic over the groups x {present, absent} table with expected
// counts from the marginals.
ChiSquare chi_square(const ContingencyTable& table);

// P(X >= x) for a chi-square variable with df degrees of freedom. Throws
// std::domain_error for x < 0 or df < 1.
double chi_sq_survival(double x, int df);

// Smallest statistic whose survival value does not exceed alpha / m.
double bonferroni_threshold(double alpha, std::size_t m, int df);

struct Direction {
  std::size_t group = 0;  // highest presence proportion, lowest index on ties
  std::vector<double> proportions;
};

Direction direction(const ContingencyTable& table);

struct TermResult {
  std::string term;
  ContingencyTable table;
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
  bool significant = false;
  bool degenerate = false;
  std::size_t direction = 0;
  std::vector<double> proportions;

  bool operator==(const TermResult&) const = default;
};

struct AnalysisConfig {
  GroupScheme groups = GroupScheme::default_scheme();
  std::size_t n_max = kDefaultNgram;
  std::size_t min_doc_frequency = 10;
  double alpha = 0.05;
  std::size_t top_k = 50;
  std::uint64_t seed = 1;
  std::vector<std::string> scopes = {"unit", "panel", "all"};
  std::size_t min_abstract_chars = kDefaultMinAbstractChars;
  bool drop_unclassified = true;

  // Throws ConfigError on out-of-range fields.
  void validate() const;
};

inline constexpr std::size_t kMaxGroups = 4;
using GroupCounts = std::array<std::uint32_t, kMaxGroups>;

// Retained terms, sorted, with their per-group presence counts.
struct TableSet {
  std::vector<std::uint64_t> group_sizes;
  std::vector<std::string> terms;
  std::vector<GroupCounts> counts;

  std::size_t m() const { return terms.size(); }
  ContingencyTable table(std::size_t i) const;
};

// Counts documents (not occurrences) per group for every term and keeps
// terms present in at least min_df documents. groups[i] is the group of
// term_sets[i]. Shards are counted in parallel and merged; the result does
// not depend on the thread count. Throws Error for an empty corpus or an
// empty group.
TableSet build_tables(const std::vector<DocTermSet>& term_sets,
                      const std::vector<std::size_t>& groups, std::size_t group_count,
                      std::size_t min_df, unsigned threads = 1);

struct ScoredTerms {
  std::size_t m = 0;
  double threshold = 0.0;
  std::vector<TermResult> results;  // same order as the table set
};

// Statistic, p-value, direction and significance for every retained term,
// with the Bonferroni threshold computed from m = tables.m().
ScoredTerms score_terms(const TableSet& tables, double alpha, unsigned threads = 1);

}  // namespace termassoc
