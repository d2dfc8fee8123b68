#include "termassoc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include <boost/math/special_functions/gamma.hpp>

namespace termassoc {

void ContingencyTable::validate() const {
  if (group_sizes.size() < 2) throw std::invalid_argument("contingency table needs two groups");
  if (present.size() != group_sizes.size()) {
    throw std::invalid_argument("contingency table rows differ in length");
  }
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    if (present[g] > group_sizes[g]) {
      throw std::invalid_argument("presence count exceeds group size");
    }
  }
  if (documents() == 0) throw std::invalid_argument("contingency table is empty");
}

std::uint64_t ContingencyTable::documents() const {
  return std::accumulate(group_sizes.begin(), group_sizes.end(), std::uint64_t{0});
}

std::uint64_t ContingencyTable::documents_with_term() const {
  return std::accumulate(present.begin(), present.end(), std::uint64_t{0});
}

ChiSquare chi_square(const ContingencyTable& table) {
  table.validate();
  const std::uint64_t n = table.documents();
  const std::uint64_t k = table.documents_with_term();
  if (k == 0 || k == n) return {0.0, true};

  // With d_g = k_g * N - N_g * K, each group contributes
  // (O - E)^2 / E over its two cells = d_g^2 / (N_g K (N - K)).
  // d_g is an exact integer, so equal proportions give exactly zero.
  double sum = 0.0;
  for (std::size_t g = 0; g < table.group_sizes.size(); ++g) {
    const auto size = table.group_sizes[g];
    if (size == 0) continue;
    const auto d = static_cast<double>(static_cast<std::int64_t>(table.present[g] * n) -
                                       static_cast<std::int64_t>(size * k));
    sum += d * d / static_cast<double>(size);
  }
  const double statistic =
      sum / (static_cast<double>(k) * static_cast<double>(n - k));
  return {statistic, false};
}

double chi_sq_survival(double x, int df) {
  if (df < 1) throw std::domain_error("chi-square degrees of freedom must be >= 1");
  if (!(x >= 0.0)) throw std::domain_error("chi-square statistic must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double bonferroni_threshold(double alpha, std::size_t m, int df) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must be in (0, 1]");
  if (m == 0) throw std::domain_error("Bonferroni divisor m must be >= 1");
  const double target = alpha / static_cast<double>(m);
  if (target >= 1.0) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  while (chi_sq_survival(hi, df) > target) hi *= 2.0;
  // Invariant: survival(lo) > target >= survival(hi). Bisect to adjacent doubles.
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (chi_sq_survival(mid, df) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

Direction direction(const ContingencyTable& table) {
  Direction out;
  const auto groups = table.group_sizes.size();
  out.proportions.resize(groups, 0.0);
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < groups; ++g) {
    const auto size = table.group_sizes[g];
    if (size == 0) continue;
    out.proportions[g] = static_cast<double>(table.present[g]) / static_cast<double>(size);
    // Exact comparison k_g / N_g > k_b / N_b via cross products.
    if (!best || static_cast<unsigned __int128>(table.present[g]) * table.group_sizes[*best] >
                     static_cast<unsigned __int128>(table.present[*best]) * size) {
      best = g;
    }
  }
  out.group = best.value_or(0);
  return out;
}

void AnalysisConfig::validate() const {
  if (n_max < 1 || n_max > kMaxNgram) {
    throw ConfigError("n_max must be in 1.." + std::to_string(kMaxNgram));
  }
  if (min_doc_frequency < 1) throw ConfigError("min_df must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (groups.size() > kMaxGroups) throw ConfigError("at most four score groups are supported");
}

ContingencyTable TableSet::table(std::size_t i) const {
  ContingencyTable t;
  t.group_sizes = group_sizes;
  t.present.assign(counts[i].begin(), counts[i].begin() + group_sizes.size());
  return t;
}

TableSet build_tables(const std::vector<DocTermSet>& term_sets,
                      const std::vector<std::size_t>& groups, std::size_t group_count,
                      std::size_t min_df, unsigned threads) {
  if (term_sets.empty()) throw Error("cannot build contingency tables for an empty corpus");
  if (groups.size() != term_sets.size()) {
    throw std::invalid_argument("every document needs exactly one group");
  }
  if (group_count < 2 || group_count > kMaxGroups) {
    throw std::invalid_argument("group count must be in 2..4");
  }

  TableSet out;
  out.group_sizes.assign(group_count, 0);
  for (auto g : groups) {
    if (g >= group_count) throw std::invalid_argument("document group out of range");
    ++out.group_sizes[g];
  }
  for (std::size_t g = 0; g < group_count; ++g) {
    if (out.group_sizes[g] == 0) {
      throw Error("group " + std::to_string(g) + " has no documents");
    }
  }

  using CountMap = std::unordered_map<std::string_view, GroupCounts>;
  const std::size_t shards = std::clamp<std::size_t>(threads, 1, term_sets.size());
  std::vector<CountMap> partial(shards);
  parallel_for(shards, static_cast<unsigned>(shards), [&](std::size_t s) {
    const std::size_t begin = term_sets.size() * s / shards;
    const std::size_t end = term_sets.size() * (s + 1) / shards;
    auto& counts = partial[s];
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& term : term_sets[i].terms) ++counts[term][groups[i]];
    }
  });
  CountMap& merged = partial.front();
  for (std::size_t s = 1; s < shards; ++s) {
    for (const auto& [term, c] : partial[s]) {
      auto& target = merged[term];
      for (std::size_t g = 0; g < kMaxGroups; ++g) target[g] += c[g];
    }
    CountMap().swap(partial[s]);
  }

  std::vector<std::pair<std::string_view, GroupCounts>> kept;
  for (const auto& [term, c] : merged) {
    std::uint64_t total = 0;
    for (auto v : c) total += v;
    if (total >= min_df) kept.emplace_back(term, c);
  }
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  out.terms.reserve(kept.size());
  out.counts.reserve(kept.size());
  for (auto& [term, c] : kept) {
    out.terms.emplace_back(term);
    out.counts.push_back(c);
  }
  return out;
}

ScoredTerms score_terms(const TableSet& tables, double alpha, unsigned threads) {
  ScoredTerms out;
  out.m = tables.m();
  const int df = static_cast<int>(tables.group_sizes.size()) - 1;
  out.threshold = out.m > 0 ? bonferroni_threshold(alpha, out.m, df) : 0.0;
  out.results.resize(out.m);
  parallel_for(out.m, threads, [&](std::size_t i) {
    TermResult& r = out.results[i];
    r.term = tables.terms[i];
    r.table = tables.table(i);
    const auto stat = chi_square(r.table);
    r.chi2 = stat.statistic;
    r.degenerate = stat.degenerate;
    r.df = df;
    r.p_value = chi_sq_survival(r.chi2, df);
    r.significant = r.chi2 >= out.threshold;
    auto dir = direction(r.table);
    r.direction = dir.group;
    r.proportions = std::move(dir.proportions);
  });
  return out;
}

}  // namespace termassoc
