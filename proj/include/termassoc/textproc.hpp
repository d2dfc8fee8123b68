#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "termassoc/corpus.hpp"

namespace termassoc {

inline constexpr std::size_t kMaxNgram = 8;
inline constexpr std::size_t kDefaultNgram = 5;

// A word or contiguous phrase; the rendered form (tokens joined by single
// spaces) is the dictionary key everywhere downstream.
class Term {
 public:
  explicit Term(std::vector<std::string> tokens);
  static Term parse(std::string_view rendered);

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& rendered() const { return rendered_; }
  std::size_t size() const { return tokens_.size(); }

  // True when this term's tokens occur contiguously inside `outer`.
  bool contained_in(const Term& outer) const;

 private:
  std::vector<std::string> tokens_;
  std::string rendered_;
};

// Distinct terms of one document, sorted.
struct DocTermSet {
  std::string document_id;
  std::vector<std::string> terms;
};

struct SentenceSplitter {
  SentenceSplitter();
  explicit SentenceSplitter(std::vector<std::string> abbreviations);

  // Splits after '.', '!' or '?' when followed by whitespace and then an
  // uppercase letter or a digit, unless the text before the break ends
  // with a listed abbreviation.
  std::vector<std::string> split(std::string_view text) const;

  std::vector<std::string> abbreviations;  // compared case-insensitively
};

std::vector<std::string> default_abbreviations();
std::vector<std::string> split_sentences(std::string_view text);

// Lowercased tokens. A token is a run of letters and digits that may contain
// internal hyphens or apostrophes; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view sentence);

// Calls emit(begin, length) for every contiguous n-gram of 1..n_max tokens.
template <typename Emit>
void for_each_ngram(std::size_t token_count, std::size_t n_max, Emit&& emit) {
  for (std::size_t n = 1; n <= n_max && n <= token_count; ++n) {
    for (std::size_t begin = 0; begin + n <= token_count; ++begin) emit(begin, n);
  }
}

// Title, each abstract sentence and each keyword are separate units; no
// n-gram spans two of them. Requires abstract_clean and 1 <= n_max <= 8.
DocTermSet extract_terms(const Document& doc, std::size_t n_max,
                         const SentenceSplitter& splitter = SentenceSplitter());

// Debug dump, one {"id", "terms": [...]} object per line.
void write_term_dump(std::ostream& out, const std::vector<DocTermSet>& sets);

}  // namespace termassoc
