#include "termassoc/textproc.hpp"

#include <algorithm>
#include <ostream>

#include "json.hpp"

namespace termassoc {

Term::Term(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw std::invalid_argument("a term needs at least one token");
  for (const auto& t : tokens_) {
    if (t.empty() || t.find(' ') != std::string::npos) {
      throw std::invalid_argument("term tokens must be non-empty and space-free");
    }
  }
  rendered_ = join(tokens_, " ");
}

Term Term::parse(std::string_view rendered) { return Term(split(collapse_whitespace(rendered), ' ')); }

bool Term::contained_in(const Term& outer) const {
  if (tokens_.size() > outer.tokens_.size()) return false;
  return std::search(outer.tokens_.begin(), outer.tokens_.end(), tokens_.begin(),
                     tokens_.end()) != outer.tokens_.end();
}

std::vector<std::string> default_abbreviations() {
  return {"e.g.", "i.e.", "fig.", "figs.", "et al.", "approx.", "vs.", "dr.", "no.",
          "cf.",  "ca.",  "eq.",  "eqs.",  "ref.",   "refs.",   "prof.", "mr.", "mrs.",
          "ms.",  "st.",  "vol.", "pp.",   "resp.",  "nos.",    "sp.",  "spp."};
}

SentenceSplitter::SentenceSplitter() : abbreviations(default_abbreviations()) {}

SentenceSplitter::SentenceSplitter(std::vector<std::string> abbrevs)
    : abbreviations(std::move(abbrevs)) {
  for (auto& a : abbreviations) a = utf8::lowercase(a);
}

namespace {

bool ends_with_abbreviation(std::string_view lowered_prefix,
                            const std::vector<std::string>& abbreviations) {
  for (const auto& abbr : abbreviations) {
    if (abbr.empty() || lowered_prefix.size() < abbr.size()) continue;
    if (lowered_prefix.compare(lowered_prefix.size() - abbr.size(), abbr.size(), abbr) != 0) {
      continue;
    }
    if (lowered_prefix.size() == abbr.size()) return true;
    const char before = lowered_prefix[lowered_prefix.size() - abbr.size() - 1];
    if (before == ' ' || before == '\t' || before == '\n' || before == '(' || before == '[') {
      return true;
    }
  }
  return false;
}

bool is_joiner(char32_t cp) {
  return cp == '-' || cp == '\'' || cp == 0x2019 || cp == 0x2010 || cp == 0x2011;
}

}  // namespace

std::vector<std::string> SentenceSplitter::split(std::string_view text) const {
  std::vector<std::string> sentences;
  auto push = [&](std::string_view piece) {
    auto s = trim(piece);
    if (!s.empty()) sentences.push_back(std::move(s));
  };

  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;

    // Need at least one whitespace character, then an uppercase letter or digit.
    std::size_t pos = i + 1;
    std::size_t spaces = 0;
    char32_t next = 0;
    while (pos < text.size()) {
      const char32_t cp = utf8::decode_next(text, pos);
      if (utf8::is_space(cp)) {
        ++spaces;
        continue;
      }
      next = cp;
      break;
    }
    if (spaces == 0 || next == 0) continue;
    if (!(utf8::is_upper(next) || (next >= '0' && next <= '9'))) continue;
    if (c == '.' &&
        ends_with_abbreviation(utf8::lowercase(text.substr(start, i + 1 - start)), abbreviations)) {
      continue;
    }
    push(text.substr(start, i + 1 - start));
    start = i + 1;
  }
  push(text.substr(std::min(start, text.size())));
  return sentences;
}

std::vector<std::string> split_sentences(std::string_view text) {
  static const SentenceSplitter splitter;
  return splitter.split(text);
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    std::size_t a = 0;
    std::size_t b = current.size();
    while (a < b && (current[a] == '-' || current[a] == '\'')) ++a;
    while (b > a && (current[b - 1] == '-' || current[b - 1] == '\'')) --b;
    if (b > a) tokens.emplace_back(current.substr(a, b - a));
    current.clear();
  };
  for (std::size_t pos = 0; pos < sentence.size();) {
    const char32_t cp = utf8::decode_next(sentence, pos);
    if (utf8::is_alnum(cp)) {
      utf8::append(current, utf8::to_lower(cp));
    } else if (is_joiner(cp)) {
      current.push_back(cp == '\'' || cp == 0x2019 ? '\'' : '-');
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

DocTermSet extract_terms(const Document& doc, std::size_t n_max,
                         const SentenceSplitter& splitter) {
  if (n_max < 1 || n_max > kMaxNgram) {
    throw std::invalid_argument("n_max must be in 1.." + std::to_string(kMaxNgram));
  }
  if (!doc.abstract_clean) {
    throw OrderingError("document " + doc.id + " has no cleaned abstract; clean before extraction");
  }

  std::vector<std::string> terms;
  std::string key;
  auto add_unit = [&](std::string_view text) {
    const auto tokens = tokenize(text);
    for_each_ngram(tokens.size(), n_max, [&](std::size_t begin, std::size_t n) {
      key = tokens[begin];
      for (std::size_t j = 1; j < n; ++j) {
        key.push_back(' ');
        key.append(tokens[begin + j]);
      }
      terms.push_back(key);
    });
  };

  add_unit(doc.title);
  for (const auto& sentence : splitter.split(*doc.abstract_clean)) add_unit(sentence);
  for (const auto& keyword : doc.keywords) add_unit(keyword);

  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return {doc.id, std::move(terms)};
}

void write_term_dump(std::ostream& out, const std::vector<DocTermSet>& sets) {
  for (const auto& s : sets) {
    out << nlohmann::json{{"id", s.document_id}, {"terms", s.terms}}.dump() << '\n';
  }
}

}  // namespace termassoc
