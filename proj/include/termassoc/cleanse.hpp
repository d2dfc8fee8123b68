#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "termassoc/corpus.hpp"

namespace termassoc {

enum class RuleKind {
  prefix_strip,    // remove a match anchored at the start of the text
  suffix_strip,    // remove the leftmost match that runs to the end of the text
  pattern_delete,  // remove every match
  heading_strip,   // remove a structured-abstract label ("Methods:"), keep its body
  section_delete,  // remove a labelled section, label and body
};

std::string_view to_string(RuleKind kind);
RuleKind parse_rule_kind(std::string_view text);

struct CleaningRule {
  RuleKind kind = RuleKind::pattern_delete;
  std::string pattern;
  bool enabled = true;
  bool ignore_case = false;
  std::string name;
};

// An ordered, compiled rule list. Patterns are compiled when the set is
// built, so a bad pattern is a ConfigError at load time and apply() cannot
// fail.
//
// Supported pattern syntax: literals, escapes (\. \s \d \w \b), character
// classes, anchors (^ $), groups including (?:...), lookahead (?=...) and
// (?!...), alternation, and repetition (* + ? {n} {n,m}, lazy forms too).
// Backreferences, lookbehind, atomic groups, recursion and conditionals are
// rejected.
class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<CleaningRule> rules);

  // Rule file: {"rules": [{"kind", "pattern", "enabled", "ignore_case", "name"}]}.
  static RuleSet from_json(std::string_view text);
  static RuleSet load(const std::filesystem::path& path);

  const std::vector<CleaningRule>& rules() const { return rules_; }
  std::string to_json() const;

 private:
  friend std::string clean_abstract(std::string_view text, const RuleSet& rules);

  struct Compiled;
  std::vector<CleaningRule> rules_;
  std::vector<std::shared_ptr<const Compiled>> compiled_;
};

// The rule file shipped in data/default_rules.json, built in.
const RuleSet& default_rules();
std::string_view default_rules_json();

// Applies enabled rules in order, then collapses whitespace runs to single
// spaces and trims.
std::string clean_abstract(std::string_view text, const RuleSet& rules);

// Sets abstract_clean on every document.
void clean_documents(std::vector<Document>& docs, const RuleSet& rules, unsigned threads = 1);

}  // namespace termassoc
