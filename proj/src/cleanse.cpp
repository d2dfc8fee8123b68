#include "termassoc/cleanse.hpp"

#include <fstream>
#include <sstream>

#include <boost/regex.hpp>

#include "json.hpp"
#include "termassoc/default_rules_data.hpp"

namespace termassoc {

using nlohmann::json;

struct RuleSet::Compiled {
  boost::regex regex;
};

namespace {

// Label position: start of text, after a sentence terminator, or after a
// line break.
constexpr const char* kLabelStart = R"((?:\A|(?<=[.!?;])|(?<=\n))\s*)";

void check_subset(const CleaningRule& rule) {
  const auto& p = rule.pattern;
  static const char* rejected[] = {"(?<=", "(?<!", "(?(", "(?R", "(?&", "(?>", "(?P", "(?|"};
  for (const char* token : rejected) {
    if (p.find(token) != std::string::npos) {
      throw ConfigError("rule '" + rule.name + "': unsupported construct " + token);
    }
  }
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (p[i] == '\\') {
      if (p[i + 1] >= '1' && p[i + 1] <= '9') {
        throw ConfigError("rule '" + rule.name + "': backreferences are not supported");
      }
      ++i;
    }
  }
}

std::string wrap_pattern(const CleaningRule& rule) {
  const std::string body = "(?:" + rule.pattern + ")";
  switch (rule.kind) {
    case RuleKind::prefix_strip:
      return R"(\A\s*)" + body;
    case RuleKind::suffix_strip:
      return body + R"(\s*\z)";
    case RuleKind::pattern_delete:
      return body;
    case RuleKind::heading_strip:
      return kLabelStart + body + R"(\s*:)";
    case RuleKind::section_delete:
      // Label and body through the sentence that precedes the next label.
      return kLabelStart + body +
             R"(\s*:.*?(?:[.!?](?=\s+[[:upper:]][[:alpha:] /]{0,40}:)|\z))";
  }
  return body;
}

std::string replace_matches(const std::string& text, const boost::regex& re, bool first_only) {
  std::string out;
  out.reserve(text.size());
  auto begin = text.cbegin();
  auto last = text.cbegin();
  boost::smatch m;
  auto flags = boost::match_default;
  while (boost::regex_search(begin, text.cend(), m, re, flags)) {
    if (m.length(0) == 0) {
      if (m[0].second == text.cend()) break;
      begin = m[0].second + 1;
      flags |= boost::match_prev_avail;
      continue;
    }
    out.append(last, m[0].first);
    out.push_back(' ');
    last = begin = m[0].second;
    flags |= boost::match_prev_avail;
    if (first_only || begin == text.cend()) break;
  }
  out.append(last, text.cend());
  return out;
}

CleaningRule rule_from_json(const json& obj, std::size_t index) {
  if (!obj.is_object()) throw ConfigError("rule " + std::to_string(index) + " is not an object");
  CleaningRule rule;
  rule.name = obj.value("name", "rule " + std::to_string(index));
  if (!obj.contains("kind") || !obj["kind"].is_string()) {
    throw ConfigError("rule '" + rule.name + "': missing kind");
  }
  rule.kind = parse_rule_kind(obj["kind"].get<std::string>());
  if (!obj.contains("pattern") || !obj["pattern"].is_string()) {
    throw ConfigError("rule '" + rule.name + "': missing pattern");
  }
  rule.pattern = obj["pattern"].get<std::string>();
  rule.enabled = obj.value("enabled", true);
  rule.ignore_case = obj.value("ignore_case", false);
  return rule;
}

}  // namespace

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::prefix_strip: return "prefix_strip";
    case RuleKind::suffix_strip: return "suffix_strip";
    case RuleKind::pattern_delete: return "pattern_delete";
    case RuleKind::heading_strip: return "heading_strip";
    case RuleKind::section_delete: return "section_delete";
  }
  return "pattern_delete";
}

RuleKind parse_rule_kind(std::string_view text) {
  for (auto kind : {RuleKind::prefix_strip, RuleKind::suffix_strip, RuleKind::pattern_delete,
                    RuleKind::heading_strip, RuleKind::section_delete}) {
    if (to_string(kind) == text) return kind;
  }
  throw ConfigError("unknown rule kind '" + std::string(text) + "'");
}

RuleSet::RuleSet(std::vector<CleaningRule> rules) : rules_(std::move(rules)) {
  compiled_.reserve(rules_.size());
  for (const auto& rule : rules_) {
    if (rule.pattern.empty()) throw ConfigError("rule '" + rule.name + "': empty pattern");
    check_subset(rule);
    boost::regex::flag_type flags = boost::regex::perl;
    if (rule.ignore_case) flags |= boost::regex::icase;
    try {
      auto compiled = std::make_shared<Compiled>();
      compiled->regex = boost::regex(wrap_pattern(rule), flags);
      compiled_.push_back(std::move(compiled));
    } catch (const boost::regex_error& e) {
      throw ConfigError("rule '" + rule.name + "': invalid pattern: " + e.what());
    }
  }
}

RuleSet RuleSet::from_json(std::string_view text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("rule file is not valid JSON");
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("rules")) throw ConfigError("rule file has no 'rules' array");
    list = &doc["rules"];
  }
  if (!list->is_array()) throw ConfigError("'rules' must be an array");
  std::vector<CleaningRule> rules;
  for (std::size_t i = 0; i < list->size(); ++i) rules.push_back(rule_from_json((*list)[i], i));
  return RuleSet(std::move(rules));
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read rule file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string RuleSet::to_json() const {
  json list = json::array();
  for (const auto& r : rules_) {
    list.push_back({{"name", r.name},
                    {"kind", std::string(to_string(r.kind))},
                    {"pattern", r.pattern},
                    {"enabled", r.enabled},
                    {"ignore_case", r.ignore_case}});
  }
  return json{{"rules", list}}.dump();
}

std::string_view default_rules_json() { return detail::kDefaultRulesJson; }

const RuleSet& default_rules() {
  static const RuleSet rules = RuleSet::from_json(default_rules_json());
  return rules;
}

std::string clean_abstract(std::string_view text, const RuleSet& rules) {
  std::string current(text);
  for (std::size_t i = 0; i < rules.rules_.size(); ++i) {
    const auto& rule = rules.rules_[i];
    if (!rule.enabled || current.empty()) continue;
    const bool first_only =
        rule.kind == RuleKind::prefix_strip || rule.kind == RuleKind::suffix_strip;
    current = replace_matches(current, rules.compiled_[i]->regex, first_only);
  }
  return collapse_whitespace(current);
}

void clean_documents(std::vector<Document>& docs, const RuleSet& rules, unsigned threads) {
  parallel_for(docs.size(), threads, [&](std::size_t i) {
    docs[i].abstract_clean = clean_abstract(docs[i].abstract_raw, rules);
  });
}

}  // namespace termassoc
