#include "termassoc/report.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include "json.hpp"

namespace termassoc {

using nlohmann::json;

bool ranks_before(const TermResult& a, const TermResult& b) {
  if (a.chi2 != b.chi2) return a.chi2 > b.chi2;
  return a.term < b.term;
}

std::vector<TermResult> rank_terms(std::vector<TermResult> results, std::size_t top_k) {
  if (results.empty()) {
    log(LogLevel::warn, "no terms to rank");
    return results;
  }
  const auto keep = std::min(top_k, results.size());
  std::partial_sort(results.begin(), results.begin() + keep, results.end(), ranks_before);
  results.resize(keep);
  return results;
}

namespace {

// Incremental subsumption over a ranked stream. Containment is transitive,
// so checking against kept rows only is enough.
class Subsumer {
 public:
  void add(TermResult row) {
    Term term = Term::parse(row.term);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i].direction == row.direction && term.contained_in(terms_[i])) return;
    }
    for (std::size_t i = rows_.size(); i-- > 0;) {
      if (rows_[i].direction == row.direction && terms_[i].contained_in(term)) {
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
        terms_.erase(terms_.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    rows_.push_back(std::move(row));
    terms_.push_back(std::move(term));
  }

  std::size_t size() const { return rows_.size(); }
  std::vector<TermResult> take() { return std::move(rows_); }

 private:
  std::vector<TermResult> rows_;
  std::vector<Term> terms_;
};

std::string fixed(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  return buf;
}

std::string scientific(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", value);
  return buf;
}

std::string label_of(const ScopeReport& report, std::size_t group) {
  return group < report.group_labels.size() ? report.group_labels[group]
                                            : std::to_string(group);
}

json row_json(const ScopeReport& report, const TermResult& row) {
  json obj = json::object();
  obj["scope"] = report.scope;
  obj["term"] = row.term;
  obj["n"] = row.table.documents_with_term();
  obj["chi2"] = row.chi2;
  obj["p_value"] = row.p_value;
  obj["significant"] = row.significant;
  obj["illustrative"] = report.illustrative;
  obj["direction"] = label_of(report, row.direction);
  for (std::size_t g = 0; g < row.proportions.size(); ++g) {
    obj["prop_" + label_of(report, g)] = row.proportions[g];
  }
  obj["m"] = report.m;
  obj["threshold"] = report.threshold;
  obj["df"] = row.df;
  obj["degenerate"] = row.degenerate;
  obj["groups"] = report.group_labels;
  obj["group_sizes"] = row.table.group_sizes;
  obj["present"] = row.table.present;
  return obj;
}

void emit_csv(std::ostream& out, const ScopeReport& report, bool with_header) {
  if (with_header) out << csv_header(report.group_labels) << '\n';
  for (const auto& row : report.rows) {
    out << csv_field(report.scope) << ',' << csv_field(row.term) << ','
        << row.table.documents_with_term() << ',' << format_double(row.chi2) << ','
        << format_double(row.p_value) << ',' << (row.significant ? "true" : "false") << ','
        << (report.illustrative ? "true" : "false") << ','
        << csv_field(label_of(report, row.direction));
    for (double p : row.proportions) out << ',' << format_double(p);
    out << ',' << report.m << ',' << format_double(report.threshold) << '\n';
  }
}

void emit_text(std::ostream& out, const ScopeReport& report) {
  out << "scope " << report.scope << ": " << report.m << " terms tested, critical chi2 "
      << fixed(report.threshold, 4) << '\n';
  if (report.illustrative) {
    out << "illustrative: no term reaches the corrected threshold\n";
  }
  char line[256];
  std::snprintf(line, sizeof line, "%4s  %-4s %10s %10s %3s", "rank", "dir", "chi2", "p", "sig");
  out << line;
  for (const auto& label : report.group_labels) {
    std::snprintf(line, sizeof line, " %8s", ("%" + label).c_str());
    out << line;
  }
  out << "  term\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    // Terms pointing at the lowest-score group are marked LOW.
    const std::string dir = row.direction == 0 ? "LOW" : label_of(report, row.direction);
    std::snprintf(line, sizeof line, "%4zu  %-4s %10s %10s %3s", i + 1, dir.c_str(),
                  fixed(row.chi2, 3).c_str(), scientific(row.p_value).c_str(),
                  row.significant ? "*" : "");
    out << line;
    for (double p : row.proportions) {
      std::snprintf(line, sizeof line, " %8s", fixed(100.0 * p, 2).c_str());
      out << line;
    }
    out << "  " << row.term << '\n';
  }
}

}  // namespace

std::vector<TermResult> subsume(const std::vector<TermResult>& ranked) {
  Subsumer s;
  for (const auto& row : ranked) s.add(row);
  return s.take();
}

std::vector<TermResult> select_terms(std::vector<TermResult> results, std::size_t top_k) {
  if (results.empty()) {
    log(LogLevel::warn, "no terms to rank");
    return results;
  }
  std::sort(results.begin(), results.end(), ranks_before);
  Subsumer s;
  for (auto& row : results) {
    s.add(std::move(row));
    if (s.size() >= top_k) break;
  }
  return s.take();
}

ScopeReport build_scope_report(std::string scope, std::vector<std::string> group_labels,
                               ScoredTerms scored, std::size_t top_k) {
  ScopeReport report;
  report.scope = std::move(scope);
  report.group_labels = std::move(group_labels);
  report.m = scored.m;
  report.threshold = scored.threshold;
  report.rows = select_terms(std::move(scored.results), top_k);
  report.illustrative = std::none_of(report.rows.begin(), report.rows.end(),
                                     [](const TermResult& r) { return r.significant; });
  return report;
}

std::string csv_header(const std::vector<std::string>& group_labels) {
  std::string header = "scope,term,n,chi2,p_value,significant,illustrative,direction";
  for (const auto& label : group_labels) header += ",prop_" + label;
  header += ",m,threshold";
  return header;
}

void emit_report(std::ostream& out, const ScopeReport& report, ReportFormat format,
                 bool with_header) {
  switch (format) {
    case ReportFormat::csv:
      emit_csv(out, report, with_header);
      break;
    case ReportFormat::jsonl:
      for (const auto& row : report.rows) out << row_json(report, row).dump() << '\n';
      break;
    case ReportFormat::text:
      emit_text(out, report);
      break;
  }
  if (!out) throw IoError("failed to write report for scope " + report.scope);
}

std::vector<ScopeReport> parse_report_jsonl(std::istream& in) {
  std::vector<ScopeReport> reports;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw Error("report line " + std::to_string(line_no) + " is not a JSON object");
    }
    try {
      const auto scope = obj.at("scope").get<std::string>();
      auto [it, inserted] = index.emplace(scope, reports.size());
      if (inserted) {
        ScopeReport r;
        r.scope = scope;
        r.group_labels = obj.at("groups").get<std::vector<std::string>>();
        r.m = obj.at("m").get<std::size_t>();
        r.threshold = obj.at("threshold").get<double>();
        r.illustrative = obj.at("illustrative").get<bool>();
        reports.push_back(std::move(r));
      }
      ScopeReport& report = reports[it->second];
      TermResult row;
      row.term = obj.at("term").get<std::string>();
      row.table.group_sizes = obj.at("group_sizes").get<std::vector<std::uint64_t>>();
      row.table.present = obj.at("present").get<std::vector<std::uint64_t>>();
      row.chi2 = obj.at("chi2").get<double>();
      row.df = obj.at("df").get<int>();
      row.p_value = obj.at("p_value").get<double>();
      row.significant = obj.at("significant").get<bool>();
      row.degenerate = obj.at("degenerate").get<bool>();
      const auto dir = obj.at("direction").get<std::string>();
      const auto& labels = report.group_labels;
      const auto pos = std::find(labels.begin(), labels.end(), dir);
      if (pos == labels.end()) throw Error("unknown direction label '" + dir + "'");
      row.direction = static_cast<std::size_t>(pos - labels.begin());
      for (const auto& label : labels) {
        row.proportions.push_back(obj.at("prop_" + label).get<double>());
      }
      report.rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw Error("report line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return reports;
}

}  // namespace termassoc
