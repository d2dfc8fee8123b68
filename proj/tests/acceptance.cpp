// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "oracle.hpp"
#include "termassoc/pipeline.hpp"

using namespace termassoc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kFixtures = TERMASSOC_FIXTURE_DIR;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "failed: " << what << "; ";
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("termassoc_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------

void oracle_equivalence(Outcome& o) {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240508);
  std::size_t worst_index = 0;
  long double worst = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    ContingencyTable t;
    for (int g = 0; g < 3; ++g) {
      const std::uint64_t n = 1 + rng() % 10000;
      t.group_sizes.push_back(n);
      t.present.push_back(rng() % (n + 1));
    }
    const double got = chi_square(t).statistic;
    const long double want = oracle::pearson(t.group_sizes, t.present);
    const long double err =
        want == 0 ? std::fabs(static_cast<long double>(got))
                  : std::fabs(static_cast<long double>(got) - want) / std::fabs(want);
    if (err > worst) {
      worst = err;
      worst_index = i;
    }
  }
  const double elapsed = seconds_since(start);
  o.require(worst <= 1e-9L, "relative error above 1e-9 at table " + std::to_string(worst_index));
  o.require(elapsed < 5.0, "runtime");
  o.detail << "max relative error " << static_cast<double>(worst) << ", " << elapsed << " s";
}

void survival_closed_form(Outcome& o) {
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = 100.0 * i / 99.0;
    worst = std::max(worst, std::fabs(chi_sq_survival(x, 2) - std::exp(-x / 2)));
  }
  const double threshold = bonferroni_threshold(0.05, 1000000, 2);
  o.require(worst <= 1e-12, "survival differs from exp(-x/2)");
  o.require(std::fabs(threshold - 33.6224) <= 1e-3, "threshold");
  o.require(std::fabs(threshold - oracle::kIsf_5e8_df2) <= 1e-9, "threshold vs -2 ln(5e-8)");
  o.detail << "max abs error " << worst << ", threshold " << format_double(threshold);
}

void funded_by_illustration(Outcome& o) {
  const ContingencyTable t{{1000, 1000, 1000}, {10, 20, 50}};
  const double chi2 = chi_square(t).statistic;
  const auto dir = direction(t);
  o.require(std::fabs(chi2 - 33.39) <= 0.01, "statistic");
  o.require(std::fabs(chi2 - oracle::kChi2_10_20_50) <= 1e-9 * oracle::kChi2_10_20_50,
            "statistic vs oracle");
  o.require(dir.group == 2, "direction");
  bool zeros = true;
  for (std::uint64_t k : {1ULL, 2ULL, 20ULL, 500ULL}) {
    zeros = zeros && chi_square({{1000, 1000, 1000}, {k, k, k}}).statistic == 0.0;
    zeros = zeros && chi_square({{1000, 2000, 4000}, {k, 2 * k, 4 * k}}).statistic == 0.0;
  }
  o.require(zeros, "identical proportions not exactly 0");
  o.detail << "chi2 " << format_double(chi2) << ", direction group " << dir.group;
}

void planted_recovery(Outcome& o) {
  const auto start = Clock::now();
  SyntheticSpec spec;
  spec.group_sizes = {1000, 1000, 1000};
  spec.vocab_size = 5000;
  spec.planted = {{{"novel", "catalytic", "pathway"}, {0.01, 0.02, 0.20}}};
  spec.seed = 4;
  AnalysisConfig config;
  config.n_max = 5;
  const auto metrics = evaluate_detector(spec, config, 20, 1);
  const double elapsed = seconds_since(start);
  const std::size_t flagged = metrics.per_term.at(0).flagged;
  o.require(flagged >= 19, "planted term flagged in fewer than 19 runs");
  o.require(elapsed < 120.0, "runtime");
  o.detail << flagged << "/20 runs flagged, " << elapsed << " s";
}

void family_wise_error(Outcome& o) {
  const auto start = Clock::now();
  SyntheticSpec spec;
  spec.group_sizes = {1000, 1000, 1000};
  spec.vocab_size = 5000;
  // A planted term without an effect must not be flagged either.
  spec.planted = {{{"funded", "by"}, {0.05, 0.05, 0.05}}};
  spec.seed = 5;
  AnalysisConfig config;
  config.alpha = 0.05;
  const auto metrics = evaluate_detector(spec, config, 200, 1);
  const double elapsed = seconds_since(start);
  o.require(!metrics.recall.has_value(), "null spec reports a recall");
  o.require(metrics.fwer <= 0.08, "FWER above 0.08");
  o.require(elapsed < 600.0, "runtime");
  o.detail << "FWER " << format_double(metrics.fwer) << " over 200 simulations, " << elapsed << " s";
}

// Documents whose every textual unit draws tokens from its own alphabet
// ("t<unit>x<word>"), so a term mixing alphabets crossed a boundary. The
// expected term set is computed from the generated token lists.
void sentence_boundaries(Outcome& o) {
  std::mt19937_64 rng(606);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const std::vector<std::string> terminators = {".", "!", "?"};
  const std::vector<std::string> gaps = {" ", "  ", "\n", " \t "};
  struct Noise {
    std::string text;
    std::vector<std::string> tokens;
  };
  const std::vector<Noise> noise = {{"e.g.", {"e", "g"}},     {"i.e.,", {"i", "e"}},
                                    {"Fig. 2", {"fig", "2"}}, {"3.5", {"3", "5"}},
                                    {"et al.", {"et", "al"}}, {"(approx. 7)", {"approx", "7"}},
                                    {"state-of-the-art", {"state-of-the-art"}}};

  std::size_t crossing = 0, mismatched_sets = 0, bad_positions = 0, bad_splits = 0;
  for (int d = 0; d < 10000; ++d) {
    Document doc;
    doc.id = std::to_string(d);
    std::vector<std::vector<std::string>> units;
    auto make_unit = [&](std::size_t unit, std::size_t len, bool capital) {
      std::vector<std::string> tokens;
      std::string text;
      for (std::size_t i = 0; i < len; ++i) {
        if (i > 0 && pick(6) == 0) {
          const auto& n = noise[pick(noise.size())];
          text += n.text + " ";
          tokens.insert(tokens.end(), n.tokens.begin(), n.tokens.end());
        }
        std::string tok = "t" + std::to_string(unit) + "x" + std::to_string(pick(40));
        tokens.push_back(tok);
        if (i == 0 && capital) tok[0] = 'T';
        text += tok + (i + 1 < len ? " " : "");
      }
      units.push_back(tokens);
      return text;
    };

    std::size_t unit = 0;
    doc.title = make_unit(unit++, 1 + pick(8), true);
    const std::size_t n_sentences = pick(6);
    std::string abstract;
    for (std::size_t s = 0; s < n_sentences; ++s) {
      if (s > 0) abstract += gaps[pick(gaps.size())];
      abstract += make_unit(unit++, 1 + pick(14), true) + terminators[pick(3)];
    }
    doc.abstract_clean = abstract;
    for (std::size_t k = pick(4); k > 0; --k) doc.keywords.push_back(make_unit(unit++, 1 + pick(4), false));

    const std::size_t n_max = 1 + pick(kMaxNgram);
    const auto terms = extract_terms(doc, n_max);

    std::set<std::string> expected;
    for (const auto& tokens : units) {
      std::vector<std::size_t> per_length(n_max + 1, 0);
      for_each_ngram(tokens.size(), n_max, [&](std::size_t b, std::size_t n) {
        ++per_length[n];
        std::vector<std::string> slice(tokens.begin() + b, tokens.begin() + b + n);
        expected.insert(join(slice, " "));
      });
      for (std::size_t n = 1; n <= n_max; ++n) {
        const std::size_t L = tokens.size();
        bad_positions += per_length[n] != (n <= L ? L - n + 1 : 0);
      }
    }
    bad_splits += split_sentences(abstract).size() != n_sentences;
    mismatched_sets += std::set<std::string>(terms.terms.begin(), terms.terms.end()) != expected;
    for (const auto& term : terms.terms) {
      std::set<std::string> alphabets;
      const Term parsed = Term::parse(term);
      for (const auto& tok : parsed.tokens()) {
        if (tok.size() > 1 && tok[0] == 't' && std::isdigit(static_cast<unsigned char>(tok[1]))) {
          alphabets.insert(tok.substr(0, tok.find('x')));
        }
      }
      crossing += alphabets.size() > 1;
    }
  }
  o.require(crossing == 0, "terms crossing a boundary");
  o.require(bad_splits == 0, "sentence count differs from generated count");
  o.require(mismatched_sets == 0, "term sets differ from the expected n-grams");
  o.require(bad_positions == 0, "n-gram position counts differ from L-n+1");
  o.detail << "10000 documents: " << crossing << " crossing terms, " << bad_splits
           << " split mismatches, " << mismatched_sets << " term-set mismatches, "
           << bad_positions << " position-count mismatches";
}

void dedup_contract(Outcome& o) {
  auto copies = [](std::vector<int> scores) {
    std::vector<Document> docs;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      Document d;
      d.id = "copy" + std::to_string(i);
      d.doi = "10.1234/article";
      d.unit = "4";
      d.panel = "A";
      d.score = scores[i];
      docs.push_back(d);
    }
    return docs;
  };

  bool odd_ok = true;
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto docs = copies({2, 3, 4});
    std::shuffle(docs.begin(), docs.end(), rng);
    const auto r = dedup_within_unit(docs, DedupScope::unit, rng());
    odd_ok = odd_ok && r.documents.size() == 1 && r.documents[0].score == 3 && r.random_draws == 0;
  }
  o.require(odd_ok, "{2,3,4} did not always give 3");

  const std::uint64_t seed = 42;
  const auto first = dedup_within_unit(copies({3, 4}), DedupScope::unit, seed);
  bool tie_ok = first.documents.size() == 1 && first.random_draws == 1 &&
                (first.documents[0].score == 3 || first.documents[0].score == 4);
  for (int run = 0; run < 50; ++run) {
    auto docs = copies({3, 4});
    if (run % 2) std::reverse(docs.begin(), docs.end());
    const auto again = dedup_within_unit(docs, DedupScope::unit, seed);
    tie_ok = tie_ok && again.documents == first.documents && again.random_draws == 1;
  }
  o.require(tie_ok, "{3,4} not reproducible");

  const auto equal = dedup_within_unit(copies({4, 4}), DedupScope::unit, seed);
  o.require(equal.documents.size() == 1 && equal.documents[0].score == 4 &&
                equal.random_draws == 0,
            "{4,4}");
  o.detail << "{3,4} with seed 42 -> " << first.documents[0].score << " on every run";
}

// Runs link + analyze on the bundled fixture and returns the bytes of every
// report file plus the manifest.
std::map<std::string, std::string> pipeline_outputs(const fs::path& scores, const fs::path& metadata,
                                                    const fs::path& out, unsigned threads) {
  auto config = PipelineConfig::load(kFixtures / "config.json");
  config.scores = scores;
  config.metadata = metadata;
  config.output_dir = out;
  config.threads = threads;
  run_pipeline(config);
  std::map<std::string, std::string> files;
  files["manifest.json"] = read_file(out / "manifest.json");
  for (const auto& entry : fs::directory_iterator(out / "reports")) {
    files["reports/" + entry.path().filename().string()] = read_file(entry.path());
  }
  return files;
}

void determinism(Outcome& o) {
  const auto dir = scratch("determinism");
  const unsigned many = std::max(4U, std::thread::hardware_concurrency());

  auto shuffled = [&](const std::string& name) {
    std::istringstream in(read_file(kFixtures / name));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    std::mt19937_64 rng(99);
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    write_file(dir / name, text);
    return dir / name;
  };

  const auto base = pipeline_outputs(kFixtures / "scores.jsonl", kFixtures / "metadata.jsonl",
                                     dir / "one", 1);
  const auto threaded = pipeline_outputs(kFixtures / "scores.jsonl",
                                         kFixtures / "metadata.jsonl", dir / "many", many);
  const auto reordered =
      pipeline_outputs(shuffled("scores.jsonl"), shuffled("metadata.jsonl"), dir / "shuffled", many);
  o.require(base.size() > 1, "no reports written");
  o.require(base == threaded, "1 vs " + std::to_string(many) + " threads differ");
  o.require(base == reordered, "shuffled input differs");
  o.detail << base.size() << " files byte-identical across 1 thread, " << many
           << " threads and shuffled input";
}

void filter_boundary(Outcome& o) {
  // Boilerplate around a body of known length; the boundary applies to the
  // cleaned text.
  auto doc = [](std::string id, int score, std::size_t body_chars) {
    Document d;
    d.id = std::move(id);
    d.unit = "4";
    d.score = score;
    std::string body = "Results";
    while (body.size() + 1 < body_chars) body += " x";
    body.resize(body_chars - 1);
    body += ".";
    d.abstract_raw = "Abstract: " + body + " © 2021 The Authors. All rights reserved.";
    return d;
  };
  std::vector<Document> docs = {doc("short", 3, 499), doc("exact", 3, 500),
                                doc("zero", 0, 2000), doc("long", 4, 1200)};
  clean_documents(docs, default_rules());
  const auto lengths = std::vector<std::size_t>{utf8::length(*docs[0].abstract_clean),
                                                utf8::length(*docs[1].abstract_clean)};
  const auto kept = filter_documents(docs, 500);
  std::vector<std::string> ids;
  for (const auto& d : kept.documents) ids.push_back(d.id);
  std::sort(ids.begin(), ids.end());
  o.require(lengths[0] == 499 && lengths[1] == 500, "cleaned lengths");
  o.require(ids == std::vector<std::string>{"exact", "long"}, "retained set");
  const auto& counts = kept.per_unit.at("4");
  o.require(counts.removed_short == 1 && counts.removed_score0 == 1 && counts.kept == 2, "counts");
  o.detail << "cleaned lengths 499/500, kept {" << join(ids, ", ") << "}";
}

void subsumption(Outcome& o) {
  const auto dir = scratch("subsumption");
  auto config = PipelineConfig::load(kFixtures / "config.json");
  config.output_dir = dir;
  config.analysis.scopes = {"all"};
  run_pipeline(config);

  // Unsubsumed ranking of the same scope.
  std::ifstream in(dir / "linked.jsonl");
  auto docs = parse_documents(in).records;
  clean_documents(docs, config.load_rules());
  docs = drop_unclassified(std::move(docs));
  auto deduped = dedup_within_unit(std::move(docs), DedupScope::all, config.analysis.seed);
  auto filtered = filter_documents(std::move(deduped.documents), config.analysis.min_abstract_chars);
  auto analysis = analyze_documents(filtered.documents, config.analysis);
  const auto ranked = rank_terms(analysis.scored.results, config.analysis.top_k);
  auto find = [](const std::vector<TermResult>& rows, const std::string& term) {
    return std::find_if(rows.begin(), rows.end(),
                        [&](const TermResult& r) { return r.term == term; });
  };
  const auto longer = find(ranked, "here we show that");
  const auto shorter = find(ranked, "we show");
  o.require(longer != ranked.end() && shorter != ranked.end(), "both phrases top-ranked");
  if (longer != ranked.end() && shorter != ranked.end()) {
    o.require(longer->direction == shorter->direction, "same direction");
    o.detail << "ranks " << (shorter - ranked.begin()) + 1 << " and " << (longer - ranked.begin()) + 1
             << " before subsumption; ";
  }

  std::ifstream report_in(dir / "reports" / "all.jsonl");
  const auto reports = parse_report_jsonl(report_in);
  o.require(reports.size() == 1, "one report");
  if (reports.size() == 1) {
    const auto& rows = reports[0].rows;
    o.require(find(rows, "here we show that") != rows.end(), "longer phrase emitted");
    o.require(find(rows, "we show") == rows.end(), "shorter phrase omitted");
    o.detail << "emitted report keeps only \"here we show that\"";
  }
}

}  // namespace

int main(int argc, char** argv) {
  set_log_level(LogLevel::error);
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"chi-square oracle equivalence", oracle_equivalence},
      {"closed-form survival and Bonferroni threshold", survival_closed_form},
      {"1%/2%/5% illustration", funded_by_illustration},
      {"planted-term recovery", planted_recovery},
      {"family-wise error control", family_wise_error},
      {"sentence-boundary property", sentence_boundaries},
      {"dedup contract", dedup_contract},
      {"determinism", determinism},
      {"filter boundary", filter_boundary},
      {"subsumption", subsumption},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoul(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first
              << " (" << o.detail.str() << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
