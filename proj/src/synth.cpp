#include "termassoc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>

#include "json.hpp"
#include "termassoc/pipeline.hpp"
#include "termassoc/textproc.hpp"

namespace termassoc {

using nlohmann::json;

namespace {

// Portable draws on top of the standardized mt19937_64 engine; the standard
// distributions are implementation-defined.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t bound) {
    // Lemire's multiply-shift with rejection.
    const std::uint64_t range = bound;
    std::uint64_t x = engine_();
    unsigned __int128 product = static_cast<unsigned __int128>(x) * range;
    auto low = static_cast<std::uint64_t>(product);
    if (low < range) {
      const std::uint64_t floor = -range % range;
      while (low < floor) {
        x = engine_();
        product = static_cast<unsigned __int128>(x) * range;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::size_t>(product >> 64);
  }

  bool chance(double p) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return u < p;
  }

 private:
  std::mt19937_64 engine_;
};

bool looks_like_background(const std::string& token) {
  if (token.size() <= 3 || token.compare(0, 3, "tok") != 0) return false;
  return std::all_of(token.begin() + 3, token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::size_t token_width(std::size_t vocab_size) {
  std::size_t width = 1;
  for (std::size_t v = vocab_size > 0 ? vocab_size - 1 : 0; v >= 10; v /= 10) ++width;
  return std::max<std::size_t>(width, 5);
}

void capitalize(std::string& token) {
  if (!token.empty() && token[0] >= 'a' && token[0] <= 'z') token[0] = static_cast<char>(token[0] - 32);
}

}  // namespace

bool PlantedTerm::has_effect() const {
  return std::adjacent_find(presence.begin(), presence.end(), std::not_equal_to<>()) !=
         presence.end();
}

void SyntheticSpec::validate() const {
  if (group_sizes.size() < 2) throw ConfigError("synthetic spec needs at least two groups");
  if (group_scores.size() != group_sizes.size()) {
    throw ConfigError("group_scores must have one entry per group");
  }
  for (int s : group_scores) {
    if (s < 1 || s > 4) throw ConfigError("group scores must be in 1..4");
  }
  if (vocab_size == 0) throw ConfigError("vocab_size must be positive");
  if (sentences_per_doc == 0 || tokens_per_sentence == 0) {
    throw ConfigError("documents need at least one sentence of one token");
  }
  std::set<std::string> seen;
  for (const auto& p : planted) {
    if (p.tokens.empty()) throw ConfigError("planted term has no tokens");
    const auto rendered = p.rendered();
    if (!seen.insert(rendered).second) throw ConfigError("planted term '" + rendered + "' repeated");
    if (p.tokens.size() > tokens_per_sentence) {
      throw ConfigError("planted term '" + rendered + "' is longer than a sentence");
    }
    if (p.presence.size() != group_sizes.size()) {
      throw ConfigError("planted term '" + rendered + "' needs one probability per group");
    }
    for (double prob : p.presence) {
      if (!(prob >= 0.0 && prob <= 1.0)) {
        throw ConfigError("planted term '" + rendered + "' has a probability outside [0, 1]");
      }
    }
    for (const auto& token : p.tokens) {
      if (looks_like_background(token)) {
        throw ConfigError("planted token '" + token + "' collides with the background vocabulary");
      }
      const auto normalized = tokenize(token);
      if (normalized.size() != 1 || normalized.front() != token) {
        throw ConfigError("planted token '" + token + "' is not a single lowercase token");
      }
    }
  }
}

SyntheticSpec SyntheticSpec::from_json(std::string_view text) {
  const json obj = json::parse(text, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw ConfigError("synthetic spec is not a JSON object");
  SyntheticSpec spec;
  try {
    if (obj.contains("group_sizes")) spec.group_sizes = obj["group_sizes"].get<std::vector<std::size_t>>();
    if (obj.contains("group_scores")) {
      spec.group_scores = obj["group_scores"].get<std::vector<int>>();
    } else if (spec.group_sizes.size() != spec.group_scores.size()) {
      throw ConfigError("group_scores is required when there are not three groups");
    }
    spec.vocab_size = obj.value("vocab_size", spec.vocab_size);
    spec.sentences_per_doc = obj.value("sentences_per_doc", spec.sentences_per_doc);
    spec.tokens_per_sentence = obj.value("tokens_per_sentence", spec.tokens_per_sentence);
    spec.seed = obj.value("seed", spec.seed);
    spec.unit = obj.value("unit", spec.unit);
    spec.panel = obj.value("panel", spec.panel);
    if (obj.contains("planted")) {
      for (const auto& item : obj["planted"]) {
        PlantedTerm p;
        p.tokens = split(item.at("term").get<std::string>(), ' ');
        std::erase_if(p.tokens, [](const std::string& t) { return t.empty(); });
        p.presence = item.at("presence").get<std::vector<double>>();
        spec.planted.push_back(std::move(p));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string SyntheticSpec::to_json() const {
  json planted_list = json::array();
  for (const auto& p : planted) planted_list.push_back({{"term", p.rendered()}, {"presence", p.presence}});
  return json{{"group_sizes", group_sizes},
              {"group_scores", group_scores},
              {"vocab_size", vocab_size},
              {"sentences_per_doc", sentences_per_doc},
              {"tokens_per_sentence", tokens_per_sentence},
              {"planted", planted_list},
              {"seed", seed},
              {"unit", unit},
              {"panel", panel}}
      .dump();
}

std::string SyntheticSpec::background_token(std::size_t index) const {
  std::string digits = std::to_string(index);
  const auto width = token_width(vocab_size);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "tok" + digits;
}

std::vector<Document> generate_corpus(const SyntheticSpec& spec) {
  spec.validate();
  std::size_t total = 0;
  for (auto n : spec.group_sizes) total += n;

  std::vector<std::string> vocab(spec.vocab_size);
  for (std::size_t v = 0; v < spec.vocab_size; ++v) vocab[v] = spec.background_token(v);

  std::vector<Document> docs;
  docs.reserve(total);
  std::size_t index = 0;
  for (std::size_t g = 0; g < spec.group_sizes.size(); ++g) {
    for (std::size_t i = 0; i < spec.group_sizes[g]; ++i, ++index) {
      Draws draws(splitmix64(spec.seed ^ splitmix64(index + 1)));
      std::vector<std::vector<std::string>> sentences(spec.sentences_per_doc);
      for (auto& sentence : sentences) {
        sentence.resize(spec.tokens_per_sentence);
        for (auto& token : sentence) token = vocab[draws.below(spec.vocab_size)];
      }
      // Occupied [begin, end) spans per sentence, so planted terms never overlap.
      std::vector<std::vector<std::pair<std::size_t, std::size_t>>> used(spec.sentences_per_doc);
      for (const auto& planted : spec.planted) {
        if (!draws.chance(planted.presence[g])) continue;
        const auto len = planted.tokens.size();
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
          const auto s = draws.below(spec.sentences_per_doc);
          const auto begin = draws.below(spec.tokens_per_sentence - len + 1);
          const bool overlaps = std::any_of(used[s].begin(), used[s].end(), [&](const auto& span) {
            return begin < span.second && span.first < begin + len;
          });
          if (overlaps) continue;
          std::copy(planted.tokens.begin(), planted.tokens.end(),
                    sentences[s].begin() + static_cast<std::ptrdiff_t>(begin));
          used[s].emplace_back(begin, begin + len);
          placed = true;
        }
        if (!placed) throw ConfigError("planted terms do not fit in the synthetic sentences");
      }

      std::string abstract;
      for (auto& sentence : sentences) {
        capitalize(sentence.front());
        if (!abstract.empty()) abstract.push_back(' ');
        abstract += join(sentence, " ");
        abstract.push_back('.');
      }

      char id[32];
      std::snprintf(id, sizeof id, "syn%07zu", index);
      Document d;
      d.id = id;
      d.doi = "10.5555/" + d.id;
      d.journal = "Synthetic Journal";
      d.abstract_raw = std::move(abstract);
      d.unit = spec.unit;
      d.panel = spec.panel;
      d.score = spec.group_scores[g];
      d.submitter = "synthetic";
      docs.push_back(std::move(d));
    }
  }
  return docs;
}

void write_synthetic_corpus(const std::vector<Document>& docs, std::ostream& scores,
                            std::ostream& metadata) {
  for (const auto& d : docs) {
    scores << json{{"id", d.id},         {"doi", d.doi ? json(*d.doi) : json(nullptr)},
                   {"title", d.title},   {"journal", d.journal},
                   {"unit", d.unit},     {"panel", d.panel},
                   {"score", d.score},   {"submitter", d.submitter}}
                  .dump()
           << '\n';
    metadata << json{{"id", "meta-" + d.id},
                     {"doi", d.doi ? json(*d.doi) : json(nullptr)},
                     {"title", d.title},
                     {"journal", d.journal},
                     {"abstract", d.abstract_raw},
                     {"keywords", d.keywords}}
                    .dump()
             << '\n';
  }
}

std::string DetectorMetrics::to_json() const {
  json per = json::array();
  for (const auto& p : per_term) {
    per.push_back({{"term", p.term},
                   {"flagged", p.flagged},
                   {"recall", n_sims ? static_cast<double>(p.flagged) / n_sims : 0.0}});
  }
  json sims = json::array();
  for (const auto& s : simulations) {
    sims.push_back({{"seed", s.seed},
                    {"m", s.m},
                    {"threshold", s.threshold},
                    {"planted_flagged", s.planted_flagged},
                    {"null_significant", s.null_significant}});
  }
  return json{{"n_sims", n_sims},
              {"recall", recall ? json(*recall) : json(nullptr)},
              {"fwer", fwer},
              {"planted", per},
              {"simulations", sims}}
      .dump(2);
}

std::uint64_t simulation_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(splitmix64(seed) ^ (0x5851f42d4c957f2dULL * (index + 1)));
}

DetectorMetrics evaluate_detector(const SyntheticSpec& spec, const AnalysisConfig& config,
                                  std::size_t n_sims, unsigned threads) {
  if (n_sims == 0) throw ConfigError("n_sims must be at least 1");
  spec.validate();
  config.validate();
  if (spec.group_sizes.size() != config.groups.size()) {
    throw ConfigError("synthetic spec and group scheme disagree on the number of groups");
  }
  for (std::size_t g = 0; g < spec.group_scores.size(); ++g) {
    if (config.groups.group_of(spec.group_scores[g]) != g) {
      throw ConfigError("synthetic group " + std::to_string(g) +
                        " does not map to the same analysis group");
    }
  }

  std::set<std::string> effect_tokens;
  std::vector<std::size_t> effect_terms;
  for (std::size_t i = 0; i < spec.planted.size(); ++i) {
    if (!spec.planted[i].has_effect()) continue;
    effect_terms.push_back(i);
    effect_tokens.insert(spec.planted[i].tokens.begin(), spec.planted[i].tokens.end());
  }

  DetectorMetrics metrics;
  metrics.n_sims = n_sims;
  metrics.simulations.resize(n_sims);
  std::vector<std::vector<bool>> flagged(n_sims, std::vector<bool>(effect_terms.size(), false));

  const RuleSet& rules = default_rules();
  parallel_for(n_sims, threads, [&](std::size_t sim) {
    SyntheticSpec sim_spec = spec;
    sim_spec.seed = simulation_seed(spec.seed, sim);
    auto docs = generate_corpus(sim_spec);
    clean_documents(docs, rules);
    auto filtered = filter_documents(std::move(docs), config.min_abstract_chars);
    const auto analysis = analyze_documents(filtered.documents, config);

    SimulationOutcome& outcome = metrics.simulations[sim];
    outcome.seed = sim_spec.seed;
    outcome.m = analysis.scored.m;
    outcome.threshold = analysis.scored.threshold;
    for (const auto& r : analysis.scored.results) {
      if (!r.significant) continue;
      const auto tokens = split(r.term, ' ');
      const bool related = std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
        return effect_tokens.count(t) > 0;
      });
      if (!related) ++outcome.null_significant;
      for (std::size_t e = 0; e < effect_terms.size(); ++e) {
        if (r.term == spec.planted[effect_terms[e]].rendered()) {
          flagged[sim][e] = true;
          ++outcome.planted_flagged;
        }
      }
    }
  });

  std::size_t hits = 0;
  std::size_t failures = 0;
  for (std::size_t e = 0; e < effect_terms.size(); ++e) {
    PlantedRecall pr{spec.planted[effect_terms[e]].rendered(), 0};
    for (std::size_t sim = 0; sim < n_sims; ++sim) pr.flagged += flagged[sim][e];
    hits += pr.flagged;
    metrics.per_term.push_back(std::move(pr));
  }
  for (const auto& s : metrics.simulations) failures += s.null_significant > 0;
  if (!effect_terms.empty()) {
    metrics.recall = static_cast<double>(hits) / static_cast<double>(effect_terms.size() * n_sims);
  }
  metrics.fwer = static_cast<double>(failures) / static_cast<double>(n_sims);
  return metrics;
}

}  // namespace termassoc
