#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "termassoc/corpus.hpp"
#include "termassoc/stats.hpp"

namespace termassoc {

struct PlantedTerm {
  std::vector<std::string> tokens;
  std::vector<double> presence;  // per-group probability that a document carries the term

  std::string rendered() const { return join(tokens, " "); }
  // Presence differs between groups.
  bool has_effect() const;
};

// Generative description of a labelled corpus. Background text is uniform
// random draws from a vocabulary of synthetic identifiers ("tok00042"), so
// each background token appears in a sentence slot with probability
// 1 / vocab_size. Planted terms are real words and never collide with it.
struct SyntheticSpec {
  std::vector<std::size_t> group_sizes = {1000, 1000, 1000};
  std::vector<int> group_scores = {1, 3, 4};  // score given to each group's documents
  std::size_t vocab_size = 5000;
  std::size_t sentences_per_doc = 5;
  std::size_t tokens_per_sentence = 12;
  std::vector<PlantedTerm> planted;
  std::uint64_t seed = 1;
  std::string unit = "1";
  std::string panel = "A";

  // Throws ConfigError for inconsistent sizes, probabilities outside [0, 1],
  // planted tokens that look like background tokens, or planted terms longer
  // than a sentence.
  void validate() const;

  static SyntheticSpec from_json(std::string_view text);
  std::string to_json() const;

  std::string background_token(std::size_t index) const;
};

// Deterministic for a fixed spec: each document draws from its own stream
// derived from (seed, document index).
std::vector<Document> generate_corpus(const SyntheticSpec& spec);

// Writes the corpus as a scores file and a metadata file, the two inputs of
// the link stage.
void write_synthetic_corpus(const std::vector<Document>& docs, std::ostream& scores,
                            std::ostream& metadata);

struct PlantedRecall {
  std::string term;
  std::size_t flagged = 0;  // simulations where the term was significant
};

struct SimulationOutcome {
  std::uint64_t seed = 0;
  std::size_t m = 0;
  double threshold = 0.0;
  std::size_t planted_flagged = 0;
  std::size_t null_significant = 0;  // significant terms unrelated to any effect
};

struct DetectorMetrics {
  std::size_t n_sims = 0;
  std::optional<double> recall;  // absent when no planted term has an effect
  double fwer = 0.0;
  std::vector<PlantedRecall> per_term;
  std::vector<SimulationOutcome> simulations;

  std::string to_json() const;
};

// Sub-seed of simulation `index`.
std::uint64_t simulation_seed(std::uint64_t seed, std::size_t index);

// Runs the analysis (clean, filter, extract, score) on n_sims corpora drawn
// with sub-seeds. Recall counts significant effect terms; a simulation
// counts toward FWER when any significant term shares no token with an
// effect term. Throws ConfigError when n_sims is 0.
DetectorMetrics evaluate_detector(const SyntheticSpec& spec, const AnalysisConfig& config,
                                  std::size_t n_sims, unsigned threads = 1);

}  // namespace termassoc
