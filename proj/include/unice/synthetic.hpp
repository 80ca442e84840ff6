#pragma once

// Deterministic synthetic ECE corpus + toy KG generator. Causal pairs are
// drawn from a fixed cause->effect inventory; the emitted KG covers a
// configurable fraction of that inventory with CAUSES edges plus distractor
// edges, so knowledge fusion has signal without making the task KG-solvable.

#include <string>
#include <tuple>
#include <vector>

#include "unice/corpus.hpp"

namespace unice {

struct GenOptions {
  int num_sentences = 64;
  std::uint64_t seed = 7;
  std::uint64_t kg_seed = 1234;  // separate so train/held-out splits share a KG
  double kg_coverage = 0.7;
  bool multi_pair = true;  // include 2- and 3-pair templates
  int sentences_per_doc = 8;
};

struct SyntheticData {
  std::vector<Sentence> corpus;
  std::vector<std::tuple<std::string, std::string, std::string>> kg_triples;
};

SyntheticData generate(const GenOptions& opts);

void write_corpus_jsonl(const std::string& path, const std::vector<Sentence>& corpus);
void write_kg_tsv(const std::string& path,
                  const std::vector<std::tuple<std::string, std::string, std::string>>& triples);

}  // namespace unice
