#pragma once

#include <string>
#include <utility>
#include <vector>

#include "unice/common.hpp"

namespace unice {

enum class Tag : std::uint8_t { B = 0, I = 1, O = 2 };

using BioSequence = std::vector<Tag>;

struct Sentence {
  std::string id;
  std::string doc_id;
  std::vector<std::string> tokens;
  std::vector<Span> gold_events;
  std::vector<std::pair<int, int>> gold_pairs;  // (cause_event_index, effect_event_index)
};

struct Fold {
  int fold_id = 0;
  std::vector<std::string> train_doc_ids;  // sorted
  std::vector<std::string> test_doc_ids;   // sorted
};

// Validates one sentence against the record invariants; `where` names the
// source (file:line) for error messages.
void validate_sentence(const Sentence& s, const std::string& where);

// Loads a UTF-8 JSON-lines corpus. Malformed records raise DataError naming
// the line number and violated invariant.
std::vector<Sentence> load_corpus(const std::string& path);

// Document-level k-fold split, deterministic for a fixed seed.
std::vector<Fold> make_folds(const std::vector<Sentence>& corpus, int k, std::uint64_t seed);

// Gold spans -> BIO tags. Overlapping gold events raise DataError.
BioSequence bio_encode(const Sentence& s);
BioSequence bio_encode(int n_tokens, const std::vector<Span>& spans);

// BIO tags -> spans. Total: ill-formed sequences are repaired (a leading or
// dangling I opens a new span, i.e. is treated as B).
std::vector<Span> bio_decode(const BioSequence& tags);

bool bio_wellformed(const BioSequence& tags);

char tag_char(Tag t);

}  // namespace unice
