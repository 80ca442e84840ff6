#pragma once

#include <map>
#include <string>
#include <vector>

#include "unice/common.hpp"

namespace unice {

struct PairSpans {
  Span cause;
  Span effect;
  bool operator==(const PairSpans&) const = default;
  auto operator<=>(const PairSpans&) const = default;
};

// Per-sentence predicted or gold pair lists, keyed by sentence id.
using PairsById = std::map<std::string, std::vector<PairSpans>>;

struct PrfResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long true_positives = 0;
  long predicted_count = 0;
  long gold_count = 0;
};

PrfResult make_prf(long tp, long predicted, long gold);

// Exact span equality on both sides, direction respected; duplicate predicted
// pairs are deduplicated before matching.
PrfResult strict_prf(const PairsById& predictions, const PairsById& golds);

// Token overlap on both sides, direction respected. One-to-one matching is
// greedy by sentence order then pair order, with exact-equality matches
// claimed first so relaxed TP never falls below strict TP.
PrfResult relaxed_prf(const PairsById& predictions, const PairsById& golds);

// Per-bucket strict PRF over sentences grouped by gold pair count; buckets
// are 1, 2, 3 and >=4 (key 4). Sentences without gold pairs are excluded.
std::map<int, PrfResult> breakdown_by_pair_count(const PairsById& predictions,
                                                 const PairsById& golds);

struct FoldAggregate {
  PrfResult micro;  // pooled TP/predicted/gold counts (primary)
  PrfResult macro;  // unweighted mean of per-fold P/R/F1
};

FoldAggregate aggregate_folds(const std::vector<PrfResult>& fold_results);

}  // namespace unice
