#include "unice/metrics.hpp"

#include <algorithm>
#include <set>

namespace unice {

namespace {

void check_same_ids(const PairsById& predictions, const PairsById& golds) {
  if (predictions.size() != golds.size())
    throw ArgError("metrics: prediction and gold sentence id sets differ in size");
  auto p = predictions.begin();
  auto g = golds.begin();
  for (; p != predictions.end(); ++p, ++g)
    if (p->first != g->first)
      throw ArgError("metrics: sentence id mismatch: '" + p->first + "' vs '" + g->first + "'");
}

std::vector<PairSpans> dedup(const std::vector<PairSpans>& pairs) {
  std::vector<PairSpans> out;
  std::set<PairSpans> seen;
  for (const auto& p : pairs)
    if (seen.insert(p).second) out.push_back(p);
  return out;
}

bool relaxed_match(const PairSpans& pred, const PairSpans& gold) {
  return pred.cause.overlaps(gold.cause) && pred.effect.overlaps(gold.effect);
}

}  // namespace

PrfResult make_prf(long tp, long predicted, long gold) {
  PrfResult r;
  r.true_positives = tp;
  r.predicted_count = predicted;
  r.gold_count = gold;
  r.precision = predicted > 0 ? double(tp) / double(predicted) : 0.0;
  r.recall = gold > 0 ? double(tp) / double(gold) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

PrfResult strict_prf(const PairsById& predictions, const PairsById& golds) {
  check_same_ids(predictions, golds);
  long tp = 0, np = 0, ng = 0;
  for (const auto& [id, raw_pred] : predictions) {
    const auto& gold = golds.at(id);
    auto pred = dedup(raw_pred);
    np += long(pred.size());
    ng += long(gold.size());
    std::vector<bool> used(gold.size(), false);
    for (const auto& p : pred) {
      for (std::size_t k = 0; k < gold.size(); ++k) {
        if (!used[k] && p == gold[k]) {
          used[k] = true;
          ++tp;
          break;
        }
      }
    }
  }
  return make_prf(tp, np, ng);
}

PrfResult relaxed_prf(const PairsById& predictions, const PairsById& golds) {
  check_same_ids(predictions, golds);
  long tp = 0, np = 0, ng = 0;
  for (const auto& [id, raw_pred] : predictions) {
    const auto& gold = golds.at(id);
    auto pred = dedup(raw_pred);
    np += long(pred.size());
    ng += long(gold.size());
    std::vector<bool> gold_used(gold.size(), false);
    std::vector<bool> pred_used(pred.size(), false);
    // Exact matches claim their gold pairs first (keeps relaxed >= strict).
    for (std::size_t p = 0; p < pred.size(); ++p)
      for (std::size_t k = 0; k < gold.size(); ++k)
        if (!pred_used[p] && !gold_used[k] && pred[p] == gold[k]) {
          pred_used[p] = gold_used[k] = true;
          ++tp;
        }
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (pred_used[p]) continue;
      for (std::size_t k = 0; k < gold.size(); ++k)
        if (!gold_used[k] && relaxed_match(pred[p], gold[k])) {
          pred_used[p] = gold_used[k] = true;
          ++tp;
          break;
        }
    }
  }
  return make_prf(tp, np, ng);
}

std::map<int, PrfResult> breakdown_by_pair_count(const PairsById& predictions,
                                                 const PairsById& golds) {
  check_same_ids(predictions, golds);
  std::map<int, PairsById> pred_by_bucket, gold_by_bucket;
  for (const auto& [id, gold] : golds) {
    if (gold.empty()) continue;
    int bucket = std::min<int>(int(gold.size()), 4);
    pred_by_bucket[bucket][id] = predictions.at(id);
    gold_by_bucket[bucket][id] = gold;
  }
  std::map<int, PrfResult> out;
  for (const auto& [bucket, gp] : gold_by_bucket)
    out[bucket] = strict_prf(pred_by_bucket[bucket], gp);
  return out;
}

FoldAggregate aggregate_folds(const std::vector<PrfResult>& fold_results) {
  if (fold_results.empty()) throw ArgError("aggregate_folds: no fold results");
  long tp = 0, np = 0, ng = 0;
  double sp = 0.0, sr = 0.0;
  for (const auto& r : fold_results) {
    tp += r.true_positives;
    np += r.predicted_count;
    ng += r.gold_count;
    sp += r.precision;
    sr += r.recall;
  }
  FoldAggregate agg;
  agg.micro = make_prf(tp, np, ng);
  double k = double(fold_results.size());
  agg.macro.precision = sp / k;
  agg.macro.recall = sr / k;
  agg.macro.f1 = (agg.macro.precision + agg.macro.recall) > 0.0
                     ? 2.0 * agg.macro.precision * agg.macro.recall /
                           (agg.macro.precision + agg.macro.recall)
                     : 0.0;
  agg.macro.true_positives = tp;
  agg.macro.predicted_count = np;
  agg.macro.gold_count = ng;
  return agg;
}

}  // namespace unice
