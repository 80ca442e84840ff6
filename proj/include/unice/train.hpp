#pragma once

// Training loop (Adam, two parameter groups, linear warmup, early stopping on
// dev F1), checkpoint directory IO, and the JSON-lines training log.

#include <iosfwd>
#include <memory>
#include <optional>

#include "unice/model.hpp"

namespace unice {

class Adam {
public:
  Adam(ad::ParamStore& params, double lr_encoder, double lr_other, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  // One update over accumulated gradients; lr_multiplier applies the warmup
  // schedule. Gradients are zeroed afterwards.
  void step(double lr_multiplier);

  long step_count() const { return t_; }

  struct Slot {
    ad::Mat m, v;
  };
  std::vector<Slot>& slots() { return slots_; }
  void set_step_count(long t) { t_ = t; }

private:
  ad::ParamStore* params_;
  double lr_encoder_, lr_other_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Slot> slots_;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  PrfResult dev;
  double seconds = 0.0;
};

struct TrainResult {
  std::unique_ptr<UniceModel> model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_dev_f1 = 0.0;
  int epochs_run = 0;
};

// Per-sentence loss used by the trainer; exposed so tests can audit the
// reported value against the cached per-layer sums.
struct SentenceLossAudit {
  double total = 0.0;
  std::vector<double> l_e, l_r;
};

SentenceLossAudit sentence_loss_and_backward(UniceModel& model, const Sentence& s,
                                             const KnowledgeGraph& kg, Rng& rng,
                                             bool use_gold_events, double grad_scale);

// Gold pair lists resolved to spans, keyed by sentence id.
PairsById gold_pairs_by_id(const std::vector<Sentence>& corpus);
PairsById predict_corpus(UniceModel& model, const std::vector<Sentence>& corpus,
                         const KnowledgeGraph& kg);

// Trains on `corpus`; early stopping monitors strict F1 on `dev` (the
// training corpus itself when no dev corpus is supplied). The log is JSONL,
// one record per epoch. fold_id is recorded in checkpoint metadata.
TrainResult train(const std::vector<Sentence>& corpus, const KnowledgeGraph& kg,
                  const UniceConfig& cfg,
                  const std::optional<std::vector<Sentence>>& dev = std::nullopt,
                  std::ostream* log = nullptr, int fold_id = -1);

// Checkpoint directory: config, params.bin, optimizer.bin, meta.json.
void save_checkpoint(const std::string& dir, const UniceModel& model, const Adam* optimizer,
                     int fold_id, int epoch, double best_dev_f1);

struct Checkpoint {
  UniceConfig config;
  std::unique_ptr<UniceModel> model;
  int fold_id = -1;
  int epoch = 0;
  double best_dev_f1 = 0.0;
};

Checkpoint load_checkpoint(const std::string& dir);

}  // namespace unice
