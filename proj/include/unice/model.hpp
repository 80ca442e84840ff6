#pragma once

// unice-core: the full per-sentence forward pass composing every module, the
// averaged multi-layer loss, and inference.

#include <map>
#include <memory>
#include <optional>

#include "unice/aggregators.hpp"
#include "unice/config.hpp"
#include "unice/crf.hpp"
#include "unice/encoder.hpp"
#include "unice/gnn.hpp"
#include "unice/graph_builder.hpp"
#include "unice/insertion.hpp"
#include "unice/metrics.hpp"

namespace unice {

struct Vocab {
  std::vector<std::string> words;  // index 0 is <unk>
  std::map<std::string, int> index;

  static Vocab build(const std::vector<Sentence>& corpus);
  static Vocab from_words(std::vector<std::string> words);
  int id(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? 0 : it->second;
  }
  int size() const { return int(words.size()); }
};

struct LayerPrediction {
  int layer = 0;  // 1..M
  BioSequence tags;
  std::vector<Span> spans;  // bio_decode(tags)
  std::map<std::pair<int, int>, double> pair_scores;  // ordered pair -> p(causal)
  std::vector<std::pair<int, int>> pair_decisions;    // p(causal) > 0.5
};

// Cached per-layer internals kept alive with the tape for loss/backward and
// for structural inspection in tests.
struct LayerInternals {
  std::vector<Span> relation_spans;  // event set fed to the relation module
  BackgroundGraph graph;             // G^l with value-level weights attached
  ad::Var crf_nll;                   // valid in train mode only
  std::map<PairKey, PairScore> pairs;
  ad::Var dynamic_weights;           // valid when the layer had dynamic nodes
};

struct ForwardResult {
  std::unique_ptr<ad::Graph> graph;
  std::vector<LayerPrediction> predictions;  // length M
  std::vector<LayerInternals> internals;     // length M
};

struct LossBreakdown {
  ad::Var total;
  std::vector<double> l_e;  // per joint layer
  std::vector<double> l_r;
  // Ordered pairs whose cross-entropy terms were kept after negative
  // sampling, per layer.
  std::vector<std::vector<std::pair<int, int>>> kept_pairs;
};

// Ordered pair (i, j) of extracted spans is causal iff span i matches a gold
// cause c, span j matches the paired gold effect e, and (c, e) is a gold
// pair. Matching is exact span equality or token overlap per `match`.
std::map<std::pair<int, int>, bool> relation_supervision(
    const std::vector<Span>& extracted_spans, const std::vector<Span>& gold_events,
    const std::vector<std::pair<int, int>>& gold_pairs,
    RelationMatch match = RelationMatch::Exact);

class UniceModel {
public:
  UniceModel(const UniceConfig& cfg, Vocab vocab, int n_kg_relations,
             std::optional<int> kg_embedding_dim);

  // Runs N plain layers then the M joint layers. In train mode, CRF losses
  // and pair logits are cached on the result; with use_gold_event_spans the
  // relation module sees gold spans instead of decoded ones (w/o SI training
  // and gold-event warmup).
  ForwardResult forward(const Sentence& sentence, const KnowledgeGraph& kg, bool train,
                        Rng* dropout_rng = nullptr, bool use_gold_event_spans = false);

  // Averaged multi-layer loss over the cached internals of a train-mode
  // forward: (1/M) sum_l (L_e + L_r), with negatives down-sampled at
  // cfg.negative_keep_rate.
  LossBreakdown loss(ForwardResult& fw, const Sentence& sentence, Rng& rng);

  // Last-layer prediction mapped to span pairs.
  std::vector<PairSpans> predict(const Sentence& sentence, const KnowledgeGraph& kg);

  const UniceConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }
  int kg_relation_count() const { return n_kg_relations_; }
  bool has_kg_projection() const { return kg_embedding_dim_.has_value(); }
  std::optional<int> kg_embedding_dim() const { return kg_embedding_dim_; }

  // Optional hook: overwrite parameters by name from an external table
  // (e.g. pretrained encoder weights). Unknown names raise ArgError.
  void load_parameter(const std::string& name, const Eigen::MatrixXd& value);

private:
  friend struct ModelAccess;  // test backdoor

  ad::Var base_node_init(ad::Graph& g, const BackgroundGraph& bg, const KnowledgeGraph& kg);
  ad::Var insertion_weights(ad::Graph& g, int layer, const ad::Var& dyn_embeddings,
                            const std::vector<Span>& mention_spans,
                            const std::vector<Span>& event_spans);

  UniceConfig cfg_;
  Vocab vocab_;
  int n_kg_relations_ = 0;
  std::optional<int> kg_embedding_dim_;

  ad::ParamStore params_;
  EncoderStack encoder_;
  std::vector<CrfHead> crf_heads_;          // M, or 1 when shared
  Linear event_proj_;                       // d_enc -> d_gnn
  std::optional<Linear> kg_proj_;           // d_kg -> d_gnn
  ad::Parameter* default_node_emb_ = nullptr;
  std::vector<EdgeScorer> scorers_;         // M
  std::vector<GnnLayer> gnn_layers_;        // M
  std::vector<PairClassifier> classifiers_; // M
  std::vector<TAggregator> t_aggs_;         // M, or 1 when shared
  std::vector<KAggregator> k_aggs_;
};

}  // namespace unice
