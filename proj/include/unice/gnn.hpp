#pragma once

// Relation module: relation-aware message passing over the background graph
// and the causal-relation pair classifier.

#include <map>
#include <optional>

#include "unice/autodiff.hpp"
#include "unice/graph_builder.hpp"
#include "unice/nn.hpp"

namespace unice {

enum class GnnVariant { Attention, Mean };

// Relation-type embedding layout: rows [0, R) are the KG relation types,
// rows [R, 2R) their reverse orientations, then MENTION-EDGE and
// DYNAMIC-EDGE reserved rows.
struct GnnLayer {
  Linear wq, wk, wv;     // attention and message projections, d_gnn -> d_gnn
  Linear w_self;         // self path
  ad::Parameter* rel_emb = nullptr;  // (2R + 2) x d_gnn
  int n_relations = 0;

  static GnnLayer create(ad::ParamStore& ps, const std::string& prefix, Eigen::Index d_gnn,
                         int n_relations, Rng& rng) {
    GnnLayer l;
    l.wq = Linear::create(ps, prefix + ".wq", d_gnn, d_gnn, rng);
    l.wk = Linear::create(ps, prefix + ".wk", d_gnn, d_gnn, rng);
    l.wv = Linear::create(ps, prefix + ".wv", d_gnn, d_gnn, rng);
    l.w_self = Linear::create(ps, prefix + ".self", d_gnn, d_gnn, rng);
    l.rel_emb = &ps.add(prefix + ".rel", 2 * n_relations + 2, d_gnn);
    init_normal(*l.rel_emb, rng);
    l.n_relations = n_relations;
    return l;
  }

  int mention_edge_row() const { return 2 * n_relations; }
  int dynamic_edge_row() const { return 2 * n_relations + 1; }
};

// Two-layer MLP over concatenated ordered pair embeddings with softmax
// output; class 1 is "causal".
struct PairClassifier {
  Mlp2 mlp;

  static PairClassifier create(ad::ParamStore& ps, const std::string& prefix,
                               Eigen::Index d_gnn, Rng& rng) {
    PairClassifier c;
    c.mlp = Mlp2::create(ps, prefix, 2 * d_gnn, d_gnn, 2, rng);
    return c;
  }
};

// Assembles the J x d_gnn input node matrix for one layer: EVENT rows take
// the projected event representations; MENTION/OTHER rows take prev_E_base
// when present (later layers) or the KG table entry / learned default vector
// (first layer). kg_table must be pre-projected to d_gnn rows aligned with KG
// node ids (empty optional when the KG has no table).
ad::Var init_node_embeddings(ad::Graph& g, const BackgroundGraph& bg,
                             const std::optional<ad::Var>& kg_table,
                             const std::optional<ad::Var>& prev_E_base,
                             const ad::Var& event_reps_projected,
                             ad::Parameter& default_node_emb);

// One round of message passing; output has the same shape as E_in.
// Static-edge messages are gated by relation-aware attention; dynamic-edge
// messages among EVENT/MENTION nodes are gated multiplicatively by the
// (symmetrized) insertion weights, so zero weight means zero message.
ad::Var gnn_step(ad::Graph& g, const BackgroundGraph& bg, const ad::Var& E_in,
                 const GnnLayer& layer, const std::optional<ad::Var>& dynamic_weights,
                 GnnVariant variant = GnnVariant::Attention);

struct PairKey {
  int i = 0, j = 0;
  auto operator<=>(const PairKey&) const = default;
};

struct PairScore {
  ad::Var probs;   // 1 x 2 softmax output
  ad::Var logits;  // 1 x 2 pre-softmax, used by the loss
};

// Scores every ordered pair (i, j), i != j, of event rows.
std::map<PairKey, PairScore> classify_pairs(ad::Graph& g, const ad::Var& E_events,
                                            const PairClassifier& clf);

}  // namespace unice
