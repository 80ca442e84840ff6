#pragma once

// Cross-module information aggregators: T-aggregator feeds relation-module
// event embeddings back into token representations; K-aggregator fuses
// encoder and graph representations at mention nodes.

#include <utility>

#include "unice/autodiff.hpp"
#include "unice/graph_builder.hpp"
#include "unice/nn.hpp"

namespace unice {

struct TAggregator {
  Mlp2 mlp;  // (d_enc + d_gnn) -> d_enc

  static TAggregator create(ad::ParamStore& ps, const std::string& prefix, Eigen::Index d_enc,
                            Eigen::Index d_gnn, Rng& rng) {
    TAggregator t;
    t.mlp = Mlp2::create(ps, prefix, d_enc + d_gnn, d_enc, d_enc, rng);
    return t;
  }
};

struct KAggregator {
  Mlp2 mlp;  // (d_enc + d_gnn) -> (d_enc + d_gnn), split into context/node parts

  static KAggregator create(ad::ParamStore& ps, const std::string& prefix, Eigen::Index d_enc,
                            Eigen::Index d_gnn, Rng& rng) {
    KAggregator k;
    k.mlp = Mlp2::create(ps, prefix, d_enc + d_gnn, d_enc + d_gnn, d_enc + d_gnn, rng);
    return k;
  }
};

// Replaces the representation at each event's last token with
// TAggregator([h_tilde_e; e_tilde_e]); all other rows pass through unchanged.
ad::Var t_aggregate(ad::Graph& g, const ad::Var& h_tilde, const ad::Var& event_embeddings,
                    const std::vector<Span>& event_spans, const TAggregator& agg);

// For each mention, fuses the anchor-token row of H (last token of the
// mention span) with its node row of E; kg_to_plm gates the token-side
// write-back and plm_to_kg the node-side write-back. OTHER and EVENT node
// rows are untouched.
std::pair<ad::Var, ad::Var> k_aggregate(ad::Graph& g, const ad::Var& h_tilde,
                                        const ad::Var& e_tilde, const BackgroundGraph& bg,
                                        const KAggregator& agg, bool kg_to_plm = true,
                                        bool plm_to_kg = true);

}  // namespace unice
