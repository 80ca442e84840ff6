#include "unice/aggregators.hpp"

namespace unice {

ad::Var t_aggregate(ad::Graph& g, const ad::Var& h_tilde, const ad::Var& event_embeddings,
                    const std::vector<Span>& event_spans, const TAggregator& agg) {
  if (int(event_spans.size()) != event_embeddings.rows())
    throw ArgError("t_aggregate: span count " + std::to_string(event_spans.size()) +
                   " != event embedding rows " + std::to_string(event_embeddings.rows()));
  if (event_spans.empty()) return h_tilde;

  std::vector<int> anchors;
  for (const Span& sp : event_spans) {
    if (sp.start < 0 || sp.end > h_tilde.rows() || sp.start >= sp.end)
      throw ArgError("t_aggregate: event span out of bounds");
    anchors.push_back(sp.end - 1);
  }
  ad::Var fused = agg.mlp.apply(
      g, g.concat_cols(g.gather_rows(h_tilde, anchors), event_embeddings));
  return g.replace_rows(h_tilde, anchors, fused);
}

std::pair<ad::Var, ad::Var> k_aggregate(ad::Graph& g, const ad::Var& h_tilde,
                                        const ad::Var& e_tilde, const BackgroundGraph& bg,
                                        const KAggregator& agg, bool kg_to_plm,
                                        bool plm_to_kg) {
  if (e_tilde.rows() != bg.size()) throw StateError("k_aggregate: node matrix rows != graph size");

  std::vector<int> anchors, node_rows;
  for (int i = 0; i < bg.size(); ++i) {
    const BgNode& n = bg.nodes[std::size_t(i)];
    if (n.role != NodeRole::Mention) continue;
    if (!n.span) throw StateError("k_aggregate: mention node without a span");
    anchors.push_back(n.span->end - 1);
    node_rows.push_back(i);
  }
  if (anchors.empty() || (!kg_to_plm && !plm_to_kg)) return {h_tilde, e_tilde};

  Eigen::Index d_enc = h_tilde.cols(), d_gnn = e_tilde.cols();
  ad::Var fused = agg.mlp.apply(
      g, g.concat_cols(g.gather_rows(h_tilde, anchors), g.gather_rows(e_tilde, node_rows)));
  ad::Var h_out = kg_to_plm
                      ? g.replace_rows(h_tilde, anchors, g.slice_cols(fused, 0, d_enc))
                      : h_tilde;
  ad::Var e_out = plm_to_kg
                      ? g.replace_rows(e_tilde, node_rows, g.slice_cols(fused, d_enc, d_gnn))
                      : e_tilde;
  return {h_out, e_out};
}

}  // namespace unice
