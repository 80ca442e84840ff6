#include "unice/gnn.hpp"

#include <set>

namespace unice {

ad::Var init_node_embeddings(ad::Graph& g, const BackgroundGraph& bg,
                             const std::optional<ad::Var>& kg_table,
                             const std::optional<ad::Var>& prev_E_base,
                             const ad::Var& event_reps_projected,
                             ad::Parameter& default_node_emb) {
  int n_base = bg.mention_count() + bg.other_count();
  int n_event = bg.event_count();
  if (event_reps_projected.rows() != n_event)
    throw ArgError("init_node_embeddings: event rows " +
                   std::to_string(event_reps_projected.rows()) + " != event nodes " +
                   std::to_string(n_event));
  Eigen::Index d = default_node_emb.cols();
  if (event_reps_projected.rows() > 0 && event_reps_projected.cols() != d)
    throw ArgError("init_node_embeddings: event embedding dimension mismatch");

  std::vector<ad::Var> parts;
  if (n_base > 0) {
    if (prev_E_base) {
      if (prev_E_base->rows() != n_base || prev_E_base->cols() != d)
        throw ArgError("init_node_embeddings: prev_E shape mismatch");
      parts.push_back(*prev_E_base);
    } else if (kg_table) {
      std::vector<int> kg_ids;
      for (const auto& node : bg.nodes)
        if (node.role != NodeRole::Event) kg_ids.push_back(node.kg_node);
      parts.push_back(g.gather_rows(*kg_table, kg_ids));
    } else {
      parts.push_back(
          g.matmul(g.input(ad::Mat::Ones(n_base, 1)), g.param(default_node_emb)));
    }
  }
  if (n_event > 0) parts.push_back(event_reps_projected);
  if (parts.empty()) return g.input(ad::Mat::Zero(0, d));
  return parts.size() == 1 ? parts[0] : g.concat_rows(parts);
}

namespace {

// J x J one-hot mask with m(head, tail) = 1 for each listed edge.
ad::Mat edge_mask(int j, const std::vector<std::pair<int, int>>& edges) {
  ad::Mat m = ad::Mat::Zero(j, j);
  for (const auto& [h, t] : edges) m(h, t) = 1.0;
  return m;
}

}  // namespace

ad::Var gnn_step(ad::Graph& g, const BackgroundGraph& bg, const ad::Var& E_in,
                 const GnnLayer& layer, const std::optional<ad::Var>& dynamic_weights,
                 GnnVariant variant) {
  int j = bg.size();
  if (E_in.rows() != j) throw ArgError("gnn_step: node matrix rows != graph size");
  if (bg.event_count() > 0 && !dynamic_weights)
    throw StateError("gnn_step: graph has event nodes but no dynamic weights");
  Eigen::Index d = E_in.cols();
  if (j == 0) return E_in;

  ad::Var values = layer.wv.apply(g, E_in);
  ad::Var self_path = layer.w_self.apply(g, E_in);

  ad::Var messages;
  bool have_messages = false;
  auto accumulate = [&](const ad::Var& m) {
    messages = have_messages ? g.add(messages, m) : m;
    have_messages = true;
  };

  ad::Var queries, keys;
  double scale = 1.0 / std::sqrt(double(d));
  if (variant == GnnVariant::Attention) {
    queries = layer.wq.apply(g, E_in);
    keys = layer.wk.apply(g, E_in);
  }

  // Static edges, grouped by relation type with both orientations (reverse
  // messages use the shifted relation row).
  std::map<int, std::vector<std::pair<int, int>>> by_rel;
  for (const auto& e : bg.static_edges) {
    by_rel[e.relation].push_back({e.head, e.tail});
    by_rel[e.relation + layer.n_relations].push_back({e.tail, e.head});
  }
  for (const auto& [rel, edges] : by_rel) {
    ad::Var mask = g.input(edge_mask(j, edges));
    ad::Var rel_row = g.pick_row(g.param(*layer.rel_emb), rel);
    // content_u = W_v e_u + rel
    ad::Var content = g.add_rowvec(values, rel_row);
    ad::Var weights;
    if (variant == GnnVariant::Attention) {
      // gate(dst, src) = sigmoid((q_dst . k_src + q_dst . rel) / sqrt(d))
      ad::Var score = g.add(g.matmul(queries, g.transpose(keys)),
                            g.matmul(g.matmul(queries, g.transpose(rel_row)),
                                     g.input(ad::Mat::Ones(1, j))));
      // mask is (src, dst); gate matrix is (dst, src)
      weights = g.cmul(g.sigmoid(g.scale(score, scale)), g.transpose(mask));
    } else {
      // Mean aggregation: weight 1/in_degree per incoming edge.
      ad::Mat deg = ad::Mat(mask.value().colwise().sum());
      ad::Mat norm = mask.value().transpose();
      for (Eigen::Index r = 0; r < norm.rows(); ++r)
        if (deg(0, r) > 0) norm.row(r) /= deg(0, r);
      weights = g.input(norm);
    }
    accumulate(g.matmul(weights, content));
  }

  // Dynamic edges among EVENT/MENTION nodes, weighted by the symmetrized
  // insertion matrix. Mention-mention links use the MENTION-EDGE relation
  // row; anything involving an event uses DYNAMIC-EDGE.
  int n_dyn = bg.mention_count() + bg.event_count();
  if (n_dyn > 0 && dynamic_weights) {
    if (dynamic_weights->rows() != n_dyn || dynamic_weights->cols() != n_dyn)
      throw ArgError("gnn_step: dynamic weight shape mismatch");
    ad::Mat sel = ad::Mat::Zero(n_dyn, j);  // dynamic index -> node index
    for (int didx = 0; didx < n_dyn; ++didx) sel(didx, bg.node_of_dynamic(didx)) = 1.0;
    ad::Var sel_v = g.input(sel);
    ad::Var a_full = g.matmul(g.transpose(sel_v), g.matmul(*dynamic_weights, sel_v));
    ad::Var a_sym = g.add(a_full, g.transpose(a_full));

    int nm = bg.mention_count();
    ad::Mat mention_pair = ad::Mat::Zero(j, j);
    for (int a = 0; a < nm; ++a)
      for (int b = 0; b < nm; ++b) mention_pair(a, b) = 1.0;
    ad::Mat event_pair = ad::Mat::Zero(j, j);
    for (int a = 0; a < n_dyn; ++a)
      for (int b = 0; b < n_dyn; ++b) {
        int na = bg.node_of_dynamic(a), nb = bg.node_of_dynamic(b);
        if (mention_pair(na, nb) == 0.0) event_pair(na, nb) = 1.0;
      }

    ad::Var content_me =
        g.add_rowvec(values, g.pick_row(g.param(*layer.rel_emb), layer.mention_edge_row()));
    ad::Var content_de =
        g.add_rowvec(values, g.pick_row(g.param(*layer.rel_emb), layer.dynamic_edge_row()));
    if (nm > 0)
      accumulate(g.matmul(g.cmul(a_sym, g.input(mention_pair)), content_me));
    accumulate(g.matmul(g.cmul(a_sym, g.input(event_pair)), content_de));
  }

  ad::Var pre = have_messages ? g.add(self_path, messages) : self_path;
  return g.add(g.tanh(pre), E_in);  // residual
}

std::map<PairKey, PairScore> classify_pairs(ad::Graph& g, const ad::Var& E_events,
                                            const PairClassifier& clf) {
  std::map<PairKey, PairScore> out;
  int n = int(E_events.rows());
  if (n < 2) return out;

  std::vector<int> is, js;
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj)
      if (i != jj) {
        is.push_back(i);
        js.push_back(jj);
      }
  ad::Var lhs = g.gather_rows(E_events, is);
  ad::Var rhs = g.gather_rows(E_events, js);
  ad::Var logits = clf.mlp.apply(g, g.concat_cols(lhs, rhs));
  ad::Var probs = g.softmax_rows(logits);
  for (std::size_t k = 0; k < is.size(); ++k) {
    out.emplace(PairKey{is[k], js[k]},
                PairScore{g.pick_row(probs, Eigen::Index(k)), g.pick_row(logits, Eigen::Index(k))});
  }
  return out;
}

}  // namespace unice
