#include "unice/graph_builder.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace unice {

int BackgroundGraph::mention_count() const {
  int c = 0;
  for (const auto& n : nodes) c += n.role == NodeRole::Mention;
  return c;
}

int BackgroundGraph::other_count() const {
  int c = 0;
  for (const auto& n : nodes) c += n.role == NodeRole::Other;
  return c;
}

int BackgroundGraph::event_count() const {
  int c = 0;
  for (const auto& n : nodes) c += n.role == NodeRole::Event;
  return c;
}

int BackgroundGraph::dynamic_index(int node) const {
  const BgNode& bn = nodes.at(std::size_t(node));
  if (bn.role == NodeRole::Other) return -1;
  int nm = mention_count(), no = other_count();
  if (bn.role == NodeRole::Mention) return node;  // mentions lead the node list
  return nm + (node - nm - no);                   // events follow mentions
}

int BackgroundGraph::node_of_dynamic(int dyn) const {
  int nm = mention_count();
  if (dyn < nm) return dyn;
  return dyn + other_count();
}

BackgroundGraph build_initial(const Sentence& sentence, const KnowledgeGraph& kg, int node_cap,
                              int max_path_len) {
  BackgroundGraph g;
  g.node_cap = node_cap;

  std::vector<Mention> mentions = link_mentions(sentence.tokens, kg);

  // One node per distinct KG node; the earliest mention span anchors it.
  std::vector<Mention> unique_mentions;
  std::set<int> mention_ids;
  for (const auto& m : mentions)
    if (mention_ids.insert(m.node_id).second) unique_mentions.push_back(m);

  // Priority classes for OTHER nodes: path-interior (0), 1-hop (1), 2-hop (2).
  std::map<int, int> other_class;
  std::set<int> seeds = mention_ids;
  if (!seeds.empty()) {
    for (auto a = seeds.begin(); a != seeds.end(); ++a)
      for (auto b = std::next(a); b != seeds.end(); ++b)
        for (int v : shortest_path_nodes(kg, *a, *b, max_path_len))
          if (!mention_ids.count(v)) other_class.try_emplace(v, 0);
    for (int v : k_hop_neighbors(kg, seeds, 1))
      if (!mention_ids.count(v)) other_class.try_emplace(v, 1);
    for (int v : k_hop_neighbors(kg, seeds, 2))
      if (!mention_ids.count(v)) other_class.try_emplace(v, 2);
  }

  std::vector<std::pair<int, int>> others(other_class.begin(), other_class.end());
  std::sort(others.begin(), others.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });

  std::set<int> included;
  for (const auto& m : unique_mentions) {
    if (int(g.nodes.size()) >= node_cap) break;
    g.nodes.push_back({m.node_id, NodeRole::Mention, m.span});
    included.insert(m.node_id);
  }
  for (const auto& [v, cls] : others) {
    (void)cls;
    if (int(g.nodes.size()) >= node_cap) break;
    g.nodes.push_back({v, NodeRole::Other, std::nullopt});
    included.insert(v);
  }

  std::map<int, int> kg_to_index;
  for (int i = 0; i < int(g.nodes.size()); ++i) kg_to_index[g.nodes[std::size_t(i)].kg_node] = i;

  for (const auto& e : kg.edges()) {
    auto h = kg_to_index.find(e.head);
    auto t = kg_to_index.find(e.tail);
    if (h != kg_to_index.end() && t != kg_to_index.end())
      g.static_edges.push_back({h->second, e.relation, t->second});
  }
  return g;
}

BackgroundGraph insert_events(const BackgroundGraph& g, const std::vector<Span>& event_spans,
                              const Eigen::MatrixXd& event_embeddings,
                              const Eigen::MatrixXd& weights) {
  if (g.event_count() != 0)
    throw ArgError("insert_events: graph already contains event nodes; insertion starts from G0");
  int ne = int(event_spans.size());
  int nm = g.mention_count();
  if (event_embeddings.rows() != ne)
    throw ArgError("insert_events: embeddings rows " + std::to_string(event_embeddings.rows()) +
                   " != event count " + std::to_string(ne));
  if (weights.rows() != nm + ne || weights.cols() != nm + ne)
    throw ArgError("insert_events: weights must be " + std::to_string(nm + ne) + "x" +
                   std::to_string(nm + ne) + ", got " + std::to_string(weights.rows()) + "x" +
                   std::to_string(weights.cols()));

  BackgroundGraph out = g;
  for (const Span& sp : event_spans) out.nodes.push_back({-1, NodeRole::Event, sp});
  out.event_init = event_embeddings;
  out.dynamic_weights = weights;
  return out;
}

}  // namespace unice
