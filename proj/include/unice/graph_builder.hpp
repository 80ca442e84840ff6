#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "unice/corpus.hpp"
#include "unice/kg.hpp"

namespace unice {

enum class NodeRole : std::uint8_t { Mention = 0, Other = 1, Event = 2 };

struct BgNode {
  int kg_node = -1;  // -1 for EVENT nodes
  NodeRole role = NodeRole::Other;
  std::optional<Span> span;  // MENTION and EVENT nodes carry sentence spans
};

// Per-sentence working graph. Node order is fixed: mentions, then others,
// then (after insertion) event nodes appended at the end. dynamic_weights is
// indexed over [mentions in graph order] ++ [events in insertion order].
struct BackgroundGraph {
  std::vector<BgNode> nodes;
  std::vector<KgEdge> static_edges;  // endpoints are node indices, not KG ids
  std::optional<Eigen::MatrixXd> dynamic_weights;
  std::optional<Eigen::MatrixXd> event_init;  // |events| x d rows backing EVENT nodes
  int node_cap = 50;

  int size() const { return int(nodes.size()); }
  int mention_count() const;
  int other_count() const;
  int event_count() const;

  // Node index -> index into the dynamic-weight matrix, or -1 for OTHER nodes.
  int dynamic_index(int node) const;
  // Dynamic index -> node index.
  int node_of_dynamic(int dyn) const;
};

// Builds G0: linked mentions, then path-interior nodes, then 1-hop, then
// 2-hop neighbors, truncated to node_cap in that priority order (ties by KG
// node id). Static edges are all KG edges with both endpoints included.
BackgroundGraph build_initial(const Sentence& sentence, const KnowledgeGraph& kg,
                              int node_cap = 50, int max_path_len = 10);

// Returns G^l: EVENT nodes appended to a copy of g (which must be an
// uninserted G0), dynamic weights attached. weights is
// (|mentions|+|events|)^2 in [mentions; events] order; event_embeddings has
// one row per event.
BackgroundGraph insert_events(const BackgroundGraph& g, const std::vector<Span>& event_spans,
                              const Eigen::MatrixXd& event_embeddings,
                              const Eigen::MatrixXd& weights);

}  // namespace unice
