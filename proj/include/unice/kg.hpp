#pragma once

#include <Eigen/Dense>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "unice/common.hpp"

namespace unice {

struct KgEdge {
  int head = 0;
  int relation = 0;
  int tail = 0;
};

// An immutable knowledge-graph snapshot. Node ids are assigned by first
// appearance in the triples file. Queries treat edges as undirected;
// direction and relation type are preserved in `edges` for the GNN.
class KnowledgeGraph {
public:
  int node_count() const { return int(surfaces_.size()); }
  int edge_count() const { return int(edges_.size()); }
  int relation_count() const { return int(relation_names_.size()); }

  const std::string& surface(int node) const { return surfaces_.at(std::size_t(node)); }
  const std::vector<KgEdge>& edges() const { return edges_; }
  const std::vector<std::string>& relation_names() const { return relation_names_; }

  // -1 when the (case-folded) surface is unknown.
  int find_node(const std::string& surface) const;
  int find_relation(const std::string& name) const;

  bool has_embeddings() const { return embeddings_.has_value(); }
  const Eigen::MatrixXd& embeddings() const;
  int embedding_dim() const { return has_embeddings() ? int(embeddings_->cols()) : 0; }

  // Undirected adjacency, deduplicated, sorted.
  const std::vector<int>& neighbors(int node) const { return adjacency_.at(std::size_t(node)); }

  friend KnowledgeGraph load_kg(const std::string& triples_path,
                                const std::optional<std::string>& embeddings_path);
  friend KnowledgeGraph kg_from_triples(
      const std::vector<std::tuple<std::string, std::string, std::string>>& triples);

private:
  void finalize();

  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, int> surface_index_;  // case-folded
  std::vector<KgEdge> edges_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, int> relation_index_;
  std::optional<Eigen::MatrixXd> embeddings_;
  std::vector<std::vector<int>> adjacency_;
};

struct Mention {
  int node_id = 0;
  Span span;
};

KnowledgeGraph load_kg(const std::string& triples_path,
                       const std::optional<std::string>& embeddings_path = std::nullopt);

// In-memory construction, used by the synthetic generator and tests.
KnowledgeGraph kg_from_triples(
    const std::vector<std::tuple<std::string, std::string, std::string>>& triples);

// Greedy longest-match, left-to-right, case-insensitive linking of node
// surface forms (possibly multi-token) against the token sequence. Matched
// spans never overlap; output is sorted by span start.
std::vector<Mention> link_mentions(const std::vector<std::string>& tokens,
                                   const KnowledgeGraph& kg);

// Nodes within <= k undirected hops of any seed, excluding the seeds.
std::set<int> k_hop_neighbors(const KnowledgeGraph& kg, const std::set<int>& seeds, int k);

// Union of interior nodes over all shortest undirected paths between a and b,
// empty when the shortest distance exceeds max_len (counted in edges).
std::set<int> shortest_path_nodes(const KnowledgeGraph& kg, int a, int b, int max_len);

// Case folding used by the mention matcher (ASCII lowercasing).
std::string fold_case(const std::string& s);

}  // namespace unice
