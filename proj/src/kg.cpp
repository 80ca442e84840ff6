#include "unice/kg.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace unice {

std::string fold_case(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> parts;
  std::istringstream is(s);
  std::string w;
  while (is >> w) parts.push_back(w);
  return parts;
}

}  // namespace

int KnowledgeGraph::find_node(const std::string& surface) const {
  auto it = surface_index_.find(fold_case(surface));
  return it == surface_index_.end() ? -1 : it->second;
}

int KnowledgeGraph::find_relation(const std::string& name) const {
  auto it = relation_index_.find(name);
  return it == relation_index_.end() ? -1 : it->second;
}

const Eigen::MatrixXd& KnowledgeGraph::embeddings() const {
  if (!embeddings_) throw StateError("knowledge graph has no embedding table");
  return *embeddings_;
}

void KnowledgeGraph::finalize() {
  adjacency_.assign(surfaces_.size(), {});
  for (const auto& e : edges_) {
    adjacency_[std::size_t(e.head)].push_back(e.tail);
    adjacency_[std::size_t(e.tail)].push_back(e.head);
  }
  for (auto& a : adjacency_) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
}

namespace {

int intern(KnowledgeGraph& kg, std::vector<std::string>& surfaces,
           std::unordered_map<std::string, int>& index, const std::string& surface) {
  (void)kg;
  std::string key = fold_case(surface);
  auto it = index.find(key);
  if (it != index.end()) return it->second;
  int id = int(surfaces.size());
  surfaces.push_back(surface);
  index.emplace(std::move(key), id);
  return id;
}

}  // namespace

KnowledgeGraph kg_from_triples(
    const std::vector<std::tuple<std::string, std::string, std::string>>& triples) {
  KnowledgeGraph kg;
  for (const auto& [h, r, t] : triples) {
    if (h.empty() || r.empty() || t.empty())
      throw DataError("kg triple with empty field");
    int hi = intern(kg, kg.surfaces_, kg.surface_index_, h);
    int ti = intern(kg, kg.surfaces_, kg.surface_index_, t);
    auto rit = kg.relation_index_.find(r);
    int ri;
    if (rit == kg.relation_index_.end()) {
      ri = int(kg.relation_names_.size());
      kg.relation_names_.push_back(r);
      kg.relation_index_.emplace(r, ri);
    } else {
      ri = rit->second;
    }
    kg.edges_.push_back({hi, ri, ti});
  }
  kg.finalize();
  return kg;
}

KnowledgeGraph load_kg(const std::string& triples_path,
                       const std::optional<std::string>& embeddings_path) {
  std::ifstream in(triples_path);
  if (!in) throw IoError("cannot open triples file: " + triples_path);

  std::vector<std::tuple<std::string, std::string, std::string>> triples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string where = triples_path + ":" + std::to_string(lineno);
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      std::size_t tab = line.find('\t', pos);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    if (fields.size() != 3)
      throw DataError(where + ": expected head<TAB>relation<TAB>tail, got " +
                      std::to_string(fields.size()) + " fields");
    if (fields[0].empty() || fields[1].empty() || fields[2].empty())
      throw DataError(where + ": empty field in triple");
    triples.emplace_back(fields[0], fields[1], fields[2]);
  }

  KnowledgeGraph kg = kg_from_triples(triples);

  if (embeddings_path) {
    std::ifstream ein(*embeddings_path);
    if (!ein) throw IoError("cannot open embeddings file: " + *embeddings_path);
    std::vector<std::pair<int, std::vector<double>>> rows;
    std::set<int> seen;
    int dim = -1;
    lineno = 0;
    while (std::getline(ein, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::string where = *embeddings_path + ":" + std::to_string(lineno);
      std::size_t tab = line.find('\t');
      if (tab == std::string::npos) throw DataError(where + ": expected surface<TAB>floats");
      std::string surface = line.substr(0, tab);
      int node = kg.find_node(surface);
      if (node < 0) throw DataError(where + ": unknown node surface '" + surface + "'");
      if (!seen.insert(node).second)
        throw DataError(where + ": duplicate node id for surface '" + surface + "'");
      std::vector<double> vec;
      std::istringstream vs(line.substr(tab + 1));
      double x;
      while (vs >> x) vec.push_back(x);
      if (vec.empty()) throw DataError(where + ": empty embedding vector");
      if (dim < 0) dim = int(vec.size());
      if (int(vec.size()) != dim)
        throw DataError(where + ": embedding dimension mismatch: expected " +
                        std::to_string(dim) + ", got " + std::to_string(vec.size()));
      rows.emplace_back(node, std::move(vec));
    }
    if (int(rows.size()) != kg.node_count()) {
      for (int n = 0; n < kg.node_count(); ++n)
        if (!seen.count(n))
          throw DataError(*embeddings_path + ": missing embedding for node '" + kg.surface(n) +
                          "'");
    }
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(kg.node_count(), dim < 0 ? 0 : dim);
    for (const auto& [node, vec] : rows)
      for (int j = 0; j < dim; ++j) table(node, j) = vec[std::size_t(j)];
    kg.embeddings_ = std::move(table);
  }

  return kg;
}

std::vector<Mention> link_mentions(const std::vector<std::string>& tokens,
                                   const KnowledgeGraph& kg) {
  // Index node surfaces by their folded token sequences.
  std::unordered_map<std::string, int> phrase_to_node;
  std::size_t max_words = 1;
  for (int n = 0; n < kg.node_count(); ++n) {
    auto words = split_ws(fold_case(kg.surface(n)));
    if (words.empty()) continue;
    max_words = std::max(max_words, words.size());
    std::string key;
    for (const auto& w : words) {
      if (!key.empty()) key.push_back(' ');
      key += w;
    }
    phrase_to_node.emplace(key, n);  // first appearance wins
  }

  std::vector<Mention> mentions;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool matched = false;
    std::size_t limit = std::min(max_words, tokens.size() - i);
    for (std::size_t len = limit; len >= 1; --len) {
      std::string key;
      for (std::size_t t = 0; t < len; ++t) {
        if (t) key.push_back(' ');
        key += fold_case(tokens[i + t]);
      }
      auto it = phrase_to_node.find(key);
      if (it != phrase_to_node.end()) {
        mentions.push_back({it->second, {int(i), int(i + len)}});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return mentions;
}

std::set<int> k_hop_neighbors(const KnowledgeGraph& kg, const std::set<int>& seeds, int k) {
  if (k < 1) throw ArgError("k_hop_neighbors: k must be positive");
  for (int s : seeds)
    if (s < 0 || s >= kg.node_count())
      throw ArgError("k_hop_neighbors: unknown seed node " + std::to_string(s));

  std::vector<int> dist(std::size_t(kg.node_count()), -1);
  std::deque<int> queue;
  for (int s : seeds) {
    dist[std::size_t(s)] = 0;
    queue.push_back(s);
  }
  std::set<int> out;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (dist[std::size_t(u)] >= k) continue;
    for (int v : kg.neighbors(u)) {
      if (dist[std::size_t(v)] < 0) {
        dist[std::size_t(v)] = dist[std::size_t(u)] + 1;
        out.insert(v);
        queue.push_back(v);
      }
    }
  }
  return out;
}

namespace {

std::vector<int> bfs_dist(const KnowledgeGraph& kg, int src) {
  std::vector<int> dist(std::size_t(kg.node_count()), -1);
  std::deque<int> queue{src};
  dist[std::size_t(src)] = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : kg.neighbors(u)) {
      if (dist[std::size_t(v)] < 0) {
        dist[std::size_t(v)] = dist[std::size_t(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

std::set<int> shortest_path_nodes(const KnowledgeGraph& kg, int a, int b, int max_len) {
  if (max_len < 1) throw ArgError("shortest_path_nodes: max_len must be positive");
  if (a < 0 || a >= kg.node_count() || b < 0 || b >= kg.node_count())
    throw ArgError("shortest_path_nodes: unknown node");
  if (a == b) return {};

  std::vector<int> da = bfs_dist(kg, a);
  std::vector<int> db = bfs_dist(kg, b);
  int d = da[std::size_t(b)];
  if (d < 0 || d > max_len) return {};

  // A node is interior to some shortest path iff d(a,v) + d(v,b) == d(a,b).
  std::set<int> out;
  for (int v = 0; v < kg.node_count(); ++v) {
    if (v == a || v == b) continue;
    if (da[std::size_t(v)] >= 0 && db[std::size_t(v)] >= 0 &&
        da[std::size_t(v)] + db[std::size_t(v)] == d)
      out.insert(v);
  }
  return out;
}

}  // namespace unice
