#include "unice/insertion.hpp"

namespace unice {

EdgeScores edge_scores(ad::Graph& g, const ad::Var& E, const EdgeScorer& scorer) {
  if (!E.value().allFinite()) throw ArgError("edge_scores: non-finite node embeddings");
  Eigen::Index n = E.rows();
  if (n < 1) throw ArgError("edge_scores: need at least one node");

  ad::Var a = g.tanh(scorer.f_a.apply(g, E));
  ad::Var b = g.tanh(scorer.f_b.apply(g, E));
  ad::Var logits = g.matmul(g.matmul(a, g.param(*scorer.w_c)), g.transpose(b));

  ad::Mat off_diag = ad::Mat::Ones(n, n);
  off_diag.diagonal().setZero();
  ad::Var P = g.cmul(g.exp(g.clamp(logits, -20.0, 20.0)), g.input(off_diag));

  ad::Var R = g.exp(g.clamp(scorer.w_r.apply(g, E), -20.0, 20.0));
  return {P, R};
}

TreeMarginalVars tree_marginals(ad::Graph& g, const ad::Var& P, const ad::Var& R) {
  Eigen::Index n = P.rows();
  if (n < 1) throw ArgError("tree_marginals: need at least one node");
  if (P.cols() != n || R.rows() != n || R.cols() != 1)
    throw ArgError("tree_marginals: P must be n x n and R n x 1");
  if (P.value().diagonal().cwiseAbs().maxCoeff() > 0.0)
    throw ArgError("tree_marginals: P diagonal must be zero");
  if (P.value().minCoeff() < 0.0) throw ArgError("tree_marginals: P must be non-negative");
  if (R.value().minCoeff() <= 0.0) throw ArgError("tree_marginals: R must be positive");

  // L_ij = sum_i' P_i'j on the diagonal, -P_ij off it; row 1 then carries the
  // root scores.
  ad::Var laplacian = g.sub(g.diag_from_col(g.transpose(g.colwise_sum(P))), P);
  ad::Var lhat = g.replace_rows(laplacian, {0}, g.transpose(R));
  ad::Var linv = g.inverse(lhat);

  ad::Mat not_first_col = ad::Mat::Ones(n, n);
  not_first_col.col(0).setZero();  // (1 - delta_{1,j})
  ad::Mat not_first_row = ad::Mat::Ones(n, n);
  not_first_row.row(0).setZero();  // (1 - delta_{i,1})

  // Broadcast [Linv]_jj across rows: ones(n,1) * diag(Linv)^T.
  ad::Var diag_bcast = g.matmul(g.input(ad::Mat::Ones(n, 1)), g.transpose(g.diag_part(linv)));
  ad::Var term1 = g.cmul(g.cmul(P, diag_bcast), g.input(not_first_col));
  ad::Var term2 = g.cmul(g.cmul(P, g.transpose(linv)), g.input(not_first_row));
  ad::Var A = g.sub(term1, term2);

  ad::Var roots = g.cmul(R, g.slice_cols(linv, 0, 1));
  return {A, roots};
}

TreeMarginals tree_marginals(const Eigen::MatrixXd& P, const Eigen::VectorXd& R) {
  ad::Graph g;
  auto tm = tree_marginals(g, g.input(P), g.input(R));
  return {tm.A.value(), Eigen::VectorXd(tm.root_marginals.value())};
}

TreeMarginals brute_force_marginals(const Eigen::MatrixXd& P, const Eigen::VectorXd& R) {
  int n = int(P.rows());
  if (n < 1) throw ArgError("brute_force_marginals: need at least one node");
  if (n > 7) throw ArgError("brute_force_marginals: n > 7 is intractable");
  if (P.cols() != n || R.size() != n)
    throw ArgError("brute_force_marginals: shape mismatch");

  Eigen::MatrixXd edge_sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd root_sum = Eigen::VectorXd::Zero(n);
  double z = 0.0;

  // heads[j] is the head of non-root node j; roots have head -1.
  std::vector<int> heads(std::size_t(n), -1);
  auto is_arborescence = [&](int root) {
    for (int j = 0; j < n; ++j) {
      if (j == root) continue;
      int steps = 0, cur = j;
      while (cur != root && steps <= n) {
        cur = heads[std::size_t(cur)];
        if (cur < 0) return false;
        ++steps;
      }
      if (steps > n) return false;  // cycle
    }
    return true;
  };

  for (int root = 0; root < n; ++root) {
    std::vector<int> slots;  // non-root nodes, each picks a head
    for (int j = 0; j < n; ++j)
      if (j != root) slots.push_back(j);

    std::vector<int> choice(slots.size(), 0);
    while (true) {
      std::fill(heads.begin(), heads.end(), -1);
      bool ok = true;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        int dep = slots[s];
        int head = choice[s] >= dep ? choice[s] + 1 : choice[s];  // skip self
        heads[std::size_t(dep)] = head;
        if (head == dep) ok = false;
      }
      if (ok && is_arborescence(root)) {
        double w = R(root);
        for (int dep : slots) w *= P(heads[std::size_t(dep)], dep);
        if (w != 0.0) {
          z += w;
          root_sum(root) += w;
          for (int dep : slots) edge_sum(heads[std::size_t(dep)], dep) += w;
        }
      }
      std::size_t pos = 0;
      while (pos < choice.size() && choice[pos] == n - 2) choice[pos++] = 0;
      if (pos == choice.size()) break;
      ++choice[pos];
    }
  }

  if (!(z > 0.0)) throw NumericalError("brute_force_marginals: zero partition sum");
  return {edge_sum / z, root_sum / z};
}

}  // namespace unice
