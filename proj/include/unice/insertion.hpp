#pragma once

// Insertion induction: soft edges between event and mention nodes computed as
// marginal edge probabilities of latent dependency trees via Kirchhoff's
// Matrix-Tree Theorem, plus an exhaustive arborescence-enumeration oracle.

#include "unice/autodiff.hpp"
#include "unice/nn.hpp"

namespace unice {

struct EdgeScorer {
  Linear f_a, f_b;          // affine + tanh transforms, d -> d
  ad::Parameter* w_c;       // bilinear d x d
  Linear w_r;               // root projection d -> 1, bias-free

  static EdgeScorer create(ad::ParamStore& ps, const std::string& prefix, Eigen::Index d,
                           Rng& rng) {
    EdgeScorer s;
    s.f_a = Linear::create(ps, prefix + ".fa", d, d, rng);
    s.f_b = Linear::create(ps, prefix + ".fb", d, d, rng);
    s.w_c = &ps.add(prefix + ".wc", d, d);
    init_glorot(*s.w_c, rng);
    s.w_r = Linear::create(ps, prefix + ".wr", d, 1, rng, /*bias=*/false);
    return s;
  }
};

struct EdgeScores {
  ad::Var P;  // n x n, non-negative, zero diagonal
  ad::Var R;  // n x 1, positive root scores
};

struct TreeMarginalVars {
  ad::Var A;              // n x n edge marginals, head row -> dependent column
  ad::Var root_marginals; // n x 1
};

// Value-level result used by the oracle and tests.
struct TreeMarginals {
  Eigen::MatrixXd A;
  Eigen::VectorXd root_marginals;
};

// P_ij = exp(f_a(e_i)^T W_c f_b(e_j)) off the diagonal, 0 on it;
// R_i = exp(W_r e_i). Logits are clamped to [-20, 20] before exp.
EdgeScores edge_scores(ad::Graph& g, const ad::Var& E, const EdgeScorer& scorer);

// Marginals via the Matrix-Tree Theorem. Row 1 of the Laplacian is replaced
// by the root scores; root_marginals[j] = R_j * [Lhat^-1]_{j1}. Inversion is
// double precision; a reciprocal condition estimate below 1e-12 raises
// NumericalError.
TreeMarginalVars tree_marginals(ad::Graph& g, const ad::Var& P, const ad::Var& R);

// Value-level convenience wrapper.
TreeMarginals tree_marginals(const Eigen::MatrixXd& P, const Eigen::VectorXd& R);

// Enumerates every rooted spanning arborescence (n <= 7); structure weight is
// R_root * prod P_{head,dep}; marginals are weighted frequencies.
TreeMarginals brute_force_marginals(const Eigen::MatrixXd& P, const Eigen::VectorXd& R);

}  // namespace unice
