#pragma once

#include "unice/autodiff.hpp"
#include "unice/common.hpp"

namespace unice {

inline void init_glorot(ad::Parameter& p, Rng& rng) {
  double limit = std::sqrt(6.0 / double(p.rows() + p.cols()));
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) p.value(i, j) = rng.uniform(-limit, limit);
}

inline void init_normal(ad::Parameter& p, Rng& rng, double stddev = 0.02) {
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) p.value(i, j) = rng.normal() * stddev;
}

// y = x W + b, with W stored (in x out).
struct Linear {
  ad::Parameter* w = nullptr;
  ad::Parameter* b = nullptr;  // null for bias-free maps

  static Linear create(ad::ParamStore& ps, const std::string& prefix, Eigen::Index in,
                       Eigen::Index out, Rng& rng, bool bias = true) {
    Linear l;
    l.w = &ps.add(prefix + ".w", in, out);
    init_glorot(*l.w, rng);
    if (bias) l.b = &ps.add(prefix + ".b", 1, out);
    return l;
  }

  ad::Var apply(ad::Graph& g, const ad::Var& x) const {
    ad::Var y = g.matmul(x, g.param(*w));
    if (b) y = g.add_rowvec(y, g.param(*b));
    return y;
  }
};

// Row-wise layer normalization with learned gain/bias.
struct LayerNorm {
  ad::Parameter* gain = nullptr;
  ad::Parameter* bias = nullptr;

  static LayerNorm create(ad::ParamStore& ps, const std::string& prefix, Eigen::Index dim) {
    LayerNorm ln;
    ln.gain = &ps.add(prefix + ".gain", 1, dim);
    ln.gain->value.setOnes();
    ln.bias = &ps.add(prefix + ".bias", 1, dim);
    return ln;
  }

  ad::Var apply(ad::Graph& g, const ad::Var& x) const {
    return g.layer_norm_rows(x, g.param(*gain), g.param(*bias));
  }
};

// Two-layer feed-forward block with tanh hidden activation.
struct Mlp2 {
  Linear l1, l2;

  static Mlp2 create(ad::ParamStore& ps, const std::string& prefix, Eigen::Index in,
                     Eigen::Index hidden, Eigen::Index out, Rng& rng) {
    Mlp2 m;
    m.l1 = Linear::create(ps, prefix + ".l1", in, hidden, rng);
    m.l2 = Linear::create(ps, prefix + ".l2", hidden, out, rng);
    return m;
  }

  ad::Var apply(ad::Graph& g, const ad::Var& x) const {
    return l2.apply(g, g.tanh(l1.apply(g, x)));
  }
};

}  // namespace unice
