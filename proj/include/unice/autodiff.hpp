#pragma once

// Tape-based reverse-mode autodiff over dense double matrices. One Graph per
// forward pass; nodes are appended in evaluation order, so reversing the tape
// is a valid topological order for backprop. Everything is double precision.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "unice/common.hpp"

namespace unice::ad {

using Mat = Eigen::MatrixXd;

struct Node {
  Mat value;
  Mat grad;  // empty until the first accumulation reaches this node
  bool needs_grad = false;
  std::function<void(Node&)> backward;
};

// Accumulate g into n.grad (allocating on first touch).
inline void accum(Node& n, const Mat& g) {
  if (!n.needs_grad) return;
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

class Var {
public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  bool valid() const { return node_ != nullptr; }
  const Mat& value() const { return node_->value; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double scalar() const { return node_->value(0, 0); }

  // Gradient w.r.t. this node after Graph::backward. Zero matrix if the node
  // was never reached.
  Mat grad() const {
    if (node_->grad.size() == 0) return Mat::Zero(rows(), cols());
    return node_->grad;
  }

  std::shared_ptr<Node> node_;
};

// A persistent trainable tensor. Lives in a ParamStore; enters a Graph via
// Graph::param, which routes gradient accumulation back here.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  void zero_grad() { grad.setZero(); }
  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }
};

class ParamStore {
public:
  Parameter& add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    for (const auto& p : params_)
      if (p->name == name) throw StateError("duplicate parameter name: " + name);
    auto p = std::make_shared<Parameter>();
    p->name = name;
    p->value = Mat::Zero(rows, cols);
    p->grad = Mat::Zero(rows, cols);
    params_.push_back(p);
    return *p;
  }

  Parameter* find(const std::string& name) const {
    for (const auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }

  const std::vector<std::shared_ptr<Parameter>>& all() const { return params_; }

  void zero_grads() {
    for (auto& p : params_) p->zero_grad();
  }

private:
  std::vector<std::shared_ptr<Parameter>> params_;
};

class Graph {
public:
  // Leaf holding a constant (or, with needs_grad, an input we differentiate
  // against in tests).
  Var input(Mat m, bool needs_grad = false) {
    return make(std::move(m), needs_grad, nullptr);
  }

  Var param(Parameter& p) {
    auto v = make(p.value, true, nullptr);
    Parameter* pp = &p;
    v.node_->backward = [pp](Node& n) { pp->grad += n.grad; };
    return v;
  }

  Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    return unary_binary({a, b}, a.value() + b.value(), [](Node& n, Args& in) {
      accum(*in[0], n.grad);
      accum(*in[1], n.grad);
    });
  }

  // out_ij = a_ij + v_0j  (v is 1 x cols)
  Var add_rowvec(const Var& a, const Var& v) {
    if (v.rows() != 1 || v.cols() != a.cols()) throw ArgError("add_rowvec: shape mismatch");
    Mat out = a.value();
    out.rowwise() += v.value().row(0);
    return unary_binary({a, v}, std::move(out), [](Node& n, Args& in) {
      accum(*in[0], n.grad);
      accum(*in[1], n.grad.colwise().sum());
    });
  }

  // out_ij = a_ij + v_i0  (v is rows x 1)
  Var add_colvec(const Var& a, const Var& v) {
    if (v.cols() != 1 || v.rows() != a.rows()) throw ArgError("add_colvec: shape mismatch");
    Mat out = a.value();
    out.colwise() += v.value().col(0);
    return unary_binary({a, v}, std::move(out), [](Node& n, Args& in) {
      accum(*in[0], n.grad);
      accum(*in[1], n.grad.rowwise().sum());
    });
  }

  Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    return unary_binary({a, b}, a.value() - b.value(), [](Node& n, Args& in) {
      accum(*in[0], n.grad);
      accum(*in[1], -n.grad);
    });
  }

  Var neg(const Var& a) { return scale(a, -1.0); }

  Var scale(const Var& a, double s) {
    return unary_binary({a}, Mat(a.value() * s), [s](Node& n, Args& in) {
      accum(*in[0], Mat(n.grad * s));
    });
  }

  Var add_scalar(const Var& a, double c) {
    return unary_binary({a}, Mat(a.value().array() + c), [](Node& n, Args& in) {
      accum(*in[0], n.grad);
    });
  }

  Var matmul(const Var& a, const Var& b) {
    if (a.cols() != b.rows()) throw ArgError("matmul: inner dimension mismatch");
    return unary_binary({a, b}, a.value() * b.value(), [](Node& n, Args& in) {
      accum(*in[0], Mat(n.grad * in[1]->value.transpose()));
      accum(*in[1], Mat(in[0]->value.transpose() * n.grad));
    });
  }

  Var cmul(const Var& a, const Var& b) {
    check_same_shape(a, b, "cmul");
    return unary_binary({a, b}, a.value().cwiseProduct(b.value()), [](Node& n, Args& in) {
      accum(*in[0], n.grad.cwiseProduct(in[1]->value));
      accum(*in[1], n.grad.cwiseProduct(in[0]->value));
    });
  }

  Var transpose(const Var& a) {
    return unary_binary({a}, a.value().transpose(), [](Node& n, Args& in) {
      accum(*in[0], n.grad.transpose());
    });
  }

  Var tanh(const Var& a) {
    Mat y = a.value().array().tanh().matrix();
    auto self = unary_binary({a}, std::move(y), [](Node& n, Args& in) {
      Mat d = (1.0 - n.value.array().square()).matrix();
      accum(*in[0], n.grad.cwiseProduct(d));
    });
    return self;
  }

  Var sigmoid(const Var& a) {
    Mat y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
    return unary_binary({a}, std::move(y), [](Node& n, Args& in) {
      Mat d = (n.value.array() * (1.0 - n.value.array())).matrix();
      accum(*in[0], n.grad.cwiseProduct(d));
    });
  }

  Var gelu(const Var& a) {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    Mat y = a.value().unaryExpr(
        [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); });
    return unary_binary({a}, std::move(y), [](Node& n, Args& in) {
      Mat d = in[0]->value.unaryExpr([](double v) {
        return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) +
               v * std::exp(-0.5 * v * v) * inv_sqrt_2pi;
      });
      accum(*in[0], n.grad.cwiseProduct(d));
    });
  }

  Var exp(const Var& a) {
    Mat y = a.value().array().exp().matrix();
    return unary_binary({a}, std::move(y), [](Node& n, Args& in) {
      accum(*in[0], n.grad.cwiseProduct(n.value));
    });
  }

  Var log(const Var& a) {
    Mat y = a.value().array().log().matrix();
    return unary_binary({a}, std::move(y), [](Node& n, Args& in) {
      accum(*in[0], n.grad.cwiseQuotient(in[0]->value));
    });
  }

  // Gradient passes only strictly inside (lo, hi).
  Var clamp(const Var& a, double lo, double hi) {
    Mat y = a.value().array().max(lo).min(hi).matrix();
    return unary_binary({a}, std::move(y), [lo, hi](Node& n, Args& in) {
      Mat mask = ((in[0]->value.array() > lo) && (in[0]->value.array() < hi)).cast<double>().matrix();
      accum(*in[0], n.grad.cwiseProduct(mask));
    });
  }

  Var concat_cols(const Var& a, const Var& b) {
    if (a.rows() != b.rows()) throw ArgError("concat_cols: row mismatch");
    Mat out(a.rows(), a.cols() + b.cols());
    out << a.value(), b.value();
    Eigen::Index ca = a.cols();
    return unary_binary({a, b}, std::move(out), [ca](Node& n, Args& in) {
      accum(*in[0], n.grad.leftCols(ca));
      accum(*in[1], n.grad.rightCols(n.grad.cols() - ca));
    });
  }

  Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ArgError("concat_rows: no parts");
    Eigen::Index rows = 0, cols = parts[0].cols();
    for (const auto& p : parts) {
      if (p.cols() != cols) throw ArgError("concat_rows: column mismatch");
      rows += p.rows();
    }
    Mat out(rows, cols);
    Eigen::Index r = 0;
    for (const auto& p : parts) {
      out.middleRows(r, p.rows()) = p.value();
      r += p.rows();
    }
    std::vector<Eigen::Index> sizes;
    for (const auto& p : parts) sizes.push_back(p.rows());
    return unary_binary(parts, std::move(out), [sizes](Node& n, Args& in) {
      Eigen::Index r = 0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        accum(*in[k], n.grad.middleRows(r, sizes[k]));
        r += sizes[k];
      }
    });
  }

  Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.rows())
      throw ArgError("slice_rows: out of range");
    return unary_binary({a}, a.value().middleRows(start, count),
                        [start, count](Node& n, Args& in) {
                          Mat g = Mat::Zero(in[0]->value.rows(), in[0]->value.cols());
                          g.middleRows(start, count) = n.grad;
                          accum(*in[0], g);
                        });
  }

  Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.cols())
      throw ArgError("slice_cols: out of range");
    return unary_binary({a}, a.value().middleCols(start, count),
                        [start, count](Node& n, Args& in) {
                          Mat g = Mat::Zero(in[0]->value.rows(), in[0]->value.cols());
                          g.middleCols(start, count) = n.grad;
                          accum(*in[0], g);
                        });
  }

  Var pick_row(const Var& a, Eigen::Index i) { return slice_rows(a, i, 1); }

  Var gather_rows(const Var& a, std::vector<int> idx) {
    Mat out(Eigen::Index(idx.size()), a.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= a.rows()) throw ArgError("gather_rows: index out of range");
      out.row(Eigen::Index(k)) = a.value().row(idx[k]);
    }
    return unary_binary({a}, std::move(out), [idx = std::move(idx)](Node& n, Args& in) {
      Mat g = Mat::Zero(in[0]->value.rows(), in[0]->value.cols());
      for (std::size_t k = 0; k < idx.size(); ++k) g.row(idx[k]) += n.grad.row(Eigen::Index(k));
      accum(*in[0], g);
    });
  }

  // out = base with out.row(idx[k]) = rows.row(k). Indices must be distinct.
  Var replace_rows(const Var& base, std::vector<int> idx, const Var& rows) {
    if (Eigen::Index(idx.size()) != rows.rows() || base.cols() != rows.cols())
      throw ArgError("replace_rows: shape mismatch");
    Mat out = base.value();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= base.rows()) throw ArgError("replace_rows: index out of range");
      out.row(idx[k]) = rows.value().row(Eigen::Index(k));
    }
    return unary_binary({base, rows}, std::move(out), [idx = std::move(idx)](Node& n, Args& in) {
      Mat gb = n.grad;
      Mat gr(Eigen::Index(idx.size()), n.grad.cols());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        gr.row(Eigen::Index(k)) = n.grad.row(idx[k]);
        gb.row(idx[k]).setZero();
      }
      accum(*in[0], gb);
      accum(*in[1], gr);
    });
  }

  Var element(const Var& a, Eigen::Index i, Eigen::Index j) {
    if (i < 0 || i >= a.rows() || j < 0 || j >= a.cols())
      throw ArgError("element: index out of range");
    Mat out(1, 1);
    out(0, 0) = a.value()(i, j);
    return unary_binary({a}, std::move(out), [i, j](Node& n, Args& in) {
      Mat g = Mat::Zero(in[0]->value.rows(), in[0]->value.cols());
      g(i, j) = n.grad(0, 0);
      accum(*in[0], g);
    });
  }

  Var sum_all(const Var& a) {
    Mat out(1, 1);
    out(0, 0) = a.value().sum();
    return unary_binary({a}, std::move(out), [](Node& n, Args& in) {
      accum(*in[0], Mat(Mat::Constant(in[0]->value.rows(), in[0]->value.cols(), n.grad(0, 0))));
    });
  }

  Var mean_all(const Var& a) { return scale(sum_all(a), 1.0 / double(a.rows() * a.cols())); }

  Var rowwise_sum(const Var& a) {
    Mat out = a.value().rowwise().sum();
    return unary_binary({a}, std::move(out), [](Node& n, Args& in) {
      accum(*in[0], Mat(n.grad.replicate(1, in[0]->value.cols())));
    });
  }

  Var colwise_sum(const Var& a) {
    Mat out = a.value().colwise().sum();
    return unary_binary({a}, std::move(out), [](Node& n, Args& in) {
      accum(*in[0], Mat(n.grad.replicate(in[0]->value.rows(), 1)));
    });
  }

  // n x 1 column from the diagonal of a square matrix.
  Var diag_part(const Var& a) {
    if (a.rows() != a.cols()) throw ArgError("diag_part: matrix not square");
    Mat out = a.value().diagonal();
    return unary_binary({a}, std::move(out), [](Node& n, Args& in) {
      Mat g = Mat::Zero(in[0]->value.rows(), in[0]->value.cols());
      g.diagonal() = n.grad.col(0);
      accum(*in[0], g);
    });
  }

  // n x n diagonal matrix from an n x 1 column.
  Var diag_from_col(const Var& v) {
    if (v.cols() != 1) throw ArgError("diag_from_col: expected a column vector");
    Mat out = Mat::Zero(v.rows(), v.rows());
    out.diagonal() = v.value().col(0);
    return unary_binary({v}, std::move(out), [](Node& n, Args& in) {
      accum(*in[0], Mat(n.grad.diagonal()));
    });
  }

  // Inverse of a square matrix. Throws NumericalError when the reciprocal
  // condition estimate falls below rcond_min.
  Var inverse(const Var& a, double rcond_min = 1e-12) {
    if (a.rows() != a.cols()) throw ArgError("inverse: matrix not square");
    Eigen::PartialPivLU<Mat> lu(a.value());
    double rc = lu.rcond();
    if (!(rc > rcond_min))
      throw NumericalError("matrix near-singular: rcond estimate " + std::to_string(rc));
    Mat y = lu.inverse();
    return unary_binary({a}, std::move(y), [](Node& n, Args& in) {
      accum(*in[0], Mat(-n.value.transpose() * n.grad * n.value.transpose()));
    });
  }

  Var softmax_rows(const Var& a) {
    Mat x = a.value();
    Mat y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      double m = x.row(r).maxCoeff();
      Eigen::Array<double, 1, Eigen::Dynamic> e = (x.row(r).array() - m).exp();
      y.row(r) = (e / e.sum()).matrix();
    }
    return unary_binary({a}, std::move(y), [](Node& n, Args& in) {
      Mat g(n.value.rows(), n.value.cols());
      for (Eigen::Index r = 0; r < n.value.rows(); ++r) {
        double dot = n.grad.row(r).dot(n.value.row(r));
        g.row(r) = (n.value.row(r).array() * (n.grad.row(r).array() - dot)).matrix();
      }
      accum(*in[0], g);
    });
  }

  // out_0j = log sum_i exp(a_ij); 1 x cols.
  Var logsumexp_cols(const Var& a) {
    Mat x = a.value();
    Mat out(1, x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      double m = x.col(c).maxCoeff();
      out(0, c) = m + std::log((x.col(c).array() - m).exp().sum());
    }
    return unary_binary({a}, std::move(out), [](Node& n, Args& in) {
      Mat g(in[0]->value.rows(), in[0]->value.cols());
      for (Eigen::Index c = 0; c < g.cols(); ++c)
        g.col(c) = ((in[0]->value.col(c).array() - n.value(0, c)).exp() * n.grad(0, c)).matrix();
      accum(*in[0], g);
    });
  }

  Var logsumexp_all(const Var& a) {
    Mat x = a.value();
    double m = x.maxCoeff();
    Mat out(1, 1);
    out(0, 0) = m + std::log((x.array() - m).exp().sum());
    return unary_binary({a}, std::move(out), [](Node& n, Args& in) {
      Mat g = ((in[0]->value.array() - n.value(0, 0)).exp() * n.grad(0, 0)).matrix();
      accum(*in[0], g);
    });
  }

  // Per-row layer normalization: y_r = gain .* (x_r - mu_r)/sqrt(var_r + eps) + bias.
  Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5) {
    if (gain.rows() != 1 || gain.cols() != x.cols() || bias.rows() != 1 ||
        bias.cols() != x.cols())
      throw ArgError("layer_norm_rows: gain/bias must be 1 x cols");
    const Mat& xv = x.value();
    Eigen::Index d = xv.cols();
    Mat xhat(xv.rows(), d);
    Eigen::VectorXd inv_std(xv.rows());
    for (Eigen::Index r = 0; r < xv.rows(); ++r) {
      double mu = xv.row(r).mean();
      double var = (xv.row(r).array() - mu).square().mean();
      double is = 1.0 / std::sqrt(var + eps);
      inv_std(r) = is;
      xhat.row(r) = ((xv.row(r).array() - mu) * is).matrix();
    }
    Mat y = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
    y.rowwise() += bias.value().row(0);
    return unary_binary(
        {x, gain, bias}, std::move(y),
        [xhat, inv_std](Node& n, Args& in) {
          using RowArr = Eigen::Array<double, 1, Eigen::Dynamic>;
          const Mat& g = n.grad;
          accum(*in[1], Mat(g.cwiseProduct(xhat).colwise().sum()));
          accum(*in[2], Mat(g.colwise().sum()));
          Mat gx(g.rows(), g.cols());
          for (Eigen::Index r = 0; r < g.rows(); ++r) {
            RowArr gxhat = g.row(r).array() * in[1]->value.row(0).array();
            double m1 = gxhat.mean();
            double m2 = (gxhat * xhat.row(r).array()).mean();
            gx.row(r) = (inv_std(r) * (gxhat - m1 - xhat.row(r).array() * m2)).matrix();
          }
          accum(*in[0], gx);
        });
  }

  // Inverted dropout; identity when train is false.
  Var dropout(const Var& a, double rate, Rng& rng, bool train) {
    if (!train || rate <= 0.0) return a;
    double keep = 1.0 - rate;
    Mat mask(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
      for (Eigen::Index j = 0; j < mask.cols(); ++j)
        mask(i, j) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    return cmul(a, input(std::move(mask)));
  }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse.
  void backward(const Var& loss) {
    if (loss.rows() != 1 || loss.cols() != 1) throw ArgError("backward: loss must be scalar");
    if (!loss.node_->needs_grad) throw StateError("backward: loss does not require grad");
    accum(*loss.node_, Mat::Ones(1, 1));
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
      Node& n = **it;
      if (n.needs_grad && n.grad.size() != 0 && n.backward) n.backward(n);
    }
  }

  std::size_t size() const { return tape_.size(); }

private:
  using Args = std::vector<std::shared_ptr<Node>>;

  static void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
      throw ArgError(std::string(op) + ": shape mismatch");
  }

  Var make(Mat value, bool needs_grad, std::function<void(Node&)> bw) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->needs_grad = needs_grad;
    n->backward = std::move(bw);
    tape_.push_back(n);
    return Var(n);
  }

  Var unary_binary(const std::vector<Var>& inputs, Mat value,
                   std::function<void(Node&, Args&)> bw) {
    bool ng = false;
    Args args;
    args.reserve(inputs.size());
    for (const auto& v : inputs) {
      if (!v.valid()) throw ArgError("op input is empty");
      ng = ng || v.node_->needs_grad;
      args.push_back(v.node_);
    }
    auto n = make(std::move(value), ng, nullptr);
    if (ng)
      n.node_->backward = [args = std::move(args), bw = std::move(bw)](Node& self) mutable {
        bw(self, args);
      };
    return n;
  }

  std::vector<std::shared_ptr<Node>> tape_;
};

}  // namespace unice::ad
