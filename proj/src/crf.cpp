#include "unice/crf.hpp"

#include <cmath>
#include <limits>

namespace unice {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int B = 0, I = 1, O = 2;
}  // namespace

Eigen::MatrixXd crf_transition_mask() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(kNumTags, kNumTags);
  m(O, I) = kCrfMask;  // I may only follow B or I
  return m;
}

Eigen::MatrixXd crf_start_mask() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(1, kNumTags);
  m(0, I) = kCrfMask;
  return m;
}

CrfHead CrfHead::create(ad::ParamStore& ps, const std::string& prefix, Eigen::Index d_enc,
                        Rng& rng) {
  CrfHead h;
  h.emit = Linear::create(ps, prefix + ".emit", d_enc, kNumTags, rng);
  h.trans = &ps.add(prefix + ".trans", kNumTags, kNumTags);
  h.start = &ps.add(prefix + ".start", 1, kNumTags);
  h.stop = &ps.add(prefix + ".stop", 1, kNumTags);
  return h;
}

Eigen::MatrixXd CrfHead::emissions(const Eigen::MatrixXd& h) const {
  Eigen::MatrixXd e = h * emit.w->value;
  e.rowwise() += emit.b->value.row(0);
  return e;
}

ad::Var CrfHead::emissions(ad::Graph& g, const ad::Var& h) const { return emit.apply(g, h); }

BioSequence CrfHead::decode(const Eigen::MatrixXd& h) const {
  return decode_from_emissions(emissions(h));
}

BioSequence CrfHead::decode_from_emissions(const Eigen::MatrixXd& e) const {
  int n = int(e.rows());
  if (n < 1) throw ArgError("crf decode: empty sequence");

  // Structural masks use -inf so a disallowed transition can never win.
  Eigen::MatrixXd tr = trans->value;
  tr(O, I) = kNegInf;
  Eigen::RowVectorXd st = start->value.row(0);
  st(I) = kNegInf;
  Eigen::RowVectorXd sp = stop->value.row(0);

  Eigen::MatrixXd score(n, kNumTags);
  Eigen::MatrixXi back(n, kNumTags);
  score.row(0) = st + e.row(0);
  for (int t = 1; t < n; ++t) {
    for (int to = 0; to < kNumTags; ++to) {
      double best = kNegInf;
      int arg = 0;
      for (int from = 0; from < kNumTags; ++from) {
        double s = score(t - 1, from) + tr(from, to);
        if (s > best) {  // strict: earlier (smaller) tag wins ties
          best = s;
          arg = from;
        }
      }
      score(t, to) = best + e(t, to);
      back(t, to) = arg;
    }
  }

  double best = kNegInf;
  int arg = 0;
  for (int tag = 0; tag < kNumTags; ++tag) {
    double s = score(n - 1, tag) + sp(tag);
    if (s > best) {
      best = s;
      arg = tag;
    }
  }

  BioSequence seq(std::size_t(n));
  for (int t = n - 1; t >= 0; --t) {
    seq[std::size_t(t)] = Tag(arg);
    if (t > 0) arg = back(t, arg);
  }
  return seq;
}

ad::Var CrfHead::nll(ad::Graph& g, const ad::Var& h, const BioSequence& gold) const {
  int n = int(h.rows());
  if (int(gold.size()) != n) throw ArgError("crf nll: gold length mismatch");
  if (!bio_wellformed(gold)) throw ArgError("crf nll: gold tag sequence is not BIO-well-formed");

  ad::Var e = emissions(g, h);
  ad::Var tr = g.add(g.param(*trans), g.input(crf_transition_mask()));
  ad::Var st = g.add(g.param(*start), g.input(crf_start_mask()));
  ad::Var sp = g.param(*stop);

  // Forward recursion in log space; masked entries vanish under logsumexp.
  ad::Var alpha = g.add(st, g.pick_row(e, 0));  // 1 x 3
  for (int t = 1; t < n; ++t) {
    ad::Var m = g.add_colvec(tr, g.transpose(alpha));  // m_ij = tr_ij + alpha_i
    alpha = g.add(g.logsumexp_cols(m), g.pick_row(e, t));
  }
  ad::Var log_z = g.logsumexp_all(g.add(alpha, sp));

  int first = int(gold[0]);
  ad::Var gold_score = g.add(g.element(st, 0, first), g.element(e, 0, first));
  for (int t = 1; t < n; ++t) {
    int prev = int(gold[std::size_t(t - 1)]), cur = int(gold[std::size_t(t)]);
    gold_score = g.add(gold_score, g.add(g.element(tr, prev, cur), g.element(e, t, cur)));
  }
  gold_score = g.add(gold_score, g.element(sp, 0, int(gold.back())));

  return g.sub(log_z, gold_score);
}

double crf_sequence_score(const CrfTables& t, const BioSequence& seq) {
  double s = t.start(int(seq[0])) + t.emissions(0, int(seq[0]));
  for (std::size_t k = 1; k < seq.size(); ++k)
    s += t.trans(int(seq[k - 1]), int(seq[k])) + t.emissions(Eigen::Index(k), int(seq[k]));
  return s + t.stop(int(seq.back()));
}

namespace {

template <typename Fn>
void for_each_valid_sequence(int n, Fn&& fn) {
  BioSequence seq(std::size_t(n), Tag::B);
  std::vector<int> digits(std::size_t(n), 0);
  while (true) {
    bool valid = true;
    for (int t = 0; t < n && valid; ++t) {
      if (digits[std::size_t(t)] == I && (t == 0 || digits[std::size_t(t - 1)] == O))
        valid = false;
    }
    if (valid) {
      for (int t = 0; t < n; ++t) seq[std::size_t(t)] = Tag(digits[std::size_t(t)]);
      fn(seq);
    }
    int pos = n - 1;
    while (pos >= 0 && digits[std::size_t(pos)] == kNumTags - 1) {
      digits[std::size_t(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++digits[std::size_t(pos)];
  }
}

}  // namespace

std::pair<double, BioSequence> crf_brute_force_best(const CrfTables& t) {
  int n = int(t.emissions.rows());
  double best = -std::numeric_limits<double>::infinity();
  BioSequence arg;
  for_each_valid_sequence(n, [&](const BioSequence& seq) {
    double s = crf_sequence_score(t, seq);
    if (s > best) {  // lexicographically-first sequence wins ties (B < I < O)
      best = s;
      arg = seq;
    }
  });
  return {best, arg};
}

double crf_brute_force_log_partition(const CrfTables& t) {
  int n = int(t.emissions.rows());
  std::vector<double> scores;
  for_each_valid_sequence(n, [&](const BioSequence& seq) {
    scores.push_back(crf_sequence_score(t, seq));
  });
  double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - m);
  return m + std::log(sum);
}

}  // namespace unice
