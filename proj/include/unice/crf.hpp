#pragma once

// Linear-chain CRF over BIO tags with structurally masked transitions
// (nothing may transition into I from O or from the start). Viterbi decoding,
// exact NLL via the forward algorithm, and exhaustive-enumeration oracles.

#include <utility>

#include "unice/autodiff.hpp"
#include "unice/corpus.hpp"
#include "unice/nn.hpp"

namespace unice {

inline constexpr int kNumTags = 3;  // B, I, O
inline constexpr double kCrfMask = -1e9;

struct CrfHead {
  Linear emit;                // d_enc -> 3
  ad::Parameter* trans;       // 3 x 3, trans(from, to)
  ad::Parameter* start;       // 1 x 3
  ad::Parameter* stop;        // 1 x 3

  static CrfHead create(ad::ParamStore& ps, const std::string& prefix, Eigen::Index d_enc,
                        Rng& rng);

  // Emission scores for token representations h (n x d_enc), by value.
  Eigen::MatrixXd emissions(const Eigen::MatrixXd& h) const;
  ad::Var emissions(ad::Graph& g, const ad::Var& h) const;

  // Viterbi argmax under masked transitions; ties broken by tag order B < I < O.
  BioSequence decode(const Eigen::MatrixXd& h) const;
  BioSequence decode_from_emissions(const Eigen::MatrixXd& emit_scores) const;

  // -log p(gold | h); differentiable through emissions and CRF parameters.
  ad::Var nll(ad::Graph& g, const ad::Var& h, const BioSequence& gold) const;
};

// Transition/start masks: additive 0 for allowed, kCrfMask for disallowed.
Eigen::MatrixXd crf_transition_mask();
Eigen::MatrixXd crf_start_mask();

// Enumeration oracles over all BIO-valid tag sequences (3^n scan). Scores use
// the same raw emissions/transition/start/stop tables as the CRF.
struct CrfTables {
  Eigen::MatrixXd emissions;  // n x 3
  Eigen::MatrixXd trans;      // 3 x 3
  Eigen::RowVectorXd start;   // 1 x 3
  Eigen::RowVectorXd stop;    // 1 x 3
};

double crf_sequence_score(const CrfTables& t, const BioSequence& seq);
std::pair<double, BioSequence> crf_brute_force_best(const CrfTables& t);
double crf_brute_force_log_partition(const CrfTables& t);

}  // namespace unice
