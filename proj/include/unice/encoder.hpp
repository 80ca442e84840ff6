#pragma once

// Randomly initialized transformer-style token encoder standing in for a
// pretrained LM at desk scale. N plain layers followed by M joint layers; a
// constructor hook accepts externally trained weights by parameter name.

#include <vector>

#include "unice/autodiff.hpp"
#include "unice/nn.hpp"

namespace unice {

struct EncoderBlock {
  Linear wq, wk, wv, wo;
  LayerNorm ln_attn;
  Linear ffn1, ffn2;
  LayerNorm ln_ffn;

  static EncoderBlock create(ad::ParamStore& ps, const std::string& prefix, Eigen::Index d,
                             Rng& rng) {
    EncoderBlock b;
    b.wq = Linear::create(ps, prefix + ".wq", d, d, rng);
    b.wk = Linear::create(ps, prefix + ".wk", d, d, rng);
    b.wv = Linear::create(ps, prefix + ".wv", d, d, rng);
    b.wo = Linear::create(ps, prefix + ".wo", d, d, rng);
    b.ln_attn = LayerNorm::create(ps, prefix + ".ln_attn", d);
    b.ffn1 = Linear::create(ps, prefix + ".ffn1", d, 4 * d, rng);
    b.ffn2 = Linear::create(ps, prefix + ".ffn2", 4 * d, d, rng);
    b.ln_ffn = LayerNorm::create(ps, prefix + ".ln_ffn", d);
    return b;
  }

  ad::Var apply(ad::Graph& g, const ad::Var& h, int n_heads, double dropout_rate, Rng* rng,
                bool train) const;
};

struct Embeddings {
  ad::Parameter* tokens = nullptr;    // vocab x d
  ad::Parameter* positions = nullptr; // max_len x d
  LayerNorm ln;

  static Embeddings create(ad::ParamStore& ps, Eigen::Index vocab, Eigen::Index max_len,
                           Eigen::Index d, Rng& rng) {
    Embeddings e;
    e.tokens = &ps.add("encoder.tok_emb", vocab, d);
    init_normal(*e.tokens, rng);
    e.positions = &ps.add("encoder.pos_emb", max_len, d);
    init_normal(*e.positions, rng);
    e.ln = LayerNorm::create(ps, "encoder.emb_ln", d);
    return e;
  }

  ad::Var apply(ad::Graph& g, const std::vector<int>& token_ids, double dropout_rate, Rng* rng,
                bool train) const;
};

// The N+M block stack. Layer indices are 1-based to match the layered
// composition (1..N plain, N+1..N+M joint).
struct EncoderStack {
  Embeddings emb;
  std::vector<EncoderBlock> blocks;
  int n_heads = 4;
  double dropout_rate = 0.0;

  static EncoderStack create(ad::ParamStore& ps, Eigen::Index vocab, Eigen::Index max_len,
                             Eigen::Index d, int n_layers, int n_heads, double dropout,
                             Rng& rng) {
    EncoderStack s;
    s.emb = Embeddings::create(ps, vocab, max_len, d, rng);
    for (int l = 0; l < n_layers; ++l)
      s.blocks.push_back(EncoderBlock::create(ps, "encoder.block" + std::to_string(l), d, rng));
    s.n_heads = n_heads;
    s.dropout_rate = dropout;
    return s;
  }

  ad::Var embed(ad::Graph& g, const std::vector<int>& token_ids, Rng* rng, bool train) const {
    return emb.apply(g, token_ids, dropout_rate, rng, train);
  }

  // One encoder layer; layer_index in [1, N+M].
  ad::Var encode_layer(ad::Graph& g, const ad::Var& h_prev, int layer_index, Rng* rng,
                       bool train) const {
    if (layer_index < 1 || layer_index > int(blocks.size()))
      throw ArgError("encode_layer: layer index " + std::to_string(layer_index) +
                     " out of range [1," + std::to_string(blocks.size()) + "]");
    return blocks[std::size_t(layer_index - 1)].apply(g, h_prev, n_heads, dropout_rate, rng,
                                                      train);
  }
};

// Row i is h[end_i - 1]: the last token of each event carries its context
// representation.
ad::Var event_reps(ad::Graph& g, const ad::Var& h, const std::vector<Span>& spans);

}  // namespace unice
