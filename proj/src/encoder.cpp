#include "unice/encoder.hpp"

namespace unice {

ad::Var EncoderBlock::apply(ad::Graph& g, const ad::Var& h, int n_heads, double dropout_rate,
                            Rng* rng, bool train) const {
  Eigen::Index d = h.cols();
  if (d % n_heads != 0) throw ArgError("encoder: d_enc must be divisible by n_heads");
  Eigen::Index dh = d / n_heads;
  double scale = 1.0 / std::sqrt(double(dh));

  ad::Var q = wq.apply(g, h), k = wk.apply(g, h), v = wv.apply(g, h);

  std::vector<ad::Var> heads;
  for (int hd = 0; hd < n_heads; ++hd) {
    ad::Var qh = g.slice_cols(q, hd * dh, dh);
    ad::Var kh = g.slice_cols(k, hd * dh, dh);
    ad::Var vh = g.slice_cols(v, hd * dh, dh);
    ad::Var att = g.softmax_rows(g.scale(g.matmul(qh, g.transpose(kh)), scale));
    heads.push_back(g.matmul(att, vh));
  }
  ad::Var ctx = heads[0];
  for (std::size_t i = 1; i < heads.size(); ++i) ctx = g.concat_cols(ctx, heads[i]);

  ad::Var attn_out = wo.apply(g, ctx);
  if (train && rng) attn_out = g.dropout(attn_out, dropout_rate, *rng, train);
  ad::Var h1 = ln_attn.apply(g, g.add(h, attn_out));

  ad::Var ff = ffn2.apply(g, g.gelu(ffn1.apply(g, h1)));
  if (train && rng) ff = g.dropout(ff, dropout_rate, *rng, train);
  return ln_ffn.apply(g, g.add(h1, ff));
}

ad::Var Embeddings::apply(ad::Graph& g, const std::vector<int>& token_ids, double dropout_rate,
                          Rng* rng, bool train) const {
  if (token_ids.empty()) throw ArgError("embed: empty token sequence");
  int max_len = int(positions->rows());
  std::vector<int> pos_ids(token_ids.size());
  for (std::size_t i = 0; i < token_ids.size(); ++i)
    pos_ids[i] = std::min(int(i), max_len - 1);  // clamp past the table end

  ad::Var tok = g.gather_rows(g.param(*tokens), token_ids);
  ad::Var pos = g.gather_rows(g.param(*positions), pos_ids);
  ad::Var h = ln.apply(g, g.add(tok, pos));
  if (train && rng) h = g.dropout(h, dropout_rate, *rng, train);
  return h;
}

ad::Var event_reps(ad::Graph& g, const ad::Var& h, const std::vector<Span>& spans) {
  int n = int(h.rows());
  std::vector<int> idx;
  for (const Span& sp : spans) {
    if (!(0 <= sp.start && sp.start < sp.end && sp.end <= n))
      throw ArgError("event_reps: span [" + std::to_string(sp.start) + "," +
                     std::to_string(sp.end) + ") out of bounds for " + std::to_string(n) +
                     " tokens");
    idx.push_back(sp.end - 1);
  }
  if (idx.empty()) return g.input(ad::Mat::Zero(0, h.cols()));
  return g.gather_rows(h, idx);
}

}  // namespace unice
