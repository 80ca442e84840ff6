#include "unice/model.hpp"

#include <algorithm>
#include <set>

namespace unice {

Vocab Vocab::build(const std::vector<Sentence>& corpus) {
  std::set<std::string> seen;
  for (const auto& s : corpus) seen.insert(s.tokens.begin(), s.tokens.end());
  std::vector<std::string> words{"<unk>"};
  words.insert(words.end(), seen.begin(), seen.end());
  return from_words(std::move(words));
}

Vocab Vocab::from_words(std::vector<std::string> words) {
  Vocab v;
  v.words = std::move(words);
  if (v.words.empty() || v.words[0] != "<unk>")
    throw ArgError("vocab must start with <unk>");
  for (int i = 0; i < int(v.words.size()); ++i) v.index[v.words[std::size_t(i)]] = i;
  return v;
}

std::map<std::pair<int, int>, bool> relation_supervision(
    const std::vector<Span>& extracted, const std::vector<Span>& gold_events,
    const std::vector<std::pair<int, int>>& gold_pairs, RelationMatch match) {
  auto matches = [&](const Span& a, const Span& b) {
    return match == RelationMatch::Exact ? a == b : a.overlaps(b);
  };
  std::map<std::pair<int, int>, bool> out;
  for (int i = 0; i < int(extracted.size()); ++i) {
    for (int j = 0; j < int(extracted.size()); ++j) {
      if (i == j) continue;
      bool causal = false;
      for (const auto& [c, e] : gold_pairs) {
        if (matches(extracted[std::size_t(i)], gold_events[std::size_t(c)]) &&
            matches(extracted[std::size_t(j)], gold_events[std::size_t(e)])) {
          causal = true;
          break;
        }
      }
      out[{i, j}] = causal;
    }
  }
  return out;
}

UniceModel::UniceModel(const UniceConfig& cfg, Vocab vocab, int n_kg_relations,
                       std::optional<int> kg_embedding_dim)
    : cfg_(cfg), vocab_(std::move(vocab)), n_kg_relations_(n_kg_relations),
      kg_embedding_dim_(kg_embedding_dim) {
  cfg_.validate();
  if (vocab_.size() < 1) throw ArgError("model needs a non-empty vocabulary");
  if (kg_embedding_dim_ && *kg_embedding_dim_ != cfg_.d_kg)
    throw ConfigError("d_kg=" + std::to_string(cfg_.d_kg) +
                      " does not match the KG embedding table dimension " +
                      std::to_string(*kg_embedding_dim_));

  Rng rng(cfg_.seed);
  int total_layers = cfg_.n_plain_layers + cfg_.n_joint_layers;
  encoder_ = EncoderStack::create(params_, vocab_.size(), cfg_.max_len, cfg_.d_enc,
                                  total_layers, cfg_.n_heads, cfg_.dropout, rng);

  int n_crf = cfg_.share_crf ? 1 : cfg_.n_joint_layers;
  for (int l = 0; l < n_crf; ++l)
    crf_heads_.push_back(CrfHead::create(params_, "crf." + std::to_string(l), cfg_.d_enc, rng));

  event_proj_ = Linear::create(params_, "event_proj", cfg_.d_enc, cfg_.d_gnn, rng);
  if (kg_embedding_dim_)
    kg_proj_ = Linear::create(params_, "kg_proj", cfg_.d_kg, cfg_.d_gnn, rng);
  default_node_emb_ = &params_.add("node_default", 1, cfg_.d_gnn);
  init_normal(*default_node_emb_, rng);

  for (int l = 0; l < cfg_.n_joint_layers; ++l) {
    scorers_.push_back(
        EdgeScorer::create(params_, "scorer." + std::to_string(l), cfg_.d_gnn, rng));
    gnn_layers_.push_back(GnnLayer::create(params_, "gnn." + std::to_string(l), cfg_.d_gnn,
                                           n_kg_relations_, rng));
    classifiers_.push_back(
        PairClassifier::create(params_, "clf." + std::to_string(l), cfg_.d_gnn, rng));
  }

  int n_agg = cfg_.share_aggregators ? 1 : cfg_.n_joint_layers;
  for (int l = 0; l < n_agg; ++l) {
    t_aggs_.push_back(
        TAggregator::create(params_, "tagg." + std::to_string(l), cfg_.d_enc, cfg_.d_gnn, rng));
    k_aggs_.push_back(
        KAggregator::create(params_, "kagg." + std::to_string(l), cfg_.d_enc, cfg_.d_gnn, rng));
  }
}

void UniceModel::load_parameter(const std::string& name, const Eigen::MatrixXd& value) {
  ad::Parameter* p = params_.find(name);
  if (!p) throw ArgError("unknown parameter '" + name + "'");
  if (p->rows() != value.rows() || p->cols() != value.cols())
    throw ArgError("parameter '" + name + "' shape mismatch");
  p->value = value;
}

ad::Var UniceModel::base_node_init(ad::Graph& g, const BackgroundGraph& bg,
                                   const KnowledgeGraph& kg) {
  int n_base = bg.mention_count() + bg.other_count();
  if (n_base == 0) return g.input(ad::Mat::Zero(0, cfg_.d_gnn));
  if (kg_proj_ && kg.has_embeddings()) {
    ad::Mat rows(n_base, cfg_.d_kg);
    int r = 0;
    for (const auto& node : bg.nodes)
      if (node.role != NodeRole::Event) rows.row(r++) = kg.embeddings().row(node.kg_node);
    return kg_proj_->apply(g, g.input(std::move(rows)));
  }
  return g.matmul(g.input(ad::Mat::Ones(n_base, 1)), g.param(*default_node_emb_));
}

ad::Var UniceModel::insertion_weights(ad::Graph& g, int layer, const ad::Var& dyn_embeddings,
                                      const std::vector<Span>& mention_spans,
                                      const std::vector<Span>& event_spans) {
  int m = int(dyn_embeddings.rows());
  if (m == 0) return g.input(ad::Mat::Zero(0, 0));

  switch (cfg_.insertion_variant) {
    case InsertionVariant::MatrixTree: {
      auto [p, r] = edge_scores(g, dyn_embeddings, scorers_[std::size_t(layer)]);
      return tree_marginals(g, p, r).A;
    }
    case InsertionVariant::NoLink:
      return g.input(ad::Mat::Zero(m, m));
    case InsertionVariant::SpanMatch: {
      std::vector<Span> spans = mention_spans;
      spans.insert(spans.end(), event_spans.begin(), event_spans.end());
      ad::Mat a = ad::Mat::Zero(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          if (i != j && spans[std::size_t(i)].overlaps(spans[std::size_t(j)])) a(i, j) = 1.0;
      return g.input(std::move(a));
    }
    case InsertionVariant::FullLink: {
      ad::Mat a = ad::Mat::Ones(m, m);
      a.diagonal().setZero();
      return g.input(std::move(a));
    }
    case InsertionVariant::DotProduct: {
      const EdgeScorer& sc = scorers_[std::size_t(layer)];
      ad::Var q = g.tanh(sc.f_a.apply(g, dyn_embeddings));
      ad::Var k = g.tanh(sc.f_b.apply(g, dyn_embeddings));
      double scale = 1.0 / std::sqrt(double(cfg_.d_gnn));
      return g.softmax_rows(g.scale(g.matmul(q, g.transpose(k)), scale));
    }
  }
  throw StateError("unreachable insertion variant");
}

ForwardResult UniceModel::forward(const Sentence& sentence, const KnowledgeGraph& kg,
                                  bool train, Rng* dropout_rng, bool use_gold_event_spans) {
  ForwardResult fw;
  fw.graph = std::make_unique<ad::Graph>();
  ad::Graph& g = *fw.graph;

  std::vector<int> token_ids;
  for (const auto& t : sentence.tokens) token_ids.push_back(vocab_.id(t));

  BackgroundGraph g0 = cfg_.use_knowledge_fusion
                           ? build_initial(sentence, kg, cfg_.node_cap, cfg_.max_path_len)
                           : BackgroundGraph{};
  std::vector<Span> mention_spans;
  for (const auto& n : g0.nodes)
    if (n.role == NodeRole::Mention) mention_spans.push_back(*n.span);

  BioSequence gold_bio;
  if (train) gold_bio = bio_encode(sentence);

  ad::Var h = encoder_.embed(g, token_ids, dropout_rng, train);
  for (int l = 1; l <= cfg_.n_plain_layers; ++l)
    h = encoder_.encode_layer(g, h, l, dropout_rng, train);

  ad::Var e_base;  // post-fused base-node rows carried across joint layers
  bool have_base = false;

  for (int jl = 0; jl < cfg_.n_joint_layers; ++jl) {
    int abs_layer = cfg_.n_plain_layers + jl + 1;
    ad::Var h_tilde = encoder_.encode_layer(g, h, abs_layer, dropout_rng, train);

    const CrfHead& crf = crf_heads_[cfg_.share_crf ? 0 : std::size_t(jl)];
    ad::Var emissions = crf.emissions(g, h_tilde);
    BioSequence tags = crf.decode_from_emissions(emissions.value());
    std::vector<Span> decoded = bio_decode(tags);

    LayerInternals li;
    li.relation_spans = use_gold_event_spans ? sentence.gold_events : decoded;
    if (train) li.crf_nll = crf.nll(g, h_tilde, gold_bio);

    // Relation module: project event reps, score insertion edges over
    // [mentions; events], insert, reason, classify.
    ad::Var reps = event_reps(g, h_tilde, li.relation_spans);
    ad::Var reps_proj = reps.rows() > 0 ? event_proj_.apply(g, reps)
                                        : g.input(ad::Mat::Zero(0, cfg_.d_gnn));

    if (!have_base) {
      e_base = base_node_init(g, g0, kg);
      have_base = true;
    }
    int nm = g0.mention_count();
    int n_base = nm + g0.other_count();

    ad::Var dyn_emb;
    if (nm > 0 && reps_proj.rows() > 0)
      dyn_emb = g.concat_rows({g.slice_rows(e_base, 0, nm), reps_proj});
    else if (nm > 0)
      dyn_emb = g.slice_rows(e_base, 0, nm);
    else
      dyn_emb = reps_proj;

    ad::Var a_weights = insertion_weights(g, jl, dyn_emb, mention_spans, li.relation_spans);
    li.dynamic_weights = a_weights;

    BackgroundGraph gl = insert_events(g0, li.relation_spans,
                                       reps_proj.value(), a_weights.value());

    ad::Var e_in = init_node_embeddings(
        g, gl, std::nullopt, n_base > 0 ? std::optional<ad::Var>(e_base) : std::nullopt,
        reps_proj, *default_node_emb_);
    ad::Var e_tilde =
        gnn_step(g, gl, e_in, gnn_layers_[std::size_t(jl)],
                 gl.size() > 0 ? std::optional<ad::Var>(a_weights) : std::nullopt,
                 cfg_.gnn_variant == GnnVariantKind::Attention ? GnnVariant::Attention
                                                               : GnnVariant::Mean);

    ad::Var e_events = g.slice_rows(e_tilde, n_base, int(li.relation_spans.size()));
    li.pairs = classify_pairs(g, e_events, classifiers_[std::size_t(jl)]);

    // Aggregators: T then K; on a shared token the K write wins.
    const TAggregator& tagg = t_aggs_[cfg_.share_aggregators ? 0 : std::size_t(jl)];
    const KAggregator& kagg = k_aggs_[cfg_.share_aggregators ? 0 : std::size_t(jl)];
    ad::Var h_post = h_tilde;
    if (cfg_.effective_eci_to_ee())
      h_post = t_aggregate(g, h_tilde, e_events, li.relation_spans, tagg);
    ad::Var e_post = e_tilde;
    if (cfg_.use_knowledge_fusion && (cfg_.effective_kg_to_plm() || cfg_.effective_plm_to_kg())) {
      auto [hp, ep] = k_aggregate(g, h_post, e_tilde, gl, kagg, cfg_.effective_kg_to_plm(),
                                  cfg_.effective_plm_to_kg());
      h_post = hp;
      e_post = ep;
    }

    h = h_post;
    if (n_base > 0) e_base = g.slice_rows(e_post, 0, n_base);

    LayerPrediction pred;
    pred.layer = jl + 1;
    pred.tags = tags;
    pred.spans = decoded;
    for (const auto& [key, score] : li.pairs) {
      double p_causal = score.probs.value()(0, 1);
      pred.pair_scores[{key.i, key.j}] = p_causal;
      if (p_causal > 0.5) pred.pair_decisions.push_back({key.i, key.j});
    }
    li.graph = std::move(gl);
    fw.predictions.push_back(std::move(pred));
    fw.internals.push_back(std::move(li));
  }
  return fw;
}

LossBreakdown UniceModel::loss(ForwardResult& fw, const Sentence& sentence, Rng& rng) {
  if (fw.internals.empty() || !fw.internals[0].crf_nll.valid())
    throw StateError("loss requires a train-mode forward result");
  ad::Graph& g = *fw.graph;

  LossBreakdown lb;
  ad::Var sum;
  bool have_sum = false;
  for (auto& li : fw.internals) {
    ad::Var layer_loss = li.crf_nll;
    lb.l_e.push_back(li.crf_nll.scalar());

    auto labels = relation_supervision(li.relation_spans, sentence.gold_events,
                                       sentence.gold_pairs, cfg_.relation_match);
    std::vector<std::pair<int, int>> kept;
    ad::Var ce_sum;
    bool have_ce = false;
    for (const auto& [key, score] : li.pairs) {
      bool causal = labels.at({key.i, key.j});
      if (!causal && !rng.bernoulli(cfg_.negative_keep_rate)) continue;
      kept.push_back({key.i, key.j});
      ad::Var ce = g.sub(g.logsumexp_all(score.logits),
                         g.element(score.logits, 0, causal ? 1 : 0));
      ce_sum = have_ce ? g.add(ce_sum, ce) : ce;
      have_ce = true;
    }
    double l_r_value = 0.0;
    if (have_ce) {
      ad::Var l_r = g.scale(ce_sum, 1.0 / double(kept.size()));
      l_r_value = l_r.scalar();
      layer_loss = g.add(layer_loss, l_r);
    }
    lb.l_r.push_back(l_r_value);
    lb.kept_pairs.push_back(std::move(kept));

    sum = have_sum ? g.add(sum, layer_loss) : layer_loss;
    have_sum = true;
  }
  lb.total = g.scale(sum, 1.0 / double(cfg_.n_joint_layers));
  return lb;
}

std::vector<PairSpans> UniceModel::predict(const Sentence& sentence, const KnowledgeGraph& kg) {
  ForwardResult fw = forward(sentence, kg, /*train=*/false);
  const LayerPrediction& last = fw.predictions.back();
  std::vector<PairSpans> out;
  for (const auto& [i, j] : last.pair_decisions)
    out.push_back({last.spans[std::size_t(i)], last.spans[std::size_t(j)]});
  return out;
}

}  // namespace unice
