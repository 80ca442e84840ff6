#include "unice/train.hpp"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace unice {

using json = nlohmann::json;
namespace fs = std::filesystem;

Adam::Adam(ad::ParamStore& params, double lr_encoder, double lr_other, double beta1,
           double beta2, double eps)
    : params_(&params), lr_encoder_(lr_encoder), lr_other_(lr_other), beta1_(beta1),
      beta2_(beta2), eps_(eps) {
  for (const auto& p : params.all())
    slots_.push_back({ad::Mat::Zero(p->rows(), p->cols()), ad::Mat::Zero(p->rows(), p->cols())});
}

void Adam::step(double lr_multiplier) {
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, double(t_));
  double bc2 = 1.0 - std::pow(beta2_, double(t_));
  const auto& all = params_->all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    ad::Parameter& p = *all[i];
    double lr = (p.name.rfind("encoder.", 0) == 0 ? lr_encoder_ : lr_other_) * lr_multiplier;
    Slot& s = slots_[i];
    s.m = beta1_ * s.m + (1.0 - beta1_) * p.grad;
    s.v = (beta2_ * s.v.array() + (1.0 - beta2_) * p.grad.array().square()).matrix();
    ad::Mat mhat = s.m / bc1;
    ad::Mat vhat = s.v / bc2;
    p.value.array() -= lr * mhat.array() / (vhat.array().sqrt() + eps_);
    p.grad.setZero();
  }
}

SentenceLossAudit sentence_loss_and_backward(UniceModel& model, const Sentence& s,
                                             const KnowledgeGraph& kg, Rng& rng,
                                             bool use_gold_events, double grad_scale) {
  ForwardResult fw = model.forward(s, kg, /*train=*/true, &rng, use_gold_events);
  LossBreakdown lb = model.loss(fw, s, rng);
  SentenceLossAudit audit;
  audit.total = lb.total.scalar();
  audit.l_e = lb.l_e;
  audit.l_r = lb.l_r;
  if (!std::isfinite(audit.total))
    throw NumericalError("non-finite loss on sentence '" + s.id + "'");
  if (grad_scale != 0.0) fw.graph->backward(fw.graph->scale(lb.total, grad_scale));
  return audit;
}

PairsById gold_pairs_by_id(const std::vector<Sentence>& corpus) {
  PairsById out;
  for (const auto& s : corpus) {
    auto& pairs = out[s.id];
    for (const auto& [c, e] : s.gold_pairs)
      pairs.push_back({s.gold_events[std::size_t(c)], s.gold_events[std::size_t(e)]});
  }
  return out;
}

PairsById predict_corpus(UniceModel& model, const std::vector<Sentence>& corpus,
                         const KnowledgeGraph& kg) {
  PairsById out;
  for (const auto& s : corpus) out[s.id] = model.predict(s, kg);
  return out;
}

TrainResult train(const std::vector<Sentence>& corpus, const KnowledgeGraph& kg,
                  const UniceConfig& cfg, const std::optional<std::vector<Sentence>>& dev,
                  std::ostream* log, int fold_id) {
  if (corpus.empty()) throw ArgError("train: empty corpus");
  cfg.validate();

  const std::vector<Sentence>& dev_corpus = dev ? *dev : corpus;
  PairsById dev_gold = gold_pairs_by_id(dev_corpus);

  TrainResult result;
  result.model = std::make_unique<UniceModel>(
      cfg, Vocab::build(corpus), kg.relation_count(),
      kg.has_embeddings() ? std::optional<int>(kg.embedding_dim()) : std::nullopt);
  UniceModel& model = *result.model;

  Adam adam(model.params(), cfg.lr_encoder, cfg.lr_other);
  Rng rng(cfg.seed + 0x517cc1b727220a95ULL);  // training stream; init used cfg.seed

  if (log) {
    json note;
    note["note"] =
        "negative_keep_rate: each none-labeled ordered pair is kept independently with "
        "probability " +
        std::to_string(cfg.negative_keep_rate) + ", resampled every epoch";
    note["fold_id"] = fold_id;
    *log << note.dump() << "\n";
  }

  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<ad::Mat> best_params;
  long global_step = 0;
  int epochs_without_improvement = 0;
  result.best_dev_f1 = -1.0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);

    double epoch_loss = 0.0;
    long n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += std::size_t(cfg.batch_size)) {
      std::size_t end = std::min(order.size(), start + std::size_t(cfg.batch_size));
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const Sentence& s = corpus[order[k]];
        bool use_gold = !cfg.effective_ee_to_eci() || epoch <= cfg.gold_event_warmup_epochs;
        batch_loss +=
            sentence_loss_and_backward(model, s, kg, rng, use_gold, 1.0 / double(end - start))
                .total;
      }
      batch_loss /= double(end - start);
      ++global_step;
      double warm = cfg.warmup_steps > 0
                        ? std::min(1.0, double(global_step) / double(cfg.warmup_steps))
                        : 1.0;
      adam.step(warm);
      epoch_loss += batch_loss;
      ++n_batches;
    }

    PairsById dev_pred = predict_corpus(model, dev_corpus, kg);
    PrfResult dev_prf = strict_prf(dev_pred, dev_gold);
    auto t1 = std::chrono::steady_clock::now();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / double(n_batches);
    rec.dev = dev_prf;
    rec.seconds = std::chrono::duration<double>(t1 - t0).count();
    result.history.push_back(rec);
    result.epochs_run = epoch;

    if (log) {
      json j;
      j["epoch"] = epoch;
      j["train_loss"] = rec.train_loss;
      j["dev_precision"] = dev_prf.precision;
      j["dev_recall"] = dev_prf.recall;
      j["dev_f1"] = dev_prf.f1;
      j["seconds"] = rec.seconds;
      *log << j.dump() << "\n";
    }

    if (dev_prf.f1 > result.best_dev_f1) {
      result.best_dev_f1 = dev_prf.f1;
      result.best_epoch = epoch;
      best_params.clear();
      for (const auto& p : model.params().all()) best_params.push_back(p->value);
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
      if (epochs_without_improvement >= cfg.early_stop_patience) break;
    }
    if (result.best_dev_f1 >= 1.0) break;  // nothing left to improve
  }

  if (!best_params.empty()) {
    const auto& all = model.params().all();
    for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = best_params[i];
  }
  return result;
}

namespace {

void write_mat(std::ofstream& out, const ad::Mat& m) {
  std::int64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  out.write(reinterpret_cast<const char*>(m.data()),
            std::streamsize(sizeof(double) * std::size_t(rows * cols)));
}

ad::Mat read_mat(std::ifstream& in) {
  std::int64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows < 0 || cols < 0) throw IoError("corrupt matrix header in checkpoint");
  ad::Mat m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          std::streamsize(sizeof(double) * std::size_t(rows * cols)));
  if (!in) throw IoError("corrupt matrix payload in checkpoint");
  return m;
}

void write_string(std::ofstream& out, const std::string& s) {
  std::int64_t len = std::int64_t(s.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(s.data(), std::streamsize(s.size()));
}

std::string read_string(std::ifstream& in) {
  std::int64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len < 0 || len > 1'000'000) throw IoError("corrupt string in checkpoint");
  std::string s(std::size_t(len), '\0');
  in.read(s.data(), len);
  return s;
}

}  // namespace

void save_checkpoint(const std::string& dir, const UniceModel& model, const Adam* optimizer,
                     int fold_id, int epoch, double best_dev_f1) {
  fs::create_directories(dir);

  std::ofstream cfg_out(fs::path(dir) / "config");
  cfg_out << config_to_text(model.config());

  std::ofstream pout(fs::path(dir) / "params.bin", std::ios::binary);
  const auto& all = model.params().all();
  std::int64_t count = std::int64_t(all.size());
  pout.write("UNCP", 4);
  pout.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (const auto& p : all) {
    write_string(pout, p->name);
    write_mat(pout, p->value);
  }

  std::ofstream oout(fs::path(dir) / "optimizer.bin", std::ios::binary);
  oout.write("UNOP", 4);
  std::int64_t t = optimizer ? optimizer->step_count() : 0;
  std::int64_t n = optimizer ? std::int64_t(all.size()) : 0;
  oout.write(reinterpret_cast<const char*>(&t), sizeof t);
  oout.write(reinterpret_cast<const char*>(&n), sizeof n);
  if (optimizer) {
    auto& slots = const_cast<Adam*>(optimizer)->slots();
    for (const auto& s : slots) {
      write_mat(oout, s.m);
      write_mat(oout, s.v);
    }
  }

  json meta;
  meta["fold_id"] = fold_id;
  meta["epoch"] = epoch;
  meta["best_dev_f1"] = best_dev_f1;
  meta["vocab"] = model.vocab().words;
  meta["kg_relation_count"] = model.kg_relation_count();
  if (model.kg_embedding_dim()) meta["kg_embedding_dim"] = *model.kg_embedding_dim();
  std::ofstream mout(fs::path(dir) / "meta.json");
  mout << meta.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& dir) {
  Checkpoint ck;
  ck.config = load_config((fs::path(dir) / "config").string());

  std::ifstream min(fs::path(dir) / "meta.json");
  if (!min) throw IoError("cannot open checkpoint meta: " + dir);
  json meta = json::parse(min);
  ck.fold_id = meta.at("fold_id").get<int>();
  ck.epoch = meta.at("epoch").get<int>();
  ck.best_dev_f1 = meta.at("best_dev_f1").get<double>();
  std::vector<std::string> words = meta.at("vocab").get<std::vector<std::string>>();
  int n_rel = meta.at("kg_relation_count").get<int>();
  std::optional<int> kg_dim;
  if (meta.contains("kg_embedding_dim")) kg_dim = meta.at("kg_embedding_dim").get<int>();

  ck.model = std::make_unique<UniceModel>(ck.config, Vocab::from_words(std::move(words)), n_rel,
                                          kg_dim);

  std::ifstream pin(fs::path(dir) / "params.bin", std::ios::binary);
  if (!pin) throw IoError("cannot open checkpoint params: " + dir);
  char magic[4];
  pin.read(magic, 4);
  if (std::memcmp(magic, "UNCP", 4) != 0) throw IoError("bad params.bin magic");
  std::int64_t count = 0;
  pin.read(reinterpret_cast<char*>(&count), sizeof count);
  for (std::int64_t i = 0; i < count; ++i) {
    std::string name = read_string(pin);
    ad::Mat value = read_mat(pin);
    ck.model->load_parameter(name, value);
  }
  return ck;
}

}  // namespace unice
