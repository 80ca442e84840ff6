#include "unice/synthetic.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace unice {

namespace {

struct EventWord {
  std::vector<std::string> tokens;  // 1 or 2 tokens
};

struct CausalEntry {
  EventWord cause, effect;
};

const std::vector<CausalEntry>& inventory() {
  static const std::vector<CausalEntry> inv = {
      {{{"earthquake"}}, {{"tsunami"}}},
      {{{"storm"}}, {{"flood"}}},
      {{{"flood"}}, {{"famine"}}},
      {{{"drought"}}, {{"famine"}}},
      {{{"virus"}}, {{"outbreak"}}},
      {{{"fire"}}, {{"smoke"}}},
      {{{"crash"}}, {{"injury"}}},
      {{{"rain"}}, {{"landslide"}}},
      {{{"war"}}, {{"shortage"}}},
      {{{"heatwave"}}, {{"drought"}}},
      {{{"power", "outage"}}, {{"chaos"}}},
      {{{"oil", "spill"}}, {{"pollution"}}},
  };
  return inv;
}

const std::vector<std::vector<std::string>>& connectives() {
  static const std::vector<std::vector<std::string>> c = {
      {"caused"}, {"led", "to"}, {"resulted", "in"}, {"triggered"}};
  return c;
}

const std::vector<std::vector<std::string>>& prefixes() {
  static const std::vector<std::vector<std::string>> p = {
      {}, {}, {"officials", "said"}, {"reports", "confirmed"}, {"witnesses", "added"}};
  return p;
}

const std::vector<std::vector<std::string>>& suffixes() {
  static const std::vector<std::vector<std::string>> s = {
      {}, {}, {"yesterday"}, {"in", "the", "region"}, {"last", "week"}};
  return s;
}

struct Builder {
  std::vector<std::string> tokens;
  std::vector<Span> events;
  std::vector<std::pair<int, int>> pairs;

  void words(const std::vector<std::string>& ws) {
    tokens.insert(tokens.end(), ws.begin(), ws.end());
  }
  int event(const EventWord& w) {
    int start = int(tokens.size());
    words(w.tokens);
    events.push_back({start, int(tokens.size())});
    return int(events.size()) - 1;
  }
  void clause(Rng& rng, const CausalEntry& entry) {
    tokens.push_back("the");
    int c = event(entry.cause);
    words(connectives()[rng.uniform_int(connectives().size())]);
    tokens.push_back("the");
    int e = event(entry.effect);
    pairs.push_back({c, e});
  }
};

Sentence make_sentence(Rng& rng, int k, const std::string& id, const std::string& doc_id) {
  const auto& inv = inventory();
  Builder b;
  b.words(prefixes()[rng.uniform_int(prefixes().size())]);

  if (k == 1) {
    b.clause(rng, inv[rng.uniform_int(inv.size())]);
  } else if (k == 2 && rng.bernoulli(0.4)) {
    // Chain: C causes M, and M causes E (M appears twice as two events).
    std::size_t i = rng.uniform_int(inv.size());
    // Find an entry whose cause equals this entry's effect, if any.
    std::size_t follow = inv.size();
    for (std::size_t j = 0; j < inv.size(); ++j)
      if (inv[j].cause.tokens == inv[i].effect.tokens) {
        follow = j;
        break;
      }
    if (follow == inv.size()) {
      b.clause(rng, inv[i]);
      b.tokens.push_back("and");
      b.clause(rng, inv[rng.uniform_int(inv.size())]);
    } else {
      b.clause(rng, inv[i]);
      b.tokens.push_back(",");
      b.tokens.push_back("and");
      b.clause(rng, inv[follow]);
    }
  } else {
    for (int c = 0; c < k; ++c) {
      if (c > 0) {
        if (c == k - 1) b.tokens.push_back("and");
        else b.tokens.push_back(",");
      }
      b.clause(rng, inv[rng.uniform_int(inv.size())]);
    }
  }

  b.words(suffixes()[rng.uniform_int(suffixes().size())]);
  b.tokens.push_back(".");

  Sentence s;
  s.id = id;
  s.doc_id = doc_id;
  s.tokens = std::move(b.tokens);
  s.gold_events = std::move(b.events);
  s.gold_pairs = std::move(b.pairs);
  return s;
}

}  // namespace

SyntheticData generate(const GenOptions& opts) {
  if (opts.num_sentences < 1) throw ArgError("generate: num_sentences must be >= 1");
  if (opts.kg_coverage < 0.0 || opts.kg_coverage > 1.0)
    throw ArgError("generate: kg_coverage must be in [0, 1]");

  SyntheticData out;
  Rng rng(opts.seed);
  for (int i = 0; i < opts.num_sentences; ++i) {
    int k = opts.multi_pair ? (i % 3) + 1 : 1;  // round-robin guarantees every bucket
    std::string doc = "d" + std::to_string(i / std::max(1, opts.sentences_per_doc));
    Sentence s = make_sentence(rng, k, "s" + std::to_string(i), doc);
    validate_sentence(s, "generated " + s.id);
    out.corpus.push_back(std::move(s));
  }

  auto join = [](const std::vector<std::string>& ws) {
    std::string s;
    for (const auto& w : ws) {
      if (!s.empty()) s.push_back(' ');
      s += w;
    }
    return s;
  };

  Rng kg_rng(opts.kg_seed);
  for (const auto& entry : inventory()) {
    if (kg_rng.bernoulli(opts.kg_coverage))
      out.kg_triples.emplace_back(join(entry.cause.tokens), "CAUSES", join(entry.effect.tokens));
  }
  // Distractors: related-but-non-causal structure around the same vocabulary.
  out.kg_triples.emplace_back("tsunami", "ISA", "disaster");
  out.kg_triples.emplace_back("flood", "ISA", "disaster");
  out.kg_triples.emplace_back("earthquake", "ISA", "disaster");
  out.kg_triples.emplace_back("storm", "RELATEDTO", "rain");
  out.kg_triples.emplace_back("famine", "RELATEDTO", "shortage");
  out.kg_triples.emplace_back("region", "RELATEDTO", "city");
  out.kg_triples.emplace_back("disaster", "RELATEDTO", "region");
  return out;
}

void write_corpus_jsonl(const std::string& path, const std::vector<Sentence>& corpus) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file: " + path);
  for (const auto& s : corpus) {
    nlohmann::json j;
    j["id"] = s.id;
    j["doc_id"] = s.doc_id;
    j["tokens"] = s.tokens;
    auto& ev = j["gold_events"] = nlohmann::json::array();
    for (const auto& sp : s.gold_events) ev.push_back({sp.start, sp.end});
    auto& pr = j["gold_pairs"] = nlohmann::json::array();
    for (const auto& [c, e] : s.gold_pairs) pr.push_back({c, e});
    out << j.dump() << "\n";
  }
}

void write_kg_tsv(const std::string& path,
                  const std::vector<std::tuple<std::string, std::string, std::string>>& triples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write KG file: " + path);
  for (const auto& [h, r, t] : triples) out << h << "\t" << r << "\t" << t << "\n";
}

}  // namespace unice
