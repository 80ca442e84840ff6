#include "unice/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace unice {

using json = nlohmann::json;

void validate_sentence(const Sentence& s, const std::string& where) {
  auto fail = [&](const std::string& what) { throw DataError(where + ": " + what); };

  if (s.id.empty()) fail("empty sentence id");
  if (s.doc_id.empty()) fail("empty doc_id");
  if (s.tokens.empty()) fail("sentence must have at least one token");

  int n = int(s.tokens.size());
  for (const Span& sp : s.gold_events) {
    if (!(0 <= sp.start && sp.start < sp.end && sp.end <= n))
      fail("event span [" + std::to_string(sp.start) + "," + std::to_string(sp.end) +
           ") out of bounds for " + std::to_string(n) + " tokens");
  }
  int ne = int(s.gold_events.size());
  std::set<std::pair<int, int>> seen;
  for (const auto& [c, e] : s.gold_pairs) {
    if (c < 0 || c >= ne || e < 0 || e >= ne)
      fail("pair (" + std::to_string(c) + "," + std::to_string(e) +
           ") references a missing gold event");
    if (c == e) fail("self-pair (" + std::to_string(c) + "," + std::to_string(e) + ")");
    if (!seen.insert({c, e}).second)
      fail("duplicate pair (" + std::to_string(c) + "," + std::to_string(e) + ")");
  }
}

std::vector<Sentence> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);

  std::vector<Sentence> out;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string where = path + ":" + std::to_string(lineno);

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + ": invalid JSON: " + e.what());
    }

    Sentence s;
    try {
      s.id = j.at("id").get<std::string>();
      s.doc_id = j.at("doc_id").get<std::string>();
      s.tokens = j.at("tokens").get<std::vector<std::string>>();
      for (const auto& sp : j.at("gold_events")) {
        if (!sp.is_array() || sp.size() != 2)
          throw DataError(where + ": gold_events entries must be [start,end]");
        s.gold_events.push_back({sp[0].get<int>(), sp[1].get<int>()});
      }
      for (const auto& pr : j.at("gold_pairs")) {
        if (!pr.is_array() || pr.size() != 2)
          throw DataError(where + ": gold_pairs entries must be [cause,effect]");
        s.gold_pairs.emplace_back(pr[0].get<int>(), pr[1].get<int>());
      }
    } catch (const json::exception& e) {
      throw DataError(where + ": bad record: " + e.what());
    }

    validate_sentence(s, where);
    if (!ids.insert(s.id).second) throw DataError(where + ": duplicate sentence id " + s.id);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Fold> make_folds(const std::vector<Sentence>& corpus, int k, std::uint64_t seed) {
  if (k < 2) throw ArgError("make_folds: k must be >= 2");
  std::set<std::string> doc_set;
  for (const auto& s : corpus) doc_set.insert(s.doc_id);
  std::vector<std::string> docs(doc_set.begin(), doc_set.end());
  if (int(docs.size()) < k)
    throw ArgError("make_folds: " + std::to_string(docs.size()) + " documents < k=" +
                   std::to_string(k));

  Rng rng(seed);
  rng.shuffle(docs);

  std::vector<Fold> folds(k);
  for (int f = 0; f < k; ++f) folds[f].fold_id = f;
  for (std::size_t i = 0; i < docs.size(); ++i)
    folds[i % std::size_t(k)].test_doc_ids.push_back(docs[i]);

  for (auto& f : folds) {
    std::sort(f.test_doc_ids.begin(), f.test_doc_ids.end());
    for (const auto& d : docs)
      if (!std::binary_search(f.test_doc_ids.begin(), f.test_doc_ids.end(), d))
        f.train_doc_ids.push_back(d);
    std::sort(f.train_doc_ids.begin(), f.train_doc_ids.end());
  }
  return folds;
}

BioSequence bio_encode(int n_tokens, const std::vector<Span>& spans) {
  std::vector<Span> sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1].overlaps(sorted[i]))
      throw DataError("overlapping gold events [" + std::to_string(sorted[i - 1].start) + "," +
                      std::to_string(sorted[i - 1].end) + ") and [" +
                      std::to_string(sorted[i].start) + "," + std::to_string(sorted[i].end) +
                      ") cannot be BIO-encoded");
  }
  BioSequence tags(std::size_t(n_tokens), Tag::O);
  for (const Span& sp : sorted) {
    tags[std::size_t(sp.start)] = Tag::B;
    for (int t = sp.start + 1; t < sp.end; ++t) tags[std::size_t(t)] = Tag::I;
  }
  return tags;
}

BioSequence bio_encode(const Sentence& s) {
  return bio_encode(int(s.tokens.size()), s.gold_events);
}

std::vector<Span> bio_decode(const BioSequence& tags) {
  std::vector<Span> spans;
  int open_start = -1;
  for (int t = 0; t < int(tags.size()); ++t) {
    Tag tag = tags[std::size_t(t)];
    if (tag == Tag::B) {
      if (open_start >= 0) spans.push_back({open_start, t});
      open_start = t;
    } else if (tag == Tag::I) {
      // Repair policy: an I with no open span acts as B.
      if (open_start < 0) open_start = t;
    } else {
      if (open_start >= 0) spans.push_back({open_start, t});
      open_start = -1;
    }
  }
  if (open_start >= 0) spans.push_back({open_start, int(tags.size())});
  return spans;
}

bool bio_wellformed(const BioSequence& tags) {
  Tag prev = Tag::O;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] == Tag::I && (t == 0 || prev == Tag::O)) return false;
    prev = tags[t];
  }
  return true;
}

char tag_char(Tag t) {
  switch (t) {
    case Tag::B: return 'B';
    case Tag::I: return 'I';
    default: return 'O';
  }
}

}  // namespace unice
