#include "unice/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace unice {

void UniceConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (n_plain_layers < 0) fail("n_plain_layers must be >= 0");
  if (n_joint_layers < 1) fail("n_joint_layers must be >= 1");
  if (d_enc < 1 || d_gnn < 1 || d_kg < 1) fail("dimensions must be positive");
  if (n_heads < 1 || d_enc % n_heads != 0) fail("d_enc must be divisible by n_heads");
  if (max_len < 1) fail("max_len must be positive");
  if (dropout < 0.0 || dropout >= 1.0) fail("dropout must be in [0, 1)");
  if (node_cap < 0) fail("node_cap must be >= 0");
  if (max_path_len < 1) fail("max_path_len must be positive");
  if (negative_keep_rate < 0.0 || negative_keep_rate > 1.0)
    fail("negative_keep_rate must be in [0, 1]");
  if (lr_encoder <= 0.0 || lr_other <= 0.0) fail("learning rates must be positive");
  if (batch_size < 1) fail("batch_size must be positive");
  if (max_epochs < 1) fail("max_epochs must be positive");
  if (early_stop_patience < 1) fail("early_stop_patience must be positive");
  if (warmup_steps < 0) fail("warmup_steps must be >= 0");
  if (gold_event_warmup_epochs < 0) fail("gold_event_warmup_epochs must be >= 0");
}

std::string to_string(InsertionVariant v) {
  switch (v) {
    case InsertionVariant::MatrixTree: return "matrix_tree";
    case InsertionVariant::NoLink: return "no_link";
    case InsertionVariant::SpanMatch: return "span_match";
    case InsertionVariant::FullLink: return "full_link";
    default: return "dot_product";
  }
}

std::string to_string(GnnVariantKind v) {
  return v == GnnVariantKind::Attention ? "attention" : "mean";
}

std::string to_string(RelationMatch v) {
  return v == RelationMatch::Exact ? "exact" : "overlap";
}

InsertionVariant insertion_variant_from_string(const std::string& s) {
  if (s == "matrix_tree") return InsertionVariant::MatrixTree;
  if (s == "no_link") return InsertionVariant::NoLink;
  if (s == "span_match") return InsertionVariant::SpanMatch;
  if (s == "full_link") return InsertionVariant::FullLink;
  if (s == "dot_product") return InsertionVariant::DotProduct;
  throw ConfigError("unknown insertion_variant '" + s + "'");
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

using Setter = std::function<void(UniceConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  auto as_int = [](const std::string& v, const std::string& key) {
    try {
      std::size_t used = 0;
      int x = std::stoi(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return x;
    } catch (...) {
      throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    }
  };
  auto as_double = [](const std::string& v, const std::string& key) {
    try {
      std::size_t used = 0;
      double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return x;
    } catch (...) {
      throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
  };

  static const std::map<std::string, Setter> table = {
      {"n_plain_layers", [=](UniceConfig& c, auto k, auto v) { c.n_plain_layers = as_int(v, k); }},
      {"n_joint_layers", [=](UniceConfig& c, auto k, auto v) { c.n_joint_layers = as_int(v, k); }},
      {"d_enc", [=](UniceConfig& c, auto k, auto v) { c.d_enc = as_int(v, k); }},
      {"d_gnn", [=](UniceConfig& c, auto k, auto v) { c.d_gnn = as_int(v, k); }},
      {"d_kg", [=](UniceConfig& c, auto k, auto v) { c.d_kg = as_int(v, k); }},
      {"n_heads", [=](UniceConfig& c, auto k, auto v) { c.n_heads = as_int(v, k); }},
      {"max_len", [=](UniceConfig& c, auto k, auto v) { c.max_len = as_int(v, k); }},
      {"dropout", [=](UniceConfig& c, auto k, auto v) { c.dropout = as_double(v, k); }},
      {"node_cap", [=](UniceConfig& c, auto k, auto v) { c.node_cap = as_int(v, k); }},
      {"max_path_len", [=](UniceConfig& c, auto k, auto v) { c.max_path_len = as_int(v, k); }},
      {"negative_keep_rate",
       [=](UniceConfig& c, auto k, auto v) { c.negative_keep_rate = as_double(v, k); }},
      {"lr_encoder", [=](UniceConfig& c, auto k, auto v) { c.lr_encoder = as_double(v, k); }},
      {"lr_other", [=](UniceConfig& c, auto k, auto v) { c.lr_other = as_double(v, k); }},
      {"batch_size", [=](UniceConfig& c, auto k, auto v) { c.batch_size = as_int(v, k); }},
      {"max_epochs", [=](UniceConfig& c, auto k, auto v) { c.max_epochs = as_int(v, k); }},
      {"early_stop_patience",
       [=](UniceConfig& c, auto k, auto v) { c.early_stop_patience = as_int(v, k); }},
      {"warmup_steps", [=](UniceConfig& c, auto k, auto v) { c.warmup_steps = as_int(v, k); }},
      {"seed",
       [=](UniceConfig& c, auto k, auto v) { c.seed = std::uint64_t(as_int(v, k)); }},
      {"use_subtask_interaction",
       [](UniceConfig& c, auto k, auto v) { c.use_subtask_interaction = parse_bool(v, k); }},
      {"use_knowledge_fusion",
       [](UniceConfig& c, auto k, auto v) { c.use_knowledge_fusion = parse_bool(v, k); }},
      {"eci_to_ee", [](UniceConfig& c, auto k, auto v) { c.eci_to_ee = parse_bool(v, k); }},
      {"ee_to_eci", [](UniceConfig& c, auto k, auto v) { c.ee_to_eci = parse_bool(v, k); }},
      {"plm_to_kg", [](UniceConfig& c, auto k, auto v) { c.plm_to_kg = parse_bool(v, k); }},
      {"kg_to_plm", [](UniceConfig& c, auto k, auto v) { c.kg_to_plm = parse_bool(v, k); }},
      {"insertion_variant",
       [](UniceConfig& c, auto, auto v) { c.insertion_variant = insertion_variant_from_string(v); }},
      {"share_crf", [](UniceConfig& c, auto k, auto v) { c.share_crf = parse_bool(v, k); }},
      {"share_aggregators",
       [](UniceConfig& c, auto k, auto v) { c.share_aggregators = parse_bool(v, k); }},
      {"gnn_variant",
       [](UniceConfig& c, auto k, auto v) {
         if (v == "attention")
           c.gnn_variant = GnnVariantKind::Attention;
         else if (v == "mean")
           c.gnn_variant = GnnVariantKind::Mean;
         else
           throw ConfigError("key '" + std::string(k) + "': unknown gnn_variant '" + v + "'");
       }},
      {"gold_event_warmup_epochs",
       [=](UniceConfig& c, auto k, auto v) { c.gold_event_warmup_epochs = as_int(v, k); }},
      {"relation_match",
       [](UniceConfig& c, auto k, auto v) {
         if (v == "exact")
           c.relation_match = RelationMatch::Exact;
         else if (v == "overlap")
           c.relation_match = RelationMatch::Overlap;
         else
           throw ConfigError("key '" + std::string(k) + "': unknown relation_match '" + v + "'");
       }},
  };
  return table;
}

}  // namespace

UniceConfig parse_config_text(const std::string& text, const std::string& origin) {
  UniceConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown config key '" + key +
                        "'");
    it->second(c, key, value);
  }
  c.validate();
  return c;
}

UniceConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string config_to_text(const UniceConfig& c) {
  std::ostringstream o;
  o << "n_plain_layers = " << c.n_plain_layers << "\n";
  o << "n_joint_layers = " << c.n_joint_layers << "\n";
  o << "d_enc = " << c.d_enc << "\n";
  o << "d_gnn = " << c.d_gnn << "\n";
  o << "d_kg = " << c.d_kg << "\n";
  o << "n_heads = " << c.n_heads << "\n";
  o << "max_len = " << c.max_len << "\n";
  o << "dropout = " << c.dropout << "\n";
  o << "node_cap = " << c.node_cap << "\n";
  o << "max_path_len = " << c.max_path_len << "\n";
  o << "negative_keep_rate = " << c.negative_keep_rate << "\n";
  o << "lr_encoder = " << c.lr_encoder << "\n";
  o << "lr_other = " << c.lr_other << "\n";
  o << "batch_size = " << c.batch_size << "\n";
  o << "max_epochs = " << c.max_epochs << "\n";
  o << "early_stop_patience = " << c.early_stop_patience << "\n";
  o << "warmup_steps = " << c.warmup_steps << "\n";
  o << "seed = " << c.seed << "\n";
  o << "use_subtask_interaction = " << (c.use_subtask_interaction ? "true" : "false") << "\n";
  o << "use_knowledge_fusion = " << (c.use_knowledge_fusion ? "true" : "false") << "\n";
  o << "eci_to_ee = " << (c.eci_to_ee ? "true" : "false") << "\n";
  o << "ee_to_eci = " << (c.ee_to_eci ? "true" : "false") << "\n";
  o << "plm_to_kg = " << (c.plm_to_kg ? "true" : "false") << "\n";
  o << "kg_to_plm = " << (c.kg_to_plm ? "true" : "false") << "\n";
  o << "insertion_variant = " << to_string(c.insertion_variant) << "\n";
  o << "share_crf = " << (c.share_crf ? "true" : "false") << "\n";
  o << "share_aggregators = " << (c.share_aggregators ? "true" : "false") << "\n";
  o << "gnn_variant = " << to_string(c.gnn_variant) << "\n";
  o << "gold_event_warmup_epochs = " << c.gold_event_warmup_epochs << "\n";
  o << "relation_match = " << to_string(c.relation_match) << "\n";
  return o.str();
}

const std::vector<std::string>& ablation_setting_names() {
  static const std::vector<std::string> names = {
      "wo_si",          "wo_kf",
      "wo_both",        "wo_eci_to_ee",
      "wo_ee_to_eci",   "wo_plm_to_kg",
      "wo_kg_to_plm",   "wo_insertion",
      "variant_no_link", "variant_span_match",
      "variant_full_link", "variant_dot_product"};
  return names;
}

UniceConfig apply_ablation(UniceConfig c, const std::string& setting) {
  if (setting == "full") return c;
  if (setting == "wo_si") {
    c.use_subtask_interaction = false;
  } else if (setting == "wo_kf") {
    c.use_knowledge_fusion = false;
  } else if (setting == "wo_both") {
    c.use_subtask_interaction = false;
    c.use_knowledge_fusion = false;
  } else if (setting == "wo_eci_to_ee") {
    c.eci_to_ee = false;
  } else if (setting == "wo_ee_to_eci") {
    c.ee_to_eci = false;
  } else if (setting == "wo_plm_to_kg") {
    c.plm_to_kg = false;
  } else if (setting == "wo_kg_to_plm") {
    c.kg_to_plm = false;
  } else if (setting == "wo_insertion" || setting == "variant_no_link") {
    c.insertion_variant = InsertionVariant::NoLink;
  } else if (setting == "variant_span_match") {
    c.insertion_variant = InsertionVariant::SpanMatch;
  } else if (setting == "variant_full_link") {
    c.insertion_variant = InsertionVariant::FullLink;
  } else if (setting == "variant_dot_product") {
    c.insertion_variant = InsertionVariant::DotProduct;
  } else {
    throw ArgError("unknown ablation setting '" + setting + "'");
  }
  return c;
}

}  // namespace unice
