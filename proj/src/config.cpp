#include "mkge/config.hpp"

#include <charconv>
#include <fstream>

namespace mkge {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    std::string item = trim(std::string_view(value).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  std::int64_t v = 0;
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error("config: " + key + " expects an integer, got '" + value + "'");
  return v;
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0;
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error("config: " + key + " expects a number, got '" + value + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error("config: " + key + " expects true/false, got '" + value + "'");
}

}  // namespace

void apply_config_entry(RunConfig& c, const std::string& key,
                        const std::string& value) {
  if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(to_int(key, value));
  } else if (key == "paths.triples") {
    c.triples = value;
  } else if (key == "paths.train") {
    c.train_path = value;
  } else if (key == "paths.valid") {
    c.valid_path = value;
  } else if (key == "paths.test") {
    c.test_path = value;
  } else if (key == "paths.visual_features") {
    c.visual_features = value;
  } else if (key == "paths.textual_features") {
    c.textual_features = value;
  } else if (key == "paths.modality_registry") {
    c.modality_registry = value;
  } else if (key == "paths.prompt_features") {
    c.prompt_features = value;
  } else if (key == "paths.attributes") {
    c.attributes = value;
  } else if (key == "paths.out") {
    c.out_dir = value;
  } else if (key == "model.backbone") {
    auto b = backbone_from_name(value);
    if (!b) throw Error("config: unknown backbone '" + value + "'");
    c.model.backbone = *b;
  } else if (key == "model.fusion") {
    auto f = fusion_from_name(value);
    if (!f) throw Error("config: unknown fusion strategy '" + value + "'");
    c.model.fusion = *f;
  } else if (key == "model.dim") {
    c.model.dim = static_cast<std::int32_t>(to_int(key, value));
  } else if (key == "model.projection") {
    if (value == "trainable")
      c.model.identity_projection = false;
    else if (value == "identity")
      c.model.identity_projection = true;
    else
      throw Error("config: model.projection expects trainable|identity");
  } else if (key == "train.learning_rate") {
    c.train.learning_rate = to_double(key, value);
  } else if (key == "train.batch_size") {
    c.train.batch_size = static_cast<std::int32_t>(to_int(key, value));
  } else if (key == "train.negatives") {
    c.train.negatives_per_positive = static_cast<std::int32_t>(to_int(key, value));
  } else if (key == "train.epochs") {
    c.train.epochs = static_cast<std::int32_t>(to_int(key, value));
  } else if (key == "train.epsilon") {
    c.train.epsilon = to_double(key, value);
  } else if (key == "train.eval_every") {
    c.train.eval_every = static_cast<std::int32_t>(to_int(key, value));
  } else if (key == "train.patience") {
    c.train.patience = static_cast<std::int32_t>(to_int(key, value));
  } else if (key == "train.filtered_negatives") {
    c.train.filtered_negatives = to_bool(key, value);
  } else if (key == "train.relation_tail_pool") {
    c.train.relation_tail_pool = to_bool(key, value);
  } else if (key == "eval.protocol") {
    if (value == "bidirectional")
      c.protocol = Protocol::bidirectional;
    else if (value == "tail-only")
      c.protocol = Protocol::tail_only;
    else
      throw Error("config: eval.protocol expects bidirectional|tail-only");
  } else if (key == "zero_shot.head_modality") {
    auto m = modality_from_name(value);
    if (!m || *m == Modality::structural)
      throw Error("config: zero_shot.head_modality expects visual|textual");
    c.zero_shot_head_modality = *m;
  } else if (key == "split.ratios") {
    auto parts = split_list(value);
    if (parts.size() != 3)
      throw Error("config: split.ratios expects three comma-separated values");
    c.ratio_train = to_double(key, parts[0]);
    c.ratio_valid = to_double(key, parts[1]);
    c.ratio_test = to_double(key, parts[2]);
  } else if (key == "split.heldout") {
    if (value != "none" && value != "heads")
      throw Error("config: split.heldout expects none|heads");
    c.heldout = value;
  } else if (key == "split.entity_relations") {
    c.entity_relations = split_list(value);
  } else if (key == "split.rare_relations") {
    c.rare_relations = split_list(value);
  } else if (key == "split.min_tail_count") {
    c.min_tail_count = static_cast<int>(to_int(key, value));
  } else if (key == "split.year_relations") {
    c.year_relations = split_list(value);
  } else if (key == "split.year_width") {
    c.year_width = static_cast<int>(to_int(key, value));
  } else if (key == "retrieve.relation") {
    c.retrieve_relation = value;
  } else if (key == "retrieve.mode") {
    if (value != "artwork" && value != "artist")
      throw Error("config: retrieve.mode expects artwork|artist");
    c.retrieve_mode = value;
  } else if (key == "retrieve.k") {
    c.retrieve_k = static_cast<int>(to_int(key, value));
  } else if (key == "format") {
    if (value != "text" && value != "kv")
      throw Error("config: format expects text|kv");
    c.format = value;
  } else {
    throw Error("config: unknown key '" + key + "'");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path.string() + "'");

  RunConfig c;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error("config: " + path.string() + ":" + std::to_string(lineno) +
                  ": expected key = value");
    std::string key = trim(std::string_view(stripped).substr(0, eq));
    std::string value = trim(std::string_view(stripped).substr(eq + 1));
    try {
      apply_config_entry(c, key, value);
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " (" + path.string() + ":" +
                  std::to_string(lineno) + ")");
    }
  }
  return c;
}

int retrieve_default_k(const std::string& mode) {
  return mode == "artist" ? 20 : 50;
}

}  // namespace mkge
