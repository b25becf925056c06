#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mkge/evaluation.hpp"
#include "mkge/model.hpp"
#include "mkge/training.hpp"
#include "mkge/types.hpp"

namespace mkge {

/// Run configuration parsed from a plain-text `section.key = value` file.
/// Command-line flags override file values.
struct RunConfig {
  // paths
  std::string triples;  // unsplit corpus, for build-split
  std::string train_path, valid_path, test_path;
  std::string visual_features, textual_features;
  std::string modality_registry;
  std::string prompt_features;
  std::string attributes;
  std::string out_dir = "out";

  ModelConfig model;
  TrainConfig train;
  Protocol protocol = Protocol::bidirectional;
  Modality zero_shot_head_modality = Modality::visual;

  // split building
  double ratio_train = 0.8, ratio_valid = 0.1, ratio_test = 0.1;
  std::string heldout = "none";  // none | heads
  std::vector<std::string> entity_relations;
  std::vector<std::string> rare_relations;
  int min_tail_count = 0;  // 0 disables rare-tail filtering
  std::vector<std::string> year_relations;
  int year_width = 50;

  // retrieval
  std::string retrieve_relation;
  std::string retrieve_mode = "artwork";  // artwork (k=50) | artist (k=20)
  int retrieve_k = 0;                     // 0 = by mode

  std::string format = "text";  // text | kv
  std::uint64_t seed = 42;
};

RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one `section.key=value` override; throws on unknown keys.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

int retrieve_default_k(const std::string& mode);

}  // namespace mkge
