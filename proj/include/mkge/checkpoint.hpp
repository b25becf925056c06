#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mkge/features.hpp"
#include "mkge/kg.hpp"
#include "mkge/model.hpp"

namespace mkge {

struct CheckpointMeta {
  std::uint64_t seed = 0;
  double learning_rate = 0.1;
  std::int32_t batch_size = 512;
  std::int32_t negatives = 10;
};

/// Single-file checkpoint: header (backbone, dim, fusion, vocab sizes, seed,
/// optimizer settings) followed by every parameter table in declared order.
/// Round-trips bit-exactly.
std::string serialize_checkpoint(const Model& model, const CheckpointMeta& meta);

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const CheckpointMeta& meta);

Model restore_checkpoint(const std::string& bytes, const KnowledgeGraph& graph,
                         const FeatureMatrix* visual,
                         const FeatureMatrix* textual,
                         CheckpointMeta* meta_out = nullptr);

Model load_checkpoint(const std::filesystem::path& path,
                      const KnowledgeGraph& graph, const FeatureMatrix* visual,
                      const FeatureMatrix* textual,
                      CheckpointMeta* meta_out = nullptr);

/// Header peek without restoring tables (for mismatch diagnostics).
struct CheckpointHeader {
  Backbone backbone;
  FusionKind fusion;
  std::int32_t dim = 0;
  std::int32_t entities = 0;
  std::int32_t relations = 0;
  std::uint64_t seed = 0;
  CheckpointMeta meta;
};

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

}  // namespace mkge
