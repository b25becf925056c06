#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "mkge/rng.hpp"
#include "mkge/types.hpp"

namespace mkge {

/// Dense precomputed feature rows for one modality. Coverage is partial:
/// entities absent from the index simply lack the modality. Rows are frozen;
/// training never writes here.
struct FeatureMatrix {
  Modality modality = Modality::visual;
  std::int32_t dim = 0;
  std::vector<double> values;            // row-major, rows x dim
  std::vector<EntityId> row_entities;    // row -> entity, file order
  std::unordered_map<EntityId, std::int32_t> rows;
  std::int64_t skipped = 0;              // file rows naming unknown entities

  bool has(EntityId e) const { return rows.count(e) != 0; }
  std::span<const double> row(EntityId e) const;
  std::int64_t row_count() const {
    return static_cast<std::int64_t>(row_entities.size());
  }
  std::uint64_t checksum() const;
};

/// Parses a feature file: `#meta count=<N> dim=<D> modality=<name>` header,
/// then `entity<TAB>f1 f2 ... fD` rows. Rows naming entities outside the
/// vocabulary are counted and skipped.
FeatureMatrix load_features(const std::filesystem::path& path,
                            const Vocab& entities);

/// Writes the matrix back in the same format at 9 significant digits.
void save_features(const std::filesystem::path& path, const FeatureMatrix& fm,
                   const Vocab& entities);

/// Linear map from a modality's native width into the model dimension.
/// No bias. Identity bypass is only legal when the widths already agree.
struct ModalityProjection {
  Modality modality = Modality::visual;
  std::int32_t dim_in = 0;
  std::int32_t dim_out = 0;
  bool identity = false;
  std::vector<double> weights;  // dim_in x dim_out, row-major

  static ModalityProjection make_trainable(Modality m, std::int32_t dim_in,
                                           std::int32_t dim_out, Rng& rng);
  static ModalityProjection make_identity(Modality m, std::int32_t dim);
  bool present() const { return dim_in > 0; }
};

std::vector<double> project(const FeatureMatrix& fm,
                            const ModalityProjection& proj, EntityId e);

/// Accumulates the outer product row(e)^T * upstream into grad_weights.
/// Feature rows themselves receive no gradient.
void project_gradient(const FeatureMatrix& fm, const ModalityProjection& proj,
                      EntityId e, std::span<const double> upstream,
                      std::span<double> grad_weights);

}  // namespace mkge
