#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mkge/features.hpp"
#include "mkge/kg.hpp"
#include "mkge/types.hpp"

namespace mkge {

enum class Backbone { transe, distmult, complex_bilinear, rotate };
enum class FusionKind { average, concat, weighted };

const char* backbone_name(Backbone b);
std::optional<Backbone> backbone_from_name(std::string_view name);
const char* fusion_name(FusionKind f);
std::optional<FusionKind> fusion_from_name(std::string_view name);

inline bool is_complex(Backbone b) {
  return b == Backbone::complex_bilinear || b == Backbone::rotate;
}

struct ModelConfig {
  Backbone backbone = Backbone::distmult;
  FusionKind fusion = FusionKind::average;
  std::int32_t dim = 100;
  bool identity_projection = false;  // requires feature dim == dim
};

/// Forward record of one entity's representation, kept for backprop.
struct EntityRecord {
  EntityId entity = -1;
  ModalitySet present;
  std::array<std::vector<double>, 3> part;  // gathered parts, width d
  std::vector<double> fused;                // width D (= d, or 3d under concat)
  std::vector<double> imag;                 // width D, complex backbones only
  bool imag_learned = false;
};

struct ScoreRecord {
  EntityRecord head;
  EntityRecord tail;
  RelationId relation = -1;
  double value = 0.0;
};

class Model;

/// Gradient buffers mirroring the trainable parameter set, with touched-row
/// tracking so embedding tables get sparse optimizer updates.
class Gradients {
 public:
  explicit Gradients(const Model& model);

  void clear();

  std::span<double> structural_row(EntityId e);
  std::span<double> imaginary_row(std::int32_t row);
  std::span<double> relation_row(RelationId r);
  std::span<double> lift() { return lift_; }
  double& beta() { return beta_; }
  std::array<double, 3>& alpha() { return alpha_; }
  std::span<double> proj(Modality m);

  const std::vector<EntityId>& touched_structural() const { return tstruct_; }
  const std::vector<std::int32_t>& touched_imaginary() const { return timag_; }
  const std::vector<RelationId>& touched_relations() const { return trel_; }

  /// Read view aligned with Model::param_views names.
  std::span<const double> view(std::string_view name) const;

 private:
  friend class Model;
  std::int32_t dim_ = 0, fused_ = 0, relw_ = 0;
  std::vector<double> structural_, imaginary_, relation_, lift_;
  double beta_ = 0.0;
  std::array<double, 3> alpha_{};
  std::vector<double> proj_visual_, proj_textual_;
  std::vector<EntityId> tstruct_;
  std::vector<std::int32_t> timag_;
  std::vector<RelationId> trel_;
  std::vector<std::uint8_t> struct_mark_, imag_mark_, rel_mark_;
};

struct ParamView {
  std::string name;
  std::span<double> values;
};

/// All trainable state plus the entity-representation pipeline:
/// gather (masked structural + projected features) -> fuse -> complex lift.
/// Pure reads given a parameter snapshot; writes happen only through the
/// optimizer or checkpoint restore.
class Model {
 public:
  void init(const ModelConfig& config, const KnowledgeGraph& graph,
            const FeatureMatrix* visual, const FeatureMatrix* textual,
            std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const KnowledgeGraph& graph() const { return *graph_; }
  std::int32_t dim() const { return cfg_.dim; }
  std::int32_t fused_dim() const { return fused_; }
  std::int32_t relation_width() const { return relw_; }

  /// delta_e * s_e; the structural row is never read when delta_e = 0.
  std::vector<double> mask_structural(EntityId e) const;
  void gather(EntityId e, EntityRecord& rec) const;
  void fuse(EntityRecord& rec) const;
  void complexify(EntityRecord& rec) const;
  void represent(EntityId e, EntityRecord& rec) const;

  double score(EntityId h, RelationId r, EntityId t) const;
  double score_record(EntityId h, RelationId r, EntityId t,
                      ScoreRecord& rec) const;
  double score_reps(std::span<const double> h_re, std::span<const double> h_im,
                    RelationId r, std::span<const double> t_re,
                    std::span<const double> t_im) const;

  /// Accumulates upstream * d(score)/d(param) for every reachable trainable
  /// parameter of the recorded triple; everything else stays exactly zero.
  void backward(const ScoreRecord& rec, double upstream, Gradients& g) const;

  // Parameter access.
  std::span<const double> structural_row(EntityId e) const;
  std::span<double> structural_row_mut(EntityId e);
  std::span<const double> relation_row(RelationId r) const;
  std::int32_t imaginary_row_of(EntityId e) const { return imag_row_[e]; }
  std::span<double> imaginary_row_mut(std::int32_t row);
  const std::vector<EntityId>& imaginary_members() const { return imag_members_; }
  double gate_beta() const { return beta_; }
  const std::array<double, 3>& fusion_alpha() const { return alpha_; }
  const ModalityProjection& projection(Modality m) const;
  std::int64_t entity_count() const;
  std::int64_t relation_count() const;

  /// Named mutable views over every trainable array, in a fixed order shared
  /// with Gradients::view and the optimizer.
  std::vector<ParamView> param_views();

 private:
  friend class Gradients;
  friend struct CheckpointCodec;

  void backward_entity(const EntityRecord& rec, std::span<const double> g_re,
                       std::span<const double> g_im, Gradients& g) const;
  void apply_lift(std::span<const double> in, std::span<double> out) const;

  ModelConfig cfg_;
  const KnowledgeGraph* graph_ = nullptr;
  const FeatureMatrix* visual_ = nullptr;
  const FeatureMatrix* textual_ = nullptr;
  std::int32_t fused_ = 0;
  std::int32_t relw_ = 0;
  std::vector<double> structural_;       // |E| x d
  std::vector<double> imaginary_;        // members x D
  std::vector<std::int32_t> imag_row_;   // |E| -> row or -1
  std::vector<EntityId> imag_members_;   // row -> entity
  std::vector<double> relation_;         // |R| x relw
  std::vector<double> lift_;             // D x D, complex backbones
  double beta_ = 0.0;
  std::array<double, 3> alpha_{1.0 / 3, 1.0 / 3, 1.0 / 3};
  ModalityProjection proj_visual_, proj_textual_;
};

}  // namespace mkge
