#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mkge/features.hpp"
#include "mkge/kg.hpp"
#include "mkge/model.hpp"
#include "mkge/types.hpp"

namespace mkge {

enum class Direction { head, tail };
enum class Protocol { bidirectional, tail_only };

using ScoreFn = std::function<double(EntityId, RelationId, EntityId)>;

struct RankingResult {
  Triple query;
  Direction direction = Direction::tail;
  double rank = 0.0;  // mean of optimistic and pessimistic rank under ties
  double reciprocal = 0.0;
  bool hits1 = false, hits3 = false, hits10 = false;
};

/// Scores every candidate, drops the ones known true under the filter
/// (keeping the query's own answer), and ranks the answer with the mean-rank
/// tie convention.
RankingResult filtered_rank(const Triple& query, Direction direction,
                            const ScoreFn& score,
                            std::span<const EntityId> candidates,
                            const FilterIndex& filter);

struct MetricsReport {
  double mrr = 0.0;
  double hits1 = 0.0, hits3 = 0.0, hits10 = 0.0;
  std::int64_t count = 0;
  std::map<RelationId, double> per_relation_mrr;
  std::map<RelationId, std::int64_t> per_relation_count;
};

/// Bidirectional: two ranking results per triple over the global candidate
/// list. Tail-only: one per triple over that relation's candidate list.
MetricsReport evaluate(std::span<const Triple> split, Protocol protocol,
                       const ScoreFn& score,
                       const CandidateRegistry& candidates,
                       const FilterIndex& filter);

/// Caches entity representations lazily so ranking sweeps do not rebuild the
/// fusion pipeline per candidate. Read-only over the model snapshot.
class ModelScorer {
 public:
  explicit ModelScorer(const Model& model);
  double operator()(EntityId h, RelationId r, EntityId t) const;

 private:
  void ensure(EntityId e) const;
  const Model* model_;
  bool complex_ = false;
  std::int32_t width_ = 0;
  mutable std::vector<std::uint8_t> ready_;
  mutable std::vector<double> re_, im_;
};

/// Cosine similarity of the two raw (unprojected) feature vectors.
double zero_shot_score(const FeatureMatrix& head_features,
                       const FeatureMatrix& prompt_features, EntityId head,
                       EntityId tail);

ScoreFn make_zero_shot_scorer(const FeatureMatrix& head_features,
                              const FeatureMatrix& prompt_features,
                              const Vocab& entities);

/// AP = (sum over relevant positions of precision@i) / (#relevant in list);
/// 0 when nothing retrieved is relevant.
double average_precision(std::span<const std::uint8_t> relevance);

/// ILD = 2/(k(k-1)) * sum_{i<j} d(i, j); absent when k < 2.
std::optional<double> intra_list_diversity(
    std::size_t k, const std::function<double(std::size_t, std::size_t)>& dissim);

/// Feature-space dissimilarity (1 - cosine)/2, clamped to [0,1].
double feature_dissimilarity(std::span<const double> a,
                             std::span<const double> b);

/// Per-entity categorical annotations used as retrieval ground truth.
/// File format: `entity<TAB>category<TAB>value`, one annotation per line.
class AttributeTable {
 public:
  static AttributeTable load(const std::filesystem::path& path,
                             const Vocab& entities);

  const std::vector<std::string>& categories() const { return categories_; }
  bool has_any(EntityId e, std::int32_t category) const;
  bool shares(EntityId a, EntityId b, std::int32_t category) const;
  /// 1 - shared categories / comparable categories; 1 when nothing comparable.
  double attribute_dissimilarity(EntityId a, EntityId b) const;
  bool empty() const { return categories_.empty(); }

 private:
  std::int32_t category_id(std::string_view name);
  std::vector<std::string> categories_;
  // entity -> category -> sorted value ids
  std::unordered_map<EntityId, std::vector<std::vector<std::int32_t>>> values_;
  Vocab value_names_;
};

struct RetrievalReport {
  std::vector<std::pair<std::string, double>> ap_per_category;
  double map = 0.0;
  std::optional<double> ild_attr;
  std::optional<double> ild_feat;
  int k = 0;
  std::vector<EntityId> retrieved;
};

/// Ranks candidates by score, keeps the top-k excluding the query itself, and
/// reports AP per attribute category, mAP and both ILD variants.
RetrievalReport retrieve_related(EntityId query, RelationId relation,
                                 const ScoreFn& score,
                                 std::span<const EntityId> candidates, int k,
                                 const AttributeTable& attributes,
                                 const FeatureMatrix* ild_features);

}  // namespace mkge
