#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mkge/types.hpp"

namespace mkge {

enum class Split : int { train = 0, valid = 1, test = 2 };
inline constexpr std::array<const char*, 3> kSplitNames = {"train", "valid",
                                                           "test"};

/// Entity/relation vocabularies, the three triple splits, per-entity modality
/// sets and the seen flag derived from the train split. Immutable once
/// finalized; safe to read from many threads.
struct KnowledgeGraph {
  Vocab entities;
  Vocab relations;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  std::vector<ModalitySet> modalities;  // indexed by entity
  std::vector<std::uint8_t> seen;       // delta_e, derived from train

  /// Deduplicates each split (first occurrence wins), derives the seen flags,
  /// and gives seen entities with an empty modality set the structural
  /// modality. Must be called before the graph is used by any other module.
  void finalize();

  bool finalized() const {
    return seen.size() == static_cast<std::size_t>(entities.size());
  }
  bool is_seen(EntityId e) const { return seen[static_cast<std::size_t>(e)] != 0; }
  ModalitySet modality_set(EntityId e) const {
    return modalities[static_cast<std::size_t>(e)];
  }
  const std::vector<Triple>& split(Split s) const {
    switch (s) {
      case Split::valid: return valid;
      case Split::test: return test;
      default: return train;
    }
  }
  std::vector<Triple>& split(Split s) {
    switch (s) {
      case Split::valid: return valid;
      case Split::test: return test;
      default: return train;
    }
  }

  std::array<std::int64_t, 3> duplicates_removed{};  // filled by finalize
};

/// (head, relation) -> known tails and (relation, tail) -> known heads over
/// the union of all splits. Used to drop known-true candidates while ranking.
class FilterIndex {
 public:
  static FilterIndex build(const KnowledgeGraph& graph);

  bool known_tail(EntityId h, RelationId r, EntityId t) const;
  bool known_head(EntityId h, RelationId r, EntityId t) const;
  std::span<const EntityId> tails(EntityId h, RelationId r) const;
  std::span<const EntityId> heads(RelationId r, EntityId t) const;

 private:
  static std::uint64_t key(std::int64_t a, std::int64_t b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }
  std::unordered_map<std::uint64_t, std::vector<EntityId>> fwd_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> bwd_;
};

/// Candidate pools for ranking: one tail list per relation (entities observed
/// as tail of that relation in any split) and the global entity list.
struct CandidateRegistry {
  std::vector<std::vector<EntityId>> tails_by_relation;
  std::vector<EntityId> all_entities;

  static CandidateRegistry build(const KnowledgeGraph& graph);
};

struct ValidationReport {
  std::int64_t entities = 0;
  std::int64_t relations = 0;
  std::array<std::int64_t, 3> triples{};
  std::array<std::int64_t, 3> duplicates{};
  std::int64_t dangling = 0;
  std::int64_t overlap_train_valid = 0;
  std::int64_t overlap_train_test = 0;
  std::int64_t overlap_valid_test = 0;
  std::int64_t unseen_entities = 0;  // delta_e = 0
  std::int64_t unseen_in_test = 0;   // distinct unseen entities in test triples
  bool seen_consistent = true;
  std::array<std::int64_t, 3> modality_coverage{};  // structural/visual/textual
  std::int64_t modality_none = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

ValidationReport validate_graph(const KnowledgeGraph& graph);

}  // namespace mkge
