#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mkge/types.hpp"

namespace mkge {

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

/// Names the entity class whose members are partitioned across splits, plus
/// the relations whose triples join two held-out entities directly.
struct SplitPolicy {
  enum class Heldout { heads, explicit_list };
  Heldout heldout = Heldout::heads;
  std::vector<EntityId> heldout_entities;     // used with explicit_list
  std::vector<RelationId> entity_relations;   // entity-to-entity relations
};

struct SplitStats {
  std::array<std::int64_t, 3> heldout{};  // held-out entities per partition
  std::int64_t removed_cross = 0;     // entity-to-entity cross-partition drops
  std::int64_t removed_conflict = 0;  // cross-partition drops, other relations
};

struct SplitOutput {
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  std::vector<std::int8_t> partition;  // per entity: 0/1/2, -1 = not held out
  SplitStats stats;
};

/// Partitions the held-out entity class by seeded shuffle and routes each
/// triple to its held-out endpoint's partition. Triples joining held-out
/// entities from different partitions are dropped so no held-out test or
/// valid entity ever co-occurs with a train-partition one.
SplitOutput build_inductive_split(std::span<const Triple> triples,
                                  const SplitPolicy& policy,
                                  const SplitRatios& ratios, std::uint64_t seed,
                                  std::int32_t entity_count);

/// Plain seeded random triple split, no held-out class.
SplitOutput random_split(std::span<const Triple> triples,
                         const SplitRatios& ratios, std::uint64_t seed);

struct FilterRareResult {
  std::vector<Triple> triples;
  std::int64_t removed = 0;
};

/// Drops triples under the listed relations whose tail occurs fewer than
/// min_count times under those relations. Other relations pass through.
FilterRareResult filter_rare_tails(std::span<const Triple> triples,
                                   const std::vector<RelationId>& relations,
                                   int min_count);

struct BinYearsResult {
  std::vector<Triple> triples;
  std::int64_t dropped = 0;              // unparseable years
  std::vector<std::string> first_errors; // at most a handful, for the report
};

/// Replaces integer-year tails under the listed relations with the label of
/// their half-open bin [k*width, (k+1)*width); width 1 keeps the plain year.
BinYearsResult bin_years(std::span<const Triple> triples,
                         const std::vector<RelationId>& relations, int width,
                         Vocab& entities);

}  // namespace mkge
