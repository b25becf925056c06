#include "mkge/split.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "mkge/rng.hpp"

namespace mkge {

namespace {

struct PartitionCounts {
  std::int64_t train, valid, test;
};

PartitionCounts partition_counts(std::int64_t n, const SplitRatios& r,
                                 const char* what) {
  double sum = r.train + r.valid + r.test;
  if (r.train < 0 || r.valid < 0 || r.test < 0 || std::abs(sum - 1.0) > 1e-9)
    throw Error("split: ratios must be non-negative and sum to 1");
  PartitionCounts c;
  c.valid = static_cast<std::int64_t>(std::floor(r.valid * static_cast<double>(n)));
  c.test = static_cast<std::int64_t>(std::floor(r.test * static_cast<double>(n)));
  c.train = n - c.valid - c.test;
  if (c.train <= 0 || c.valid <= 0 || c.test <= 0)
    throw Error(std::string("split: a ") + what +
                " partition would be empty (n=" + std::to_string(n) + ")");
  return c;
}

}  // namespace

SplitOutput build_inductive_split(std::span<const Triple> triples,
                                  const SplitPolicy& policy,
                                  const SplitRatios& ratios, std::uint64_t seed,
                                  std::int32_t entity_count) {
  std::vector<EntityId> heldout;
  if (policy.heldout == SplitPolicy::Heldout::explicit_list) {
    heldout = policy.heldout_entities;
    std::sort(heldout.begin(), heldout.end());
    heldout.erase(std::unique(heldout.begin(), heldout.end()), heldout.end());
  } else {
    std::vector<std::uint8_t> is_head(static_cast<std::size_t>(entity_count), 0);
    for (const Triple& t : triples) is_head[static_cast<std::size_t>(t.head)] = 1;
    for (std::int32_t e = 0; e < entity_count; ++e)
      if (is_head[static_cast<std::size_t>(e)]) heldout.push_back(e);
  }
  if (heldout.empty()) throw Error("split: held-out entity class is empty");

  PartitionCounts counts =
      partition_counts(static_cast<std::int64_t>(heldout.size()), ratios,
                       "held-out entity");

  Rng rng(derive_seed(seed, "inductive-split"));
  rng.shuffle(heldout);

  SplitOutput out;
  out.partition.assign(static_cast<std::size_t>(entity_count), -1);
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    std::int8_t p = i < static_cast<std::size_t>(counts.train)        ? 0
                    : i < static_cast<std::size_t>(counts.train + counts.valid)
                        ? 1
                        : 2;
    out.partition[static_cast<std::size_t>(heldout[i])] = p;
    ++out.stats.heldout[static_cast<std::size_t>(p)];
  }

  std::unordered_set<RelationId> e2e(policy.entity_relations.begin(),
                                     policy.entity_relations.end());

  for (const Triple& t : triples) {
    std::int8_t ph = out.partition[static_cast<std::size_t>(t.head)];
    std::int8_t pt = out.partition[static_cast<std::size_t>(t.tail)];
    // Two held-out entities in different partitions would leak one of them
    // into the other's split, so such triples are dropped outright. The
    // declared entity-to-entity relations are where this is expected;
    // anything else is counted as a policy conflict.
    if (ph >= 0 && pt >= 0 && ph != pt) {
      if (e2e.count(t.relation))
        ++out.stats.removed_cross;
      else
        ++out.stats.removed_conflict;
      continue;
    }
    std::int8_t p = ph >= 0 ? ph : pt;
    if (p < 0) p = 0;  // background triples stay in train
    switch (p) {
      case 0: out.train.push_back(t); break;
      case 1: out.valid.push_back(t); break;
      default: out.test.push_back(t); break;
    }
  }
  if (out.train.empty() || out.valid.empty() || out.test.empty())
    throw Error("split: a triple partition is empty after routing");
  return out;
}

SplitOutput random_split(std::span<const Triple> triples,
                         const SplitRatios& ratios, std::uint64_t seed) {
  PartitionCounts counts = partition_counts(
      static_cast<std::int64_t>(triples.size()), ratios, "triple");

  std::vector<std::size_t> order(triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, "random-split"));
  rng.shuffle(order);

  SplitOutput out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Triple& t = triples[order[i]];
    if (i < static_cast<std::size_t>(counts.train))
      out.train.push_back(t);
    else if (i < static_cast<std::size_t>(counts.train + counts.valid))
      out.valid.push_back(t);
    else
      out.test.push_back(t);
  }
  return out;
}

FilterRareResult filter_rare_tails(std::span<const Triple> triples,
                                   const std::vector<RelationId>& relations,
                                   int min_count) {
  if (min_count < 1) throw Error("split: min_count must be >= 1");
  std::unordered_set<RelationId> watched(relations.begin(), relations.end());

  std::unordered_map<EntityId, int> tail_count;
  for (const Triple& t : triples)
    if (watched.count(t.relation)) ++tail_count[t.tail];

  FilterRareResult res;
  res.triples.reserve(triples.size());
  for (const Triple& t : triples) {
    if (watched.count(t.relation) && tail_count[t.tail] < min_count) {
      ++res.removed;
      continue;
    }
    res.triples.push_back(t);
  }
  return res;
}

BinYearsResult bin_years(std::span<const Triple> triples,
                         const std::vector<RelationId>& relations, int width,
                         Vocab& entities) {
  if (width < 1) throw Error("split: bin width must be >= 1");
  std::unordered_set<RelationId> watched(relations.begin(), relations.end());

  BinYearsResult res;
  res.triples.reserve(triples.size());
  for (const Triple& t : triples) {
    if (!watched.count(t.relation)) {
      res.triples.push_back(t);
      continue;
    }
    const std::string& name = entities.name(t.tail);
    long year = 0;
    auto [ptr, ec] =
        std::from_chars(name.data(), name.data() + name.size(), year);
    if (ec != std::errc() || ptr != name.data() + name.size()) {
      ++res.dropped;
      if (res.first_errors.size() < 5)
        res.first_errors.push_back("unparseable year '" + name + "'");
      continue;
    }
    long k = year >= 0 ? year / width : -((-year + width - 1) / width);
    long start = k * width;
    long end = start + width - 1;
    std::string label = start == end ? std::to_string(start)
                                     : std::to_string(start) + "-" +
                                           std::to_string(end);
    Triple binned = t;
    binned.tail = entities.intern(label);
    res.triples.push_back(binned);
  }
  return res;
}

}  // namespace mkge
