#include "mkge/kg.hpp"

#include <algorithm>
#include <unordered_set>

namespace mkge {

namespace {

std::int64_t dedup_in_place(std::vector<Triple>& triples) {
  std::unordered_set<Triple, TripleHash> seen;
  seen.reserve(triples.size());
  std::vector<Triple> kept;
  kept.reserve(triples.size());
  for (const Triple& t : triples) {
    if (seen.insert(t).second) kept.push_back(t);
  }
  std::int64_t removed =
      static_cast<std::int64_t>(triples.size() - kept.size());
  triples = std::move(kept);
  return removed;
}

}  // namespace

void KnowledgeGraph::finalize() {
  const auto n = static_cast<std::size_t>(entities.size());
  if (modalities.size() < n) modalities.resize(n);

  duplicates_removed[0] = dedup_in_place(train);
  duplicates_removed[1] = dedup_in_place(valid);
  duplicates_removed[2] = dedup_in_place(test);

  seen.assign(n, 0);
  for (const Triple& t : train) {
    seen[static_cast<std::size_t>(t.head)] = 1;
    seen[static_cast<std::size_t>(t.tail)] = 1;
  }

  // A trained entity must stay representable even when no modality was
  // declared for it.
  for (std::size_t e = 0; e < n; ++e) {
    if (seen[e] && modalities[e].empty())
      modalities[e].add(Modality::structural);
  }
}

FilterIndex FilterIndex::build(const KnowledgeGraph& graph) {
  FilterIndex fi;
  for (Split s : {Split::train, Split::valid, Split::test}) {
    for (const Triple& t : graph.split(s)) {
      fi.fwd_[key(t.head, t.relation)].push_back(t.tail);
      fi.bwd_[key(t.relation, t.tail)].push_back(t.head);
    }
  }
  auto compact = [](auto& map) {
    for (auto& [k, v] : map) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  };
  compact(fi.fwd_);
  compact(fi.bwd_);
  return fi;
}

bool FilterIndex::known_tail(EntityId h, RelationId r, EntityId t) const {
  auto it = fwd_.find(key(h, r));
  if (it == fwd_.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), t);
}

bool FilterIndex::known_head(EntityId h, RelationId r, EntityId t) const {
  auto it = bwd_.find(key(r, t));
  if (it == bwd_.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), h);
}

std::span<const EntityId> FilterIndex::tails(EntityId h, RelationId r) const {
  auto it = fwd_.find(key(h, r));
  if (it == fwd_.end()) return {};
  return it->second;
}

std::span<const EntityId> FilterIndex::heads(RelationId r, EntityId t) const {
  auto it = bwd_.find(key(r, t));
  if (it == bwd_.end()) return {};
  return it->second;
}

CandidateRegistry CandidateRegistry::build(const KnowledgeGraph& graph) {
  CandidateRegistry reg;
  reg.tails_by_relation.resize(static_cast<std::size_t>(graph.relations.size()));
  for (Split s : {Split::train, Split::valid, Split::test}) {
    for (const Triple& t : graph.split(s))
      reg.tails_by_relation[static_cast<std::size_t>(t.relation)].push_back(
          t.tail);
  }
  for (auto& v : reg.tails_by_relation) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  reg.all_entities.resize(static_cast<std::size_t>(graph.entities.size()));
  for (std::size_t i = 0; i < reg.all_entities.size(); ++i)
    reg.all_entities[i] = static_cast<EntityId>(i);
  return reg;
}

ValidationReport validate_graph(const KnowledgeGraph& graph) {
  ValidationReport rep;
  rep.entities = graph.entities.size();
  rep.relations = graph.relations.size();

  const std::array<const std::vector<Triple>*, 3> splits = {
      &graph.train, &graph.valid, &graph.test};

  auto in_range = [&](const Triple& t) {
    return t.head >= 0 && t.head < rep.entities && t.tail >= 0 &&
           t.tail < rep.entities && t.relation >= 0 &&
           t.relation < rep.relations;
  };

  for (int s = 0; s < 3; ++s) {
    rep.triples[static_cast<std::size_t>(s)] =
        static_cast<std::int64_t>(splits[static_cast<std::size_t>(s)]->size());
    std::unordered_set<Triple, TripleHash> uniq;
    for (const Triple& t : *splits[static_cast<std::size_t>(s)]) {
      if (!in_range(t)) ++rep.dangling;
      if (!uniq.insert(t).second)
        ++rep.duplicates[static_cast<std::size_t>(s)];
    }
  }
  if (rep.dangling > 0)
    rep.failures.push_back("dangling ids: " + std::to_string(rep.dangling) +
                           " triples reference out-of-range ids");

  {
    std::unordered_set<Triple, TripleHash> tr(graph.train.begin(),
                                              graph.train.end());
    std::unordered_set<Triple, TripleHash> va(graph.valid.begin(),
                                              graph.valid.end());
    for (const Triple& t : graph.valid)
      if (tr.count(t)) ++rep.overlap_train_valid;
    for (const Triple& t : graph.test) {
      if (tr.count(t)) ++rep.overlap_train_test;
      if (va.count(t)) ++rep.overlap_valid_test;
    }
    if (rep.overlap_train_valid || rep.overlap_train_test ||
        rep.overlap_valid_test)
      rep.failures.push_back("splits are not disjoint");
  }

  if (graph.finalized() && rep.dangling == 0) {
    std::vector<std::uint8_t> derived(
        static_cast<std::size_t>(rep.entities), 0);
    for (const Triple& t : graph.train) {
      derived[static_cast<std::size_t>(t.head)] = 1;
      derived[static_cast<std::size_t>(t.tail)] = 1;
    }
    rep.seen_consistent = derived == graph.seen;
    if (!rep.seen_consistent)
      rep.failures.push_back("seen flags do not match the train split");

    for (std::int64_t e = 0; e < rep.entities; ++e)
      if (!graph.seen[static_cast<std::size_t>(e)]) ++rep.unseen_entities;

    std::unordered_set<EntityId> unseen_test;
    for (const Triple& t : graph.test) {
      if (!graph.seen[static_cast<std::size_t>(t.head)])
        unseen_test.insert(t.head);
      if (!graph.seen[static_cast<std::size_t>(t.tail)])
        unseen_test.insert(t.tail);
    }
    rep.unseen_in_test = static_cast<std::int64_t>(unseen_test.size());

    for (std::int64_t e = 0; e < rep.entities; ++e) {
      ModalitySet ms = graph.modalities[static_cast<std::size_t>(e)];
      if (ms.empty()) ++rep.modality_none;
      for (Modality m : kModalityOrder)
        if (ms.has(m)) ++rep.modality_coverage[static_cast<std::size_t>(m)];
    }
  } else if (!graph.finalized()) {
    rep.seen_consistent = false;
    rep.failures.push_back("graph not finalized");
  }

  return rep;
}

}  // namespace mkge
