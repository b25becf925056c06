#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "helpers.hpp"
#include "mkge/kg.hpp"
#include "mkge/kg_io.hpp"
#include "mkge/rng.hpp"

using namespace mkge;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("vocab interns in first-appearance order and round-trips") {
  Vocab v;
  CHECK(v.intern("b") == 0);
  CHECK(v.intern("a") == 1);
  CHECK(v.intern("b") == 0);
  CHECK(v.size() == 2);
  CHECK(v.name(0) == "b");
  CHECK(v.name(1) == "a");
  CHECK(*v.find("a") == 1);
  CHECK(!v.find("missing"));

  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    std::string name = "n" + std::to_string(rng.below(500));
    auto id = v.intern(name);
    CHECK(v.name(id) == name);
  }
}

TEST_CASE("load_triples interns ids and preserves line order") {
  TempDir tmp;
  write_file(tmp.file("t.txt"), "a\tR\tb\nb\tR\tc\n");
  Vocab ents, rels;
  auto triples = load_triples(tmp.file("t.txt"), ents, rels);
  REQUIRE(triples.size() == 2);
  CHECK(ents.size() == 3);
  CHECK(rels.size() == 1);
  CHECK(triples[0].head == 0);
  CHECK(triples[0].tail == 1);
  CHECK(triples[1].head == 1);
  CHECK(triples[1].tail == 2);
}

TEST_CASE("load_triples skips comments and blank lines") {
  TempDir tmp;
  write_file(tmp.file("t.txt"), "# header\n\na\tR\tb\n");
  Vocab ents, rels;
  CHECK(load_triples(tmp.file("t.txt"), ents, rels).size() == 1);
}

TEST_CASE("load_triples on an empty file leaves vocabularies unchanged") {
  TempDir tmp;
  write_file(tmp.file("t.txt"), "");
  Vocab ents, rels;
  ents.intern("pre");
  auto triples = load_triples(tmp.file("t.txt"), ents, rels);
  CHECK(triples.empty());
  CHECK(ents.size() == 1);
  CHECK(rels.size() == 0);
}

TEST_CASE("load_triples reports the offending line") {
  TempDir tmp;
  write_file(tmp.file("t.txt"), "a\tR\tb\na\tR\n");
  Vocab ents, rels;
  CHECK_THROWS_WITH_AS(load_triples(tmp.file("t.txt"), ents, rels),
                       doctest::Contains(":2:"), Error);
  CHECK_THROWS_AS(load_triples(tmp.file("missing.txt"), ents, rels), Error);
}

TEST_CASE("triple round-trip through save and load") {
  TempDir tmp;
  auto g = testutil::make_graph({{"a", "R", "b"}, {"b", "S", "c"}});
  save_triples(tmp.file("out.txt"), g.train, g.entities, g.relations);
  Vocab ents, rels;
  auto back = load_triples(tmp.file("out.txt"), ents, rels);
  REQUIRE(back.size() == g.train.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(ents.name(back[i].head) == g.entities.name(g.train[i].head));
    CHECK(rels.name(back[i].relation) ==
          g.relations.name(g.train[i].relation));
    CHECK(ents.name(back[i].tail) == g.entities.name(g.train[i].tail));
  }
}

TEST_CASE("filter index covers singletons, unions and duplicates") {
  auto g = testutil::make_graph({{"a", "R", "b"}, {"a", "R", "c"}}, {},
                                {{"a", "R", "b"}});
  auto fi = FilterIndex::build(g);
  EntityId a = *g.entities.find("a");
  EntityId b = *g.entities.find("b");
  EntityId c = *g.entities.find("c");
  RelationId r = *g.relations.find("R");

  CHECK(fi.known_tail(a, r, b));
  CHECK(fi.known_tail(a, r, c));
  CHECK(!fi.known_tail(b, r, a));
  CHECK(fi.known_head(a, r, b));
  CHECK(fi.tails(a, r).size() == 2);  // duplicate across splits collapses
  CHECK(fi.heads(r, b).size() == 1);
}

TEST_CASE("filter index is complete over every split") {
  Rng rng(99);
  for (int round = 0; round < 20; ++round) {
    KnowledgeGraph g;
    int ne = 3 + static_cast<int>(rng.below(20));
    for (int e = 0; e < ne; ++e) g.entities.intern("e" + std::to_string(e));
    g.relations.intern("r0");
    g.relations.intern("r1");
    auto random_triple = [&]() {
      Triple t;
      t.head = static_cast<EntityId>(rng.below(static_cast<std::uint64_t>(ne)));
      t.relation = static_cast<RelationId>(rng.below(2));
      t.tail = static_cast<EntityId>(rng.below(static_cast<std::uint64_t>(ne)));
      return t;
    };
    for (int i = 0; i < 30; ++i) g.train.push_back(random_triple());
    for (int i = 0; i < 10; ++i) g.valid.push_back(random_triple());
    for (int i = 0; i < 10; ++i) g.test.push_back(random_triple());
    g.finalize();

    auto fi = FilterIndex::build(g);
    for (Split s : {Split::train, Split::valid, Split::test})
      for (const Triple& t : g.split(s)) {
        CHECK(fi.known_tail(t.head, t.relation, t.tail));
        CHECK(fi.known_head(t.head, t.relation, t.tail));
      }
  }
}

TEST_CASE("candidate registry collects per-relation tails over all splits") {
  auto g = testutil::make_graph({{"a", "R", "b"}}, {{"c", "R", "d"}},
                                {{"a", "S", "c"}});
  auto reg = CandidateRegistry::build(g);
  RelationId r = *g.relations.find("R");
  RelationId s = *g.relations.find("S");
  CHECK(reg.tails_by_relation[static_cast<std::size_t>(r)].size() == 2);
  CHECK(reg.tails_by_relation[static_cast<std::size_t>(s)].size() == 1);
  CHECK(reg.all_entities.size() ==
        static_cast<std::size_t>(g.entities.size()));
}

TEST_CASE("finalize dedups splits and derives seen flags") {
  KnowledgeGraph g;
  EntityId a = g.entities.intern("a");
  EntityId b = g.entities.intern("b");
  EntityId c = g.entities.intern("c");
  RelationId r = g.relations.intern("R");
  g.train = {{a, r, b}, {a, r, b}};
  g.test = {{a, r, c}};
  g.finalize();
  CHECK(g.train.size() == 1);
  CHECK(g.duplicates_removed[0] == 1);
  CHECK(g.is_seen(a));
  CHECK(g.is_seen(b));
  CHECK(!g.is_seen(c));  // test-only entity
  // trained entities with no declared modalities default to structural
  CHECK(g.modality_set(a).has(Modality::structural));
  CHECK(!g.modality_set(c).has(Modality::structural));
}

TEST_CASE("validate reports counts and the inductive census") {
  KnowledgeGraph g;
  EntityId a = g.entities.intern("a");
  EntityId b = g.entities.intern("b");
  EntityId c = g.entities.intern("c");
  RelationId r = g.relations.intern("R");
  g.train = {{a, r, b}};
  g.test = {{a, r, c}};
  g.finalize();

  auto rep = validate_graph(g);
  CHECK(rep.entities == 3);
  CHECK(rep.relations == 1);
  CHECK(rep.triples[0] == 1);
  CHECK(rep.triples[2] == 1);
  CHECK(rep.unseen_entities == 1);
  CHECK(rep.unseen_in_test == 1);
  CHECK(rep.ok());

  KnowledgeGraph dup = testutil::make_graph({{"a", "R", "b"}});
  dup.train.push_back(dup.train[0]);  // duplicate within train
  auto rep2 = validate_graph(dup);
  CHECK(rep2.duplicates[0] == 1);
}

TEST_CASE("validate flags split overlap") {
  auto g = testutil::make_graph({{"a", "R", "b"}}, {}, {{"a", "R", "b"}});
  auto rep = validate_graph(g);
  CHECK(rep.overlap_train_test == 1);
  CHECK(!rep.ok());
}

TEST_CASE("split disjointness holds for disjoint construction") {
  auto g = testutil::make_graph({{"a", "R", "b"}}, {{"a", "R", "c"}},
                                {{"b", "R", "c"}});
  auto rep = validate_graph(g);
  CHECK(rep.overlap_train_valid == 0);
  CHECK(rep.overlap_train_test == 0);
  CHECK(rep.overlap_valid_test == 0);
  CHECK(rep.ok());
}

TEST_CASE("modality registry parses lists and rejects unknown names") {
  TempDir tmp;
  write_file(tmp.file("reg.txt"), "a\tvisual,textual\nb\tstructural\nc\t\n");
  KnowledgeGraph g;
  g.entities.intern("a");
  write_file(tmp.file("t.txt"), "a\tR\tb\n");
  g.train = load_triples(tmp.file("t.txt"), g.entities, g.relations);
  load_modality_registry(tmp.file("reg.txt"), g);
  g.finalize();

  CHECK(g.modality_set(*g.entities.find("a")) ==
        ModalitySet::of({Modality::visual, Modality::textual}));
  CHECK(g.modality_set(*g.entities.find("b")) ==
        ModalitySet::of({Modality::structural}));
  // c had an explicitly empty set and is unseen, so it stays empty
  CHECK(g.modality_set(*g.entities.find("c")).empty());

  write_file(tmp.file("bad.txt"), "a\tholographic\n");
  KnowledgeGraph g2;
  CHECK_THROWS_WITH_AS(load_modality_registry(tmp.file("bad.txt"), g2),
                       doctest::Contains("holographic"), Error);
}
