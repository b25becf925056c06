#include "mkge/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "mkge/checkpoint.hpp"
#include "mkge/kg_io.hpp"
#include "mkge/split.hpp"
#include "mkge/training.hpp"

namespace mkge {

namespace {

namespace fs = std::filesystem;

std::string g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty())
    throw Error(std::string("config: no path configured for ") + what);
  if (!fs::exists(path))
    throw Error(std::string("config: ") + what + " file '" + path +
                "' does not exist");
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("I/O error while writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::vector<RelationId> resolve_relations(const std::vector<std::string>& names,
                                          const Vocab& relations,
                                          const char* what) {
  std::vector<RelationId> out;
  for (const std::string& n : names) {
    auto id = relations.find(n);
    if (!id)
      throw Error(std::string("split: unknown relation '") + n + "' in " +
                  what);
    out.push_back(*id);
  }
  return out;
}

std::string format_metrics(const MetricsReport& rep,
                           const KnowledgeGraph& graph,
                           const std::string& format) {
  std::string s;
  if (format == "kv") {
    s += "mrr\t" + g9(rep.mrr) + "\n";
    s += "hits1\t" + g9(rep.hits1) + "\n";
    s += "hits3\t" + g9(rep.hits3) + "\n";
    s += "hits10\t" + g9(rep.hits10) + "\n";
    s += "count\t" + std::to_string(rep.count) + "\n";
    for (const auto& [rel, mrr] : rep.per_relation_mrr)
      s += "per_relation." + graph.relations.name(rel) + ".mrr\t" + g9(mrr) +
           "\n";
  } else {
    s += "queries  " + std::to_string(rep.count) + "\n";
    s += "MRR      " + g9(rep.mrr) + "\n";
    s += "Hits@1   " + g9(rep.hits1) + "\n";
    s += "Hits@3   " + g9(rep.hits3) + "\n";
    s += "Hits@10  " + g9(rep.hits10) + "\n";
    if (!rep.per_relation_mrr.empty()) {
      s += "per-relation MRR:\n";
      for (const auto& [rel, mrr] : rep.per_relation_mrr)
        s += "  " + graph.relations.name(rel) + "  " + g9(mrr) + "  (" +
             std::to_string(rep.per_relation_count.at(rel)) + " queries)\n";
    }
  }
  return s;
}

std::string format_validation(const ValidationReport& rep,
                              const KnowledgeGraph& graph,
                              const std::string& format) {
  std::string s;
  if (format == "kv") {
    s += "entities\t" + std::to_string(rep.entities) + "\n";
    s += "relations\t" + std::to_string(rep.relations) + "\n";
    for (int i = 0; i < 3; ++i)
      s += std::string("triples.") + kSplitNames[static_cast<std::size_t>(i)] +
           "\t" + std::to_string(rep.triples[static_cast<std::size_t>(i)]) +
           "\n";
    for (int i = 0; i < 3; ++i)
      s += std::string("duplicates.") +
           kSplitNames[static_cast<std::size_t>(i)] + "\t" +
           std::to_string(
               graph.duplicates_removed[static_cast<std::size_t>(i)]) +
           "\n";
    s += "dangling\t" + std::to_string(rep.dangling) + "\n";
    s += "unseen_entities\t" + std::to_string(rep.unseen_entities) + "\n";
    s += "unseen_in_test\t" + std::to_string(rep.unseen_in_test) + "\n";
    for (Modality m : kModalityOrder)
      s += std::string("modality.") + modality_name(m) + "\t" +
           std::to_string(rep.modality_coverage[static_cast<std::size_t>(m)]) +
           "\n";
    s += "modality.none\t" + std::to_string(rep.modality_none) + "\n";
    s += "ok\t" + std::to_string(rep.ok() ? 1 : 0) + "\n";
  } else {
    s += "entities         " + std::to_string(rep.entities) + "\n";
    s += "relations        " + std::to_string(rep.relations) + "\n";
    s += "train triples    " + std::to_string(rep.triples[0]) + "\n";
    s += "valid triples    " + std::to_string(rep.triples[1]) + "\n";
    s += "test triples     " + std::to_string(rep.triples[2]) + "\n";
    s += "duplicates removed at ingestion  " +
         std::to_string(graph.duplicates_removed[0]) + "/" +
         std::to_string(graph.duplicates_removed[1]) + "/" +
         std::to_string(graph.duplicates_removed[2]) + "\n";
    s += "unseen entities  " + std::to_string(rep.unseen_entities) +
         " (in test: " + std::to_string(rep.unseen_in_test) + ")\n";
    s += "modalities       structural=" + std::to_string(rep.modality_coverage[0]) +
         " visual=" + std::to_string(rep.modality_coverage[1]) +
         " textual=" + std::to_string(rep.modality_coverage[2]) +
         " none=" + std::to_string(rep.modality_none) + "\n";
    if (rep.ok()) {
      s += "status           ok\n";
    } else {
      for (const std::string& f : rep.failures) s += "FAILURE: " + f + "\n";
    }
  }
  return s;
}

const FeatureMatrix* feature_ptr(const std::optional<FeatureMatrix>& fm) {
  return fm ? &*fm : nullptr;
}

}  // namespace

Workspace load_workspace(const RunConfig& c) {
  require_file(c.train_path, "paths.train");
  require_file(c.valid_path, "paths.valid");
  require_file(c.test_path, "paths.test");

  Workspace ws;
  ws.graph.train = load_triples(c.train_path, ws.graph.entities,
                                ws.graph.relations);
  ws.graph.valid = load_triples(c.valid_path, ws.graph.entities,
                                ws.graph.relations);
  ws.graph.test = load_triples(c.test_path, ws.graph.entities,
                               ws.graph.relations);

  bool explicit_registry = !c.modality_registry.empty();
  if (explicit_registry) {
    require_file(c.modality_registry, "paths.modality_registry");
    load_modality_registry(c.modality_registry, ws.graph);
  }

  if (!c.visual_features.empty()) {
    require_file(c.visual_features, "paths.visual_features");
    ws.visual = load_features(c.visual_features, ws.graph.entities);
    if (ws.visual->modality != Modality::visual)
      throw Error("config: '" + c.visual_features +
                  "' declares modality " +
                  modality_name(ws.visual->modality) +
                  " but is configured as the visual file");
  }
  if (!c.textual_features.empty()) {
    require_file(c.textual_features, "paths.textual_features");
    ws.textual = load_features(c.textual_features, ws.graph.entities);
    if (ws.textual->modality != Modality::textual)
      throw Error("config: '" + c.textual_features +
                  "' declares modality " +
                  modality_name(ws.textual->modality) +
                  " but is configured as the textual file");
  }

  if (!explicit_registry) {
    // Derive coverage: feature rows give visual/textual, train membership
    // gives structural.
    const auto n = static_cast<std::size_t>(ws.graph.entities.size());
    ws.graph.modalities.assign(n, ModalitySet{});
    std::vector<std::uint8_t> seen(n, 0);
    for (const Triple& t : ws.graph.train) {
      seen[static_cast<std::size_t>(t.head)] = 1;
      seen[static_cast<std::size_t>(t.tail)] = 1;
    }
    for (std::size_t e = 0; e < n; ++e) {
      auto id = static_cast<EntityId>(e);
      ModalitySet& ms = ws.graph.modalities[e];
      if (seen[e]) ms.add(Modality::structural);
      if (ws.visual && ws.visual->has(id)) ms.add(Modality::visual);
      if (ws.textual && ws.textual->has(id)) ms.add(Modality::textual);
    }
  }

  ws.graph.finalize();
  ws.filter = FilterIndex::build(ws.graph);
  ws.candidates = CandidateRegistry::build(ws.graph);
  return ws;
}

int cmd_inspect(const RunConfig& c, std::ostream& out) {
  Workspace ws = load_workspace(c);
  ValidationReport rep = validate_graph(ws.graph);
  out << format_validation(rep, ws.graph, c.format);
  return rep.ok() ? 0 : 1;
}

int cmd_build_split(const RunConfig& c, std::ostream& out) {
  require_file(c.triples, "paths.triples");
  Vocab entities, relations;
  std::vector<Triple> triples = load_triples(c.triples, entities, relations);

  std::vector<std::string> notes;
  if (!c.year_relations.empty()) {
    auto rels =
        resolve_relations(c.year_relations, relations, "split.year_relations");
    auto res = bin_years(triples, rels, c.year_width, entities);
    triples = std::move(res.triples);
    notes.push_back("year binning (width " + std::to_string(c.year_width) +
                    "): dropped " + std::to_string(res.dropped) +
                    " unparseable tails");
    for (const std::string& e : res.first_errors) notes.push_back("  " + e);
  }
  if (c.min_tail_count > 0) {
    std::vector<RelationId> rels;
    if (!c.rare_relations.empty()) {
      rels = resolve_relations(c.rare_relations, relations,
                               "split.rare_relations");
    } else {
      // default: every relation except the declared entity-to-entity ones
      auto exempt = resolve_relations(c.entity_relations, relations,
                                      "split.entity_relations");
      std::vector<std::uint8_t> skip(static_cast<std::size_t>(relations.size()),
                                     0);
      for (RelationId r : exempt) skip[static_cast<std::size_t>(r)] = 1;
      for (std::int32_t r = 0; r < relations.size(); ++r)
        if (!skip[static_cast<std::size_t>(r)]) rels.push_back(r);
    }
    auto res = filter_rare_tails(triples, rels, c.min_tail_count);
    triples = std::move(res.triples);
    notes.push_back("rare-tail filter (min " +
                    std::to_string(c.min_tail_count) + "): removed " +
                    std::to_string(res.removed) + " triples");
  }

  SplitRatios ratios{c.ratio_train, c.ratio_valid, c.ratio_test};
  SplitOutput split;
  if (c.heldout == "heads") {
    SplitPolicy policy;
    policy.heldout = SplitPolicy::Heldout::heads;
    policy.entity_relations = resolve_relations(c.entity_relations, relations,
                                                "split.entity_relations");
    split = build_inductive_split(triples, policy, ratios, c.seed,
                                  entities.size());
  } else {
    split = random_split(triples, ratios, c.seed);
  }

  fs::create_directories(c.out_dir);
  fs::path dir(c.out_dir);
  save_triples(dir / "train.txt", split.train, entities, relations);
  save_triples(dir / "valid.txt", split.valid, entities, relations);
  save_triples(dir / "test.txt", split.test, entities, relations);

  std::string stats;
  stats += "policy      " + c.heldout + "\n";
  stats += "seed        " + std::to_string(c.seed) + "\n";
  stats += "ratios      " + g9(c.ratio_train) + "/" + g9(c.ratio_valid) + "/" +
           g9(c.ratio_test) + "\n";
  stats += "triples     " + std::to_string(split.train.size()) + "/" +
           std::to_string(split.valid.size()) + "/" +
           std::to_string(split.test.size()) + "\n";
  if (c.heldout == "heads") {
    stats += "heldout     " + std::to_string(split.stats.heldout[0]) + "/" +
             std::to_string(split.stats.heldout[1]) + "/" +
             std::to_string(split.stats.heldout[2]) + "\n";
    stats += "removed     cross=" + std::to_string(split.stats.removed_cross) +
             " conflict=" + std::to_string(split.stats.removed_conflict) + "\n";
  }
  for (const std::string& n : notes) stats += n + "\n";
  write_file_atomic(dir / "split-stats.txt", stats);
  out << stats;
  return 0;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  Workspace ws = load_workspace(c);
  Model model;
  model.init(c.model, ws.graph, feature_ptr(ws.visual),
             feature_ptr(ws.textual), c.seed);

  fs::create_directories(c.out_dir);
  fs::path dir(c.out_dir);
  CheckpointMeta meta;
  meta.seed = c.seed;
  meta.learning_rate = c.train.learning_rate;
  meta.batch_size = c.train.batch_size;
  meta.negatives = c.train.negatives_per_positive;

  std::string best_bytes = serialize_checkpoint(model, meta);
  std::ofstream log(dir / "train.log", std::ios::binary);
  if (!log) throw Error("train: cannot write log under '" + c.out_dir + "'");

  if (c.train.epochs > 0) {
    Trainer trainer(model, ws.graph, ws.candidates, &ws.filter, c.train,
                    c.seed);
    EarlyStopMonitor monitor(c.train.patience);
    const bool has_valid = !ws.graph.valid.empty();
    bool validated = false;

    for (std::int32_t epoch = 1; epoch <= c.train.epochs; ++epoch) {
      EpochReport rep = trainer.train_epoch();
      std::string val = "-";
      bool stop = false;
      if (has_valid &&
          (epoch % c.train.eval_every == 0 || epoch == c.train.epochs)) {
        ModelScorer scorer(model);
        MetricsReport m = evaluate(ws.graph.valid, c.protocol, scorer,
                                   ws.candidates, ws.filter);
        val = g9(m.mrr);
        stop = monitor.observe(m.mrr);
        if (monitor.improved_last())
          best_bytes = serialize_checkpoint(model, meta);
        save_checkpoint(dir / "checkpoint-last.bin", model, meta);
        validated = true;
      }
      std::string line = std::to_string(epoch) + "\t" + g9(rep.mean_loss) +
                         "\t" + val + "\t" + g9(rep.seconds);
      log << line << "\n";
      out << line << "\n";
      if (stop) {
        out << "early stop after " << epoch << " epochs (best val_mrr "
            << g9(monitor.best()) << ")\n";
        break;
      }
    }
    if (!validated) best_bytes = serialize_checkpoint(model, meta);
  }

  write_file_atomic(dir / "checkpoint.bin", best_bytes);
  out << "checkpoint written to " << (dir / "checkpoint.bin").string() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& c, const std::string& checkpoint,
             std::ostream& out) {
  require_file(checkpoint, "checkpoint");
  CheckpointHeader header = read_checkpoint_header(checkpoint);
  if (header.backbone != c.model.backbone)
    throw Error(std::string("eval: checkpoint backbone '") +
                backbone_name(header.backbone) +
                "' does not match configured backbone '" +
                backbone_name(c.model.backbone) + "'");
  if (header.fusion != c.model.fusion)
    throw Error(std::string("eval: checkpoint fusion '") +
                fusion_name(header.fusion) +
                "' does not match configured fusion '" +
                fusion_name(c.model.fusion) + "'");
  if (header.dim != c.model.dim)
    throw Error("eval: checkpoint dim " + std::to_string(header.dim) +
                " does not match configured dim " +
                std::to_string(c.model.dim));

  Workspace ws = load_workspace(c);
  Model model = load_checkpoint(checkpoint, ws.graph, feature_ptr(ws.visual),
                                feature_ptr(ws.textual));
  ModelScorer scorer(model);
  MetricsReport rep =
      evaluate(ws.graph.test, c.protocol, scorer, ws.candidates, ws.filter);

  out << format_metrics(rep, ws.graph, c.format);
  fs::create_directories(c.out_dir);
  write_file_atomic(fs::path(c.out_dir) / "metrics.txt",
                    format_metrics(rep, ws.graph, "text"));
  write_file_atomic(fs::path(c.out_dir) / "metrics.kv",
                    format_metrics(rep, ws.graph, "kv"));
  return 0;
}

int cmd_zero_shot(const RunConfig& c, std::ostream& out) {
  Workspace ws = load_workspace(c);
  require_file(c.prompt_features, "paths.prompt_features");
  FeatureMatrix prompts = load_features(c.prompt_features, ws.graph.entities);

  const FeatureMatrix* head_feats =
      c.zero_shot_head_modality == Modality::visual ? feature_ptr(ws.visual)
                                                    : feature_ptr(ws.textual);
  if (!head_feats)
    throw Error(std::string("zero-shot: config selects ") +
                modality_name(c.zero_shot_head_modality) +
                " query features but that feature file is not loaded");

  ScoreFn scorer =
      make_zero_shot_scorer(*head_feats, prompts, ws.graph.entities);
  MetricsReport rep =
      evaluate(ws.graph.test, c.protocol, scorer, ws.candidates, ws.filter);

  out << format_metrics(rep, ws.graph, c.format);
  fs::create_directories(c.out_dir);
  write_file_atomic(fs::path(c.out_dir) / "zero-shot.kv",
                    format_metrics(rep, ws.graph, "kv"));
  return 0;
}

int cmd_retrieve(const RunConfig& c, const std::string& checkpoint,
                 const std::string& query, std::ostream& out) {
  require_file(checkpoint, "checkpoint");
  require_file(c.attributes, "paths.attributes");
  if (c.retrieve_relation.empty())
    throw Error("retrieve: retrieve.relation is not configured");

  Workspace ws = load_workspace(c);
  auto query_id = ws.graph.entities.find(query);
  if (!query_id)
    throw Error("retrieve: query entity '" + query + "' is not in the graph");
  auto rel = ws.graph.relations.find(c.retrieve_relation);
  if (!rel)
    throw Error("retrieve: relation '" + c.retrieve_relation +
                "' is not in the graph");

  AttributeTable attributes =
      AttributeTable::load(c.attributes, ws.graph.entities);
  Model model = load_checkpoint(checkpoint, ws.graph, feature_ptr(ws.visual),
                                feature_ptr(ws.textual));
  ModelScorer scorer(model);

  int k = c.retrieve_k > 0 ? c.retrieve_k : retrieve_default_k(c.retrieve_mode);
  const auto& pool =
      ws.candidates.tails_by_relation[static_cast<std::size_t>(*rel)];
  if (pool.empty())
    throw Error("retrieve: relation '" + c.retrieve_relation +
                "' has no candidates");
  const FeatureMatrix* ild_features = c.retrieve_mode == "artist"
                                          ? feature_ptr(ws.textual)
                                          : feature_ptr(ws.visual);

  RetrievalReport rep = retrieve_related(*query_id, *rel, scorer, pool, k,
                                         attributes, ild_features);

  std::string s;
  if (c.format == "kv") {
    for (const auto& [cat, ap] : rep.ap_per_category)
      s += "ap." + cat + "\t" + g9(ap) + "\n";
    s += "map\t" + g9(rep.map) + "\n";
    if (rep.ild_attr) s += "ild_attr\t" + g9(*rep.ild_attr) + "\n";
    if (rep.ild_feat) s += "ild_feat\t" + g9(*rep.ild_feat) + "\n";
    s += "k\t" + std::to_string(rep.k) + "\n";
  } else {
    s += "query    " + query + "\n";
    s += "relation " + c.retrieve_relation + "\n";
    s += "k        " + std::to_string(rep.k) + "\n";
    for (const auto& [cat, ap] : rep.ap_per_category)
      s += "AP[" + cat + "]  " + g9(ap) + "\n";
    s += "mAP      " + g9(rep.map) + "\n";
    s += "ILD-attr " + (rep.ild_attr ? g9(*rep.ild_attr) : "absent") + "\n";
    s += "ILD-feat " + (rep.ild_feat ? g9(*rep.ild_feat) : "absent") + "\n";
    s += "retrieved:\n";
    for (EntityId e : rep.retrieved)
      s += "  " + ws.graph.entities.name(e) + "\n";
  }
  out << s;
  fs::create_directories(c.out_dir);
  write_file_atomic(fs::path(c.out_dir) / "retrieval.txt", s);
  return 0;
}

}  // namespace mkge
