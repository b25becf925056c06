#include "mkge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mkge/vecmath.hpp"

namespace mkge {

RankingResult filtered_rank(const Triple& query, Direction direction,
                            const ScoreFn& score,
                            std::span<const EntityId> candidates,
                            const FilterIndex& filter) {
  const EntityId gold =
      direction == Direction::tail ? query.tail : query.head;

  auto candidate_score = [&](EntityId c) {
    return direction == Direction::tail
               ? score(query.head, query.relation, c)
               : score(c, query.relation, query.tail);
  };
  auto known_true = [&](EntityId c) {
    return direction == Direction::tail
               ? filter.known_tail(query.head, query.relation, c)
               : filter.known_head(c, query.relation, query.tail);
  };

  const double gold_score = candidate_score(gold);
  bool gold_found = false;
  std::int64_t higher = 0, ties = 0;
  for (EntityId c : candidates) {
    if (c == gold) {
      gold_found = true;
      continue;
    }
    if (known_true(c)) continue;
    double s = candidate_score(c);
    if (s > gold_score)
      ++higher;
    else if (s == gold_score)
      ++ties;
  }
  if (!gold_found)
    throw Error("evaluation: true answer (entity id " + std::to_string(gold) +
                ") is not in the candidate set for relation id " +
                std::to_string(query.relation));

  RankingResult res;
  res.query = query;
  res.direction = direction;
  // mean of optimistic and pessimistic rank under exact ties
  res.rank = 1.0 + static_cast<double>(higher) + static_cast<double>(ties) / 2.0;
  res.reciprocal = 1.0 / res.rank;
  res.hits1 = res.rank <= 1.0;
  res.hits3 = res.rank <= 3.0;
  res.hits10 = res.rank <= 10.0;
  return res;
}

MetricsReport evaluate(std::span<const Triple> split, Protocol protocol,
                       const ScoreFn& score,
                       const CandidateRegistry& candidates,
                       const FilterIndex& filter) {
  if (split.empty()) throw Error("evaluation: split is empty");

  MetricsReport rep;
  std::map<RelationId, double> rel_sum;

  auto add = [&](const RankingResult& r) {
    rep.mrr += r.reciprocal;
    rep.hits1 += r.hits1 ? 1.0 : 0.0;
    rep.hits3 += r.hits3 ? 1.0 : 0.0;
    rep.hits10 += r.hits10 ? 1.0 : 0.0;
    ++rep.count;
    rel_sum[r.query.relation] += r.reciprocal;
    ++rep.per_relation_count[r.query.relation];
  };

  for (const Triple& t : split) {
    if (protocol == Protocol::bidirectional) {
      add(filtered_rank(t, Direction::tail, score, candidates.all_entities,
                        filter));
      add(filtered_rank(t, Direction::head, score, candidates.all_entities,
                        filter));
    } else {
      const auto& pool =
          candidates.tails_by_relation[static_cast<std::size_t>(t.relation)];
      if (pool.empty())
        throw Error("evaluation: relation id " + std::to_string(t.relation) +
                    " has no tail candidates");
      add(filtered_rank(t, Direction::tail, score, pool, filter));
    }
  }

  const double n = static_cast<double>(rep.count);
  rep.mrr /= n;
  rep.hits1 /= n;
  rep.hits3 /= n;
  rep.hits10 /= n;
  for (auto& [rel, sum] : rel_sum)
    rep.per_relation_mrr[rel] =
        sum / static_cast<double>(rep.per_relation_count[rel]);
  return rep;
}

ModelScorer::ModelScorer(const Model& model)
    : model_(&model),
      complex_(is_complex(model.config().backbone)),
      width_(model.fused_dim()) {
  const auto n = static_cast<std::size_t>(model.entity_count());
  ready_.assign(n, 0);
  re_.assign(n * static_cast<std::size_t>(width_), 0.0);
  if (complex_) im_.assign(n * static_cast<std::size_t>(width_), 0.0);
}

void ModelScorer::ensure(EntityId e) const {
  if (ready_[static_cast<std::size_t>(e)]) return;
  EntityRecord rec;
  model_->represent(e, rec);
  auto offset = static_cast<std::size_t>(e) * static_cast<std::size_t>(width_);
  std::copy(rec.fused.begin(), rec.fused.end(), re_.begin() + offset);
  if (complex_) std::copy(rec.imag.begin(), rec.imag.end(), im_.begin() + offset);
  ready_[static_cast<std::size_t>(e)] = 1;
}

double ModelScorer::operator()(EntityId h, RelationId r, EntityId t) const {
  ensure(h);
  ensure(t);
  const auto W = static_cast<std::size_t>(width_);
  auto rep = [&](const std::vector<double>& plane, EntityId e) {
    return std::span<const double>(plane).subspan(
        static_cast<std::size_t>(e) * W, W);
  };
  std::span<const double> h_im, t_im;
  if (complex_) {
    h_im = rep(im_, h);
    t_im = rep(im_, t);
  }
  return model_->score_reps(rep(re_, h), h_im, r, rep(re_, t), t_im);
}

double zero_shot_score(const FeatureMatrix& head_features,
                       const FeatureMatrix& prompt_features, EntityId head,
                       EntityId tail) {
  return cosine(head_features.row(head), prompt_features.row(tail));
}

ScoreFn make_zero_shot_scorer(const FeatureMatrix& head_features,
                              const FeatureMatrix& prompt_features,
                              const Vocab& entities) {
  return [&head_features, &prompt_features, &entities](
             EntityId h, RelationId, EntityId t) {
    if (!head_features.has(h))
      throw Error("evaluation: no " +
                  std::string(modality_name(head_features.modality)) +
                  " feature for query entity '" + entities.name(h) + "'");
    if (!prompt_features.has(t))
      throw Error("evaluation: no prompt embedding for candidate '" +
                  entities.name(t) + "'");
    return zero_shot_score(head_features, prompt_features, h, t);
  };
}

double average_precision(std::span<const std::uint8_t> relevance) {
  std::int64_t relevant = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    if (!relevance[i]) continue;
    ++relevant;
    sum += static_cast<double>(relevant) / static_cast<double>(i + 1);
  }
  return relevant > 0 ? sum / static_cast<double>(relevant) : 0.0;
}

std::optional<double> intra_list_diversity(
    std::size_t k,
    const std::function<double(std::size_t, std::size_t)>& dissim) {
  if (k < 2) return std::nullopt;
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) sum += dissim(i, j);
  return 2.0 * sum / (static_cast<double>(k) * static_cast<double>(k - 1));
}

double feature_dissimilarity(std::span<const double> a,
                             std::span<const double> b) {
  double d = (1.0 - cosine(a, b)) / 2.0;
  return std::clamp(d, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// AttributeTable

std::int32_t AttributeTable::category_id(std::string_view name) {
  for (std::size_t i = 0; i < categories_.size(); ++i)
    if (categories_[i] == name) return static_cast<std::int32_t>(i);
  categories_.emplace_back(name);
  return static_cast<std::int32_t>(categories_.size() - 1);
}

AttributeTable AttributeTable::load(const std::filesystem::path& path,
                                    const Vocab& entities) {
  std::ifstream in(path);
  if (!in)
    throw Error("evaluation: cannot open attribute table '" + path.string() +
                "'");
  AttributeTable table;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw Error("evaluation: " + path.string() + ":" +
                  std::to_string(lineno) + ": expected entity<TAB>category<TAB>value");
    std::string_view ename(line.data(), t1);
    std::string_view cname(line.data() + t1 + 1, t2 - t1 - 1);
    std::string_view vname(line.data() + t2 + 1, line.size() - t2 - 1);
    auto e = entities.find(ename);
    if (!e) continue;  // annotations for entities outside the graph
    std::int32_t c = table.category_id(cname);
    std::int32_t v = table.value_names_.intern(vname);
    auto& per_entity = table.values_[*e];
    if (per_entity.size() <= static_cast<std::size_t>(c))
      per_entity.resize(static_cast<std::size_t>(c) + 1);
    per_entity[static_cast<std::size_t>(c)].push_back(v);
  }
  for (auto& [e, cats] : table.values_)
    for (auto& vals : cats) {
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    }
  return table;
}

bool AttributeTable::has_any(EntityId e, std::int32_t category) const {
  auto it = values_.find(e);
  if (it == values_.end()) return false;
  auto c = static_cast<std::size_t>(category);
  return c < it->second.size() && !it->second[c].empty();
}

bool AttributeTable::shares(EntityId a, EntityId b,
                            std::int32_t category) const {
  auto ia = values_.find(a);
  auto ib = values_.find(b);
  if (ia == values_.end() || ib == values_.end()) return false;
  auto c = static_cast<std::size_t>(category);
  if (c >= ia->second.size() || c >= ib->second.size()) return false;
  const auto& va = ia->second[c];
  const auto& vb = ib->second[c];
  // both sorted
  std::size_t i = 0, j = 0;
  while (i < va.size() && j < vb.size()) {
    if (va[i] == vb[j]) return true;
    if (va[i] < vb[j])
      ++i;
    else
      ++j;
  }
  return false;
}

double AttributeTable::attribute_dissimilarity(EntityId a, EntityId b) const {
  std::int64_t compared = 0, shared = 0;
  for (std::size_t c = 0; c < categories_.size(); ++c) {
    auto cat = static_cast<std::int32_t>(c);
    if (!has_any(a, cat) || !has_any(b, cat)) continue;
    ++compared;
    if (shares(a, b, cat)) ++shared;
  }
  if (compared == 0) return 1.0;
  return 1.0 - static_cast<double>(shared) / static_cast<double>(compared);
}

RetrievalReport retrieve_related(EntityId query, RelationId relation,
                                 const ScoreFn& score,
                                 std::span<const EntityId> candidates, int k,
                                 const AttributeTable& attributes,
                                 const FeatureMatrix* ild_features) {
  if (k < 1) throw Error("evaluation: retrieval k must be >= 1");
  if (attributes.empty())
    throw Error("evaluation: attribute table is empty; cannot judge relevance");

  std::vector<std::pair<double, EntityId>> scored;
  scored.reserve(candidates.size());
  for (EntityId c : candidates) {
    if (c == query) continue;  // the query never appears in its own list
    scored.emplace_back(score(query, relation, c), c);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (scored.size() > static_cast<std::size_t>(k))
    scored.resize(static_cast<std::size_t>(k));

  RetrievalReport rep;
  rep.k = k;
  rep.retrieved.reserve(scored.size());
  for (const auto& [s, c] : scored) rep.retrieved.push_back(c);

  const auto n = rep.retrieved.size();
  double ap_sum = 0.0;
  std::int64_t ap_count = 0;
  for (std::size_t c = 0; c < attributes.categories().size(); ++c) {
    auto cat = static_cast<std::int32_t>(c);
    if (!attributes.has_any(query, cat)) continue;
    std::vector<std::uint8_t> relevance(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      relevance[i] = attributes.shares(query, rep.retrieved[i], cat) ? 1 : 0;
    double ap = average_precision(relevance);
    rep.ap_per_category.emplace_back(attributes.categories()[c], ap);
    ap_sum += ap;
    ++ap_count;
  }
  rep.map = ap_count > 0 ? ap_sum / static_cast<double>(ap_count) : 0.0;

  rep.ild_attr = intra_list_diversity(n, [&](std::size_t i, std::size_t j) {
    return attributes.attribute_dissimilarity(rep.retrieved[i],
                                              rep.retrieved[j]);
  });

  if (ild_features) {
    std::vector<EntityId> with_features;
    for (EntityId e : rep.retrieved)
      if (ild_features->has(e)) with_features.push_back(e);
    rep.ild_feat = intra_list_diversity(
        with_features.size(), [&](std::size_t i, std::size_t j) {
          return feature_dissimilarity(ild_features->row(with_features[i]),
                                       ild_features->row(with_features[j]));
        });
  }
  return rep;
}

}  // namespace mkge
