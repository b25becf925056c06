#include "mkge/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace mkge {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) {
    double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double logistic_loss(double score, int label) {
  double x = label * score;
  return std::log1p(std::exp(-std::abs(x))) + std::max(0.0, -x);
}

double logistic_loss_grad(double score, int label) {
  double x = label * score;
  return -label * sigmoid(-x);
}

std::vector<LabeledTriple> sample_negatives(const Triple& positive, int k,
                                            Rng& rng,
                                            const CandidateRegistry& candidates,
                                            bool relation_tail_pool,
                                            const FilterIndex* filter) {
  if (k < 1) throw Error("training: negatives per positive must be >= 1");
  std::vector<LabeledTriple> out;
  out.reserve(static_cast<std::size_t>(k));
  const std::vector<EntityId>& all = candidates.all_entities;
  const std::vector<EntityId>& rel_tails =
      relation_tail_pool
          ? candidates.tails_by_relation[static_cast<std::size_t>(
                positive.relation)]
          : all;

  for (int i = 0; i < k; ++i) {
    bool corrupt_head = rng.below(2) == 0;
    const std::vector<EntityId>& pool = corrupt_head ? all : rel_tails;
    if (pool.size() < 2)
      throw Error("training: candidate pool of size " +
                  std::to_string(pool.size()) + " cannot supply corruptions");
    EntityId original = corrupt_head ? positive.head : positive.tail;

    Triple neg = positive;
    // redraw until the corrupted slot differs; a filter rejection gets a
    // bounded number of retries before the plain corruption is accepted
    for (int attempt = 0;; ++attempt) {
      EntityId c = pool[rng.below(pool.size())];
      if (c == original) continue;
      if (corrupt_head)
        neg.head = c;
      else
        neg.tail = c;
      if (filter && attempt < 100) {
        bool known = corrupt_head
                         ? filter->known_head(neg.head, neg.relation, neg.tail)
                         : filter->known_tail(neg.head, neg.relation, neg.tail);
        if (known) continue;
      }
      break;
    }
    out.push_back(LabeledTriple{neg, -1});
  }
  return out;
}

void adagrad_apply(std::span<double> params, std::span<const double> grads,
                   std::span<double> accum, double lr, double eps) {
  if (params.size() != grads.size() || params.size() != accum.size())
    throw Error("training: adagrad shape mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    if (g == 0.0) continue;
    accum[i] += g * g;
    params[i] -= lr * g / (std::sqrt(accum[i]) + eps);
  }
}

Adagrad::Adagrad(const Model& model, double lr, double eps)
    : lr_(lr), eps_(eps) {
  Gradients shapes(model);  // borrow the mirrored table shapes
  structural_.assign(shapes.view("structural").size(), 0.0);
  imaginary_.assign(shapes.view("imaginary").size(), 0.0);
  relation_.assign(shapes.view("relation").size(), 0.0);
  lift_.assign(shapes.view("lift").size(), 0.0);
  proj_visual_.assign(shapes.view("proj_visual").size(), 0.0);
  proj_textual_.assign(shapes.view("proj_textual").size(), 0.0);
}

std::span<const double> Adagrad::accumulator(std::string_view name) const {
  if (name == "structural") return structural_;
  if (name == "imaginary") return imaginary_;
  if (name == "relation") return relation_;
  if (name == "lift") return lift_;
  if (name == "beta") return std::span<const double>(&beta_, 1);
  if (name == "alpha") return std::span<const double>(alpha_.data(), 3);
  if (name == "proj_visual") return proj_visual_;
  if (name == "proj_textual") return proj_textual_;
  throw Error("training: unknown accumulator '" + std::string(name) + "'");
}

void Adagrad::step(Model& model, Gradients& grads) {
  const auto d = static_cast<std::size_t>(model.dim());
  const auto D = static_cast<std::size_t>(model.fused_dim());
  const auto rw = static_cast<std::size_t>(model.relation_width());

  auto views = model.param_views();
  auto params_of = [&](std::string_view name) -> std::span<double> {
    for (auto& pv : views)
      if (pv.name == name) return pv.values;
    return {};
  };

  for (EntityId e : grads.touched_structural()) {
    auto offset = static_cast<std::size_t>(e) * d;
    adagrad_apply(model.structural_row_mut(e),
                  grads.view("structural").subspan(offset, d),
                  std::span<double>(structural_).subspan(offset, d), lr_, eps_);
  }
  for (std::int32_t row : grads.touched_imaginary()) {
    auto offset = static_cast<std::size_t>(row) * D;
    adagrad_apply(model.imaginary_row_mut(row),
                  grads.view("imaginary").subspan(offset, D),
                  std::span<double>(imaginary_).subspan(offset, D), lr_, eps_);
  }
  std::span<double> rel_params = params_of("relation");
  for (RelationId r : grads.touched_relations()) {
    auto offset = static_cast<std::size_t>(r) * rw;
    adagrad_apply(rel_params.subspan(offset, rw),
                  grads.view("relation").subspan(offset, rw),
                  std::span<double>(relation_).subspan(offset, rw), lr_, eps_);
  }

  // dense parameters; zero gradients are exact no-ops
  for (auto& pv : views) {
    if (pv.name == "structural" || pv.name == "imaginary" ||
        pv.name == "relation")
      continue;
    std::span<double> acc;
    if (pv.name == "lift")
      acc = lift_;
    else if (pv.name == "beta")
      acc = std::span<double>(&beta_, 1);
    else if (pv.name == "alpha")
      acc = std::span<double>(alpha_.data(), 3);
    else if (pv.name == "proj_visual")
      acc = proj_visual_;
    else if (pv.name == "proj_textual")
      acc = proj_textual_;
    adagrad_apply(pv.values, grads.view(pv.name), acc, lr_, eps_);
  }

  grads.clear();
}

Trainer::Trainer(Model& model, const KnowledgeGraph& graph,
                 const CandidateRegistry& candidates,
                 const FilterIndex* filter, const TrainConfig& config,
                 std::uint64_t seed)
    : model_(model),
      graph_(graph),
      candidates_(candidates),
      filter_(filter),
      cfg_(config),
      rng_(derive_seed(seed, "train")),
      grads_(model),
      opt_(model, config.learning_rate, config.epsilon) {
  if (cfg_.learning_rate < 0 || cfg_.batch_size < 1 ||
      cfg_.negatives_per_positive < 1 || cfg_.epsilon <= 0)
    throw Error("training: invalid train config");
}

void Trainer::process(const Triple& triple, int label, double& loss_sum) {
  ScoreRecord rec;
  double s = model_.score_record(triple.head, triple.relation, triple.tail, rec);
  loss_sum += logistic_loss(s, label);
  model_.backward(rec, logistic_loss_grad(s, label), grads_);
}

EpochReport Trainer::train_epoch() {
  if (graph_.train.empty()) throw Error("training: train split is empty");
  auto start = std::chrono::steady_clock::now();

  std::vector<std::size_t> order(graph_.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng_.shuffle(order);

  EpochReport rep;
  double loss_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t end =
        std::min(order.size(), i + static_cast<std::size_t>(cfg_.batch_size));
    for (; i < end; ++i) {
      const Triple& pos = graph_.train[order[i]];
      process(pos, +1, loss_sum);
      ++rep.terms;
      auto negatives = sample_negatives(
          pos, cfg_.negatives_per_positive, rng_, candidates_,
          cfg_.relation_tail_pool, cfg_.filtered_negatives ? filter_ : nullptr);
      for (const LabeledTriple& neg : negatives) {
        process(neg.triple, neg.label, loss_sum);
        ++rep.terms;
      }
    }
    opt_.step(model_, grads_);
    ++rep.steps;
  }

  rep.mean_loss = rep.terms > 0 ? loss_sum / static_cast<double>(rep.terms) : 0.0;
  rep.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return rep;
}

bool EarlyStopMonitor::observe(double value) {
  ++count_;
  if (value > best_) {
    best_ = value;
    best_index_ = count_ - 1;
    since_best_ = 0;
    return false;
  }
  ++since_best_;
  return since_best_ >= patience_;
}

}  // namespace mkge
