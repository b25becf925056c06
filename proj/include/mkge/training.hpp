#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mkge/kg.hpp"
#include "mkge/model.hpp"
#include "mkge/rng.hpp"
#include "mkge/types.hpp"

namespace mkge {

struct TrainConfig {
  double learning_rate = 0.1;
  std::int32_t batch_size = 512;
  std::int32_t negatives_per_positive = 10;
  std::int32_t epochs = 200;
  double epsilon = 1e-10;
  std::int32_t eval_every = 5;   // validation cadence, in epochs
  std::int32_t patience = 10;    // evaluations without improvement
  bool filtered_negatives = false;
  bool relation_tail_pool = false;  // corrupt tails within the relation's pool
};

struct LabeledTriple {
  Triple triple;
  int label = 1;  // +1 positive, -1 negative
};

/// Corrupts head or tail (fair coin per negative) with a uniform draw from
/// the pool, redrawn until it differs from the original entity.
std::vector<LabeledTriple> sample_negatives(const Triple& positive, int k,
                                            Rng& rng,
                                            const CandidateRegistry& candidates,
                                            bool relation_tail_pool,
                                            const FilterIndex* filter);

/// log(1 + exp(-y * score)) in the overflow-safe form.
double logistic_loss(double score, int label);
/// d loss / d score.
double logistic_loss_grad(double score, int label);

/// One elementwise Adagrad update: acc += g^2; p -= lr * g / (sqrt(acc) + eps).
void adagrad_apply(std::span<double> params, std::span<const double> grads,
                   std::span<double> accum, double lr, double eps);

/// Per-parameter squared-gradient accumulators, shaped like the model.
/// Rows untouched by a batch keep both their value and their accumulator.
class Adagrad {
 public:
  Adagrad(const Model& model, double lr, double eps);

  /// Applies accumulated gradients and clears them.
  void step(Model& model, Gradients& grads);

  std::span<const double> accumulator(std::string_view name) const;

 private:
  double lr_, eps_;
  std::vector<double> structural_, imaginary_, relation_, lift_;
  double beta_ = 0.0;
  std::array<double, 3> alpha_{};
  std::vector<double> proj_visual_, proj_textual_;
};

struct EpochReport {
  double mean_loss = 0.0;
  std::int64_t steps = 0;
  std::int64_t terms = 0;  // positives + negatives contributing to the loss
  double seconds = 0.0;
};

class Trainer {
 public:
  Trainer(Model& model, const KnowledgeGraph& graph,
          const CandidateRegistry& candidates, const FilterIndex* filter,
          const TrainConfig& config, std::uint64_t seed);

  EpochReport train_epoch();

 private:
  void process(const Triple& triple, int label, double& loss_sum);

  Model& model_;
  const KnowledgeGraph& graph_;
  const CandidateRegistry& candidates_;
  const FilterIndex* filter_;
  TrainConfig cfg_;
  Rng rng_;
  Gradients grads_;
  Adagrad opt_;
};

/// Stops when the watched metric has not improved for `patience` consecutive
/// observations. Higher is better.
class EarlyStopMonitor {
 public:
  explicit EarlyStopMonitor(int patience) : patience_(patience) {}

  /// Returns true when training should stop.
  bool observe(double value);

  double best() const { return best_; }
  int best_index() const { return best_index_; }
  bool improved_last() const { return since_best_ == 0; }

 private:
  int patience_;
  double best_ = -1e300;
  int since_best_ = 0;
  int count_ = 0;
  int best_index_ = -1;
};

}  // namespace mkge
