#include "mkge/model.hpp"

#include <algorithm>
#include <cmath>

#include "mkge/rng.hpp"
#include "mkge/scoring.hpp"
#include "mkge/vecmath.hpp"

namespace mkge {

const char* backbone_name(Backbone b) {
  switch (b) {
    case Backbone::transe: return "transe";
    case Backbone::distmult: return "distmult";
    case Backbone::complex_bilinear: return "complex";
    case Backbone::rotate: return "rotate";
  }
  return "?";
}

std::optional<Backbone> backbone_from_name(std::string_view name) {
  if (name == "transe") return Backbone::transe;
  if (name == "distmult") return Backbone::distmult;
  if (name == "complex") return Backbone::complex_bilinear;
  if (name == "rotate") return Backbone::rotate;
  return std::nullopt;
}

const char* fusion_name(FusionKind f) {
  switch (f) {
    case FusionKind::average: return "average";
    case FusionKind::concat: return "concat";
    case FusionKind::weighted: return "weighted";
  }
  return "?";
}

std::optional<FusionKind> fusion_from_name(std::string_view name) {
  if (name == "average") return FusionKind::average;
  if (name == "concat") return FusionKind::concat;
  if (name == "weighted") return FusionKind::weighted;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Gradients

Gradients::Gradients(const Model& m) {
  dim_ = m.cfg_.dim;
  fused_ = m.fused_;
  relw_ = m.relw_;
  structural_.assign(m.structural_.size(), 0.0);
  imaginary_.assign(m.imaginary_.size(), 0.0);
  relation_.assign(m.relation_.size(), 0.0);
  lift_.assign(m.lift_.size(), 0.0);
  proj_visual_.assign(m.proj_visual_.weights.size(), 0.0);
  proj_textual_.assign(m.proj_textual_.weights.size(), 0.0);
  struct_mark_.assign(static_cast<std::size_t>(m.entity_count()), 0);
  imag_mark_.assign(m.imag_members_.size(), 0);
  rel_mark_.assign(static_cast<std::size_t>(m.relation_count()), 0);
}

void Gradients::clear() {
  for (EntityId e : tstruct_) {
    std::fill_n(structural_.begin() +
                    static_cast<std::size_t>(e) * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_), 0.0);
    struct_mark_[static_cast<std::size_t>(e)] = 0;
  }
  tstruct_.clear();
  for (std::int32_t r : timag_) {
    std::fill_n(imaginary_.begin() + static_cast<std::size_t>(r) *
                                         static_cast<std::size_t>(fused_),
                static_cast<std::size_t>(fused_), 0.0);
    imag_mark_[static_cast<std::size_t>(r)] = 0;
  }
  timag_.clear();
  for (RelationId r : trel_) {
    std::fill_n(relation_.begin() + static_cast<std::size_t>(r) *
                                        static_cast<std::size_t>(relw_),
                static_cast<std::size_t>(relw_), 0.0);
    rel_mark_[static_cast<std::size_t>(r)] = 0;
  }
  trel_.clear();
  std::fill(lift_.begin(), lift_.end(), 0.0);
  beta_ = 0.0;
  alpha_ = {0.0, 0.0, 0.0};
  std::fill(proj_visual_.begin(), proj_visual_.end(), 0.0);
  std::fill(proj_textual_.begin(), proj_textual_.end(), 0.0);
}

std::span<double> Gradients::structural_row(EntityId e) {
  if (!struct_mark_[static_cast<std::size_t>(e)]) {
    struct_mark_[static_cast<std::size_t>(e)] = 1;
    tstruct_.push_back(e);
  }
  return std::span<double>(structural_)
      .subspan(static_cast<std::size_t>(e) * static_cast<std::size_t>(dim_),
               static_cast<std::size_t>(dim_));
}

std::span<double> Gradients::imaginary_row(std::int32_t row) {
  if (!imag_mark_[static_cast<std::size_t>(row)]) {
    imag_mark_[static_cast<std::size_t>(row)] = 1;
    timag_.push_back(row);
  }
  return std::span<double>(imaginary_)
      .subspan(static_cast<std::size_t>(row) * static_cast<std::size_t>(fused_),
               static_cast<std::size_t>(fused_));
}

std::span<double> Gradients::relation_row(RelationId r) {
  if (!rel_mark_[static_cast<std::size_t>(r)]) {
    rel_mark_[static_cast<std::size_t>(r)] = 1;
    trel_.push_back(r);
  }
  return std::span<double>(relation_)
      .subspan(static_cast<std::size_t>(r) * static_cast<std::size_t>(relw_),
               static_cast<std::size_t>(relw_));
}

std::span<double> Gradients::proj(Modality m) {
  return m == Modality::visual ? std::span<double>(proj_visual_)
                               : std::span<double>(proj_textual_);
}

std::span<const double> Gradients::view(std::string_view name) const {
  if (name == "structural") return structural_;
  if (name == "imaginary") return imaginary_;
  if (name == "relation") return relation_;
  if (name == "lift") return lift_;
  if (name == "beta") return std::span<const double>(&beta_, 1);
  if (name == "alpha") return std::span<const double>(alpha_.data(), 3);
  if (name == "proj_visual") return proj_visual_;
  if (name == "proj_textual") return proj_textual_;
  throw Error("model: unknown gradient view '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Model

void Model::init(const ModelConfig& config, const KnowledgeGraph& graph,
                 const FeatureMatrix* visual, const FeatureMatrix* textual,
                 std::uint64_t seed) {
  if (!graph.finalized())
    throw Error("model: graph must be finalized before model init");
  if (config.dim <= 0) throw Error("model: dim must be positive");
  cfg_ = config;
  graph_ = &graph;
  visual_ = visual;
  textual_ = textual;
  const std::int32_t d = cfg_.dim;
  fused_ = cfg_.fusion == FusionKind::concat ? 3 * d : d;
  relw_ = cfg_.backbone == Backbone::complex_bilinear ? 2 * fused_ : fused_;

  const auto ne = static_cast<std::size_t>(graph.entities.size());
  const auto nr = static_cast<std::size_t>(graph.relations.size());

  Rng rng(derive_seed(seed, "model-init"));
  const double scale = 0.5 / std::sqrt(static_cast<double>(d));

  structural_.assign(ne * static_cast<std::size_t>(d), 0.0);
  for (double& v : structural_) v = rng.uniform(-scale, scale);

  imag_row_.assign(ne, -1);
  imag_members_.clear();
  imaginary_.clear();
  if (is_complex(cfg_.backbone)) {
    for (std::size_t e = 0; e < ne; ++e) {
      if (graph.seen[e] && graph.modalities[e].has(Modality::structural)) {
        imag_row_[e] = static_cast<std::int32_t>(imag_members_.size());
        imag_members_.push_back(static_cast<EntityId>(e));
      }
    }
    imaginary_.assign(imag_members_.size() * static_cast<std::size_t>(fused_),
                      0.0);
    for (double& v : imaginary_) v = rng.uniform(-scale, scale);
  }

  relation_.assign(nr * static_cast<std::size_t>(relw_), 0.0);
  if (cfg_.backbone == Backbone::rotate) {
    const double pi = std::acos(-1.0);
    for (double& v : relation_) v = rng.uniform(-pi, pi);
  } else {
    for (double& v : relation_) v = rng.uniform(-scale, scale);
  }

  lift_.clear();
  beta_ = 0.0;
  if (is_complex(cfg_.backbone)) {
    lift_.assign(static_cast<std::size_t>(fused_) *
                     static_cast<std::size_t>(fused_),
                 0.0);
    const double lscale = 1.0 / std::sqrt(static_cast<double>(fused_));
    for (double& v : lift_) v = rng.uniform(-lscale, lscale);
  }

  alpha_ = {1.0 / 3, 1.0 / 3, 1.0 / 3};

  auto make_proj = [&](const FeatureMatrix* fm, Modality m) {
    if (!fm) return ModalityProjection{};
    if (cfg_.identity_projection) {
      if (fm->dim != d)
        throw Error(std::string("model: identity projection needs ") +
                    modality_name(m) + " feature dim " + std::to_string(d) +
                    ", got " + std::to_string(fm->dim));
      return ModalityProjection::make_identity(m, d);
    }
    return ModalityProjection::make_trainable(m, fm->dim, d, rng);
  };
  proj_visual_ = make_proj(visual_, Modality::visual);
  proj_textual_ = make_proj(textual_, Modality::textual);
}

std::vector<double> Model::mask_structural(EntityId e) const {
  std::vector<double> out(static_cast<std::size_t>(cfg_.dim), 0.0);
  if (graph_->is_seen(e)) {
    auto row = structural_row(e);
    std::copy(row.begin(), row.end(), out.begin());
  }
  return out;
}

void Model::gather(EntityId e, EntityRecord& rec) const {
  rec = EntityRecord{};
  rec.entity = e;
  ModalitySet ms = graph_->modality_set(e);
  if (ms.empty())
    throw Error("model: entity '" + graph_->entities.name(e) +
                "' has no modalities and no training occurrences; it cannot "
                "be represented");
  for (Modality m : kModalityOrder) {
    if (!ms.has(m)) continue;
    rec.present.add(m);
    auto idx = static_cast<std::size_t>(m);
    switch (m) {
      case Modality::structural:
        rec.part[idx] = mask_structural(e);
        break;
      case Modality::visual:
        if (!visual_ || !proj_visual_.present())
          throw Error("model: entity '" + graph_->entities.name(e) +
                      "' declares the visual modality but no visual features "
                      "are loaded");
        rec.part[idx] = project(*visual_, proj_visual_, e);
        break;
      case Modality::textual:
        if (!textual_ || !proj_textual_.present())
          throw Error("model: entity '" + graph_->entities.name(e) +
                      "' declares the textual modality but no textual "
                      "features are loaded");
        rec.part[idx] = project(*textual_, proj_textual_, e);
        break;
    }
  }
}

void Model::fuse(EntityRecord& rec) const {
  if (rec.present.empty()) throw Error("model: fuse over empty modality set");
  const auto d = static_cast<std::size_t>(cfg_.dim);
  switch (cfg_.fusion) {
    case FusionKind::average: {
      rec.fused.assign(d, 0.0);
      for (Modality m : kModalityOrder)
        if (rec.present.has(m))
          axpy(1.0, rec.part[static_cast<std::size_t>(m)], rec.fused);
      const double inv = 1.0 / rec.present.count();
      if (rec.present.count() > 1)
        for (double& v : rec.fused) v *= inv;
      break;
    }
    case FusionKind::concat: {
      rec.fused.assign(3 * d, 0.0);
      for (Modality m : kModalityOrder) {
        if (!rec.present.has(m)) continue;
        const auto& part = rec.part[static_cast<std::size_t>(m)];
        std::copy(part.begin(), part.end(),
                  rec.fused.begin() + static_cast<std::size_t>(m) * d);
      }
      break;
    }
    case FusionKind::weighted: {
      rec.fused.assign(d, 0.0);
      for (Modality m : kModalityOrder)
        if (rec.present.has(m))
          axpy(alpha_[static_cast<std::size_t>(m)],
               rec.part[static_cast<std::size_t>(m)], rec.fused);
      break;
    }
  }
}

void Model::apply_lift(std::span<const double> in, std::span<double> out) const {
  const auto D = static_cast<std::size_t>(fused_);
  for (std::size_t i = 0; i < D; ++i) {
    const double* row = lift_.data() + i * D;
    double s = 0.0;
    for (std::size_t j = 0; j < D; ++j) s += row[j] * in[j];
    out[i] = s;
  }
}

void Model::complexify(EntityRecord& rec) const {
  if (!is_complex(cfg_.backbone)) return;
  const auto D = static_cast<std::size_t>(fused_);
  rec.imag.assign(D, 0.0);
  std::int32_t row = imag_row_[static_cast<std::size_t>(rec.entity)];
  if (row >= 0) {
    rec.imag_learned = true;
    const double* src = imaginary_.data() + static_cast<std::size_t>(row) * D;
    std::copy(src, src + D, rec.imag.begin());
  } else {
    rec.imag_learned = false;
    apply_lift(rec.fused, rec.imag);
    const double gamma = std::tanh(beta_);
    for (double& v : rec.imag) v *= gamma;
  }
}

void Model::represent(EntityId e, EntityRecord& rec) const {
  gather(e, rec);
  fuse(rec);
  complexify(rec);
}

std::span<const double> Model::structural_row(EntityId e) const {
  return std::span<const double>(structural_)
      .subspan(static_cast<std::size_t>(e) * static_cast<std::size_t>(cfg_.dim),
               static_cast<std::size_t>(cfg_.dim));
}

std::span<double> Model::structural_row_mut(EntityId e) {
  return std::span<double>(structural_)
      .subspan(static_cast<std::size_t>(e) * static_cast<std::size_t>(cfg_.dim),
               static_cast<std::size_t>(cfg_.dim));
}

std::span<const double> Model::relation_row(RelationId r) const {
  return std::span<const double>(relation_)
      .subspan(static_cast<std::size_t>(r) * static_cast<std::size_t>(relw_),
               static_cast<std::size_t>(relw_));
}

std::span<double> Model::imaginary_row_mut(std::int32_t row) {
  return std::span<double>(imaginary_)
      .subspan(static_cast<std::size_t>(row) * static_cast<std::size_t>(fused_),
               static_cast<std::size_t>(fused_));
}

const ModalityProjection& Model::projection(Modality m) const {
  if (m == Modality::visual) return proj_visual_;
  if (m == Modality::textual) return proj_textual_;
  throw Error("model: structural modality has no projection");
}

std::int64_t Model::entity_count() const { return graph_->entities.size(); }
std::int64_t Model::relation_count() const { return graph_->relations.size(); }

double Model::score_reps(std::span<const double> h_re,
                         std::span<const double> h_im, RelationId r,
                         std::span<const double> t_re,
                         std::span<const double> t_im) const {
  auto rel = relation_row(r);
  switch (cfg_.backbone) {
    case Backbone::transe: return score_transe(h_re, rel, t_re);
    case Backbone::distmult: return score_distmult(h_re, rel, t_re);
    case Backbone::complex_bilinear: {
      const auto D = static_cast<std::size_t>(fused_);
      return score_complex(h_re, h_im, rel.first(D), rel.subspan(D), t_re,
                           t_im);
    }
    case Backbone::rotate: return score_rotate(h_re, h_im, rel, t_re, t_im);
  }
  throw Error("model: unknown backbone");
}

double Model::score_record(EntityId h, RelationId r, EntityId t,
                           ScoreRecord& rec) const {
  represent(h, rec.head);
  represent(t, rec.tail);
  rec.relation = r;
  rec.value = score_reps(rec.head.fused, rec.head.imag, r, rec.tail.fused,
                         rec.tail.imag);
  return rec.value;
}

double Model::score(EntityId h, RelationId r, EntityId t) const {
  ScoreRecord rec;
  return score_record(h, r, t, rec);
}

void Model::backward(const ScoreRecord& rec, double upstream,
                     Gradients& g) const {
  const auto D = static_cast<std::size_t>(fused_);
  std::vector<double> gh_re(D, 0.0), gt_re(D, 0.0);
  std::vector<double> gh_im, gt_im;
  auto grel = g.relation_row(rec.relation);
  auto rel = relation_row(rec.relation);

  switch (cfg_.backbone) {
    case Backbone::transe:
      score_transe_grad(rec.head.fused, rel, rec.tail.fused, upstream, gh_re,
                        grel, gt_re);
      break;
    case Backbone::distmult:
      score_distmult_grad(rec.head.fused, rel, rec.tail.fused, upstream, gh_re,
                          grel, gt_re);
      break;
    case Backbone::complex_bilinear:
      gh_im.assign(D, 0.0);
      gt_im.assign(D, 0.0);
      score_complex_grad(rec.head.fused, rec.head.imag, rel.first(D),
                         rel.subspan(D), rec.tail.fused, rec.tail.imag,
                         upstream, gh_re, gh_im, grel.first(D), grel.subspan(D),
                         gt_re, gt_im);
      break;
    case Backbone::rotate:
      gh_im.assign(D, 0.0);
      gt_im.assign(D, 0.0);
      score_rotate_grad(rec.head.fused, rec.head.imag, rel, rec.tail.fused,
                        rec.tail.imag, upstream, gh_re, gh_im, grel, gt_re,
                        gt_im);
      break;
  }

  backward_entity(rec.head, gh_re, gh_im, g);
  backward_entity(rec.tail, gt_re, gt_im, g);
}

void Model::backward_entity(const EntityRecord& rec,
                            std::span<const double> g_re,
                            std::span<const double> g_im, Gradients& g) const {
  const auto D = static_cast<std::size_t>(fused_);
  std::vector<double> gfused(g_re.begin(), g_re.end());

  if (is_complex(cfg_.backbone) && !g_im.empty()) {
    if (rec.imag_learned) {
      auto gi = g.imaginary_row(imag_row_[static_cast<std::size_t>(rec.entity)]);
      for (std::size_t i = 0; i < D; ++i) gi[i] += g_im[i];
    } else {
      // u = tanh(beta) * P * r
      const double gamma = std::tanh(beta_);
      std::vector<double> pr(D, 0.0);
      apply_lift(rec.fused, pr);
      g.beta() += dot(g_im, pr) * (1.0 - gamma * gamma);
      auto gl = g.lift();
      for (std::size_t i = 0; i < D; ++i) {
        const double gi = gamma * g_im[i];
        if (gi == 0.0) continue;
        double* grow = gl.data() + i * D;
        for (std::size_t j = 0; j < D; ++j) grow[j] += gi * rec.fused[j];
      }
      for (std::size_t i = 0; i < D; ++i) {
        const double gi = gamma * g_im[i];
        if (gi == 0.0) continue;
        const double* prow = lift_.data() + i * D;
        for (std::size_t j = 0; j < D; ++j) gfused[j] += gi * prow[j];
      }
    }
  }

  const auto d = static_cast<std::size_t>(cfg_.dim);
  const int n = rec.present.count();
  std::vector<double> gpart(d, 0.0);
  for (Modality m : kModalityOrder) {
    if (!rec.present.has(m)) continue;
    const auto idx = static_cast<std::size_t>(m);
    switch (cfg_.fusion) {
      case FusionKind::average:
        for (std::size_t j = 0; j < d; ++j) gpart[j] = gfused[j] / n;
        break;
      case FusionKind::concat:
        for (std::size_t j = 0; j < d; ++j) gpart[j] = gfused[idx * d + j];
        break;
      case FusionKind::weighted: {
        const double a = alpha_[idx];
        for (std::size_t j = 0; j < d; ++j) gpart[j] = a * gfused[j];
        g.alpha()[idx] +=
            dot(std::span<const double>(gfused.data(), d), rec.part[idx]);
        break;
      }
    }
    switch (m) {
      case Modality::structural:
        if (graph_->is_seen(rec.entity)) {
          auto gs = g.structural_row(rec.entity);
          for (std::size_t j = 0; j < d; ++j) gs[j] += gpart[j];
        }
        break;
      case Modality::visual:
        if (!proj_visual_.identity)
          project_gradient(*visual_, proj_visual_, rec.entity, gpart,
                           g.proj(Modality::visual));
        break;
      case Modality::textual:
        if (!proj_textual_.identity)
          project_gradient(*textual_, proj_textual_, rec.entity, gpart,
                           g.proj(Modality::textual));
        break;
    }
  }
}

std::vector<ParamView> Model::param_views() {
  std::vector<ParamView> v;
  v.push_back({"structural", structural_});
  if (!imaginary_.empty()) v.push_back({"imaginary", imaginary_});
  v.push_back({"relation", relation_});
  if (is_complex(cfg_.backbone)) {
    v.push_back({"lift", lift_});
    v.push_back({"beta", std::span<double>(&beta_, 1)});
  }
  if (cfg_.fusion == FusionKind::weighted)
    v.push_back({"alpha", std::span<double>(alpha_.data(), 3)});
  if (proj_visual_.present() && !proj_visual_.identity)
    v.push_back({"proj_visual", proj_visual_.weights});
  if (proj_textual_.present() && !proj_textual_.identity)
    v.push_back({"proj_textual", proj_textual_.weights});
  return v;
}

}  // namespace mkge
