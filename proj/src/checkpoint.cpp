#include "mkge/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <type_traits>
#include <utility>

namespace mkge {

namespace {

constexpr char kMagic[8] = {'M', 'K', 'G', 'E', 'C', 'K', 'P', '1'};

struct Writer {
  std::string bytes;

  template <typename T>
  void pod(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const char* p = reinterpret_cast<const char*>(&v);
    bytes.append(p, sizeof(T));
  }
  void doubles(std::span<const double> v) {
    pod(static_cast<std::uint64_t>(v.size()));
    bytes.append(reinterpret_cast<const char*>(v.data()),
                 v.size() * sizeof(double));
  }
  void ints(std::span<const std::int32_t> v) {
    pod(static_cast<std::uint64_t>(v.size()));
    bytes.append(reinterpret_cast<const char*>(v.data()),
                 v.size() * sizeof(std::int32_t));
  }
};

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;

  void raw(void* dst, std::size_t n) {
    if (pos + n > bytes.size())
      throw Error("checkpoint: file truncated");
    std::memcpy(dst, bytes.data() + pos, n);
    pos += n;
  }
  template <typename T>
  T pod() {
    static_assert(std::is_trivially_copyable_v<T>);
    T v;
    raw(&v, sizeof(T));
    return v;
  }
  std::vector<double> doubles() {
    auto n = pod<std::uint64_t>();
    if (pos + n * sizeof(double) > bytes.size())
      throw Error("checkpoint: file truncated");
    std::vector<double> v(n);
    raw(v.data(), n * sizeof(double));
    return v;
  }
  std::vector<std::int32_t> ints() {
    auto n = pod<std::uint64_t>();
    if (pos + n * sizeof(std::int32_t) > bytes.size())
      throw Error("checkpoint: file truncated");
    std::vector<std::int32_t> v(n);
    raw(v.data(), n * sizeof(std::int32_t));
    return v;
  }
};

void fill_from(std::span<double> dst, const std::vector<double>& src,
               const char* what) {
  if (dst.size() != src.size())
    throw Error(std::string("checkpoint: ") + what + " table size " +
                std::to_string(src.size()) + " does not match model size " +
                std::to_string(dst.size()));
  std::copy(src.begin(), src.end(), dst.begin());
}

}  // namespace

struct CheckpointCodec {
  static std::string serialize(const Model& m, const CheckpointMeta& meta) {
    Writer w;
    w.bytes.append(kMagic, sizeof kMagic);
    w.pod(static_cast<std::uint32_t>(m.cfg_.backbone));
    w.pod(static_cast<std::uint32_t>(m.cfg_.fusion));
    w.pod(m.cfg_.dim);
    w.pod(static_cast<std::uint8_t>(m.cfg_.identity_projection ? 1 : 0));
    w.pod(static_cast<std::int32_t>(m.graph_->entities.size()));
    w.pod(static_cast<std::int32_t>(m.graph_->relations.size()));
    w.pod(meta.seed);
    w.pod(meta.learning_rate);
    w.pod(meta.batch_size);
    w.pod(meta.negatives);

    w.doubles(m.structural_);
    w.ints(m.imag_members_);
    w.doubles(m.imaginary_);
    w.pod(m.relw_);
    w.doubles(m.relation_);
    w.doubles(m.lift_);
    w.pod(m.beta_);
    w.pod(m.alpha_[0]);
    w.pod(m.alpha_[1]);
    w.pod(m.alpha_[2]);

    for (const ModalityProjection* p : {&m.proj_visual_, &m.proj_textual_}) {
      w.pod(p->dim_in);
      w.pod(static_cast<std::uint8_t>(p->identity ? 1 : 0));
      w.doubles(p->weights);
    }
    return w.bytes;
  }

  static Model restore(const std::string& bytes, const KnowledgeGraph& graph,
                       const FeatureMatrix* visual,
                       const FeatureMatrix* textual, CheckpointMeta* meta_out) {
    Reader r{bytes};
    char magic[8];
    r.raw(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
      throw Error("checkpoint: bad magic; not a model checkpoint");

    ModelConfig cfg;
    cfg.backbone = static_cast<Backbone>(r.pod<std::uint32_t>());
    cfg.fusion = static_cast<FusionKind>(r.pod<std::uint32_t>());
    cfg.dim = r.pod<std::int32_t>();
    cfg.identity_projection = r.pod<std::uint8_t>() != 0;
    auto n_entities = r.pod<std::int32_t>();
    auto n_relations = r.pod<std::int32_t>();

    CheckpointMeta meta;
    meta.seed = r.pod<std::uint64_t>();
    meta.learning_rate = r.pod<double>();
    meta.batch_size = r.pod<std::int32_t>();
    meta.negatives = r.pod<std::int32_t>();
    if (meta_out) *meta_out = meta;

    if (n_entities != graph.entities.size() ||
        n_relations != graph.relations.size())
      throw Error("checkpoint: vocabulary sizes (" +
                  std::to_string(n_entities) + " entities, " +
                  std::to_string(n_relations) + " relations) do not match the "
                  "loaded graph (" + std::to_string(graph.entities.size()) +
                  ", " + std::to_string(graph.relations.size()) + ")");

    auto structural = r.doubles();
    auto members = r.ints();
    auto imaginary = r.doubles();
    auto relw = r.pod<std::int32_t>();
    auto relation = r.doubles();
    auto lift = r.doubles();
    auto beta = r.pod<double>();
    std::array<double, 3> alpha{r.pod<double>(), r.pod<double>(),
                                r.pod<double>()};

    Model m;
    m.init(cfg, graph, visual, textual, meta.seed);
    if (relw != m.relw_)
      throw Error("checkpoint: relation width " + std::to_string(relw) +
                  " does not match model width " + std::to_string(m.relw_));
    if (members != m.imag_members_)
      throw Error(
          "checkpoint: imaginary-table membership does not match the graph's "
          "seen/modality structure");
    fill_from(m.structural_, structural, "structural");
    fill_from(m.imaginary_, imaginary, "imaginary");
    fill_from(m.relation_, relation, "relation");
    fill_from(m.lift_, lift, "lift");
    m.beta_ = beta;
    m.alpha_ = alpha;

    const std::pair<ModalityProjection*, const char*> projections[] = {
        {&m.proj_visual_, "visual"}, {&m.proj_textual_, "textual"}};
    for (auto [p, name] : projections) {
      auto dim_in = r.pod<std::int32_t>();
      bool identity = r.pod<std::uint8_t>() != 0;
      auto weights = r.doubles();
      if (dim_in > 0 && !p->present())
        throw Error(std::string("checkpoint: was trained with ") + name +
                    " features but none are loaded");
      if (dim_in == 0 && p->present())
        throw Error(std::string("checkpoint: was trained without ") + name +
                    " features but a feature file is loaded");
      if (dim_in != p->dim_in || identity != p->identity)
        throw Error(std::string("checkpoint: ") + name +
                    " projection shape does not match the loaded features");
      fill_from(p->weights, weights, "projection");
    }
    return m;
  }
};

std::string serialize_checkpoint(const Model& model,
                                 const CheckpointMeta& meta) {
  return CheckpointCodec::serialize(model, meta);
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const CheckpointMeta& meta) {
  std::string bytes = serialize_checkpoint(model, meta);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out)
      throw Error("checkpoint: cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
      throw Error("checkpoint: I/O error while writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Model restore_checkpoint(const std::string& bytes, const KnowledgeGraph& graph,
                         const FeatureMatrix* visual,
                         const FeatureMatrix* textual,
                         CheckpointMeta* meta_out) {
  return CheckpointCodec::restore(bytes, graph, visual, textual, meta_out);
}

Model load_checkpoint(const std::filesystem::path& path,
                      const KnowledgeGraph& graph, const FeatureMatrix* visual,
                      const FeatureMatrix* textual, CheckpointMeta* meta_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("checkpoint: cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return restore_checkpoint(bytes, graph, visual, textual, meta_out);
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("checkpoint: cannot open '" + path.string() + "'");
  std::string bytes(8 + 4 + 4 + 4 + 1 + 4 + 4 + 8 + 8 + 4 + 4, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw Error("checkpoint: '" + path.string() + "' is truncated");

  Reader r{bytes};
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error("checkpoint: '" + path.string() +
                "' is not a model checkpoint");
  CheckpointHeader h;
  h.backbone = static_cast<Backbone>(r.pod<std::uint32_t>());
  h.fusion = static_cast<FusionKind>(r.pod<std::uint32_t>());
  h.dim = r.pod<std::int32_t>();
  (void)r.pod<std::uint8_t>();
  h.entities = r.pod<std::int32_t>();
  h.relations = r.pod<std::int32_t>();
  h.seed = r.pod<std::uint64_t>();
  h.meta.seed = h.seed;
  h.meta.learning_rate = r.pod<double>();
  h.meta.batch_size = r.pod<std::int32_t>();
  h.meta.negatives = r.pod<std::int32_t>();
  return h;
}

}  // namespace mkge
