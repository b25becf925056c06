#include "mkge/features.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

namespace mkge {

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// header token `key=<integer or name>`
std::string_view header_value(std::string_view token, std::string_view key) {
  if (token.size() > key.size() + 1 && token.substr(0, key.size()) == key &&
      token[key.size()] == '=')
    return token.substr(key.size() + 1);
  return {};
}

std::int64_t parse_int(std::string_view s, const std::string& context) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error("features: " + context + ": bad integer '" + std::string(s) +
                "'");
  return v;
}

}  // namespace

std::span<const double> FeatureMatrix::row(EntityId e) const {
  auto it = rows.find(e);
  if (it == rows.end())
    throw Error("features: entity id " + std::to_string(e) + " has no " +
                modality_name(modality) + " feature row");
  return std::span<const double>(values)
      .subspan(static_cast<std::size_t>(it->second) *
                   static_cast<std::size_t>(dim),
               static_cast<std::size_t>(dim));
}

std::uint64_t FeatureMatrix::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const unsigned char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  mix(reinterpret_cast<const unsigned char*>(values.data()),
      values.size() * sizeof(double));
  mix(reinterpret_cast<const unsigned char*>(row_entities.data()),
      row_entities.size() * sizeof(EntityId));
  return h;
}

FeatureMatrix load_features(const std::filesystem::path& path,
                            const Vocab& entities) {
  std::ifstream in(path);
  if (!in)
    throw Error("features: cannot open feature file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line))
    throw Error("features: '" + path.string() + "' is empty (missing #meta)");
  strip_cr(line);

  std::int64_t declared_count = -1;
  std::int32_t declared_dim = -1;
  std::optional<Modality> modality;
  {
    std::string_view rest = line;
    if (rest.substr(0, 5) != "#meta")
      throw Error("features: '" + path.string() +
                  "' must start with a #meta header");
    rest.remove_prefix(5);
    while (!rest.empty()) {
      std::size_t sp = rest.find(' ');
      std::string_view token = rest.substr(0, sp);
      if (!token.empty()) {
        if (auto v = header_value(token, "count"); !v.empty())
          declared_count = parse_int(v, path.string() + " header");
        else if (auto d = header_value(token, "dim"); !d.empty())
          declared_dim =
              static_cast<std::int32_t>(parse_int(d, path.string() + " header"));
        else if (auto m = header_value(token, "modality"); !m.empty())
          modality = modality_from_name(m);
      }
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp + 1);
    }
  }
  if (declared_count < 0 || declared_dim <= 0 || !modality)
    throw Error("features: '" + path.string() +
                "': header must declare count, dim and a known modality");

  FeatureMatrix fm;
  fm.modality = *modality;
  fm.dim = declared_dim;

  std::int64_t parsed_rows = 0;
  std::int64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;

    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error("features: " + path.string() + ":" + std::to_string(lineno) +
                  ": expected entity<TAB>values");
    std::string_view name(line.data(), tab);
    std::string_view rest(line.data() + tab + 1, line.size() - tab - 1);

    ++parsed_rows;
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(declared_dim));
    while (!rest.empty()) {
      std::size_t sp = rest.find(' ');
      std::string_view token = rest.substr(0, sp);
      if (!token.empty()) {
        double v = 0.0;
        auto [ptr, ec] =
            std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc() || ptr != token.data() + token.size())
          throw Error("features: " + path.string() + ":" +
                      std::to_string(lineno) + ": bad float '" +
                      std::string(token) + "'");
        if (!std::isfinite(v))
          throw Error("features: " + path.string() + ":" +
                      std::to_string(lineno) + ": non-finite value for '" +
                      std::string(name) + "'");
        row.push_back(v);
      }
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp + 1);
    }
    if (static_cast<std::int32_t>(row.size()) != declared_dim)
      throw Error("features: " + path.string() + ":" + std::to_string(lineno) +
                  ": row '" + std::string(name) + "' has " +
                  std::to_string(row.size()) + " values, expected " +
                  std::to_string(declared_dim));

    auto id = entities.find(name);
    if (!id) {
      ++fm.skipped;
      continue;
    }
    if (fm.rows.count(*id))
      throw Error("features: " + path.string() + ":" + std::to_string(lineno) +
                  ": duplicate row for '" + std::string(name) + "'");
    fm.rows.emplace(*id, static_cast<std::int32_t>(fm.row_entities.size()));
    fm.row_entities.push_back(*id);
    fm.values.insert(fm.values.end(), row.begin(), row.end());
  }
  if (in.bad())
    throw Error("features: I/O error while reading '" + path.string() + "'");
  if (parsed_rows != declared_count)
    throw Error("features: '" + path.string() + "': header declares count=" +
                std::to_string(declared_count) + " but file has " +
                std::to_string(parsed_rows) + " rows");
  return fm;
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& fm,
                   const Vocab& entities) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("features: cannot write '" + path.string() + "'");
  out << "#meta count=" << fm.row_entities.size() << " dim=" << fm.dim
      << " modality=" << modality_name(fm.modality) << '\n';
  char buf[64];
  for (std::size_t r = 0; r < fm.row_entities.size(); ++r) {
    out << entities.name(fm.row_entities[r]);
    for (std::int32_t j = 0; j < fm.dim; ++j) {
      double v = fm.values[r * static_cast<std::size_t>(fm.dim) +
                           static_cast<std::size_t>(j)];
      std::snprintf(buf, sizeof buf, "%.9g", v);
      out << (j == 0 ? '\t' : ' ') << buf;
    }
    out << '\n';
  }
  if (!out)
    throw Error("features: I/O error while writing '" + path.string() + "'");
}

ModalityProjection ModalityProjection::make_trainable(Modality m,
                                                      std::int32_t dim_in,
                                                      std::int32_t dim_out,
                                                      Rng& rng) {
  ModalityProjection p;
  p.modality = m;
  p.dim_in = dim_in;
  p.dim_out = dim_out;
  p.identity = false;
  p.weights.resize(static_cast<std::size_t>(dim_in) *
                   static_cast<std::size_t>(dim_out));
  double scale = 1.0 / std::sqrt(static_cast<double>(dim_in));
  for (double& w : p.weights) w = rng.uniform(-scale, scale);
  return p;
}

ModalityProjection ModalityProjection::make_identity(Modality m,
                                                     std::int32_t dim) {
  ModalityProjection p;
  p.modality = m;
  p.dim_in = dim;
  p.dim_out = dim;
  p.identity = true;
  return p;
}

std::vector<double> project(const FeatureMatrix& fm,
                            const ModalityProjection& proj, EntityId e) {
  std::span<const double> x = fm.row(e);
  if (fm.dim != proj.dim_in)
    throw Error("features: projection expects dim_in " +
                std::to_string(proj.dim_in) + " but matrix has dim " +
                std::to_string(fm.dim));
  if (proj.identity) return std::vector<double>(x.begin(), x.end());

  std::vector<double> out(static_cast<std::size_t>(proj.dim_out), 0.0);
  for (std::int32_t i = 0; i < proj.dim_in; ++i) {
    double xi = x[static_cast<std::size_t>(i)];
    if (xi == 0.0) continue;
    const double* wrow = proj.weights.data() +
                         static_cast<std::size_t>(i) *
                             static_cast<std::size_t>(proj.dim_out);
    for (std::int32_t j = 0; j < proj.dim_out; ++j)
      out[static_cast<std::size_t>(j)] += xi * wrow[j];
  }
  return out;
}

void project_gradient(const FeatureMatrix& fm, const ModalityProjection& proj,
                      EntityId e, std::span<const double> upstream,
                      std::span<double> grad_weights) {
  if (proj.identity)
    throw Error("features: identity projection has no trainable weights");
  std::span<const double> x = fm.row(e);
  if (static_cast<std::int32_t>(upstream.size()) != proj.dim_out ||
      grad_weights.size() != proj.weights.size())
    throw Error("features: gradient shape mismatch");
  for (std::int32_t i = 0; i < proj.dim_in; ++i) {
    double xi = x[static_cast<std::size_t>(i)];
    if (xi == 0.0) continue;
    double* grow = grad_weights.data() + static_cast<std::size_t>(i) *
                                             static_cast<std::size_t>(proj.dim_out);
    for (std::int32_t j = 0; j < proj.dim_out; ++j)
      grow[j] += xi * upstream[static_cast<std::size_t>(j)];
  }
}

}  // namespace mkge
