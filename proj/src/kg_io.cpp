#include "mkge/kg_io.hpp"

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace mkge {

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

std::vector<Triple> load_triples(const std::filesystem::path& path,
                                 Vocab& entities, Vocab& relations) {
  std::ifstream in(path);
  if (!in)
    throw Error("kg: cannot open triple file '" + path.string() + "'");

  std::vector<Triple> triples;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw Error("kg: " + path.string() + ":" + std::to_string(lineno) +
                  ": expected head<TAB>relation<TAB>tail, got " +
                  std::to_string(fields.size()) + " fields");
    if (fields[0].empty() || fields[1].empty() || fields[2].empty())
      throw Error("kg: " + path.string() + ":" + std::to_string(lineno) +
                  ": empty field");
    Triple t;
    t.head = entities.intern(fields[0]);
    t.relation = relations.intern(fields[1]);
    t.tail = entities.intern(fields[2]);
    triples.push_back(t);
  }
  if (in.bad())
    throw Error("kg: I/O error while reading '" + path.string() + "'");
  return triples;
}

void save_triples(const std::filesystem::path& path,
                  std::span<const Triple> triples, const Vocab& entities,
                  const Vocab& relations) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("kg: cannot write triple file '" + path.string() + "'");
  for (const Triple& t : triples) {
    out << entities.name(t.head) << '\t' << relations.name(t.relation) << '\t'
        << entities.name(t.tail) << '\n';
  }
  if (!out)
    throw Error("kg: I/O error while writing '" + path.string() + "'");
}

void load_modality_registry(const std::filesystem::path& path,
                            KnowledgeGraph& graph) {
  std::ifstream in(path);
  if (!in)
    throw Error("kg: cannot open modality registry '" + path.string() + "'");

  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2)
      throw Error("kg: " + path.string() + ":" + std::to_string(lineno) +
                  ": expected entity<TAB>modalities");
    EntityId e = graph.entities.intern(fields[0]);
    if (graph.modalities.size() <=
        static_cast<std::size_t>(graph.entities.size()) - 1)
      graph.modalities.resize(static_cast<std::size_t>(graph.entities.size()));

    ModalitySet ms;
    std::string_view rest = fields[1];
    while (!rest.empty()) {
      std::size_t comma = rest.find(',');
      std::string_view name = rest.substr(0, comma);
      if (!name.empty()) {
        auto m = modality_from_name(name);
        if (!m)
          throw Error("kg: " + path.string() + ":" + std::to_string(lineno) +
                      ": unknown modality '" + std::string(name) + "'");
        ms.add(*m);
      }
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    graph.modalities[static_cast<std::size_t>(e)] = ms;
  }
  if (in.bad())
    throw Error("kg: I/O error while reading '" + path.string() + "'");
}

}  // namespace mkge
