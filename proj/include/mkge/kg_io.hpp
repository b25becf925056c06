#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mkge/kg.hpp"
#include "mkge/types.hpp"

namespace mkge {

/// Reads a triple file: one `head<TAB>relation<TAB>tail` per line, UTF-8,
/// `#`-prefixed lines ignored. New names are interned in appearance order.
std::vector<Triple> load_triples(const std::filesystem::path& path,
                                 Vocab& entities, Vocab& relations);

void save_triples(const std::filesystem::path& path,
                  std::span<const Triple> triples, const Vocab& entities,
                  const Vocab& relations);

/// Reads `entity<TAB>comma-separated modality names` lines into the graph's
/// modality registry. Unknown entities are interned.
void load_modality_registry(const std::filesystem::path& path,
                            KnowledgeGraph& graph);

}  // namespace mkge
