#include "mkge/types.hpp"

namespace mkge {

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::structural: return "structural";
    case Modality::visual: return "visual";
    case Modality::textual: return "textual";
  }
  return "?";
}

std::optional<Modality> modality_from_name(std::string_view name) {
  if (name == "structural") return Modality::structural;
  if (name == "visual") return Modality::visual;
  if (name == "textual") return Modality::textual;
  return std::nullopt;
}

std::int32_t Vocab::intern(std::string_view name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  std::int32_t id = static_cast<std::int32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<std::int32_t> Vocab::find(std::string_view name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::name(std::int32_t id) const {
  if (id < 0 || id >= size()) throw Error("vocab: id out of range");
  return names_[static_cast<std::size_t>(id)];
}

}  // namespace mkge
