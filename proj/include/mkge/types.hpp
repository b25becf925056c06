#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mkge {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
  EntityId head = -1;
  RelationId relation = -1;
  EntityId tail = -1;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t x = static_cast<std::uint32_t>(t.head);
    x = x * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint32_t>(t.relation);
    x = x * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint32_t>(t.tail);
    x ^= x >> 33;
    return static_cast<std::size_t>(x * 0xff51afd7ed558ccdULL);
  }
};

enum class Modality : std::uint8_t { structural = 0, visual = 1, textual = 2 };

/// Fixed slot order used everywhere modalities are iterated or concatenated.
inline constexpr std::array<Modality, 3> kModalityOrder = {
    Modality::structural, Modality::visual, Modality::textual};

const char* modality_name(Modality m);
std::optional<Modality> modality_from_name(std::string_view name);

struct ModalitySet {
  std::uint8_t bits = 0;

  static ModalitySet of(std::initializer_list<Modality> ms) {
    ModalitySet s;
    for (Modality m : ms) s.add(m);
    return s;
  }
  bool has(Modality m) const { return (bits >> static_cast<int>(m)) & 1u; }
  void add(Modality m) {
    bits = static_cast<std::uint8_t>(bits | (1u << static_cast<int>(m)));
  }
  int count() const { return std::popcount(bits); }
  bool empty() const { return bits == 0; }
  friend bool operator==(const ModalitySet&, const ModalitySet&) = default;
};

namespace detail {
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};
struct StringEq {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const noexcept {
    return a == b;
  }
};
}  // namespace detail

/// Interned name table. Ids are dense and assigned in first-appearance order.
class Vocab {
 public:
  std::int32_t intern(std::string_view name);
  std::optional<std::int32_t> find(std::string_view name) const;
  const std::string& name(std::int32_t id) const;
  std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t, detail::StringHash,
                     detail::StringEq>
      ids_;
};

}  // namespace mkge
