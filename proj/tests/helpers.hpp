#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "mkge/kg.hpp"
#include "mkge/types.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    auto base = std::filesystem::temp_directory_path();
    path_ = base / ("mkge-test-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

/// Builds a finalized graph from name triples, optionally with explicit
/// modality sets applied afterwards.
inline mkge::KnowledgeGraph make_graph(
    const std::vector<std::array<std::string, 3>>& train,
    const std::vector<std::array<std::string, 3>>& valid = {},
    const std::vector<std::array<std::string, 3>>& test = {}) {
  mkge::KnowledgeGraph g;
  auto add = [&](const std::vector<std::array<std::string, 3>>& src,
                 std::vector<mkge::Triple>& dst) {
    for (const auto& [h, r, t] : src) {
      mkge::Triple triple;
      triple.head = g.entities.intern(h);
      triple.relation = g.relations.intern(r);
      triple.tail = g.entities.intern(t);
      dst.push_back(triple);
    }
  };
  add(train, g.train);
  add(valid, g.valid);
  add(test, g.test);
  g.finalize();
  return g;
}

}  // namespace testutil
