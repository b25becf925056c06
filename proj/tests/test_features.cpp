#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "mkge/features.hpp"
#include "mkge/rng.hpp"

using namespace mkge;
using testutil::TempDir;
using testutil::write_file;

namespace {

Vocab vocab_of(const std::vector<std::string>& names) {
  Vocab v;
  for (const auto& n : names) v.intern(n);
  return v;
}

}  // namespace

TEST_CASE("feature file parses to the declared shape") {
  TempDir tmp;
  write_file(tmp.file("f.txt"),
             "#meta count=3 dim=4 modality=visual\n"
             "a\t1 2 3 4\n"
             "b\t0.5 -0.5 0 1e-3\n"
             "c\t0 0 0 0\n");
  Vocab v = vocab_of({"a", "b", "c"});
  auto fm = load_features(tmp.file("f.txt"), v);
  CHECK(fm.modality == Modality::visual);
  CHECK(fm.dim == 4);
  CHECK(fm.row_count() == 3);
  CHECK(fm.row(0)[0] == 1.0);
  CHECK(fm.row(1)[3] == doctest::Approx(1e-3));
}

TEST_CASE("rows naming unknown entities are skipped, coverage is partial") {
  TempDir tmp;
  write_file(tmp.file("vis.txt"),
             "#meta count=2 dim=2 modality=visual\n"
             "a\t1 0\nghost\t0 1\n");
  write_file(tmp.file("txt.txt"),
             "#meta count=1 dim=3 modality=textual\n"
             "b\t1 2 3\n");
  Vocab v = vocab_of({"a", "b"});
  auto vis = load_features(tmp.file("vis.txt"), v);
  auto txt = load_features(tmp.file("txt.txt"), v);
  CHECK(vis.row_count() == 1);
  CHECK(vis.skipped == 1);
  CHECK(vis.has(0));
  CHECK(!vis.has(1));
  CHECK(txt.has(1));
  CHECK(!txt.has(0));
  CHECK_THROWS_AS(vis.row(1), Error);
}

TEST_CASE("format violations are rejected with the offending row") {
  TempDir tmp;
  Vocab v = vocab_of({"a", "b"});

  write_file(tmp.file("w.txt"),
             "#meta count=2 dim=3 modality=visual\na\t1 2 3\nb\t1 2\n");
  CHECK_THROWS_WITH_AS(load_features(tmp.file("w.txt"), v),
                       doctest::Contains("'b'"), Error);

  write_file(tmp.file("nan.txt"),
             "#meta count=1 dim=2 modality=visual\na\tnan 1\n");
  CHECK_THROWS_AS(load_features(tmp.file("nan.txt"), v), Error);

  write_file(tmp.file("count.txt"),
             "#meta count=5 dim=2 modality=visual\na\t1 2\n");
  CHECK_THROWS_WITH_AS(load_features(tmp.file("count.txt"), v),
                       doctest::Contains("count=5"), Error);

  write_file(tmp.file("nohdr.txt"), "a\t1 2\n");
  CHECK_THROWS_AS(load_features(tmp.file("nohdr.txt"), v), Error);

  write_file(tmp.file("dup.txt"),
             "#meta count=2 dim=1 modality=visual\na\t1\na\t2\n");
  CHECK_THROWS_WITH_AS(load_features(tmp.file("dup.txt"), v),
                       doctest::Contains("duplicate"), Error);
}

TEST_CASE("export at 9 significant digits is a stable fixed point") {
  TempDir tmp;
  write_file(tmp.file("f.txt"),
             "#meta count=2 dim=2 modality=textual\n"
             "a\t0.1 -2.5\n"
             "b\t1234.5678 1e-07\n");
  Vocab v = vocab_of({"a", "b"});
  auto fm = load_features(tmp.file("f.txt"), v);
  save_features(tmp.file("g.txt"), fm, v);
  auto fm2 = load_features(tmp.file("g.txt"), v);
  CHECK(fm2.values == fm.values);  // bit-identical payload
  save_features(tmp.file("h.txt"), fm2, v);
  CHECK(testutil::read_file(tmp.file("g.txt")) ==
        testutil::read_file(tmp.file("h.txt")));
}

TEST_CASE("projection maps rows into the model dimension") {
  TempDir tmp;
  write_file(tmp.file("f.txt"),
             "#meta count=1 dim=2 modality=visual\na\t1 2\n");
  Vocab v = vocab_of({"a"});
  auto fm = load_features(tmp.file("f.txt"), v);

  SUBCASE("hand matrix product") {
    ModalityProjection p;
    p.modality = Modality::visual;
    p.dim_in = 2;
    p.dim_out = 2;
    p.weights = {1, 0, 0, 2};  // row-major [[1,0],[0,2]]
    auto out = project(fm, p, 0);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == 4.0);
  }
  SUBCASE("identity bypass returns the stored row") {
    auto p = ModalityProjection::make_identity(Modality::visual, 2);
    auto out = project(fm, p, 0);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == 2.0);
  }
  SUBCASE("zero weights annihilate") {
    ModalityProjection p;
    p.modality = Modality::visual;
    p.dim_in = 2;
    p.dim_out = 3;
    p.weights.assign(6, 0.0);
    auto out = project(fm, p, 0);
    for (double x : out) CHECK(x == 0.0);
  }
}

TEST_CASE("projection is linear over synthetic row combinations") {
  Rng rng(5);
  Vocab v = vocab_of({"x", "y", "z"});
  FeatureMatrix fm;
  fm.modality = Modality::visual;
  fm.dim = 4;
  std::vector<double> xr(4), yr(4);
  for (int i = 0; i < 4; ++i) {
    xr[static_cast<std::size_t>(i)] = rng.uniform(-1, 1);
    yr[static_cast<std::size_t>(i)] = rng.uniform(-1, 1);
  }
  double a = 0.7, b = -1.3;
  std::vector<double> combo(4);
  for (int i = 0; i < 4; ++i)
    combo[static_cast<std::size_t>(i)] = a * xr[static_cast<std::size_t>(i)] +
                                         b * yr[static_cast<std::size_t>(i)];
  for (const auto& row : {xr, yr, combo})
    fm.values.insert(fm.values.end(), row.begin(), row.end());
  fm.row_entities = {0, 1, 2};
  fm.rows = {{0, 0}, {1, 1}, {2, 2}};

  auto p = ModalityProjection::make_trainable(Modality::visual, 4, 3, rng);
  auto px = project(fm, p, 0);
  auto py = project(fm, p, 1);
  auto pc = project(fm, p, 2);
  for (int j = 0; j < 3; ++j)
    CHECK(pc[static_cast<std::size_t>(j)] ==
          doctest::Approx(a * px[static_cast<std::size_t>(j)] +
                          b * py[static_cast<std::size_t>(j)])
              .epsilon(1e-12));
}

TEST_CASE("projection gradient matches finite differences") {
  Rng rng(11);
  Vocab v = vocab_of({"e"});
  FeatureMatrix fm;
  fm.modality = Modality::textual;
  fm.dim = 3;
  fm.values = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  fm.row_entities = {0};
  fm.rows = {{0, 0}};

  auto p = ModalityProjection::make_trainable(Modality::textual, 3, 2, rng);
  std::vector<double> upstream = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

  SUBCASE("zero upstream gives zero gradient") {
    std::vector<double> g(p.weights.size(), 0.0);
    project_gradient(fm, p, 0, std::vector<double>{0.0, 0.0}, g);
    for (double x : g) CHECK(x == 0.0);
  }
  SUBCASE("basis-vector rows touch only their weight row") {
    FeatureMatrix basis = fm;
    basis.values = {0.0, 1.0, 0.0};
    std::vector<double> g(p.weights.size(), 0.0);
    project_gradient(basis, p, 0, upstream, g);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
    CHECK(g[2] != 0.0);
    CHECK(g[3] != 0.0);
    CHECK(g[4] == 0.0);
    CHECK(g[5] == 0.0);
  }
  SUBCASE("central finite differences agree to 1e-4 relative error") {
    // scalar objective: dot(upstream, project(row))
    std::vector<double> analytic(p.weights.size(), 0.0);
    project_gradient(fm, p, 0, upstream, analytic);
    const double h = 1e-6;
    for (std::size_t w = 0; w < p.weights.size(); ++w) {
      double saved = p.weights[w];
      p.weights[w] = saved + h;
      auto plus = project(fm, p, 0);
      p.weights[w] = saved - h;
      auto minus = project(fm, p, 0);
      p.weights[w] = saved;
      double fd = 0.0;
      for (std::size_t j = 0; j < upstream.size(); ++j)
        fd += upstream[j] * (plus[j] - minus[j]);
      fd /= 2 * h;
      double denom = std::max({std::abs(fd), std::abs(analytic[w]), 1e-4});
      CHECK(std::abs(fd - analytic[w]) / denom < 1e-4);
    }
  }
  SUBCASE("identity projections refuse gradient accumulation") {
    auto ident = ModalityProjection::make_identity(Modality::textual, 3);
    std::vector<double> g;
    CHECK_THROWS_AS(
        project_gradient(fm, ident, 0, std::vector<double>(3, 1.0), g), Error);
  }
}
