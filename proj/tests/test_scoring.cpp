#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "mkge/rng.hpp"
#include "mkge/scoring.hpp"
#include "mkge/types.hpp"

using namespace mkge;

namespace {

std::vector<double> randv(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

}  // namespace

TEST_CASE("transe translation distance") {
  std::vector<double> h{0, 0}, r{1, 1}, t{1, 1};
  CHECK(score_transe(h, r, t) == 0.0);  // exact translation scores highest

  std::vector<double> zero{0, 0}, far{3, 4};
  CHECK(score_transe(zero, zero, far) == doctest::Approx(-5.0));

  // translation invariance: shifting head and tail together changes nothing
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto a = randv(rng, 4), b = randv(rng, 4), c = randv(rng, 4);
    double shift = rng.uniform(-2, 2);
    auto a2 = a, c2 = c;
    for (double& x : a2) x += shift;
    for (double& x : c2) x += shift;
    CHECK(score_transe(a, b, c) ==
          doctest::Approx(score_transe(a2, b, c2)).epsilon(1e-12));
  }

  std::vector<double> wrong{1, 2, 3};
  CHECK_THROWS_AS(score_transe(h, r, wrong), Error);
}

TEST_CASE("distmult trilinear product") {
  std::vector<double> ones{1, 1};
  CHECK(score_distmult(ones, ones, ones) == 2.0);

  // disjoint support kills the product
  std::vector<double> h{1, 0}, r{0, 1};
  for (double tv : {-2.0, 0.5, 3.0}) {
    std::vector<double> t{tv, 0};
    CHECK(score_distmult(h, r, t) == 0.0);
  }

  // symmetry in head and tail
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    auto a = randv(rng, 5), b = randv(rng, 5), c = randv(rng, 5);
    CHECK(score_distmult(a, b, c) == doctest::Approx(score_distmult(c, b, a)));
  }
}

TEST_CASE("complex bilinear form") {
  // all-real inputs reduce to distmult
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    auto a = randv(rng, 4), b = randv(rng, 4), c = randv(rng, 4);
    std::vector<double> zero(4, 0.0);
    CHECK(score_complex(a, zero, b, zero, c, zero) ==
          doctest::Approx(score_distmult(a, b, c)).epsilon(1e-12));
  }

  // width 1: i * 1 * conj(i) = 1
  std::vector<double> re0{0}, im1{1}, re1{1}, im0{0};
  CHECK(score_complex(re0, im1, re1, im0, re0, im1) == doctest::Approx(1.0));

  // purely imaginary relation is an antisymmetry witness for real h, t
  for (int i = 0; i < 10; ++i) {
    auto h = randv(rng, 4), t = randv(rng, 4);
    std::vector<double> zero(4, 0.0), rim = randv(rng, 4);
    double forward = score_complex(h, zero, zero, rim, t, zero);
    double backward = score_complex(t, zero, zero, rim, h, zero);
    CHECK(forward == doctest::Approx(-backward).epsilon(1e-12));
  }

  // conjugate-swap identity: f(h, r, t) = f(t, conj(r), h)
  for (int i = 0; i < 10; ++i) {
    auto hr = randv(rng, 4), hi = randv(rng, 4);
    auto rr = randv(rng, 4), ri = randv(rng, 4);
    auto tr = randv(rng, 4), ti = randv(rng, 4);
    auto ric = ri;
    for (double& x : ric) x = -x;
    CHECK(score_complex(hr, hi, rr, ri, tr, ti) ==
          doctest::Approx(score_complex(tr, ti, rr, ric, hr, hi))
              .epsilon(1e-12));
  }
}

TEST_CASE("rotate phase rotation") {
  std::vector<double> h_re{1, -2}, h_im{0.5, 0.25};
  std::vector<double> zero(2, 0.0);
  CHECK(score_rotate(h_re, h_im, zero, h_re, h_im) == 0.0);

  // width 1: rotating 1+0i by pi lands on -1+0i
  std::vector<double> one{1}, mone{-1}, z{0}, pi{std::acos(-1.0)};
  CHECK(score_rotate(one, z, pi, mone, z) == doctest::Approx(0.0));

  // rotation preserves the modulus
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    auto re = randv(rng, 3), im = randv(rng, 3), theta = randv(rng, 3);
    double before = 0, after = 0;
    for (int j = 0; j < 3; ++j) {
      auto k = static_cast<std::size_t>(j);
      before += re[k] * re[k] + im[k] * im[k];
      double c = std::cos(theta[k]), s = std::sin(theta[k]);
      double rr = re[k] * c - im[k] * s;
      double ri = re[k] * s + im[k] * c;
      after += rr * rr + ri * ri;
    }
    CHECK(std::sqrt(before) == doctest::Approx(std::sqrt(after)).epsilon(1e-12));
  }

  // composing rotations adds phases: score against the doubly rotated target
  for (int i = 0; i < 20; ++i) {
    auto re = randv(rng, 3), im = randv(rng, 3);
    auto t1 = randv(rng, 3), t2 = randv(rng, 3);
    std::vector<double> sum(3);
    for (int j = 0; j < 3; ++j) {
      auto k = static_cast<std::size_t>(j);
      sum[k] = t1[k] + t2[k];
    }
    // rotate by t1 first
    std::vector<double> mid_re(3), mid_im(3);
    for (int j = 0; j < 3; ++j) {
      auto k = static_cast<std::size_t>(j);
      double c = std::cos(t1[k]), s = std::sin(t1[k]);
      mid_re[k] = re[k] * c - im[k] * s;
      mid_im[k] = re[k] * s + im[k] * c;
    }
    // then rotating mid by t2 must equal rotating the original by t1+t2
    std::vector<double> fin_re(3), fin_im(3);
    for (int j = 0; j < 3; ++j) {
      auto k = static_cast<std::size_t>(j);
      double c = std::cos(t2[k]), s = std::sin(t2[k]);
      fin_re[k] = mid_re[k] * c - mid_im[k] * s;
      fin_im[k] = mid_re[k] * s + mid_im[k] * c;
    }
    CHECK(std::abs(score_rotate(re, im, sum, fin_re, fin_im)) < 1e-9);
  }
}

TEST_CASE("score sign ranges") {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    auto a = randv(rng, 4), b = randv(rng, 4), c = randv(rng, 4);
    auto d = randv(rng, 4), e = randv(rng, 4);
    CHECK(score_transe(a, b, c) <= 0.0);
    CHECK(score_rotate(a, d, b, c, e) <= 0.0);
  }
}

TEST_CASE("analytic score gradients match finite differences") {
  Rng rng(8);
  const std::size_t n = 5;
  const double h = 1e-6;

  auto fd_check = [&](auto&& score_fn, std::vector<std::vector<double>*> args,
                      std::vector<std::vector<double>> grads) {
    for (std::size_t a = 0; a < args.size(); ++a) {
      for (std::size_t j = 0; j < args[a]->size(); ++j) {
        double saved = (*args[a])[j];
        (*args[a])[j] = saved + h;
        double plus = score_fn();
        (*args[a])[j] = saved - h;
        double minus = score_fn();
        (*args[a])[j] = saved;
        double fd = (plus - minus) / (2 * h);
        double an = grads[a][j];
        double denom = std::max({std::abs(fd), std::abs(an), 1e-4});
        CHECK(std::abs(fd - an) / denom < 1e-4);
      }
    }
  };

  SUBCASE("transe") {
    auto a = randv(rng, n), b = randv(rng, n), c = randv(rng, n);
    std::vector<std::vector<double>> g(3, std::vector<double>(n, 0.0));
    score_transe_grad(a, b, c, 1.0, g[0], g[1], g[2]);
    fd_check([&] { return score_transe(a, b, c); }, {&a, &b, &c}, g);
  }
  SUBCASE("transe subgradient at the kink is zero") {
    std::vector<double> a{1, 2}, b{3, -1}, c{4, 1};  // a + b == c
    std::vector<std::vector<double>> g(3, std::vector<double>(2, 0.0));
    score_transe_grad(a, b, c, 1.0, g[0], g[1], g[2]);
    for (const auto& gi : g)
      for (double x : gi) CHECK(x == 0.0);
  }
  SUBCASE("distmult") {
    auto a = randv(rng, n), b = randv(rng, n), c = randv(rng, n);
    std::vector<std::vector<double>> g(3, std::vector<double>(n, 0.0));
    score_distmult_grad(a, b, c, 0.7, g[0], g[1], g[2]);
    fd_check([&] { return 0.7 * score_distmult(a, b, c); }, {&a, &b, &c}, g);
  }
  SUBCASE("complex") {
    auto hr = randv(rng, n), hi = randv(rng, n);
    auto rr = randv(rng, n), ri = randv(rng, n);
    auto tr = randv(rng, n), ti = randv(rng, n);
    std::vector<std::vector<double>> g(6, std::vector<double>(n, 0.0));
    score_complex_grad(hr, hi, rr, ri, tr, ti, -1.3, g[0], g[1], g[2], g[3],
                       g[4], g[5]);
    fd_check([&] { return -1.3 * score_complex(hr, hi, rr, ri, tr, ti); },
             {&hr, &hi, &rr, &ri, &tr, &ti}, g);
  }
  SUBCASE("rotate") {
    auto hr = randv(rng, n), hi = randv(rng, n), th = randv(rng, n);
    auto tr = randv(rng, n), ti = randv(rng, n);
    std::vector<std::vector<double>> g(5, std::vector<double>(n, 0.0));
    score_rotate_grad(hr, hi, th, tr, ti, 0.9, g[0], g[1], g[2], g[3], g[4]);
    fd_check([&] { return 0.9 * score_rotate(hr, hi, th, tr, ti); },
             {&hr, &hi, &th, &tr, &ti}, g);
  }
}
