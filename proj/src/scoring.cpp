#include "mkge/scoring.hpp"

#include <cmath>
#include <string>

#include "mkge/types.hpp"

namespace mkge {

namespace {

void require_widths(std::initializer_list<std::size_t> sizes) {
  auto it = sizes.begin();
  std::size_t first = *it;
  for (; it != sizes.end(); ++it)
    if (*it != first)
      throw Error("scoring: width mismatch (" + std::to_string(first) +
                  " vs " + std::to_string(*it) + ")");
}

}  // namespace

double score_transe(std::span<const double> h, std::span<const double> r,
                    std::span<const double> t) {
  require_widths({h.size(), r.size(), t.size()});
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double d = h[i] + r[i] - t[i];
    s += d * d;
  }
  return -std::sqrt(s);
}

double score_distmult(std::span<const double> h, std::span<const double> r,
                      std::span<const double> t) {
  require_widths({h.size(), r.size(), t.size()});
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * r[i] * t[i];
  return s;
}

double score_complex(std::span<const double> h_re, std::span<const double> h_im,
                     std::span<const double> r_re, std::span<const double> r_im,
                     std::span<const double> t_re,
                     std::span<const double> t_im) {
  require_widths({h_re.size(), h_im.size(), r_re.size(), r_im.size(),
                  t_re.size(), t_im.size()});
  double s = 0.0;
  for (std::size_t i = 0; i < h_re.size(); ++i) {
    double a = h_re[i], b = h_im[i];
    double c = r_re[i], d = r_im[i];
    double e = t_re[i], f = t_im[i];
    s += (a * c - b * d) * e + (a * d + b * c) * f;
  }
  return s;
}

double score_rotate(std::span<const double> h_re, std::span<const double> h_im,
                    std::span<const double> theta,
                    std::span<const double> t_re,
                    std::span<const double> t_im) {
  require_widths(
      {h_re.size(), h_im.size(), theta.size(), t_re.size(), t_im.size()});
  double s = 0.0;
  for (std::size_t i = 0; i < h_re.size(); ++i) {
    double c = std::cos(theta[i]), sn = std::sin(theta[i]);
    double wr = h_re[i] * c - h_im[i] * sn - t_re[i];
    double wi = h_re[i] * sn + h_im[i] * c - t_im[i];
    s += wr * wr + wi * wi;
  }
  return -std::sqrt(s);
}

void score_transe_grad(std::span<const double> h, std::span<const double> r,
                       std::span<const double> t, double upstream,
                       std::span<double> g_h, std::span<double> g_r,
                       std::span<double> g_t) {
  require_widths({h.size(), r.size(), t.size(), g_h.size(), g_r.size(),
                  g_t.size()});
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double d = h[i] + r[i] - t[i];
    s += d * d;
  }
  double norm = std::sqrt(s);
  if (norm == 0.0) return;  // subgradient 0 at the kink
  double scale = -upstream / norm;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double d = h[i] + r[i] - t[i];
    g_h[i] += scale * d;
    g_r[i] += scale * d;
    g_t[i] -= scale * d;
  }
}

void score_distmult_grad(std::span<const double> h, std::span<const double> r,
                         std::span<const double> t, double upstream,
                         std::span<double> g_h, std::span<double> g_r,
                         std::span<double> g_t) {
  require_widths({h.size(), r.size(), t.size(), g_h.size(), g_r.size(),
                  g_t.size()});
  for (std::size_t i = 0; i < h.size(); ++i) {
    g_h[i] += upstream * r[i] * t[i];
    g_r[i] += upstream * h[i] * t[i];
    g_t[i] += upstream * h[i] * r[i];
  }
}

void score_complex_grad(std::span<const double> h_re,
                        std::span<const double> h_im,
                        std::span<const double> r_re,
                        std::span<const double> r_im,
                        std::span<const double> t_re,
                        std::span<const double> t_im, double upstream,
                        std::span<double> g_h_re, std::span<double> g_h_im,
                        std::span<double> g_r_re, std::span<double> g_r_im,
                        std::span<double> g_t_re, std::span<double> g_t_im) {
  require_widths({h_re.size(), h_im.size(), r_re.size(), r_im.size(),
                  t_re.size(), t_im.size(), g_h_re.size(), g_h_im.size(),
                  g_r_re.size(), g_r_im.size(), g_t_re.size(), g_t_im.size()});
  for (std::size_t i = 0; i < h_re.size(); ++i) {
    double a = h_re[i], b = h_im[i];
    double c = r_re[i], d = r_im[i];
    double e = t_re[i], f = t_im[i];
    g_h_re[i] += upstream * (c * e + d * f);
    g_h_im[i] += upstream * (-d * e + c * f);
    g_r_re[i] += upstream * (a * e + b * f);
    g_r_im[i] += upstream * (-b * e + a * f);
    g_t_re[i] += upstream * (a * c - b * d);
    g_t_im[i] += upstream * (a * d + b * c);
  }
}

void score_rotate_grad(std::span<const double> h_re,
                       std::span<const double> h_im,
                       std::span<const double> theta,
                       std::span<const double> t_re,
                       std::span<const double> t_im, double upstream,
                       std::span<double> g_h_re, std::span<double> g_h_im,
                       std::span<double> g_theta, std::span<double> g_t_re,
                       std::span<double> g_t_im) {
  require_widths({h_re.size(), h_im.size(), theta.size(), t_re.size(),
                  t_im.size(), g_h_re.size(), g_h_im.size(), g_theta.size(),
                  g_t_re.size(), g_t_im.size()});
  double s = 0.0;
  for (std::size_t i = 0; i < h_re.size(); ++i) {
    double c = std::cos(theta[i]), sn = std::sin(theta[i]);
    double wr = h_re[i] * c - h_im[i] * sn - t_re[i];
    double wi = h_re[i] * sn + h_im[i] * c - t_im[i];
    s += wr * wr + wi * wi;
  }
  double norm = std::sqrt(s);
  if (norm == 0.0) return;
  double scale = -upstream / norm;
  for (std::size_t i = 0; i < h_re.size(); ++i) {
    double c = std::cos(theta[i]), sn = std::sin(theta[i]);
    double wr = h_re[i] * c - h_im[i] * sn - t_re[i];
    double wi = h_re[i] * sn + h_im[i] * c - t_im[i];
    double gwr = scale * wr;
    double gwi = scale * wi;
    g_h_re[i] += gwr * c + gwi * sn;
    g_h_im[i] += -gwr * sn + gwi * c;
    g_theta[i] += gwr * (-h_re[i] * sn - h_im[i] * c) +
                  gwi * (h_re[i] * c - h_im[i] * sn);
    g_t_re[i] -= gwr;
    g_t_im[i] -= gwi;
  }
}

}  // namespace mkge
