#pragma once

#include <span>

namespace mkge {

// Backbone scoring functions over already-built representations. Higher is
// more plausible for every backbone; the distance family returns negated
// distances. All functions throw on width mismatch.

/// -||h + r - t||_2
double score_transe(std::span<const double> h, std::span<const double> r,
                    std::span<const double> t);

/// sum_i h_i r_i t_i
double score_distmult(std::span<const double> h, std::span<const double> r,
                      std::span<const double> t);

/// Re <z_h, z_r, conj(z_t)> with complex vectors given as (re, im) planes.
double score_complex(std::span<const double> h_re, std::span<const double> h_im,
                     std::span<const double> r_re, std::span<const double> r_im,
                     std::span<const double> t_re,
                     std::span<const double> t_im);

/// -||z_h o exp(i theta) - z_t||_2 over the stacked real embedding.
double score_rotate(std::span<const double> h_re, std::span<const double> h_im,
                    std::span<const double> theta,
                    std::span<const double> t_re, std::span<const double> t_im);

// Gradient counterparts: accumulate upstream * d(score)/d(arg) into the g_*
// spans. The norm kink at zero distance uses subgradient 0.

void score_transe_grad(std::span<const double> h, std::span<const double> r,
                       std::span<const double> t, double upstream,
                       std::span<double> g_h, std::span<double> g_r,
                       std::span<double> g_t);

void score_distmult_grad(std::span<const double> h, std::span<const double> r,
                         std::span<const double> t, double upstream,
                         std::span<double> g_h, std::span<double> g_r,
                         std::span<double> g_t);

void score_complex_grad(std::span<const double> h_re,
                        std::span<const double> h_im,
                        std::span<const double> r_re,
                        std::span<const double> r_im,
                        std::span<const double> t_re,
                        std::span<const double> t_im, double upstream,
                        std::span<double> g_h_re, std::span<double> g_h_im,
                        std::span<double> g_r_re, std::span<double> g_r_im,
                        std::span<double> g_t_re, std::span<double> g_t_im);

void score_rotate_grad(std::span<const double> h_re,
                       std::span<const double> h_im,
                       std::span<const double> theta,
                       std::span<const double> t_re,
                       std::span<const double> t_im, double upstream,
                       std::span<double> g_h_re, std::span<double> g_h_im,
                       std::span<double> g_theta, std::span<double> g_t_re,
                       std::span<double> g_t_im);

}  // namespace mkge
