#pragma once

#include <vector>

#include "varlab/grid.hpp"
#include "varlab/tiles.hpp"
#include "varlab/windows.hpp"

namespace varlab {

struct ScaleFamily {
  std::vector<double> sigmas;

  // Throws GridError unless strictly increasing and positive.
  void validate() const;
};

// ---- tiles ----

// section3_lambda: P1 centred at m + lambda 2^{-k}, |lambda| < 2^{k - lambda_shift},
// pair weight e^{2 pi i gamma 2^{-k} m}. section7_periodic: P1 centred at m 2^{-k}.
// P2 sits at -c_{P1} + gamma 2^{-k} (reflected) or c_{P1} + gamma 2^{-k} (literal).
TileSet make_tiles(TileFamily family, double gamma, IntRange k_range, IntRange m_range,
                   Orientation orientation = Orientation::reflected, int lambda_shift = 8);

// Periodic tiles at every scale in k_range whose P1 meets [-band, band].
TileSet make_band_tiles(double gamma, IntRange k_range, double band,
                        Orientation orientation = Orientation::reflected);

// Number of squares make_tiles produces, from the range arithmetic alone.
std::size_t expected_tile_count(TileFamily family, IntRange k_range, IntRange m_range,
                                int lambda_shift = 8);

// Smallest scale k >= lambda_shift for which every section3 square at scale k
// with |lambda| < 2^{k - lambda_shift} keeps both sides inside
// [m - 1/2 + eps, m + 1/2 - eps] (and its reflection). Exact dyadic arithmetic.
int c_gamma(double gamma, int lambda_shift = 8, double eps = 0.01);

// ---- operators ----

// Intervals [k + l/k, k + (l+1)/k], 0 <= l < k, for 1 <= k <= K_max.
std::vector<Interval> v2_intervals(int K_max);

GridSignal v2_translation_square(const GridSignal& f, int K_max, const std::vector<double>& tau_set,
                                 const WindowProfile& w);

GridSignal v2res(const GridSignal& f, const std::vector<double>& R_set, int alpha_count,
                 const WindowProfile& w);

// R = 2^{e + s/per_octave} for lo_exp <= e < hi_exp, 0 <= s < per_octave, then 2^{hi_exp}.
std::vector<double> r_grid(int lo_exp, int hi_exp, int per_octave);

enum class TmMode { full_sum, per_scale };

struct TmOutput {
  GridSignal full;
  std::vector<int> scales;
  std::vector<GridSignal> per_scale;  // filled in per_scale mode
};

TmOutput bilinear_tm(const GridSignal& f1, const GridSignal& f2, const TileSet& tiles,
                     const WindowProfile& w1, const WindowProfile& w2, TmMode mode);

// Per-scale sum over P1 = [m 2^k, (m+1) 2^k] of (f1 * eta_{P1}) (f2 * eta_{-P1}).
GridSignal bilinear_scale_term(const GridSignal& f1, const GridSignal& f2, int k,
                               const WindowProfile& w);
GridSignal bilinear_scale_sup(const GridSignal& f1, const GridSignal& f2, IntRange k_range,
                              const WindowProfile& w);

enum class AdjointMethod { frequency_side, time_side };

// The sigma-th term (sum_tau f * eta_{I_tau^sigma}) * (g * eta_{I_0^sigma}).
GridSignal maximal_adjoint_term(const GridSignal& f, const GridSignal& g, double sigma,
                                const WindowProfile& eta, AdjointMethod method);
GridSignal maximal_adjoint(const GridSignal& f, const GridSignal& g, const ScaleFamily& sigmas,
                           const WindowProfile& eta, AdjointMethod method);

// Lacunary family: psi_k^2(xi) = beta(2^{-k} xi) - beta(2^{1-k} xi) with beta
// equal to 1 on |u| <= 0.9 and 0 on |u| >= 1, so psi_k is exactly 1 on
// 2^{k-1} <= |xi| <= 0.9 * 2^k and the squares telescope.
double lacunary_symbol(int k, double xi);
GridSignal square_function(const GridSignal& f, IntRange k_range);

// w((x - theta) 2^{-k}) w((x - theta - shift) 2^{-k}) e^{2 pi i gamma 2^{-k} (x - theta - shift)},
// with w the inverse transform of the profile stretched onto [-1, 1].
GridSignal lemma_ml_atom(const Geometry& g, const WindowProfile& w, int k, double theta,
                         double shift, double gamma);

}  // namespace varlab
