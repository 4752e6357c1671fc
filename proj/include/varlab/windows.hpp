#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "varlab/grid.hpp"
#include "varlab/tiles.hpp"

namespace varlab {

class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProfileKind { smooth_indicator, plateau_phi, positive_Phi, nonneg_eta, partition_bar1 };

std::string to_string(ProfileKind k);
ProfileKind parse_profile_kind(const std::string& s);

struct ProfileOptions {
  // plateau_phi: half-width of the region where the profile is exactly 1.
  // Must lie in (0, 1/2); the support is always [-1/2, 1/2].
  double plateau = 0.25;
};

// A real, even window tabulated on a uniform grid over its nominal interval.
// Values outside the support are exactly zero; where the four interpolation
// neighbours agree the tabulated value is returned unchanged, so plateaus
// are exactly 1.
struct WindowProfile {
  static constexpr int kFormatVersion = 1;

  ProfileKind kind = ProfileKind::smooth_indicator;
  std::size_t resolution = 0;
  ProfileOptions options;
  double nominal_lo = -0.5;
  double nominal_hi = 0.5;
  std::vector<double> samples;
  std::map<std::string, double> constants;
  // nonneg_eta: c_n = eta(-n) for n = 0, 1, ...; c_{-n} = c_n.
  std::vector<double> coefficients;

  double operator()(double u) const;
  double at_interval(double xi, const Interval& I) const {
    return (*this)((xi - I.center) / I.width);
  }
  // Inverse transform int w(u) e^{2 pi i u x} du (real for even profiles).
  double inverse_at(double x) const;
  double constant(const std::string& name) const;
  double spacing() const;
};

WindowProfile build_profile(ProfileKind kind, std::size_t resolution = 8192,
                            ProfileOptions options = {});

// Re-runs the kind-specific invariant checks; throws CertificationError.
void certify(const WindowProfile& w);

std::string profile_to_json(const WindowProfile& w);
WindowProfile profile_from_json(const std::string& text);

// Fejer kernel of order n = 2^{k-1}:
// sum_{-2^{k-1} <= g < 2^{k-1}} (1 - 2|g| 2^{-k}) e^{2 pi i g t}.
double fejer(int k, double t);
// Smallest C with F(t) <= C 2^k / (1 + (2^k t')^2), t' = distance of t to Z,
// measured on a dense sweep of one period.
double fejer_decay_constant(int k, std::size_t samples_per_unit = 64);

struct TentPair {
  double t;
  double t_shifted;
};
// Period-1 tent 1 - 2|x| on |x| <= 1/2 and its half-period shift; the pair
// sums to exactly 1.
TentPair tent(double x);

struct TentWeights {
  double a;
  double b;
};
TentWeights tent_weights(const FrequencySquare& q);

struct Progression {
  double start = 0.0;
  double step = 1.0;
  std::size_t length = 1;
};

// || sum_{lambda in progression} e^{2 pi i lambda x} ||_{L^{p'}([0,1))}.
double exp_sum_norm(const Progression& prog, double p_prime);

// || f^ ||_{p1'} on the frequency grid with measure 1/L.
double wiener_norm(const GridSignal& f, double p1);

}  // namespace varlab
