#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "varlab/grid.hpp"
#include "varlab/varops.hpp"
#include "varlab/windows.hpp"

namespace varlab {

// ---- input families ----

// sum_{1<=n<=N} phi(x - n) e^{2 pi i n x}, built from its spectrum.
GridSignal chirp_train(int N, const WindowProfile& phi, const Geometry& g);

struct SignalPair {
  GridSignal first;
  GridSignal second;
};
// (f_1^N, f_2^N): the chirp train and its conjugate-modulated partner.
SignalPair bichirp_pair(int N, const WindowProfile& phi, const Geometry& g);

enum class Atom { indicator, smooth };

// Atoms centred at shift * 2^{-k0}. Indicator atoms are half-open
// [c - width/2, c + width/2); smooth atoms are <(x - c)/width>^{-10}.
GridSignal spike_train(int k0, const std::vector<double>& shifts, double width, const Geometry& g,
                       Atom atom = Atom::indicator);

// ---- covering lemmas ----

struct ShiftChoice {
  long n = 0;
  std::size_t count = 0;
};

// Exhaustive over n in [-2^k0, 2^k0]: maximises |{2^k + n}_{0<=k<k0} cap S|.
// Ties go to the smallest |n|, then to the negative one.
ShiftChoice greedy_shift(const std::vector<long>& S, int k0);

struct ShiftCover {
  int k0 = 0;
  bool integral = true;
  std::vector<double> shifts;
  double covered_measure = 0.0;
  double target_measure = 0.0;
  // |shifts| * k0 / 2^k0
  double size_constant = 0.0;
  // Continuous variant: the translated set.
  std::vector<double> base;

  bool certified() const { return covered_measure >= target_measure; }
};

ShiftCover greedy_cover(int k0);
// Independent recount of |U_{n in shifts} (orbit + n) cap [1, 2^k0]|.
std::size_t recount_cover(const ShiftCover& c);

ShiftCover greedy_cover_continuous(const std::vector<double>& K, int k0);
// Sweep-line measure of U_{theta, k} [k + theta - 1/2, k + theta + 1/2] cap [1, 2^k0].
double union_measure(const std::vector<double>& K, const std::vector<double>& thetas, int k0);

struct OrbitResult {
  int m = 0;
  std::uint64_t modulus = 0;
  std::size_t count = 0;
  bool all_distinct = false;
  std::vector<std::uint32_t> residues;  // kept only when requested
};

// 2^k mod 5^m for 0 <= k < 4 * 5^{m-1}.
OrbitResult orbit_distinct(int m, bool keep_residues = true);

// ---- Diophantine construction ----

// mantissa * 2^exponent, exact in binary.
struct ScaledReal {
  double mantissa = 1.0;
  long exponent = 0;
};

class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ThetaBandEntry {
  int j = 0;
  double distance = 0.0;  // ||alpha_j theta|| rounded to double
  double lower = 0.0;
  double upper = 0.0;
  bool ok = false;
};

struct ThetaCertificate {
  int k = 0;
  int C = 0;
  int j0 = 0;
  long precision_bits = 0;
  std::vector<ScaledReal> alphas;
  std::string theta_hex;  // exact binary value, MPFR hex notation
  double theta = 0.0;
  double slack = 0.0;  // theta - 1/k lies in [0, slack]
  double c1 = 0.5;
  double c2 = 2.0;
  std::vector<ThetaBandEntry> band;

  bool valid() const;
};

// Bits needed so that alpha_k * theta keeps 32 fractional bits.
long required_precision(const std::vector<ScaledReal>& alphas, int k);

// precision_bits = 0 picks required_precision + 64.
ThetaCertificate theta_construct(const std::vector<ScaledReal>& alphas, int k, long precision_bits = 0);

// Recomputes the band from the stored theta at the given precision.
ThetaCertificate verify_theta(const ThetaCertificate& c, long precision_bits);

std::vector<ScaledReal> triangular_alphas(int count);  // 2^{j(j-1)/2}

// ---- mixed counterexample ----

// Keeps k0 scales with sigma_{r+1} / sigma_r >= 2^{k0 - r}, greedily from the
// bottom; throws GridError if the family is too short.
ScaleFamily thin_scales(const ScaleFamily& sigmas, int k0);
// alpha_j = sigma_{k0} / sigma_{k0 - j + 1}.
std::vector<ScaledReal> scale_ratios(const ScaleFamily& thinned);

// g(x) = <x>^{-10}.
GridSignal bracket_atom(const Geometry& g);
// sum_{|tau| <= ceil(sigma theta)} <sigma (x - tau / (sigma theta))>^{-10}.
GridSignal hl_train(double sigma, double theta, const Geometry& g);

struct HlInstance {
  GridSignal f;
  GridSignal g;
  ScaleFamily thinned;
  ThetaCertificate theta;
  std::vector<std::uint8_t> mask;
  double mask_measure = 0.0;
  double min_on_mask = 0.0;  // min of the maximal adjoint over the mask
};

HlInstance hl_counterexample(const ScaleFamily& sigmas, int k0, const Geometry& g,
                             const WindowProfile& eta);

// ---- JSON ----

std::string cover_to_json(const ShiftCover& c);
ShiftCover cover_from_json(const std::string& text);
std::string theta_to_json(const ThetaCertificate& c);
ThetaCertificate theta_from_json(const std::string& text);

}  // namespace varlab
