#pragma once

#include <complex>
#include <string>
#include <vector>

#include "varlab/grid.hpp"

namespace varlab {

// A pair of frequency intervals (P1, P2) of common side 2^{-k}, plus the
// constant phase the symbol attaches to the pair.
struct FrequencySquare {
  Interval p1;
  Interval p2;
  int scale_exp = 0;
  cplx weight{1.0, 0.0};

  double side() const { return p1.width; }
};

enum class TileFamily { section3_lambda, section7_periodic };
enum class Orientation { reflected, literal };

struct IntRange {
  int lo = 0;
  int hi = -1;  // inclusive
  bool empty() const { return hi < lo; }
  int count() const { return empty() ? 0 : hi - lo + 1; }
};

struct TileSet {
  std::vector<FrequencySquare> squares;
  TileFamily family = TileFamily::section7_periodic;
  double gamma = 100.0;
  IntRange k_range;
  IntRange m_range;
  Orientation orientation = Orientation::reflected;
  // section3 only: |lambda| < 2^{k - lambda_shift}
  int lambda_shift = 8;
};

std::string to_string(TileFamily f);
std::string to_string(Orientation o);
TileFamily parse_family(const std::string& s);
Orientation parse_orientation(const std::string& s);

}  // namespace varlab
