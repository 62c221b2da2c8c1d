#pragma once

#include <vector>

#include "stackel/univariate.hpp"

namespace stackel {

// Monotone change of variable y(x) = ∫_0^x sqrt(f) on [0, length], with its inverse.
class CoordinateMap {
 public:
  CoordinateMap() = default;
  CoordinateMap(UnivariateFn f, double length, int panels = 256);

  double forward(double x) const;   // y(x)
  double inverse(double y) const;   // x(y)
  double total() const { return total_; }
  double length() const { return length_; }
  const UnivariateFn& density() const { return f_; }

 private:
  double panel_integral(double a, double b) const;
  UnivariateFn f_;
  double length_ = 0.0, total_ = 0.0;
  std::vector<double> knots_, cumulative_;
};

}  // namespace stackel
