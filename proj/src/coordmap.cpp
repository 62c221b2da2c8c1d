#include "stackel/coordmap.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "stackel/errors.hpp"

namespace stackel {

CoordinateMap::CoordinateMap(UnivariateFn f, double length, int panels) : f_(std::move(f)), length_(length) {
  if (!(length > 0.0)) throw Error(ErrorCode::ConfigError, "coordinate map needs a positive length");
  knots_.resize(panels + 1);
  cumulative_.assign(panels + 1, 0.0);
  for (int p = 0; p <= panels; ++p) knots_[p] = length * p / panels;
  for (int p = 0; p < panels; ++p) {
    if (!(f_(knots_[p]) > 0.0)) throw Error(ErrorCode::NonPositiveReparam, "density not positive at " + std::to_string(knots_[p]));
    cumulative_[p + 1] = cumulative_[p] + panel_integral(knots_[p], knots_[p + 1]);
  }
  if (!(f_(length) > 0.0)) throw Error(ErrorCode::NonPositiveReparam, "density not positive at the right end");
  total_ = cumulative_.back();
}

double CoordinateMap::panel_integral(double a, double b) const {
  if (b <= a) return 0.0;
  auto g = [this](double x) { return std::sqrt(f_(x)); };
  return boost::math::quadrature::gauss<double, 15>::integrate(g, a, b);
}

double CoordinateMap::forward(double x) const {
  if (x <= 0.0) return x * std::sqrt(f_(0.0));
  if (x >= length_) return total_ + (x - length_) * std::sqrt(f_(length_));
  const size_t panels = knots_.size() - 1;
  size_t p = std::min(panels - 1, static_cast<size_t>(x / length_ * panels));
  return cumulative_[p] + panel_integral(knots_[p], x);
}

double CoordinateMap::inverse(double y) const {
  if (y <= 0.0) return y / std::sqrt(f_(0.0));
  if (y >= total_) return length_ + (y - total_) / std::sqrt(f_(length_));
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), y);
  size_t p = static_cast<size_t>(std::distance(cumulative_.begin(), it)) - 1;
  p = std::min(p, knots_.size() - 2);
  double lo = knots_[p], hi = knots_[p + 1];
  double x = lo + (hi - lo) * (y - cumulative_[p]) / (cumulative_[p + 1] - cumulative_[p]);
  for (int it2 = 0; it2 < 60; ++it2) {
    const double r = cumulative_[p] + panel_integral(knots_[p], x) - y;
    if (r > 0) hi = x; else lo = x;
    double xn = x - r / std::sqrt(f_(x));
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-15 * (1.0 + std::abs(x))) return xn;
    x = xn;
  }
  return x;
}

}  // namespace stackel
