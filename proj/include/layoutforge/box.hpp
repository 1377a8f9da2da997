#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "layoutforge/errors.hpp"
#include "layoutforge/geometry.hpp"

namespace layoutforge {

/// Affine map between a finite box and the unit cube. The search drivers
/// run CMA in unit coordinates so that one step size suits parameters of
/// different units (meters and radians). Zero-width coordinates map to 0.
class BoxMap {
 public:
  explicit BoxMap(Bounds bounds) : bounds_(std::move(bounds)) {
    for (std::size_t i = 0; i < bounds_.size(); ++i)
      if (!std::isfinite(bounds_.lower[i]) || !std::isfinite(bounds_.upper[i]) ||
          bounds_.lower[i] > bounds_.upper[i])
        throw Error("search bounds must be finite with lower <= upper");
  }

  const Bounds& bounds() const { return bounds_; }
  std::size_t size() const { return bounds_.size(); }
  static Bounds unit(std::size_t dim) { return Bounds::box(dim, 0.0, 1.0); }

  ParamVector to_unit(const ParamVector& p) const {
    if (p.size() != size()) throw DimensionMismatch(size(), p.size());
    std::vector<double> u(size());
    for (std::size_t i = 0; i < size(); ++i) {
      const double w = bounds_.upper[i] - bounds_.lower[i];
      u[i] = w > 0.0 ? std::clamp((p[i] - bounds_.lower[i]) / w, 0.0, 1.0) : 0.0;
    }
    return ParamVector(std::move(u));
  }

  // Result always lies inside the box, rounding included.
  ParamVector from_unit(const ParamVector& u) const {
    if (u.size() != size()) throw DimensionMismatch(size(), u.size());
    std::vector<double> p(size());
    for (std::size_t i = 0; i < size(); ++i) {
      const double w = bounds_.upper[i] - bounds_.lower[i];
      p[i] = std::clamp(bounds_.lower[i] + std::clamp(u[i], 0.0, 1.0) * w, bounds_.lower[i], bounds_.upper[i]);
    }
    return ParamVector(std::move(p));
  }

 private:
  Bounds bounds_;
};

}  // namespace layoutforge
