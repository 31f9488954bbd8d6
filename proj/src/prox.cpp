#include "ncadmm/prox.hpp"

#include <algorithm>
#include <cmath>

namespace ncadmm {

Vector soft_threshold(const Vector& z, double t) {
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double a = std::abs(z(i)) - t;
    out(i) = a > 0.0 ? (z(i) > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

Vector clamp(const Vector& z, const Vector& lo, const Vector& hi) {
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    out(i) = std::min(std::max(z(i), lo(i)), hi(i));
  return out;
}

Vector project_ball(const Vector& z, const Vector& center, double radius) {
  const Vector d = z - center;
  const double norm = d.norm();
  if (norm <= radius) return z;
  return center + d * (radius / norm);
}

}  // namespace ncadmm
