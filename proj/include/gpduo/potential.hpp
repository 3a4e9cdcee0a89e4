#pragma once

#include <vector>

namespace gpduo {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point p, Point q) { return {p.x + q.x, p.y + q.y}; }
  friend Point operator-(Point p, Point q) { return {p.x - q.x, p.y - q.y}; }
  friend Point operator*(double t, Point p) { return {t * p.x, t * p.y}; }
  friend bool operator==(Point p, Point q) = default;
};

double norm(Point p);

/// Nonnegative trapping potential, homogeneous of degree p about the origin:
/// V(t x) = t^p V(x) for t > 0.
class HomogeneousPotential {
 public:
  enum class Kind { isotropic, anisotropic_quadratic, angular };

  /// |x|^p
  static HomogeneousPotential isotropic(double degree);
  /// k1 x1^2 + k2 x2^2
  static HomogeneousPotential anisotropic(double k1, double k2);
  /// g(theta) |x|^p, g sampled uniformly on [0, 2pi) and interpolated
  /// periodically (linear).
  static HomogeneousPotential angular(double degree, std::vector<double> g);

  double operator()(Point x) const;

  Kind kind() const { return kind_; }
  double degree() const { return degree_; }
  double k1() const { return k1_; }
  double k2() const { return k2_; }
  const std::vector<double>& angular_samples() const { return g_; }

  /// Maximum of V on the unit circle, so that V(x) <= C |x|^p.
  double unit_circle_max() const;

 private:
  HomogeneousPotential() = default;

  Kind kind_ = Kind::isotropic;
  double degree_ = 2.0;
  double k1_ = 1.0;
  double k2_ = 1.0;
  std::vector<double> g_;
};

const char* to_string(HomogeneousPotential::Kind kind);

}  // namespace gpduo
