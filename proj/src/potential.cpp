#include "gpduo/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpduo {

double norm(Point p) { return std::hypot(p.x, p.y); }

HomogeneousPotential HomogeneousPotential::isotropic(double degree) {
  if (!(degree >= 2.0) || !std::isfinite(degree))
    throw std::invalid_argument("potential degree must be finite and >= 2");
  HomogeneousPotential v;
  v.kind_ = Kind::isotropic;
  v.degree_ = degree;
  return v;
}

HomogeneousPotential HomogeneousPotential::anisotropic(double k1, double k2) {
  if (!(k1 > 0.0) || !(k2 > 0.0) || !std::isfinite(k1) || !std::isfinite(k2))
    throw std::invalid_argument("anisotropic coefficients must be positive");
  HomogeneousPotential v;
  v.kind_ = Kind::anisotropic_quadratic;
  v.degree_ = 2.0;
  v.k1_ = k1;
  v.k2_ = k2;
  return v;
}

HomogeneousPotential HomogeneousPotential::angular(double degree,
                                                   std::vector<double> g) {
  if (!(degree >= 2.0) || !std::isfinite(degree))
    throw std::invalid_argument("potential degree must be finite and >= 2");
  if (g.size() < 3)
    throw std::invalid_argument("angular profile needs at least 3 samples");
  for (double gi : g) {
    // Confinement (V -> infinity in every direction) needs g > 0.
    if (!(gi > 0.0) || !std::isfinite(gi))
      throw std::invalid_argument("angular samples must be positive");
  }
  HomogeneousPotential v;
  v.kind_ = Kind::angular;
  v.degree_ = degree;
  v.g_ = std::move(g);
  return v;
}

namespace {

double radial_power(double r, double p) {
  if (r == 0.0) return 0.0;
  if (p == 2.0) return r * r;
  if (p == 4.0) {
    const double r2 = r * r;
    return r2 * r2;
  }
  return std::pow(r, p);
}

}  // namespace

double HomogeneousPotential::operator()(Point x) const {
  switch (kind_) {
    case Kind::isotropic:
      if (degree_ == 2.0) return x.x * x.x + x.y * x.y;
      return radial_power(norm(x), degree_);
    case Kind::anisotropic_quadratic:
      return k1_ * x.x * x.x + k2_ * x.y * x.y;
    case Kind::angular: {
      const double r = norm(x);
      if (r == 0.0) return 0.0;
      double theta = std::atan2(x.y, x.x);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      const auto m = static_cast<double>(g_.size());
      const double s = theta / (2.0 * std::numbers::pi) * m;
      const auto i0 = static_cast<std::size_t>(std::floor(s)) % g_.size();
      const std::size_t i1 = (i0 + 1) % g_.size();
      const double frac = s - std::floor(s);
      const double g = (1.0 - frac) * g_[i0] + frac * g_[i1];
      return g * radial_power(r, degree_);
    }
  }
  return 0.0;
}

double HomogeneousPotential::unit_circle_max() const {
  switch (kind_) {
    case Kind::isotropic:
      return 1.0;
    case Kind::anisotropic_quadratic:
      return std::max(k1_, k2_);
    case Kind::angular:
      return *std::max_element(g_.begin(), g_.end());
  }
  return 0.0;
}

const char* to_string(HomogeneousPotential::Kind kind) {
  switch (kind) {
    case HomogeneousPotential::Kind::isotropic:
      return "isotropic";
    case HomogeneousPotential::Kind::anisotropic_quadratic:
      return "anisotropic";
    case HomogeneousPotential::Kind::angular:
      return "angular";
  }
  return "unknown";
}

}  // namespace gpduo
