#pragma once

#include <string>
#include <vector>

#include "cflow/types.hpp"

namespace cflow {

enum class ChartKind { Euclidean, FlatTorus, Sphere };

/// One of the supported single-chart manifolds: R^n, a flat torus given by
/// its periods, or S^2 in polar coordinates (theta, phi) with the poles cut out.
class ChartManifold {
 public:
  /// Sphere points with theta closer than this to 0 or pi are outside the chart.
  static constexpr double kPoleMargin = 1e-6;

  static ChartManifold euclidean(int dimension);
  static ChartManifold flat_torus(std::vector<double> periods);
  static ChartManifold sphere();

  ChartKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  const std::vector<double>& periods() const { return periods_; }
  std::string name() const;

  bool contains(const Vec& q) const;
  /// Torus coordinates are wrapped into [0, period); other charts are unchanged.
  Vec canonicalize(Vec q) const;
  /// Shortest coordinate difference q - p (wrapped on periodic axes).
  Vec difference(const Vec& p, const Vec& q) const;
  /// A convenient interior point used as the default basepoint.
  Vec default_point() const;

 private:
  ChartManifold(ChartKind kind, int dimension, std::vector<double> periods);

  ChartKind kind_;
  int dimension_;
  std::vector<double> periods_;
};

}  // namespace cflow
