#include "cflow/manifold.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace cflow {

std::string format_point(const Vec& q) {
  std::ostringstream os;
  os.precision(10);
  os << '(';
  for (Eigen::Index i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
  os << ')';
  return os.str();
}

ChartManifold::ChartManifold(ChartKind kind, int dimension, std::vector<double> periods)
    : kind_(kind), dimension_(dimension), periods_(std::move(periods)) {}

ChartManifold ChartManifold::euclidean(int dimension) {
  if (dimension < 1) throw ConfigError("manifold", "dimension must be at least 1");
  return ChartManifold(ChartKind::Euclidean, dimension, {});
}

ChartManifold ChartManifold::flat_torus(std::vector<double> periods) {
  if (periods.empty()) throw ConfigError("manifold", "torus needs at least one period");
  for (double p : periods)
    if (!(p > 0.0) || !std::isfinite(p))
      throw ConfigError("manifold", "torus periods must be positive");
  int d = static_cast<int>(periods.size());
  return ChartManifold(ChartKind::FlatTorus, d, std::move(periods));
}

ChartManifold ChartManifold::sphere() { return ChartManifold(ChartKind::Sphere, 2, {}); }

std::string ChartManifold::name() const {
  switch (kind_) {
    case ChartKind::Euclidean: return "euclidean";
    case ChartKind::FlatTorus: return "flat-torus";
    case ChartKind::Sphere: return "sphere";
  }
  return "unknown";
}

bool ChartManifold::contains(const Vec& q) const {
  if (q.size() != dimension_ || !q.allFinite()) return false;
  if (kind_ == ChartKind::Sphere)
    return q[0] >= kPoleMargin && q[0] <= std::numbers::pi - kPoleMargin;
  return true;
}

Vec ChartManifold::canonicalize(Vec q) const {
  if (kind_ != ChartKind::FlatTorus) return q;
  for (int i = 0; i < dimension_; ++i) {
    double p = periods_[i];
    double r = std::fmod(q[i], p);
    if (r < 0.0) r += p;
    if (r >= p) r = 0.0;
    q[i] = r;
  }
  return q;
}

Vec ChartManifold::difference(const Vec& p, const Vec& q) const {
  Vec d = q - p;
  if (kind_ == ChartKind::FlatTorus) {
    for (int i = 0; i < dimension_; ++i) d[i] -= periods_[i] * std::round(d[i] / periods_[i]);
  } else if (kind_ == ChartKind::Sphere) {
    d[1] = std::remainder(d[1], 2.0 * std::numbers::pi);
  }
  return d;
}

Vec ChartManifold::default_point() const {
  Vec p = Vec::Zero(dimension_);
  if (kind_ == ChartKind::Sphere) p[0] = std::numbers::pi / 2.0;
  return p;
}

}  // namespace cflow
