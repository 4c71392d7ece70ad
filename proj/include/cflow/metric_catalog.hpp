#pragma once

#include <string>
#include <vector>

#include "cflow/metric.hpp"

namespace cflow {

/// Built-in metrics by name: "euclidean", "conformal-exp" (e^{2t} I),
/// "conformal-poly" ((1+t^2) I), "sphere" (unit round metric in polar
/// coordinates) and "flat-torus". All carry analytic derivatives and a
/// closed-form distance.
MetricField catalog_metric(const std::string& name, const ChartManifold& manifold);

/// Metric whose entries are expressions in t, q1..qd. The matrix must be given
/// in full and be symmetric entry by entry. With `analytic` the derivatives are
/// taken symbolically, otherwise by central differences. Entries that do not
/// depend on q give a closed-form distance on R^n and on the torus.
MetricField custom_metric(const ChartManifold& manifold,
                          const std::vector<std::vector<std::string>>& entries, bool analytic);

const std::vector<std::string>& catalog_names();

/// Distance of a q-independent metric matrix on the torus: the minimum over
/// the 3^d lattice translates of the nearest representative.
double torus_constant_distance(const ChartManifold& torus, const Mat& a, const Vec& p,
                               const Vec& q);
/// Great-circle distance on the unit sphere for polar-chart points.
double great_circle_distance(const Vec& p, const Vec& q);

}  // namespace cflow
