#pragma once

#include <cstdint>
#include <vector>

#include "cflow/manifold.hpp"
#include "cflow/types.hpp"

namespace cflow {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Random samples over [-r, r] x q-box x v-box plus a deterministic stress set.
struct SamplerSpec {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  /// Half-width r of the time window.
  double window = 1.0;
  std::vector<Interval> q_box;
  std::vector<Interval> v_box;
  /// Fractions of the box extent used for the axis rays of the stress set.
  std::vector<double> ray_fractions{0.01, 0.1, 1.0};
};

/// Box defaults: [-10, 10] per axis on R^n, [0, period) on a torus,
/// theta in [0.1, pi - 0.1] and phi in [0, 2 pi) on the sphere; v in [-10, 10].
SamplerSpec default_sampler(const ChartManifold& manifold, double window);

/// Stress points first (rays from the box point nearest the origin towards
/// every face, at t in {-r, 0, r}), then the random samples. With
/// `with_velocity` false only positions vary and v is left empty.
std::vector<TangentState> draw_samples(const SamplerSpec& spec, bool with_velocity);

}  // namespace cflow
