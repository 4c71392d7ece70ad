#include "cflow/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cflow {

SamplerSpec default_sampler(const ChartManifold& manifold, double window) {
  SamplerSpec spec;
  spec.window = window;
  const int d = manifold.dimension();
  switch (manifold.kind()) {
    case ChartKind::Euclidean:
      spec.q_box.assign(d, {-10.0, 10.0});
      break;
    case ChartKind::FlatTorus:
      for (int i = 0; i < d; ++i) spec.q_box.push_back({0.0, manifold.periods()[i]});
      break;
    case ChartKind::Sphere:
      spec.q_box = {{0.1, M_PI - 0.1}, {0.0, 2.0 * M_PI}};
      break;
  }
  spec.v_box.assign(d, {-10.0, 10.0});
  return spec;
}

namespace {

Vec nearest_to_origin(const std::vector<Interval>& box) {
  Vec c(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) c[i] = std::clamp(0.0, box[i].lo, box[i].hi);
  return c;
}

// The center point followed by rays towards each face at the given fractions.
std::vector<Vec> ray_points(const std::vector<Interval>& box, const std::vector<double>& fractions) {
  Vec c = nearest_to_origin(box);
  std::vector<Vec> out{c};
  for (std::size_t i = 0; i < box.size(); ++i) {
    for (double face : {box[i].hi, box[i].lo}) {
      if (face == c[i]) continue;
      for (double f : fractions) {
        Vec x = c;
        x[i] = c[i] + f * (face - c[i]);
        out.push_back(x);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<TangentState> draw_samples(const SamplerSpec& spec, bool with_velocity) {
  if (spec.q_box.empty()) throw ConfigError("sampler.q_box", "empty box");
  if (with_velocity && spec.v_box.size() != spec.q_box.size())
    throw ConfigError("sampler.v_box", "dimension differs from q_box");
  const double r = spec.window;
  std::vector<TangentState> out;

  std::vector<Vec> qs = ray_points(spec.q_box, spec.ray_fractions);
  std::vector<Vec> vs = with_velocity ? ray_points(spec.v_box, spec.ray_fractions)
                                      : std::vector<Vec>{Vec()};
  for (double t : {-r, 0.0, r})
    for (const Vec& q : qs)
      for (const Vec& v : vs) out.push_back({t, q, v});

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const std::vector<Interval>& box) {
    Vec x(box.size());
    for (std::size_t i = 0; i < box.size(); ++i)
      x[i] = box[i].lo + (box[i].hi - box[i].lo) * unit(rng);
    return x;
  };
  for (std::size_t k = 0; k < spec.samples; ++k) {
    TangentState s;
    s.t = -r + 2.0 * r * unit(rng);
    s.q = draw(spec.q_box);
    if (with_velocity) s.v = draw(spec.v_box);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace cflow
