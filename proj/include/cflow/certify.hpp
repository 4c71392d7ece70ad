#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cflow/flow.hpp"
#include "cflow/growth.hpp"
#include "cflow/sampling.hpp"

namespace cflow {

/// Verdict slack: a sample violates the bound when its ratio exceeds 1 + 1e-12.
inline constexpr double kRatioSlack = 1e-12;

/// Outcome of checking one growth hypothesis over a sample set. A pass only
/// means no violation was found on the sampled region (see `scope`).
struct CertificationReport {
  std::string hypothesis;
  bool pass = true;
  std::size_t samples_checked = 0;
  /// Samples outside the valid region or with a non-converged distance.
  std::size_t skipped = 0;
  double worst_ratio = 0.0;
  /// Sample attaining worst_ratio.
  std::optional<TangentState> witness;
  /// Max over samples of the ratio with g = 1, clamped below at 1.
  double fitted_constant = 1.0;
  std::string growth;
  std::string scope;
};

struct CertificationBundle {
  std::string name;
  std::vector<CertificationReport> reports;
  bool pass() const;
};

enum class GrowthMode { R, R2 };

/// +-(d/dt a_t)(v, v) <= 2 g(arg) a_t(v, v) with arg = 1 + rho (mode R) or
/// 1 + rho^2 (mode R2).
CertificationReport check_metric_growth(const MetricField& m, const Vec& basepoint,
                                        const GrowthFunction& g, GrowthMode mode,
                                        const SamplerSpec& sampler);

/// |nu(t, q)|_t <= g(R) R.
CertificationReport check_wintner(const MetricField& m, const Vec& basepoint, const VectorField& nu,
                                  const GrowthFunction& g, const SamplerSpec& sampler);

/// |f - F^sharp(v) + h v|_t <= g(E) E / (K + |v|_t). The friction term enters
/// only for forward certification.
CertificationReport check_force_growth(const MetricField& m, const Vec& basepoint,
                                       const ForceField& f, const GrowthFunction& g, double K,
                                       const SamplerSpec& sampler,
                                       Direction direction = Direction::Forward);

/// Shared sampling loop: `ratio` returns {ratio with g, ratio with g = 1} or
/// nullopt to skip the sample. Distance and chart errors also skip.
CertificationReport run_certification(
    const std::string& hypothesis, const GrowthFunction& g, const SamplerSpec& sampler,
    bool with_velocity,
    const std::function<std::optional<std::pair<double, double>>(const TangentState&)>& ratio);

std::string describe_scope(const SamplerSpec& sampler, bool with_velocity, std::size_t stress,
                           bool pass);

}  // namespace cflow
