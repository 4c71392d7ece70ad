#pragma once

#include <cstddef>
#include <functional>
#include <limits>

#include "cflow/types.hpp"

namespace cflow {

using OdeRhs = std::function<void(double t, const Vec& y, Vec& dydt)>;

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 selects a starting step automatically
  std::size_t max_steps = 5'000'000;
};

enum class OdeOutcome { ReachedEnd, Stopped, StepCollapse, InvalidRegion, StepLimit };

/// Hooks into the adaptive loop. All have permissive defaults except `accepted`.
class OdeObserver {
 public:
  virtual ~OdeObserver() = default;
  /// Trial end-of-step states failing this test are rejected and the step halved.
  virtual bool valid(double /*t*/, const Vec& /*y*/) { return true; }
  /// Called after every accepted step. `y` may be rewritten in place (used to
  /// wrap periodic coordinates). Returning false stops the integration.
  virtual bool accepted(double t, Vec& y, double step) = 0;
  /// Steps below this size end the run with StepCollapse.
  virtual double min_step(double t);
};

struct OdeResult {
  OdeOutcome outcome = OdeOutcome::ReachedEnd;
  double t = 0.0;
  Vec y;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double smallest_step = std::numeric_limits<double>::infinity();
  /// Step size that was being attempted when the run ended.
  double last_step = 0.0;
  /// True when the final rejections came from the validity test.
  bool left_region = false;
};

/// Dormand-Prince 5(4) with first-same-as-last stages and a max-norm mixed
/// error test. Integrates forward only: t_end must exceed t0.
OdeResult integrate_dopri5(const OdeRhs& rhs, double t0, Vec y0, double t_end,
                           const StepControl& control, OdeObserver& observer);

}  // namespace cflow
