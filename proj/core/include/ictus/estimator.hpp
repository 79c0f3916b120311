#pragma once

#include <memory>
#include <string>

#include "ictus/kinematics.hpp"

namespace ictus {

/// Streaming phase estimator: one call per control step.
class PhaseEstimator {
 public:
  virtual ~PhaseEstimator() = default;
  /// Consumes one kinematic frame and returns the phase estimate in [0, 2*pi).
  virtual double step(const KinematicFrame& frame) = 0;
  virtual void reset() = 0;
  /// A new estimator sharing the model, with its own zeroed stream state.
  virtual std::unique_ptr<PhaseEstimator> fresh() const = 0;
  virtual std::string name() const = 0;
};

}  // namespace ictus
