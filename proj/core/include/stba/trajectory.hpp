#pragma once

#include <vector>

#include "stba/camera.hpp"
#include "stba/types.hpp"

namespace stba {

struct TrajectorySample {
  double time = 0.0;        // seconds
  Vec3 position = Vec3::Zero();
  double weight = 1.0;      // motion-prior weight of this sample
  CameraId source_camera = -1;
  FrameIndex source_frame = 0;
  double source_row = 0.0;
};

// Samples are kept sorted by time ascending (ties allowed; stable order).
class Trajectory3D {
 public:
  Trajectory3D() = default;
  Trajectory3D(PointId point_id, std::vector<TrajectorySample> samples);

  [[nodiscard]] PointId point_id() const { return point_id_; }
  [[nodiscard]] const std::vector<TrajectorySample>& samples() const { return samples_; }
  [[nodiscard]] std::size_t size() const { return samples_.size(); }

  // Mutation keeps ownership of the sorted-by-time invariant with the caller;
  // call sort_by_time() after editing times.
  std::vector<TrajectorySample>& mutable_samples() { return samples_; }
  void sort_by_time();
  [[nodiscard]] bool is_sorted() const;

  // Recomputes each sample's time from its source camera and re-sorts.
  void refresh_times(const std::vector<CameraModel>& cameras);

  // Piecewise-linear position at time t, clamped to the end samples.
  [[nodiscard]] Vec3 interpolate(double t) const;

 private:
  PointId point_id_ = 0;
  std::vector<TrajectorySample> samples_;
};

}  // namespace stba
