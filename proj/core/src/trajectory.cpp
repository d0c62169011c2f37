#include "stba/trajectory.hpp"

#include <algorithm>

#include "stba/error.hpp"

namespace stba {

Trajectory3D::Trajectory3D(PointId point_id, std::vector<TrajectorySample> samples)
    : point_id_(point_id), samples_(std::move(samples)) {
  sort_by_time();
}

void Trajectory3D::sort_by_time() {
  std::stable_sort(samples_.begin(), samples_.end(),
                   [](const TrajectorySample& a, const TrajectorySample& b) {
                     return a.time < b.time;
                   });
}

bool Trajectory3D::is_sorted() const {
  return std::is_sorted(samples_.begin(), samples_.end(),
                        [](const TrajectorySample& a, const TrajectorySample& b) {
                          return a.time < b.time;
                        });
}

void Trajectory3D::refresh_times(const std::vector<CameraModel>& cameras) {
  for (TrajectorySample& s : samples_) {
    const CameraModel& cam = camera_by_id(cameras, s.source_camera);
    s.time = cam.observation_time(s.source_frame, s.source_row);
  }
  sort_by_time();
}

Vec3 Trajectory3D::interpolate(double t) const {
  require(!samples_.empty(), ErrorCode::too_few_samples, "empty trajectory");
  if (t <= samples_.front().time) return samples_.front().position;
  if (t >= samples_.back().time) return samples_.back().position;
  auto hi = std::lower_bound(samples_.begin(), samples_.end(), t,
                             [](const TrajectorySample& s, double v) { return s.time < v; });
  auto lo = hi - 1;
  const double dt = hi->time - lo->time;
  if (dt <= 0.0) return lo->position;
  const double a = (t - lo->time) / dt;
  return (1.0 - a) * lo->position + a * hi->position;
}

}  // namespace stba
