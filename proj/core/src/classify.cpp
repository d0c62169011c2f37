#include "stba/classify.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "stba/error.hpp"
#include "stba/random.hpp"
#include "stba/triangulation.hpp"

namespace stba {
namespace {

// Fraction of the track's measurements a single world point explains.
double static_support(const Track2D& track, const std::vector<CameraModel>& cameras,
                      const Vec3& point, double thresh_px) {
  int good = 0;
  for (const Observation2D& obs : track.observations) {
    const CameraModel& cam = camera_by_id(cameras, obs.camera_id);
    if (!cam.has_pose(obs.frame)) continue;
    if (cam.pose_at(obs.frame).apply(point).z() <= 1e-9) continue;
    if ((project(cam, obs.frame, point) - obs.pixel).norm() <= thresh_px) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(track.observations.size());
}

// The two cameras holding the most measurements of this track, ids ascending.
std::pair<CameraId, CameraId> best_camera_pair(const Track2D& track) {
  std::map<CameraId, int> counts;
  for (const Observation2D& obs : track.observations) ++counts[obs.camera_id];
  if (counts.size() < 2) return {-1, -1};
  std::vector<std::pair<CameraId, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  const CameraId a = ranked[0].first;
  const CameraId b = ranked[1].first;
  return {std::min(a, b), std::max(a, b)};
}

}  // namespace

std::vector<Track2D> group_tracks(const std::vector<Observation2D>& observations) {
  std::map<PointId, std::vector<Observation2D>> grouped;
  for (const Observation2D& obs : observations) grouped[obs.point_id].push_back(obs);
  std::vector<Track2D> tracks;
  tracks.reserve(grouped.size());
  for (auto& [id, obs] : grouped) tracks.push_back({id, std::move(obs)});
  return tracks;
}

TrackPartition classify_tracks(const std::vector<Track2D>& tracks,
                               const std::vector<CameraModel>& cameras,
                               const ClassifyConfig& cfg) {
  require(cfg.static_thresh_px > 0.0 && cfg.static_fraction > 0.0 && cfg.valley_ratio > 0.0 &&
              cfg.retriangulation_trials > 0,
          ErrorCode::invalid_config, "classification thresholds must be positive");
  TrackPartition out;
  Rng rng(cfg.seed);
  for (const Track2D& track : tracks) {
    require(!track.observations.empty(), ErrorCode::too_few_samples,
            "track without measurements");

    // Stage 1: a static point explains almost all measurements no matter
    // which two views triangulate it; a moving one cannot satisfy frames
    // captured at different instants.
    double best_support = 0.0;
    const int n = static_cast<int>(track.observations.size());
    for (int trial = 0; trial < cfg.retriangulation_trials; ++trial) {
      const int a = static_cast<int>(rng.index(n));
      int b = static_cast<int>(rng.index(n));
      if (track.observations[a].camera_id == track.observations[b].camera_id) {
        for (int k = 0; k < n; ++k) {
          if (track.observations[k].camera_id != track.observations[a].camera_id) {
            b = k;
            break;
          }
        }
      }
      if (track.observations[a].camera_id == track.observations[b].camera_id) break;
      Vec3 point;
      try {
        point = triangulate_point(cameras, {track.observations[a], track.observations[b]});
      } catch (const Error&) {
        continue;
      }
      best_support = std::max(
          best_support, static_support(track, cameras, point, cfg.static_thresh_px));
      if (best_support >= cfg.static_fraction) break;
    }
    if (best_support >= cfg.static_fraction) {
      out.static_ids.push_back(track.point_id);
      continue;
    }

    // Stage 2: sweep the relative offset of the two best views. A real
    // motion produces a pronounced cost valley at the consistent alignment;
    // mismatched tracks stay uniformly bad.
    const auto [ca, cb] = best_camera_pair(track);
    if (ca < 0) {
      out.rejected_ids.push_back(track.point_id);
      continue;
    }
    bool dynamic = false;
    try {
      const PairwiseResult sweep =
          pairwise_offset_search(camera_by_id(cameras, ca), camera_by_id(cameras, cb),
                                 track.observations, {track.point_id}, cfg.sweep);
      double mean = 0.0;
      for (const auto& [shift, cost] : sweep.curve) mean += cost;
      mean /= static_cast<double>(sweep.curve.size());
      dynamic = mean > 0.0 && sweep.cost < cfg.valley_ratio * mean;
    } catch (const Error&) {
      dynamic = false;
    }
    (dynamic ? out.dynamic_ids : out.rejected_ids).push_back(track.point_id);
  }
  return out;
}

}  // namespace stba
