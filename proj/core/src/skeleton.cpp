#include "stba/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "stba/error.hpp"
#include "stba/residuals.hpp"
#include "stba/triangulation.hpp"

namespace stba {
namespace {

using SlotKey = std::pair<CameraId, FrameIndex>;

double center_row(const CameraModel& cam, FrameIndex frame) {
  const CameraIntrinsics& k = cam.intrinsics_at(frame);
  return k.image_height > 0 ? k.image_height / 2.0 : 0.0;
}

Vec3 backproject(const CameraModel& cam, const Observation2D& obs) {
  const CameraIntrinsics& k = cam.intrinsics_at(obs.frame);
  const double yn = (obs.pixel.y() - k.principal_y) / k.focal_y;
  const double xn = (obs.pixel.x() - k.principal_x - k.skew * yn) / k.focal_x;
  const CameraPose& pose = cam.pose_at(obs.frame);
  const double depth = std::max(1.0, pose.center().norm());
  return pose.apply_inverse(Vec3(xn * depth, yn * depth, depth));
}

// Piecewise-linear interpolation of the invalid slots from the valid ones,
// clamped at the ends; a joint with no valid slot sits at a nominal point.
void interpolate_placeholders(Trajectory3D& joint, const std::vector<bool>& valid) {
  std::vector<TrajectorySample>& samples = joint.mutable_samples();
  std::vector<int> anchors;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (valid[i]) anchors.push_back(static_cast<int>(i));
  }
  if (anchors.empty()) {
    for (TrajectorySample& s : samples) s.position = Vec3(0.0, 1.0, 0.0);
    return;
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (valid[i]) continue;
    const auto next = std::lower_bound(anchors.begin(), anchors.end(), static_cast<int>(i));
    if (next == anchors.begin()) {
      samples[i].position = samples[static_cast<std::size_t>(*next)].position;
    } else if (next == anchors.end()) {
      samples[i].position = samples[static_cast<std::size_t>(anchors.back())].position;
    } else {
      const TrajectorySample& a = samples[static_cast<std::size_t>(*(next - 1))];
      const TrajectorySample& b = samples[static_cast<std::size_t>(*next)];
      const double span = b.time - a.time;
      const double u = span > 0.0 ? (samples[i].time - a.time) / span : 0.5;
      samples[i].position = a.position + u * (b.position - a.position);
    }
  }
}

}  // namespace

void SkeletonTopology::validate() const {
  require(n_joints > 0, ErrorCode::invalid_config, "skeleton needs at least one joint");
  for (const std::array<int, 2>& bone : bones) {
    require(bone[0] >= 0 && bone[0] < n_joints && bone[1] >= 0 && bone[1] < n_joints,
            ErrorCode::invalid_config, "bone joint index out of range");
    require(bone[0] != bone[1], ErrorCode::invalid_config, "bone connects a joint to itself");
  }
  const int n_bones = static_cast<int>(bones.size());
  for (const std::array<int, 2>& pair : mirror_bones) {
    require(pair[0] >= 0 && pair[0] < n_bones && pair[1] >= 0 && pair[1] < n_bones,
            ErrorCode::invalid_config, "mirror bone index out of range");
    require(pair[0] != pair[1], ErrorCode::invalid_config, "bone mirrors itself");
  }
  require(sigma_length_m > 0.0, ErrorCode::invalid_config, "sigma_length_m must be positive");
  require(sigma_symmetry_m > 0.0, ErrorCode::invalid_config, "sigma_symmetry_m must be positive");
}

SkeletonSequence fit_skeleton(const std::vector<Observation2D>& keypoint_obs,
                              const std::vector<CameraModel>& cameras,
                              const SkeletonTopology& topology, const SkeletonFitConfig& cfg) {
  topology.validate();
  cfg.prior.validate();
  cfg.solver.validate();
  require(!cameras.empty(), ErrorCode::empty_problem, "no cameras");
  require(!keypoint_obs.empty(), ErrorCode::empty_problem, "no keypoint observations");

  FrameIndex frame_min = std::numeric_limits<FrameIndex>::max();
  FrameIndex frame_max = std::numeric_limits<FrameIndex>::min();
  for (const Observation2D& obs : keypoint_obs) {
    require(obs.point_id >= 0 && obs.point_id < topology.n_joints, ErrorCode::id_mismatch,
            "keypoint joint index out of range");
    camera_by_id(cameras, obs.camera_id);  // throws id_mismatch for strangers
    frame_min = std::min(frame_min, obs.frame);
    frame_max = std::max(frame_max, obs.frame);
  }

  // The capture grid: every camera at every frame of the covered range, one
  // slot per joint. Slots are matched across joints by (camera, frame); the
  // per-joint time order can differ when rolling-shutter rows differ.
  std::vector<SlotKey> grid;
  for (const CameraModel& cam : cameras) {
    require(cam.pose_mode == PoseMode::kShared || !cam.frame_poses.empty(),
            ErrorCode::missing_pose, "camera has no poses");
    for (FrameIndex f = frame_min; f <= frame_max; ++f) grid.emplace_back(cam.id, f);
  }

  const int n_joints = topology.n_joints;
  // First observation per (joint, camera, frame); duplicates are ignored.
  std::vector<std::map<SlotKey, const Observation2D*>> obs_at(
      static_cast<std::size_t>(n_joints));
  for (const Observation2D& obs : keypoint_obs) {
    obs_at[static_cast<std::size_t>(obs.point_id)].emplace(SlotKey{obs.camera_id, obs.frame},
                                                           &obs);
  }

  SkeletonSequence seq;
  seq.joints.resize(static_cast<std::size_t>(n_joints));
  seq.valid.resize(static_cast<std::size_t>(n_joints));
  seq.joint_underconstrained.resize(static_cast<std::size_t>(n_joints), false);
  // Per joint, slot key -> index into the joint's time-sorted samples.
  std::vector<std::map<SlotKey, int>> slot_index(static_cast<std::size_t>(n_joints));

  for (int j = 0; j < n_joints; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    // Rough per-frame triangulation anchors to start from.
    std::map<FrameIndex, Vec3> anchors;
    std::map<FrameIndex, std::vector<Observation2D>> by_frame;
    std::set<CameraId> seen_by;
    for (const auto& [key, obs] : obs_at[ju]) {
      by_frame[key.second].push_back(*obs);
      seen_by.insert(key.first);
    }
    seq.joint_underconstrained[ju] = seen_by.size() < 2;
    for (const auto& [frame, frame_obs] : by_frame) {
      if (frame_obs.size() < 2) continue;
      try {
        anchors[frame] = triangulate_point(cameras, frame_obs);
      } catch (const Error&) {
      }
    }
    const auto anchor_position = [&](FrameIndex frame,
                                     const Observation2D* obs) -> Vec3 {
      if (anchors.empty()) {
        if (obs != nullptr) return backproject(camera_by_id(cameras, obs->camera_id), *obs);
        return Vec3(0.0, 1.0, 0.0);
      }
      auto next = anchors.lower_bound(frame);
      if (next != anchors.end() && next->first == frame) return next->second;
      if (next == anchors.begin()) return next->second;
      if (next == anchors.end()) return std::prev(next)->second;
      const auto prev = std::prev(next);
      const double span = static_cast<double>(next->first - prev->first);
      const double u = static_cast<double>(frame - prev->first) / span;
      return prev->second + u * (next->second - prev->second);
    };

    std::vector<TrajectorySample> samples;
    std::vector<char> sample_valid;
    samples.reserve(grid.size());
    for (const SlotKey& key : grid) {
      const CameraModel& cam = camera_by_id(cameras, key.first);
      const auto hit = obs_at[ju].find(key);
      TrajectorySample s;
      s.source_camera = key.first;
      s.source_frame = key.second;
      if (hit != obs_at[ju].end()) {
        s.source_row = hit->second->row;
        s.time = cam.observation_time(*hit->second);
        s.position = anchor_position(key.second, hit->second);
        sample_valid.push_back(1);
      } else {
        s.source_row = center_row(cam, key.second);
        s.time = cam.observation_time(key.second, s.source_row);
        s.position = anchor_position(key.second, nullptr);
        sample_valid.push_back(0);
      }
      samples.push_back(s);
    }
    // Sort samples and flags together by (time, original order).
    std::vector<int> perm(samples.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::stable_sort(perm.begin(), perm.end(), [&samples](int a, int b) {
      return samples[static_cast<std::size_t>(a)].time <
             samples[static_cast<std::size_t>(b)].time;
    });
    std::vector<TrajectorySample> sorted;
    std::vector<bool> flags;
    sorted.reserve(samples.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const auto src = static_cast<std::size_t>(perm[i]);
      slot_index[ju][{samples[src].source_camera, samples[src].source_frame}] =
          static_cast<int>(i);
      sorted.push_back(samples[src]);
      flags.push_back(sample_valid[src] != 0);
    }
    seq.joints[ju] = Trajectory3D(j, std::move(sorted));
    seq.valid[ju] = std::move(flags);
    interpolate_placeholders(seq.joints[ju], seq.valid[ju]);
  }

  // Manual problem assembly: only valid slots become parameter blocks, the
  // calibration enters as constant blocks.
  ceres::Problem problem;
  std::vector<std::vector<std::array<double, 3>>> positions(static_cast<std::size_t>(n_joints));
  for (int j = 0; j < n_joints; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const std::vector<TrajectorySample>& samples = seq.joints[ju].samples();
    positions[ju].resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      positions[ju][i] = {samples[i].position.x(), samples[i].position.y(),
                          samples[i].position.z()};
    }
  }

  std::map<SlotKey, std::array<double, 6>> pose_blocks;
  std::map<SlotKey, std::array<double, 5>> intr_blocks;
  std::map<CameraId, double> beta_blocks;
  std::map<CameraId, double> gamma_blocks;
  const auto frozen = [&problem](double* block, int size) {
    if (!problem.HasParameterBlock(block)) {
      problem.AddParameterBlock(block, size);
      problem.SetParameterBlockConstant(block);
    }
    return block;
  };
  const auto pose_block = [&](const SlotKey& key) {
    auto it = pose_blocks.find(key);
    if (it == pose_blocks.end()) {
      const CameraModel& cam = camera_by_id(cameras, key.first);
      it = pose_blocks.emplace(key, pose_to_array(cam.pose_at(key.second))).first;
    }
    return frozen(it->second.data(), 6);
  };
  const auto intr_block = [&](const SlotKey& key) {
    auto it = intr_blocks.find(key);
    if (it == intr_blocks.end()) {
      const CameraModel& cam = camera_by_id(cameras, key.first);
      it = intr_blocks.emplace(key, intrinsics_to_array(cam.intrinsics_at(key.second))).first;
    }
    return frozen(it->second.data(), 5);
  };
  const auto scalar_block = [&](std::map<CameraId, double>& store, CameraId id, double value) {
    auto it = store.find(id);
    if (it == store.end()) it = store.emplace(id, value).first;
    return frozen(&it->second, 1);
  };

  const double pair_scale =
      std::sqrt(cfg.solver.prior_weight * cfg.prior.mass / 2.0);  // weight 1 per sample
  int n_valid_total = 0;
  for (int j = 0; j < n_joints; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const std::vector<TrajectorySample>& samples = seq.joints[ju].samples();
    int prev_valid = -1;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!seq.valid[ju][i]) continue;
      ++n_valid_total;
      const TrajectorySample& s = samples[i];
      const SlotKey key{s.source_camera, s.source_frame};
      const Observation2D& obs = *obs_at[ju].at(key);
      problem.AddResidualBlock(new ReprojectionCost(obs.pixel, obs.sigma), nullptr,
                               pose_block(key), positions[ju][i].data(), intr_block(key));
      if (prev_valid >= 0) {
        const TrajectorySample& p = samples[static_cast<std::size_t>(prev_valid)];
        const CameraModel& cam_p = camera_by_id(cameras, p.source_camera);
        const CameraModel& cam_s = camera_by_id(cameras, s.source_camera);
        double* xi = positions[ju][static_cast<std::size_t>(prev_valid)].data();
        double* xj = positions[ju][i].data();
        if (p.source_camera == s.source_camera) {
          problem.AddResidualBlock(
              new PriorSameCameraCost(pair_scale, cfg.prior.epsilon, cam_p.alpha,
                                      static_cast<double>(p.source_frame), p.source_row,
                                      static_cast<double>(s.source_frame), s.source_row),
              nullptr, xi, xj, scalar_block(gamma_blocks, p.source_camera, cam_p.gamma));
        } else {
          problem.AddResidualBlock(
              new PriorCrossCameraCost(pair_scale, cfg.prior.epsilon, cam_p.alpha,
                                       static_cast<double>(p.source_frame), p.source_row,
                                       cam_s.alpha, static_cast<double>(s.source_frame),
                                       s.source_row),
              nullptr, xi, xj, scalar_block(beta_blocks, p.source_camera, cam_p.beta),
              scalar_block(beta_blocks, s.source_camera, cam_s.beta),
              scalar_block(gamma_blocks, p.source_camera, cam_p.gamma),
              scalar_block(gamma_blocks, s.source_camera, cam_s.gamma));
        }
      }
      prev_valid = static_cast<int>(i);
    }
  }
  require(n_valid_total > 0, ErrorCode::empty_problem, "no valid keypoint slots");

  // Bone coherence: one free mean length per bone, tied to every slot where
  // both endpoints were observed.
  std::deque<double> bone_lengths;
  seq.mean_bone_length.assign(topology.bones.size(), 0.0);
  std::vector<double*> bone_param(topology.bones.size(), nullptr);
  std::vector<std::vector<std::array<double*, 2>>> bone_slots(topology.bones.size());
  for (std::size_t b = 0; b < topology.bones.size(); ++b) {
    const auto ja = static_cast<std::size_t>(topology.bones[b][0]);
    const auto jb = static_cast<std::size_t>(topology.bones[b][1]);
    double sum = 0.0;
    for (const SlotKey& key : grid) {
      const int ia = slot_index[ja].at(key);
      const int ib = slot_index[jb].at(key);
      if (!seq.valid[ja][static_cast<std::size_t>(ia)] ||
          !seq.valid[jb][static_cast<std::size_t>(ib)]) {
        continue;
      }
      double* xa = positions[ja][static_cast<std::size_t>(ia)].data();
      double* xb = positions[jb][static_cast<std::size_t>(ib)].data();
      bone_slots[b].push_back({xa, xb});
      sum += (Eigen::Map<Vec3>(xa) - Eigen::Map<Vec3>(xb)).norm();
    }
    if (bone_slots[b].empty()) continue;
    bone_lengths.push_back(sum / static_cast<double>(bone_slots[b].size()));
    bone_param[b] = &bone_lengths.back();
    for (const std::array<double*, 2>& slot : bone_slots[b]) {
      problem.AddResidualBlock(new BoneLengthCost(topology.sigma_length_m), nullptr, slot[0],
                               slot[1], bone_param[b]);
    }
  }
  for (const std::array<int, 2>& pair : topology.mirror_bones) {
    const std::array<int, 2>& left = topology.bones[static_cast<std::size_t>(pair[0])];
    const std::array<int, 2>& right = topology.bones[static_cast<std::size_t>(pair[1])];
    for (const SlotKey& key : grid) {
      std::array<double*, 4> blocks{};
      bool all_valid = true;
      const std::array<int, 4> joints{left[0], left[1], right[0], right[1]};
      for (std::size_t q = 0; q < 4; ++q) {
        const auto ju = static_cast<std::size_t>(joints[q]);
        const int idx = slot_index[ju].at(key);
        if (!seq.valid[ju][static_cast<std::size_t>(idx)]) {
          all_valid = false;
          break;
        }
        blocks[q] = positions[ju][static_cast<std::size_t>(idx)].data();
      }
      if (!all_valid) continue;
      problem.AddResidualBlock(new BoneSymmetryCost(topology.sigma_symmetry_m), nullptr,
                               blocks[0], blocks[1], blocks[2], blocks[3]);
    }
  }

  ceres::Solver::Options options;
  options.linear_solver_type = ceres::SPARSE_NORMAL_CHOLESKY;
  options.max_num_iterations = cfg.solver.max_iterations;
  options.function_tolerance = cfg.solver.function_tolerance;
  options.parameter_tolerance = cfg.solver.parameter_tolerance;
  options.num_threads = cfg.solver.threads;
  options.logging_type = ceres::SILENT;
  options.minimizer_progress_to_stdout = cfg.solver.verbose;
  ceres::Solver::Summary summary;
  ceres::Solve(options, &problem, &summary);

  for (int j = 0; j < n_joints; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    std::vector<TrajectorySample>& samples = seq.joints[ju].mutable_samples();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (seq.valid[ju][i]) samples[i].position = Eigen::Map<Vec3>(positions[ju][i].data());
    }
    interpolate_placeholders(seq.joints[ju], seq.valid[ju]);
  }
  for (std::size_t b = 0; b < topology.bones.size(); ++b) {
    if (bone_param[b] != nullptr) seq.mean_bone_length[b] = *bone_param[b];
  }
  return seq;
}

SkeletonSequence infill_missing(const SkeletonSequence& seq, const DctResampleConfig& cfg) {
  require(cfg.lambda2 >= 0.0, ErrorCode::invalid_config, "lambda2 must be non-negative");
  SkeletonSequence out = seq;
  for (std::size_t j = 0; j < out.joints.size(); ++j) {
    std::vector<TrajectorySample>& samples = out.joints[j].mutable_samples();
    const int n = static_cast<int>(samples.size());
    if (n == 0) continue;
    std::vector<double> times;
    std::vector<Vec3> points;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!out.valid[j][i]) continue;
      times.push_back(samples[i].time);
      points.push_back(samples[i].position);
    }
    const int n_valid = static_cast<int>(times.size());
    const int kb = cfg.num_basis == 0 ? std::min(n, n_valid) : cfg.num_basis;
    require(kb >= 1 && kb <= n && n_valid >= kb, ErrorCode::too_sparse,
            "joint has fewer valid samples than basis functions");
    double dt = n > 1 ? (samples.back().time - samples.front().time) / (n - 1) : 1.0;
    if (dt <= 0.0) dt = 1.0;
    const DctBasis basis(n, kb, samples.front().time, dt);
    const std::vector<double> weights(times.size(), 1.0);
    const Eigen::MatrixXd coeffs = dct_fit_positions(basis, times, points, weights, cfg.lambda2);
    for (TrajectorySample& s : samples) {
      s.position = (basis.row_at(s.time) * coeffs).transpose();
    }
  }
  return out;
}

double bone_length_variance(const SkeletonSequence& seq, const SkeletonTopology& topology) {
  topology.validate();
  require(seq.joints.size() == static_cast<std::size_t>(topology.n_joints),
          ErrorCode::id_mismatch, "sequence does not match the topology");
  // Slots are matched across joints by (camera, frame), not by index; the
  // per-joint time sort can interleave cameras differently.
  std::vector<std::map<SlotKey, int>> index(seq.joints.size());
  for (std::size_t j = 0; j < seq.joints.size(); ++j) {
    const std::vector<TrajectorySample>& samples = seq.joints[j].samples();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      index[j].emplace(SlotKey{samples[i].source_camera, samples[i].source_frame},
                       static_cast<int>(i));
    }
  }
  double total = 0.0;
  int n_bones = 0;
  for (const std::array<int, 2>& bone : topology.bones) {
    const auto ja = static_cast<std::size_t>(bone[0]);
    const auto jb = static_cast<std::size_t>(bone[1]);
    std::vector<double> lengths;
    for (const auto& [key, ia] : index[ja]) {
      const auto ib = index[jb].find(key);
      if (ib == index[jb].end()) continue;
      if (!seq.valid[ja][static_cast<std::size_t>(ia)] ||
          !seq.valid[jb][static_cast<std::size_t>(ib->second)]) {
        continue;
      }
      const Vec3 a = seq.joints[ja].samples()[static_cast<std::size_t>(ia)].position;
      const Vec3 b = seq.joints[jb].samples()[static_cast<std::size_t>(ib->second)].position;
      lengths.push_back((a - b).norm());
    }
    if (lengths.size() < 2) continue;
    double mean = 0.0;
    for (const double l : lengths) mean += l;
    mean /= static_cast<double>(lengths.size());
    double var = 0.0;
    for (const double l : lengths) var += (l - mean) * (l - mean);
    total += var / static_cast<double>(lengths.size());
    ++n_bones;
  }
  return n_bones > 0 ? total / n_bones : 0.0;
}

}  // namespace stba
