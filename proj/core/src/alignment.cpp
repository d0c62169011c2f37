#include "stba/alignment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>

#include <json.hpp>

#include "stba/error.hpp"
#include "stba/rotation.hpp"
#include "stba/scenario.hpp"
#include "stba/triangulation.hpp"

namespace stba {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double fract(double beta) {
  const double f = beta - std::floor(beta);
  return f == 1.0 ? 0.0 : f;
}

Vec3 camera_center(const CameraModel& cam) {
  if (cam.pose_mode == PoseMode::kShared) return cam.pose.center();
  require(!cam.frame_poses.empty(), ErrorCode::missing_pose, "camera has no poses");
  return cam.frame_poses.begin()->second.center();
}

// Point along the observation ray at the given depth; the depth-of-origin
// fallback when a track never triangulates.
Vec3 backproject(const CameraModel& cam, const Observation2D& obs, double depth) {
  const CameraIntrinsics& k = cam.intrinsics_at(obs.frame);
  const double yn = (obs.pixel.y() - k.principal_y) / k.focal_y;
  const double xn = (obs.pixel.x() - k.principal_x - k.skew * yn) / k.focal_x;
  const CameraPose& pose = cam.pose_at(obs.frame);
  const Vec3 dir = axis_angle_to_matrix(pose.axis_angle).transpose() * Vec3(xn, yn, 1.0);
  return pose.center() + depth * dir;
}

Vec3 frame_position(FrameIndex frame, const std::map<FrameIndex, Vec3>& anchors,
                    const CameraModel& cam, const Observation2D& obs) {
  if (anchors.empty()) {
    return backproject(cam, obs, std::max(1.0, camera_center(cam).norm()));
  }
  const auto ge = anchors.lower_bound(frame);
  if (ge != anchors.end() && ge->first == frame) return ge->second;
  if (ge == anchors.begin()) return ge->second;
  if (ge == anchors.end()) return std::prev(ge)->second;
  const auto lt = std::prev(ge);
  const double a =
      static_cast<double>(frame - lt->first) / static_cast<double>(ge->first - lt->first);
  return (1.0 - a) * lt->second + a * ge->second;
}

// Per-frame triangulation of the given track ids: all cameras' frame f are
// treated as simultaneous, frames that never triangulate borrow the nearest
// anchors linearly. One sample per observation, timed by its own camera.
std::vector<Trajectory3D> triangulate_tracks(const std::vector<CameraModel>& cameras,
                                             const std::vector<Observation2D>& observations,
                                             const std::set<PointId>& ids) {
  std::map<PointId, std::map<FrameIndex, std::vector<Observation2D>>> per_frame;
  for (const Observation2D& obs : observations) {
    if (ids.count(obs.point_id) > 0) per_frame[obs.point_id][obs.frame].push_back(obs);
  }
  std::vector<Trajectory3D> tracks;
  for (const auto& [id, frames] : per_frame) {
    std::map<FrameIndex, Vec3> anchors;
    for (const auto& [frame, obs] : frames) {
      if (obs.size() < 2) continue;
      try {
        const Vec3 x = triangulate_point(cameras, obs);
        // The synchronized-frames assumption puts fast points anywhere; only
        // anchors in front of all their cameras are usable starting points.
        bool in_front = true;
        for (const Observation2D& o : obs) {
          const CameraModel& cam = camera_by_id(cameras, o.camera_id);
          if (cam.pose_at(o.frame).apply(x).z() <= 0.0) {
            in_front = false;
            break;
          }
        }
        if (in_front) anchors[frame] = x;
      } catch (const Error&) {
      }
    }
    std::vector<TrajectorySample> samples;
    for (const auto& [frame, obs_list] : frames) {
      for (const Observation2D& obs : obs_list) {
        const CameraModel& cam = camera_by_id(cameras, obs.camera_id);
        TrajectorySample s;
        s.time = cam.observation_time(obs);
        s.position = frame_position(frame, anchors, cam, obs);
        s.source_camera = obs.camera_id;
        s.source_frame = obs.frame;
        s.source_row = obs.row;
        samples.push_back(s);
      }
    }
    tracks.emplace_back(id, std::move(samples));
  }
  return tracks;
}

struct DisjointSet {
  explicit DisjointSet(const std::vector<CameraId>& nodes) {
    for (const CameraId id : nodes) parent[id] = id;
  }
  CameraId find(CameraId a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(CameraId a, CameraId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
  std::map<CameraId, CameraId> parent;
};

// Interleaved capture schedule of the tracks under the given offsets: per
// track (ascending id), its (camera, frame) keys in capture-time order. The
// insertion trials compare schedules before and after optimizing because the
// motion prior's pairing is only meaningful while the claimed interleaving
// holds; a beta running away keeps the sub-frame order of the cameras while
// silently reversing half the sample pairs.
std::vector<std::tuple<PointId, CameraId, FrameIndex>> sample_schedule(
    const std::vector<Trajectory3D>& tracks, const std::vector<CameraModel>& cameras) {
  std::vector<const Trajectory3D*> ordered;
  ordered.reserve(tracks.size());
  for (const Trajectory3D& t : tracks) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const Trajectory3D* a, const Trajectory3D* b) {
              return a->point_id() < b->point_id();
            });
  std::vector<std::tuple<PointId, CameraId, FrameIndex>> schedule;
  std::vector<std::tuple<double, CameraId, FrameIndex>> entries;
  for (const Trajectory3D* t : ordered) {
    entries.clear();
    for (const TrajectorySample& s : t->samples()) {
      const CameraModel& cam = camera_by_id(cameras, s.source_camera);
      entries.emplace_back(cam.observation_time(s.source_frame, s.source_row),
                           s.source_camera, s.source_frame);
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [time, cam, frame] : entries) {
      schedule.emplace_back(t->point_id(), cam, frame);
    }
  }
  return schedule;
}

std::vector<CameraId> subframe_order(const std::vector<CameraModel>& cameras) {
  std::vector<std::pair<double, CameraId>> keys;
  keys.reserve(cameras.size());
  for (const CameraModel& cam : cameras) keys.emplace_back(fract(cam.beta), cam.id);
  std::sort(keys.begin(), keys.end());
  std::vector<CameraId> order;
  order.reserve(keys.size());
  for (const auto& [f, id] : keys) order.push_back(id);
  return order;
}

}  // namespace

SceneState geometric_initialization(std::vector<CameraModel> cameras,
                                    const std::vector<Observation2D>& observations,
                                    const std::vector<PointId>& dynamic_track_ids) {
  require(!cameras.empty(), ErrorCode::empty_problem, "no cameras to initialize");
  const std::set<PointId> dynamic(dynamic_track_ids.begin(), dynamic_track_ids.end());
  std::map<PointId, std::vector<Observation2D>> static_obs;
  for (const Observation2D& obs : observations) {
    if (dynamic.count(obs.point_id) == 0) static_obs[obs.point_id].push_back(obs);
  }
  SceneState scene;
  for (const auto& [id, obs] : static_obs) {
    if (obs.size() < 2) continue;
    try {
      scene.static_points.push_back({id, triangulate_point(cameras, obs)});
    } catch (const Error&) {
    }
  }
  scene.trajectories = triangulate_tracks(cameras, observations, dynamic);
  scene.cameras = std::move(cameras);
  return scene;
}

PairwiseResult pairwise_offset_search(const CameraModel& cam_i, const CameraModel& cam_j,
                                      const std::vector<Observation2D>& observations,
                                      const std::vector<PointId>& track_ids,
                                      const PairwiseConfig& cfg) {
  require(cfg.grid_step > 0.0 && cfg.grid_halfwidth >= 0.0, ErrorCode::invalid_config,
          "grid step must be positive");
  require(cam_i.id != cam_j.id, ErrorCode::invalid_config, "need two distinct cameras");
  const std::set<PointId> wanted(track_ids.begin(), track_ids.end());
  std::set<PointId> seen_i, seen_j;
  std::vector<Observation2D> pair_obs;
  for (const Observation2D& obs : observations) {
    if (wanted.count(obs.point_id) == 0) continue;
    if (obs.camera_id == cam_i.id) {
      seen_i.insert(obs.point_id);
    } else if (obs.camera_id == cam_j.id) {
      seen_j.insert(obs.point_id);
    } else {
      continue;
    }
    pair_obs.push_back(obs);
  }
  std::set<PointId> shared;
  for (const PointId id : seen_i) {
    if (seen_j.count(id) > 0) shared.insert(id);
  }
  require(!shared.empty(), ErrorCode::no_shared_tracks,
          "cameras " + std::to_string(cam_i.id) + " and " + std::to_string(cam_j.id) +
              " share no dynamic track");
  pair_obs.erase(std::remove_if(pair_obs.begin(), pair_obs.end(),
                                [&](const Observation2D& o) {
                                  return shared.count(o.point_id) == 0;
                                }),
                 pair_obs.end());

  PairwiseResult result;
  result.cam_i = cam_i.id;
  result.cam_j = cam_j.id;
  result.n_shared_tracks = static_cast<int>(shared.size());
  result.baseline_m = (camera_center(cam_i) - camera_center(cam_j)).norm();

  const int half = static_cast<int>(std::lround(cfg.grid_halfwidth / cfg.grid_step));
  std::vector<CameraModel> cams{cam_i, cam_j};
  SolverConfig solver = cfg.solver;
  solver.reference_camera = cam_i.id;

  // Anchor positions ignore the offsets, so one triangulation serves every
  // candidate; only the sample times move with the grid. Fresh copies per
  // candidate keep the scores independent of evaluation order.
  const std::vector<Trajectory3D> base = triangulate_tracks(cams, pair_obs, shared);
  int scalar_residuals = 2 * static_cast<int>(pair_obs.size());
  for (const Trajectory3D& t : base) {
    scalar_residuals += 3 * (static_cast<int>(t.size()) - 1);
  }
  double best_cost = 0.0;
  double best_delta = cam_j.beta;
  bool have_best = false;
  for (int k = -half; k <= half; ++k) {
    const double delta = cam_j.beta + k * cfg.grid_step;
    cams[1].beta = delta;
    std::vector<Trajectory3D> tracks = base;
    for (Trajectory3D& t : tracks) t.refresh_times(cams);
    TrajectorySolveResult solved =
        solve_trajectories_only(cams, std::move(tracks), pair_obs, cfg.prior, solver, false);
    const double cost = solved.report.total;
    result.curve.emplace_back(delta, cost);
    // Ties keep the candidate closest to the claimed offset.
    if (!have_best || cost < best_cost ||
        (cost == best_cost &&
         std::abs(delta - cam_j.beta) < std::abs(best_delta - cam_j.beta))) {
      have_best = true;
      best_cost = cost;
      best_delta = delta;
    }
  }
  result.offset_frames = best_delta - cam_i.beta;
  result.cost = best_cost;
  result.mean_residual_cost = scalar_residuals > 0 ? best_cost / scalar_residuals : 0.0;
  return result;
}

const GraphEdge* CameraGraph::edge(CameraId a, CameraId b) const {
  const CameraId lo = std::min(a, b);
  const CameraId hi = std::max(a, b);
  for (const GraphEdge& e : edges) {
    if (e.i == lo && e.j == hi) return &e;
  }
  return nullptr;
}

double CameraGraph::offset(CameraId from, CameraId to) const {
  const GraphEdge* e = edge(from, to);
  require(e != nullptr, ErrorCode::disconnected_graph,
          "no edge between cameras " + std::to_string(from) + " and " + std::to_string(to));
  return from == e->i ? e->t_ij : -e->t_ij;
}

CameraGraph covisibility_graph(const std::vector<CameraModel>& cameras,
                               const std::vector<Observation2D>& observations,
                               const std::vector<PointId>& track_ids) {
  const std::set<PointId> wanted(track_ids.begin(), track_ids.end());
  CameraGraph graph;
  std::map<CameraId, std::set<PointId>> seen;
  for (const CameraModel& cam : cameras) {
    graph.nodes.push_back(cam.id);
    seen[cam.id];
  }
  for (const Observation2D& obs : observations) {
    const auto it = seen.find(obs.camera_id);
    if (it != seen.end() && wanted.count(obs.point_id) > 0) it->second.insert(obs.point_id);
  }
  std::vector<CameraId> ids = graph.nodes;
  std::sort(ids.begin(), ids.end());
  DisjointSet dsu(ids);
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a + 1; b < ids.size(); ++b) {
      int n = 0;
      for (const PointId id : seen[ids[a]]) n += seen[ids[b]].count(id) > 0 ? 1 : 0;
      if (n == 0) continue;
      GraphEdge e;
      e.i = ids[a];
      e.j = ids[b];
      e.n_shared = n;
      e.baseline_m = (camera_center(camera_by_id(cameras, ids[a])) -
                      camera_center(camera_by_id(cameras, ids[b])))
                         .norm();
      graph.edges.push_back(e);
      dsu.unite(ids[a], ids[b]);
    }
  }
  graph.connected = true;
  for (const CameraId id : ids) {
    graph.connected = graph.connected && dsu.find(id) == dsu.find(ids.front());
  }
  return graph;
}

CameraGraph build_camera_graph(const std::vector<CameraModel>& cameras,
                               const std::vector<Observation2D>& observations,
                               const std::vector<PointId>& track_ids,
                               const std::vector<PairwiseResult>& pairwise) {
  CameraGraph graph = covisibility_graph(cameras, observations, track_ids);
  std::map<std::pair<CameraId, CameraId>, const PairwiseResult*> refined;
  for (const PairwiseResult& pr : pairwise) {
    refined[{std::min(pr.cam_i, pr.cam_j), std::max(pr.cam_i, pr.cam_j)}] = &pr;
  }
  // Only refined edges can chain offsets; drop the rest.
  std::vector<GraphEdge> kept;
  for (GraphEdge& e : graph.edges) {
    const auto it = refined.find({e.i, e.j});
    if (it == refined.end()) continue;
    const PairwiseResult& pr = *it->second;
    e.t_ij = pr.cam_i == e.i ? pr.offset_frames : -pr.offset_frames;
    e.pair_cost = pr.mean_residual_cost;
    kept.push_back(e);
  }
  graph.edges = std::move(kept);

  // Triplet consistency: a trustworthy pair closes its triangles. The score
  // scales by the pair's own residual level and normalizes by support count
  // and baseline, so well-covered wide pairs with clean fits sort first.
  for (GraphEdge& e : graph.edges) {
    double cycle_sum = 0.0;
    for (const CameraId k : graph.nodes) {
      if (k == e.i || k == e.j) continue;
      if (graph.edge(e.i, k) == nullptr || graph.edge(e.j, k) == nullptr) continue;
      cycle_sum +=
          std::abs(e.t_ij + graph.offset(e.j, k) - graph.offset(e.i, k));
    }
    const double denom = e.n_shared * e.baseline_m;
    e.weight = e.pair_cost * cycle_sum / (denom > 0.0 ? denom : 1.0);
  }

  std::vector<CameraId> ids = graph.nodes;
  std::sort(ids.begin(), ids.end());
  DisjointSet dsu(ids);
  for (const GraphEdge& e : graph.edges) dsu.unite(e.i, e.j);
  graph.connected = true;
  for (const CameraId id : ids) {
    graph.connected = graph.connected && dsu.find(id) == dsu.find(ids.front());
  }
  return graph;
}

std::vector<CameraId> camera_order(const CameraGraph& graph) {
  std::vector<const GraphEdge*> edges;
  edges.reserve(graph.edges.size());
  for (const GraphEdge& e : graph.edges) edges.push_back(&e);
  std::sort(edges.begin(), edges.end(), [](const GraphEdge* a, const GraphEdge* b) {
    if (a->weight != b->weight) return a->weight < b->weight;
    if (a->i != b->i) return a->i < b->i;
    return a->j < b->j;
  });
  std::vector<CameraId> ids = graph.nodes;
  std::sort(ids.begin(), ids.end());
  DisjointSet dsu(ids);
  std::vector<CameraId> order;
  std::set<CameraId> placed;
  for (const GraphEdge* e : edges) {
    if (!dsu.unite(e->i, e->j)) continue;
    for (const CameraId id : {std::min(e->i, e->j), std::max(e->i, e->j)}) {
      if (placed.insert(id).second) order.push_back(id);
    }
  }
  for (const CameraId id : ids) {
    if (placed.insert(id).second) order.push_back(id);
  }
  return order;
}

InsertionTrace insert_camera(AlignmentState& state, const CameraModel& new_cam,
                             const std::vector<Observation2D>& new_cam_obs,
                             double pairwise_beta, const IraConfig& cfg) {
  require(!state.cameras.empty(), ErrorCode::empty_problem, "no processed cameras");
  for (const CameraModel& cam : state.cameras) {
    require(cam.id != new_cam.id, ErrorCode::id_mismatch, "camera inserted twice");
  }
  InsertionTrace trace;
  trace.camera = new_cam.id;

  std::vector<Observation2D> combined = state.observations;
  combined.insert(combined.end(), new_cam_obs.begin(), new_cam_obs.end());

  // Tracks that first reach two views with this camera get triangulated now;
  // single-view ids stay pending in the observation pool.
  std::set<PointId> existing;
  for (const Trajectory3D& t : state.trajectories) existing.insert(t.point_id());
  std::map<PointId, std::set<CameraId>> pending_views;
  for (const Observation2D& obs : combined) {
    if (existing.count(obs.point_id) == 0) pending_views[obs.point_id].insert(obs.camera_id);
  }
  std::set<PointId> fresh;
  for (const auto& [id, views] : pending_views) {
    if (views.size() >= 2) fresh.insert(id);
  }

  // Sub-frame slots: midpoints of the gaps the processed cameras leave in
  // [0, 1); each slot's integer part re-centers it near the pairwise guess.
  std::vector<double> bounds{0.0, 1.0};
  for (const CameraModel& cam : state.cameras) bounds.push_back(fract(cam.beta));
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  std::vector<double> candidates;
  for (std::size_t g = 0; g + 1 < bounds.size(); ++g) {
    const double mid = 0.5 * (bounds[g] + bounds[g + 1]);
    candidates.push_back(std::round(pairwise_beta - mid) + mid);
  }
  trace.slots_tried = static_cast<int>(candidates.size());

  const auto build_tracks = [&](const std::vector<CameraModel>& cams) {
    std::vector<Trajectory3D> tracks = state.trajectories;
    const CameraModel& added = cams.back();
    for (Trajectory3D& t : tracks) {
      for (const Observation2D& obs : new_cam_obs) {
        if (obs.point_id != t.point_id()) continue;
        TrajectorySample s;
        s.time = added.observation_time(obs);
        s.position = t.interpolate(s.time);
        s.source_camera = obs.camera_id;
        s.source_frame = obs.frame;
        s.source_row = obs.row;
        t.mutable_samples().push_back(s);
      }
      t.sort_by_time();
    }
    if (!fresh.empty()) {
      for (Trajectory3D& t : triangulate_tracks(cams, combined, fresh)) {
        tracks.push_back(std::move(t));
      }
    }
    return tracks;
  };

  struct Accepted {
    double cost = 0.0;
    std::vector<CameraModel> cameras;
    std::vector<Trajectory3D> trajectories;
  };
  std::optional<Accepted> best;
  bool couples = true;
  for (const double candidate : candidates) {
    std::vector<CameraModel> cams = state.cameras;
    cams.push_back(new_cam);
    cams.back().beta = candidate;
    std::vector<Trajectory3D> tracks = build_tracks(cams);
    if (tracks.empty()) {
      couples = false;
      break;
    }
    const std::vector<CameraId> claimed = subframe_order(cams);
    const auto claimed_schedule = sample_schedule(tracks, cams);
    SolverConfig solver = cfg.trial_solver;
    solver.reference_camera = state.reference;
    TrajectorySolveResult solved =
        solve_trajectories_only(cams, std::move(tracks), combined, cfg.prior, solver, true);
    if (subframe_order(solved.cameras) != claimed ||
        sample_schedule(solved.trajectories, solved.cameras) != claimed_schedule) {
      ++trace.slots_discarded_for_flip;
      continue;
    }
    if (!best || solved.report.total < best->cost) {
      best = Accepted{solved.report.total, std::move(solved.cameras),
                      std::move(solved.trajectories)};
    }
  }

  if (!best) {
    trace.fallback_pairwise = true;
    std::vector<CameraModel> cams = state.cameras;
    cams.push_back(new_cam);
    cams.back().beta = pairwise_beta;
    std::vector<Trajectory3D> tracks = couples ? build_tracks(cams) : std::vector<Trajectory3D>{};
    if (tracks.empty()) {
      state.cameras = std::move(cams);
      state.observations = std::move(combined);
      trace.accepted_offset = pairwise_beta;
      trace.cost = state.cost;
      return trace;
    }
    SolverConfig solver = cfg.trial_solver;
    solver.reference_camera = state.reference;
    TrajectorySolveResult solved =
        solve_trajectories_only(cams, std::move(tracks), combined, cfg.prior, solver, false);
    best = Accepted{solved.report.total, std::move(solved.cameras),
                    std::move(solved.trajectories)};
  }

  state.cameras = std::move(best->cameras);
  state.trajectories = std::move(best->trajectories);
  state.observations = std::move(combined);
  state.cost = best->cost;
  trace.accepted_offset = camera_by_id(state.cameras, new_cam.id).beta;
  trace.cost = best->cost;
  return trace;
}

IraResult run_ira(const SceneState& initial, const std::vector<Observation2D>& observations,
                  const IraConfig& cfg) {
  require(!initial.cameras.empty(), ErrorCode::empty_problem, "no cameras");
  IraResult out;
  const std::vector<PointId> dyn = dynamic_ids(initial);
  const std::set<PointId> dyn_set(dyn.begin(), dyn.end());
  std::map<CameraId, std::vector<Observation2D>> dyn_obs;
  for (const CameraModel& cam : initial.cameras) dyn_obs[cam.id];
  for (const Observation2D& obs : observations) {
    const auto it = dyn_obs.find(obs.camera_id);
    if (it != dyn_obs.end() && dyn_set.count(obs.point_id) > 0) it->second.push_back(obs);
  }

  Clock::time_point start = Clock::now();
  const CameraGraph covis = covisibility_graph(initial.cameras, observations, dyn);
  for (const GraphEdge& e : covis.edges) {
    out.pairwise.push_back(pairwise_offset_search(camera_by_id(initial.cameras, e.i),
                                                  camera_by_id(initial.cameras, e.j),
                                                  observations, dyn, cfg.pairwise));
  }
  out.timings.push_back({"pairwise", seconds_since(start)});

  start = Clock::now();
  out.graph = build_camera_graph(initial.cameras, observations, dyn, out.pairwise);
  out.order = camera_order(out.graph);
  out.timings.push_back({"graph", seconds_since(start)});

  start = Clock::now();
  AlignmentState state;
  state.reference = out.order.front();
  state.cameras.push_back(camera_by_id(initial.cameras, state.reference));
  state.observations = dyn_obs[state.reference];
  for (std::size_t idx = 1; idx < out.order.size(); ++idx) {
    const CameraId id = out.order[idx];
    // Attach through the most trusted refined edge to a processed camera.
    const GraphEdge* attach = nullptr;
    CameraId parent = -1;
    for (const CameraModel& done : state.cameras) {
      const GraphEdge* e = out.graph.edge(done.id, id);
      if (e == nullptr) continue;
      if (attach == nullptr || e->weight < attach->weight ||
          (e->weight == attach->weight && done.id < parent)) {
        attach = e;
        parent = done.id;
      }
    }
    const CameraModel& cam = camera_by_id(initial.cameras, id);
    const double base = attach != nullptr
                            ? camera_by_id(state.cameras, parent).beta +
                                  out.graph.offset(parent, id)
                            : cam.beta;
    out.insertions.push_back(insert_camera(state, cam, dyn_obs[id], base, cfg));
  }
  out.timings.push_back({"insertion", seconds_since(start)});

  start = Clock::now();
  SceneState scene;
  scene.cameras = initial.cameras;
  for (CameraModel& cam : scene.cameras) {
    cam.beta = camera_by_id(state.cameras, cam.id).beta;
  }
  scene.static_points = initial.static_points;
  scene.trajectories = std::move(state.trajectories);
  std::vector<Observation2D> usable = observations_in_scene(scene, observations);
  if (cfg.depth_weights) {
    assign_depth_weights(scene.trajectories, scene.cameras, usable);
  }
  SolverConfig solver = cfg.final_solver;
  solver.reference_camera = state.reference;
  Problem problem(std::move(scene), std::move(usable), cfg.prior, solver, cfg.final_flags);
  out.report = problem.solve();
  out.scene = problem.scene();
  out.timings.push_back({"final_solve", seconds_since(start)});

  json trace;
  trace["order"] = out.order;
  json pw = json::array();
  for (const PairwiseResult& pr : out.pairwise) {
    pw.push_back({{"i", pr.cam_i},
                  {"j", pr.cam_j},
                  {"offset_frames", pr.offset_frames},
                  {"cost", pr.cost},
                  {"n_shared_tracks", pr.n_shared_tracks}});
  }
  trace["pairwise"] = pw;
  json steps = json::array();
  for (std::size_t k = 0; k < out.insertions.size(); ++k) {
    const InsertionTrace& t = out.insertions[k];
    steps.push_back({{"step", k + 1},
                     {"camera_added", t.camera},
                     {"slots_tried", t.slots_tried},
                     {"slots_discarded_for_flip", t.slots_discarded_for_flip},
                     {"accepted_offset", t.accepted_offset},
                     {"cost", t.cost},
                     {"fallback_pairwise", t.fallback_pairwise}});
  }
  trace["insertions"] = steps;
  trace["final"] = {{"total", out.report.total},
                    {"image_cost", out.report.image_cost},
                    {"motion_cost", out.report.motion_cost},
                    {"iterations", out.report.iterations},
                    {"converged", out.report.converged}};
  json times = json::array();
  for (const StageTiming& t : out.timings) {
    times.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  }
  trace["timings"] = times;
  out.trace_json = trace.dump(2);
  return out;
}

}  // namespace stba
