#include "stba/divide_conquer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "stba/error.hpp"
#include "stba/scenario.hpp"

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

const CameraModel* find_camera(const std::vector<CameraModel>& cameras, CameraId id) {
  for (const CameraModel& cam : cameras) {
    if (cam.id == id) return &cam;
  }
  return nullptr;
}

// Strongest-support spanning tree walked depth-first: a linear backbone along
// which covisibility stays high, so window neighbors genuinely overlap.
std::vector<CameraId> backbone_order(const CameraGraph& graph) {
  require(!graph.nodes.empty(), ErrorCode::empty_problem, "empty camera graph");
  require(graph.connected, ErrorCode::grouping_failed, "camera graph is not connected");
  std::vector<const GraphEdge*> edges;
  edges.reserve(graph.edges.size());
  for (const GraphEdge& e : graph.edges) edges.push_back(&e);
  std::sort(edges.begin(), edges.end(), [](const GraphEdge* a, const GraphEdge* b) {
    if (a->n_shared != b->n_shared) return a->n_shared > b->n_shared;
    if (a->pair_cost != b->pair_cost) return a->pair_cost < b->pair_cost;
    if (a->i != b->i) return a->i < b->i;
    return a->j < b->j;
  });

  std::map<CameraId, CameraId> parent;
  for (const CameraId id : graph.nodes) parent[id] = id;
  const auto find = [&parent](CameraId a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::map<CameraId, std::vector<const GraphEdge*>> tree;
  for (const GraphEdge* e : edges) {
    const CameraId ra = find(e->i);
    const CameraId rb = find(e->j);
    if (ra == rb) continue;
    parent[std::max(ra, rb)] = std::min(ra, rb);
    tree[e->i].push_back(e);
    tree[e->j].push_back(e);
  }

  const CameraId root = *std::min_element(graph.nodes.begin(), graph.nodes.end());
  std::vector<CameraId> order;
  std::set<CameraId> visited;
  std::vector<CameraId> stack{root};
  while (!stack.empty()) {
    const CameraId node = stack.back();
    stack.pop_back();
    if (!visited.insert(node).second) continue;
    order.push_back(node);
    // Strongest edge explored first: push it last so it pops first.
    std::vector<const GraphEdge*> adjacent = tree[node];
    std::reverse(adjacent.begin(), adjacent.end());
    for (const GraphEdge* e : adjacent) {
      const CameraId other = e->i == node ? e->j : e->i;
      if (visited.count(other) == 0) stack.push_back(other);
    }
  }
  require(order.size() == graph.nodes.size(), ErrorCode::grouping_failed,
          "backbone walk missed cameras");
  return order;
}

}  // namespace

std::vector<CameraGroup> form_groups(const CameraGraph& graph, int target_group_size) {
  require(target_group_size >= 2, ErrorCode::invalid_config, "groups need at least 2 cameras");
  const std::vector<CameraId> seq = backbone_order(graph);
  const int n = static_cast<int>(seq.size());
  std::vector<CameraGroup> groups;
  if (n <= target_group_size) {
    groups.push_back({seq, {-1, -1}});
    return groups;
  }
  require(target_group_size >= 3, ErrorCode::grouping_failed,
          "two-camera overlap needs groups of 3 or more");
  const int stride = target_group_size - 2;
  for (int start = 0;; start += stride) {
    CameraGroup group;
    const int stop = std::min(start + target_group_size, n);
    group.members.assign(seq.begin() + start, seq.begin() + stop);
    if (start > 0) group.shared_with_prev = {seq[start], seq[start + 1]};
    groups.push_back(std::move(group));
    if (stop == n) break;
  }
  return groups;
}

bool detect_inconsistency(const std::vector<CameraModel>& group_a,
                          const std::vector<CameraModel>& group_b,
                          const std::array<CameraId, 2>& shared, double tol_frames) {
  require(shared[0] >= 0 && shared[1] >= 0 && shared[0] != shared[1],
          ErrorCode::no_shared_cameras, "need two distinct anchor cameras");
  const CameraModel* a0 = find_camera(group_a, shared[0]);
  const CameraModel* a1 = find_camera(group_a, shared[1]);
  const CameraModel* b0 = find_camera(group_b, shared[0]);
  const CameraModel* b1 = find_camera(group_b, shared[1]);
  require(a0 != nullptr && a1 != nullptr && b0 != nullptr && b1 != nullptr,
          ErrorCode::no_shared_cameras, "anchor cameras missing from a group solution");
  if (std::abs((a1->beta - a0->beta) - (b1->beta - b0->beta)) > tol_frames) return true;
  const bool order_a =
      std::make_pair(fract(a0->beta), a0->id) < std::make_pair(fract(a1->beta), a1->id);
  const bool order_b =
      std::make_pair(fract(b0->beta), b0->id) < std::make_pair(fract(b1->beta), b1->id);
  return order_a != order_b;
}

DncResult run_divide_conquer(const SceneState& initial,
                             const std::vector<Observation2D>& observations,
                             const DncConfig& cfg) {
  require(!initial.cameras.empty(), ErrorCode::empty_problem, "no cameras");
  DncResult out;
  const std::vector<PointId> dyn = dynamic_ids(initial);
  const std::set<PointId> dyn_set(dyn.begin(), dyn.end());

  Clock::time_point start = Clock::now();
  const CameraGraph covis = covisibility_graph(initial.cameras, observations, dyn);
  out.groups = form_groups(covis, cfg.target_group_size);

  const auto solve_group = [&](const CameraGroup& group) {
    const std::set<CameraId> members(group.members.begin(), group.members.end());
    std::vector<Observation2D> sub_obs;
    std::map<PointId, int> static_views;
    for (const Observation2D& obs : observations) {
      if (members.count(obs.camera_id) == 0) continue;
      sub_obs.push_back(obs);
      if (dyn_set.count(obs.point_id) == 0) ++static_views[obs.point_id];
    }
    SceneState sub;
    for (const CameraId id : group.members) {
      sub.cameras.push_back(camera_by_id(initial.cameras, id));
    }
    for (const StaticPoint& p : initial.static_points) {
      const auto it = static_views.find(p.point_id);
      if (it != static_views.end() && it->second >= 2) sub.static_points.push_back(p);
    }
    for (const Trajectory3D& traj : initial.trajectories) {
      std::vector<TrajectorySample> samples;
      for (const TrajectorySample& s : traj.samples()) {
        if (members.count(s.source_camera) > 0) samples.push_back(s);
      }
      if (!samples.empty()) sub.trajectories.emplace_back(traj.point_id(), std::move(samples));
    }
    return run_ira(sub, sub_obs, cfg.ira);
  };

  for (const CameraGroup& group : out.groups) out.group_runs.push_back(solve_group(group));
  out.timings.push_back({"groups", seconds_since(start)});

  // Single group is plain incremental alignment; nothing to merge or chain.
  if (out.groups.size() == 1) {
    out.scene = out.group_runs.front().scene;
    out.report = out.group_runs.front().report;
    out.trace_json = out.group_runs.front().trace_json;
    return out;
  }

  start = Clock::now();
  std::size_t g = 1;
  while (g < out.groups.size()) {
    if (!detect_inconsistency(out.group_runs[g - 1].scene.cameras,
                              out.group_runs[g].scene.cameras,
                              out.groups[g].shared_with_prev, cfg.inconsistency_tol_frames)) {
      ++g;
      continue;
    }
    // Disagreement about the anchors: the two windows merge into one and the
    // union is re-aligned from scratch.
    ++out.merge_events;
    CameraGroup merged = out.groups[g - 1];
    for (const CameraId id : out.groups[g].members) {
      if (std::find(merged.members.begin(), merged.members.end(), id) == merged.members.end()) {
        merged.members.push_back(id);
      }
    }
    out.groups[g - 1] = merged;
    out.groups.erase(out.groups.begin() + static_cast<std::ptrdiff_t>(g));
    out.group_runs.erase(out.group_runs.begin() + static_cast<std::ptrdiff_t>(g));
    out.group_runs[g - 1] = solve_group(out.groups[g - 1]);
  }
  out.timings.push_back({"merge", seconds_since(start)});

  // Chain each window onto the first one's timeline through the two anchors.
  start = Clock::now();
  std::map<CameraId, double> global_beta;
  for (const CameraModel& cam : out.group_runs.front().scene.cameras) {
    global_beta[cam.id] = cam.beta;
  }
  for (g = 1; g < out.groups.size(); ++g) {
    const std::array<CameraId, 2>& anchors = out.groups[g].shared_with_prev;
    const std::vector<CameraModel>& local = out.group_runs[g].scene.cameras;
    double shift = 0.0;
    for (const CameraId id : anchors) {
      const CameraModel* cam = find_camera(local, id);
      require(cam != nullptr && global_beta.count(id) > 0, ErrorCode::no_shared_cameras,
              "anchor camera missing while chaining");
      shift += global_beta.at(id) - cam->beta;
    }
    shift /= 2.0;
    for (const CameraModel& cam : local) {
      if (global_beta.count(cam.id) == 0) global_beta[cam.id] = cam.beta + shift;
    }
  }

  SceneState scene;
  scene.cameras = initial.cameras;
  for (CameraModel& cam : scene.cameras) cam.beta = global_beta.at(cam.id);
  scene.static_points = initial.static_points;
  scene.trajectories = initial.trajectories;
  for (Trajectory3D& traj : scene.trajectories) traj.refresh_times(scene.cameras);
  std::vector<Observation2D> usable = observations_in_scene(scene, observations);
  if (cfg.ira.depth_weights) {
    assign_depth_weights(scene.trajectories, scene.cameras, usable);
  }
  SolverConfig solver = cfg.ira.final_solver;
  solver.reference_camera = out.group_runs.front().order.front();
  Problem problem(std::move(scene), std::move(usable), cfg.ira.prior, solver,
                  cfg.ira.final_flags);
  out.report = problem.solve();
  out.scene = problem.scene();
  out.timings.push_back({"final_solve", seconds_since(start)});

  json trace;
  json groups = json::array();
  for (std::size_t k = 0; k < out.groups.size(); ++k) {
    json offsets = json::object();
    for (const CameraModel& cam : out.group_runs[k].scene.cameras) {
      offsets[std::to_string(cam.id)] = cam.beta;
    }
    groups.push_back({{"members", out.groups[k].members},
                      {"anchors", out.groups[k].shared_with_prev},
                      {"local_offsets", offsets}});
  }
  trace["groups"] = groups;
  trace["merge_events"] = out.merge_events;
  trace["final"] = {{"total", out.report.total},
                    {"converged", out.report.converged},
                    {"iterations", out.report.iterations}};
  json times = json::array();
  for (const StageTiming& t : out.timings) {
    times.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  }
  trace["timings"] = times;
  out.trace_json = trace.dump(2);
  return out;
}

}  // namespace stba
