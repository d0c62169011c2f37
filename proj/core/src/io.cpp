#include "stba/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stba/error.hpp"

namespace stba {
namespace {

using nlohmann::json;

// All CSV numbers go through one formatter so equal inputs give equal bytes.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io_error, "cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io_error, "cannot read " + path);
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double to_double(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    fail(ErrorCode::io_error, "bad number '" + s + "' in " + context);
  }
  require(used == s.size(), ErrorCode::io_error, "bad number '" + s + "' in " + context);
  return v;
}

long long to_int(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    fail(ErrorCode::io_error, "bad integer '" + s + "' in " + context);
  }
  require(used == s.size(), ErrorCode::io_error, "bad integer '" + s + "' in " + context);
  return v;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec3 vec3_from(const json& j) {
  require(j.is_array() && j.size() == 3, ErrorCode::io_error, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const CameraIntrinsics& k) {
  return {{"focal_x", k.focal_x},         {"focal_y", k.focal_y},
          {"principal_x", k.principal_x}, {"principal_y", k.principal_y},
          {"skew", k.skew},               {"image_width", k.image_width},
          {"image_height", k.image_height}};
}

CameraIntrinsics intrinsics_from(const json& j) {
  CameraIntrinsics k;
  k.focal_x = j.at("focal_x").get<double>();
  k.focal_y = j.at("focal_y").get<double>();
  k.principal_x = j.at("principal_x").get<double>();
  k.principal_y = j.at("principal_y").get<double>();
  k.skew = j.at("skew").get<double>();
  k.image_width = j.at("image_width").get<int>();
  k.image_height = j.at("image_height").get<int>();
  return k;
}

json to_json(const CameraPose& p) {
  return {{"axis_angle", to_json(p.axis_angle)}, {"translation", to_json(p.translation)}};
}

CameraPose pose_from(const json& j) {
  CameraPose p;
  p.axis_angle = vec3_from(j.at("axis_angle"));
  p.translation = vec3_from(j.at("translation"));
  return p;
}

json to_json(const CameraModel& cam) {
  json j{{"id", cam.id},
         {"intrinsics", to_json(cam.intrinsics)},
         {"pose_mode", cam.pose_mode == PoseMode::kShared ? "shared" : "per_frame"},
         {"alpha", cam.alpha},
         {"beta", cam.beta},
         {"gamma", cam.gamma}};
  if (cam.pose_mode == PoseMode::kShared) {
    j["pose"] = to_json(cam.pose);
  } else {
    json poses = json::object();
    for (const auto& [frame, pose] : cam.frame_poses) poses[std::to_string(frame)] = to_json(pose);
    j["frame_poses"] = poses;
  }
  if (!cam.frame_intrinsics.empty()) {
    json per = json::object();
    for (const auto& [frame, k] : cam.frame_intrinsics) per[std::to_string(frame)] = to_json(k);
    j["frame_intrinsics"] = per;
  }
  return j;
}

CameraModel camera_from(const json& j) {
  CameraModel cam;
  cam.id = j.at("id").get<CameraId>();
  cam.intrinsics = intrinsics_from(j.at("intrinsics"));
  const std::string mode = j.at("pose_mode").get<std::string>();
  require(mode == "shared" || mode == "per_frame", ErrorCode::io_error,
          "unknown pose_mode " + mode);
  cam.pose_mode = mode == "shared" ? PoseMode::kShared : PoseMode::kPerFrame;
  cam.alpha = j.at("alpha").get<double>();
  cam.beta = j.at("beta").get<double>();
  cam.gamma = j.at("gamma").get<double>();
  if (cam.pose_mode == PoseMode::kShared) {
    cam.pose = pose_from(j.at("pose"));
  } else {
    for (const auto& [key, value] : j.at("frame_poses").items()) {
      cam.frame_poses[static_cast<FrameIndex>(to_int(key, "frame_poses"))] = pose_from(value);
    }
  }
  if (j.contains("frame_intrinsics")) {
    for (const auto& [key, value] : j.at("frame_intrinsics").items()) {
      cam.frame_intrinsics[static_cast<FrameIndex>(to_int(key, "frame_intrinsics"))] =
          intrinsics_from(value);
    }
  }
  return cam;
}

json to_json(const TrajectorySample& s) {
  return {{"time", s.time},
          {"position", to_json(s.position)},
          {"weight", s.weight},
          {"camera_id", s.source_camera},
          {"frame", s.source_frame},
          {"row", s.source_row}};
}

TrajectorySample sample_from(const json& j) {
  TrajectorySample s;
  s.time = j.at("time").get<double>();
  s.position = vec3_from(j.at("position"));
  s.weight = j.at("weight").get<double>();
  s.source_camera = j.at("camera_id").get<CameraId>();
  s.source_frame = j.at("frame").get<FrameIndex>();
  s.source_row = j.at("row").get<double>();
  return s;
}

json to_json(const SceneState& scene) {
  json cameras = json::array();
  for (const CameraModel& cam : scene.cameras) cameras.push_back(to_json(cam));
  json statics = json::array();
  for (const StaticPoint& p : scene.static_points) {
    statics.push_back({{"point_id", p.point_id}, {"position", to_json(p.position)}});
  }
  json trajectories = json::array();
  for (const Trajectory3D& traj : scene.trajectories) {
    json samples = json::array();
    for (const TrajectorySample& s : traj.samples()) samples.push_back(to_json(s));
    trajectories.push_back({{"point_id", traj.point_id()}, {"samples", samples}});
  }
  return {{"cameras", cameras}, {"static_points", statics}, {"trajectories", trajectories}};
}

SceneState scene_from(const json& j) {
  SceneState scene;
  for (const json& c : j.at("cameras")) scene.cameras.push_back(camera_from(c));
  for (const json& p : j.at("static_points")) {
    scene.static_points.push_back(
        {p.at("point_id").get<PointId>(), vec3_from(p.at("position"))});
  }
  for (const json& t : j.at("trajectories")) {
    std::vector<TrajectorySample> samples;
    for (const json& s : t.at("samples")) samples.push_back(sample_from(s));
    scene.trajectories.emplace_back(t.at("point_id").get<PointId>(), std::move(samples));
  }
  return scene;
}

json to_json(const ScenarioConfig& cfg) {
  return {{"n_cameras", cfg.n_cameras},
          {"fps", cfg.fps},
          {"image_width", cfg.image_width},
          {"image_height", cfg.image_height},
          {"focal_px", cfg.focal_px},
          {"rig_radius_m", cfg.rig_radius_m},
          {"rig_height_m", cfg.rig_height_m},
          {"n_background", cfg.n_background},
          {"background_cylinder_radius_m", cfg.background_cylinder_radius_m},
          {"background_height_min_m", cfg.background_height_min_m},
          {"background_height_max_m", cfg.background_height_max_m},
          {"noise_px_std", cfg.noise_px_std},
          {"offset_grid", cfg.offset_grid},
          {"offset_range", cfg.offset_range},
          {"gammas", cfg.gammas},
          {"family", to_string(cfg.family)},
          {"trajectory_csv", cfg.trajectory_csv},
          {"n_trajectories", cfg.n_trajectories},
          {"n_frames", cfg.n_frames},
          {"static_obs_frames", cfg.static_obs_frames},
          {"init_offset_spread", cfg.init_offset_spread},
          {"seed", cfg.seed}};
}

ScenarioConfig config_from(const json& j) {
  ScenarioConfig cfg;
  cfg.n_cameras = j.at("n_cameras").get<int>();
  cfg.fps = j.at("fps").get<double>();
  cfg.image_width = j.at("image_width").get<int>();
  cfg.image_height = j.at("image_height").get<int>();
  cfg.focal_px = j.at("focal_px").get<double>();
  cfg.rig_radius_m = j.at("rig_radius_m").get<double>();
  cfg.rig_height_m = j.at("rig_height_m").get<double>();
  cfg.n_background = j.at("n_background").get<int>();
  cfg.background_cylinder_radius_m = j.at("background_cylinder_radius_m").get<double>();
  cfg.background_height_min_m = j.at("background_height_min_m").get<double>();
  cfg.background_height_max_m = j.at("background_height_max_m").get<double>();
  cfg.noise_px_std = j.at("noise_px_std").get<double>();
  cfg.offset_grid = j.at("offset_grid").get<double>();
  cfg.offset_range = j.at("offset_range").get<double>();
  cfg.gammas = j.at("gammas").get<std::vector<double>>();
  cfg.family = trajectory_family_from_string(j.at("family").get<std::string>());
  cfg.trajectory_csv = j.at("trajectory_csv").get<std::string>();
  cfg.n_trajectories = j.at("n_trajectories").get<int>();
  cfg.n_frames = j.at("n_frames").get<int>();
  cfg.static_obs_frames = j.at("static_obs_frames").get<int>();
  cfg.init_offset_spread = j.at("init_offset_spread").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

void dump(const json& j, const std::string& path) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  require(out.good(), ErrorCode::io_error, "write failed for " + path);
}

json load(const std::string& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, "bad json in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace

void write_observations_csv(const std::vector<Observation2D>& observations,
                            const std::string& path) {
  std::ofstream out = open_out(path);
  out << "camera_id,point_id,frame,row,u,v,sigma\n";
  for (const Observation2D& obs : observations) {
    out << obs.camera_id << ',' << obs.point_id << ',' << obs.frame << ',' << fmt(obs.row)
        << ',' << fmt(obs.pixel.x()) << ',' << fmt(obs.pixel.y()) << ',' << fmt(obs.sigma)
        << '\n';
  }
  require(out.good(), ErrorCode::io_error, "write failed for " + path);
}

std::vector<Observation2D> read_observations_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::io_error, path + " is empty");
  std::vector<Observation2D> observations;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    require(f.size() == 7, ErrorCode::io_error, "expected 7 fields in " + path);
    Observation2D obs;
    obs.camera_id = static_cast<CameraId>(to_int(f[0], path));
    obs.point_id = static_cast<PointId>(to_int(f[1], path));
    obs.frame = static_cast<FrameIndex>(to_int(f[2], path));
    obs.row = to_double(f[3], path);
    obs.pixel = {to_double(f[4], path), to_double(f[5], path)};
    obs.sigma = to_double(f[6], path);
    observations.push_back(obs);
  }
  return observations;
}

namespace {

void write_samples_csv(const std::vector<Trajectory3D>& trajectories, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "time,x,y,z,point_id,camera_id,frame,row,weight\n";
  for (const Trajectory3D& traj : trajectories) {
    for (const TrajectorySample& s : traj.samples()) {
      out << fmt(s.time) << ',' << fmt(s.position.x()) << ',' << fmt(s.position.y()) << ','
          << fmt(s.position.z()) << ',' << traj.point_id() << ',' << s.source_camera << ','
          << s.source_frame << ',' << fmt(s.source_row) << ',' << fmt(s.weight) << '\n';
    }
  }
  require(out.good(), ErrorCode::io_error, "write failed for " + path);
}

std::vector<Trajectory3D> read_samples_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::io_error, path + " is empty");
  std::map<PointId, std::vector<TrajectorySample>> grouped;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    require(f.size() == 9, ErrorCode::io_error, "expected 9 fields in " + path);
    TrajectorySample s;
    s.time = to_double(f[0], path);
    s.position = {to_double(f[1], path), to_double(f[2], path), to_double(f[3], path)};
    const PointId id = static_cast<PointId>(to_int(f[4], path));
    s.source_camera = static_cast<CameraId>(to_int(f[5], path));
    s.source_frame = static_cast<FrameIndex>(to_int(f[6], path));
    s.source_row = to_double(f[7], path);
    s.weight = to_double(f[8], path);
    grouped[id].push_back(s);
  }
  std::vector<Trajectory3D> trajectories;
  trajectories.reserve(grouped.size());
  for (auto& [id, samples] : grouped) trajectories.emplace_back(id, std::move(samples));
  return trajectories;
}

}  // namespace

ScenarioConfig read_scenario_config(const std::string& path) {
  json merged = to_json(ScenarioConfig{});
  merged.update(load(path));
  return config_from(merged);
}

void write_scenario(const Scenario& scenario, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::io_error, "cannot create " + dir);
  json cameras = json::array();
  for (const CameraModel& cam : scenario.truth.cameras) cameras.push_back(to_json(cam));
  const json j{{"config", to_json(scenario.config)},
               {"cameras", cameras},
               {"initial_betas", scenario.initial_betas},
               {"out_of_view", scenario.out_of_view}};
  dump(j, dir + "/scenario.json");
  write_observations_csv(scenario.observations, dir + "/observations.csv");
  write_samples_csv(scenario.truth.trajectories, dir + "/truth_trajectories.csv");
}

Scenario read_scenario(const std::string& dir) {
  const json j = load(dir + "/scenario.json");
  Scenario scenario;
  scenario.config = config_from(j.at("config"));
  for (const json& c : j.at("cameras")) scenario.truth.cameras.push_back(camera_from(c));
  scenario.initial_betas = j.at("initial_betas").get<std::vector<double>>();
  scenario.out_of_view = j.at("out_of_view").get<int>();
  scenario.observations = read_observations_csv(dir + "/observations.csv");
  scenario.truth.trajectories = read_samples_csv(dir + "/truth_trajectories.csv");
  return scenario;
}

void write_solution(const SolutionBundle& solution, const std::string& path) {
  json report{{"total", solution.report.total},
              {"image_cost", solution.report.image_cost},
              {"motion_cost", solution.report.motion_cost},
              {"iterations", solution.report.iterations},
              {"converged", solution.report.converged},
              {"invalid_projections", solution.report.invalid_projections},
              {"iteration_costs", solution.report.iteration_costs},
              {"termination", solution.report.termination}};
  json per = json::array();
  for (const CameraReprojStats& s : solution.report.per_camera) {
    per.push_back({{"camera_id", s.camera_id},
                   {"static_rmse_px", s.static_rmse_px},
                   {"dynamic_rmse_px", s.dynamic_rmse_px},
                   {"n_static_obs", s.n_static_obs},
                   {"n_dynamic_obs", s.n_dynamic_obs}});
  }
  report["per_camera"] = per;
  dump({{"scene", to_json(solution.scene)}, {"report", report}}, path);
}

SolutionBundle read_solution(const std::string& path) {
  const json j = load(path);
  SolutionBundle solution;
  solution.scene = scene_from(j.at("scene"));
  const json& r = j.at("report");
  solution.report.total = r.at("total").get<double>();
  solution.report.image_cost = r.at("image_cost").get<double>();
  solution.report.motion_cost = r.at("motion_cost").get<double>();
  solution.report.iterations = r.at("iterations").get<int>();
  solution.report.converged = r.at("converged").get<bool>();
  solution.report.invalid_projections = r.at("invalid_projections").get<int>();
  solution.report.iteration_costs = r.at("iteration_costs").get<std::vector<double>>();
  solution.report.termination = r.at("termination").get<std::string>();
  for (const json& s : r.at("per_camera")) {
    solution.report.per_camera.push_back({s.at("camera_id").get<CameraId>(),
                                          s.at("static_rmse_px").get<double>(),
                                          s.at("dynamic_rmse_px").get<double>(),
                                          s.at("n_static_obs").get<int>(),
                                          s.at("n_dynamic_obs").get<int>()});
  }
  return solution;
}

void write_metrics(const MetricsReport& metrics, const std::string& path) {
  json timings = json::array();
  for (const StageTiming& t : metrics.timings) {
    timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  }
  dump({{"offset_error_frames", metrics.offset_error_frames},
        {"median_offset_error_frames", metrics.median_offset_error_frames},
        {"sequencing_correct", metrics.sequencing_correct},
        {"static_rmse_px", metrics.static_rmse_px},
        {"dynamic_rmse_px", metrics.dynamic_rmse_px},
        {"trajectory_rmse_m", metrics.trajectory_rmse_m},
        {"matched_samples", metrics.matched_samples},
        {"invalid_projections", metrics.invalid_projections},
        {"timings", timings}},
       path);
}

MetricsReport read_metrics(const std::string& path) {
  const json j = load(path);
  MetricsReport m;
  m.offset_error_frames = j.at("offset_error_frames").get<std::vector<double>>();
  m.median_offset_error_frames = j.at("median_offset_error_frames").get<double>();
  m.sequencing_correct = j.at("sequencing_correct").get<bool>();
  m.static_rmse_px = j.at("static_rmse_px").get<double>();
  m.dynamic_rmse_px = j.at("dynamic_rmse_px").get<double>();
  m.trajectory_rmse_m = j.at("trajectory_rmse_m").get<double>();
  m.matched_samples = j.at("matched_samples").get<int>();
  m.invalid_projections = j.at("invalid_projections").get<int>();
  for (const json& t : j.at("timings")) {
    m.timings.push_back({t.at("stage").get<std::string>(), t.at("seconds").get<double>()});
  }
  return m;
}

void export_trajectories_csv(const std::vector<Trajectory3D>& trajectories,
                             const std::string& path) {
  std::map<PointId, const Trajectory3D*> ordered;
  for (const Trajectory3D& t : trajectories) ordered[t.point_id()] = &t;
  std::ofstream out = open_out(path);
  out << "time,x,y,z,point_id\n";
  for (const auto& [id, traj] : ordered) {
    for (const TrajectorySample& s : traj->samples()) {
      out << fmt(s.time) << ',' << fmt(s.position.x()) << ',' << fmt(s.position.y()) << ','
          << fmt(s.position.z()) << ',' << id << '\n';
    }
  }
  require(out.good(), ErrorCode::io_error, "write failed for " + path);
}

std::vector<Trajectory3D> import_trajectories_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::io_error, path + " is empty");
  std::map<PointId, std::vector<TrajectorySample>> grouped;
  PointId implicit_id = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    require(f.size() == 4 || f.size() == 5, ErrorCode::io_error,
            "expected time,x,y,z[,point_id] in " + path);
    TrajectorySample s;
    s.time = to_double(f[0], path);
    s.position = {to_double(f[1], path), to_double(f[2], path), to_double(f[3], path)};
    const PointId id = f.size() == 5 ? static_cast<PointId>(to_int(f[4], path)) : implicit_id;
    grouped[id].push_back(s);
  }
  std::vector<Trajectory3D> trajectories;
  trajectories.reserve(grouped.size());
  for (auto& [id, samples] : grouped) trajectories.emplace_back(id, std::move(samples));
  return trajectories;
}

void export_trajectories_ply(const std::vector<Trajectory3D>& trajectories,
                             const std::string& path) {
  std::size_t n = 0;
  for (const Trajectory3D& t : trajectories) n += t.size();
  std::map<PointId, const Trajectory3D*> ordered;
  for (const Trajectory3D& t : trajectories) ordered[t.point_id()] = &t;
  std::ofstream out = open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << n
      << "\nproperty double x\nproperty double y\nproperty double z\nproperty double time\n"
         "property int point_id\nend_header\n";
  for (const auto& [id, traj] : ordered) {
    for (const TrajectorySample& s : traj->samples()) {
      out << fmt(s.position.x()) << ' ' << fmt(s.position.y()) << ' ' << fmt(s.position.z())
          << ' ' << fmt(s.time) << ' ' << id << '\n';
    }
  }
  require(out.good(), ErrorCode::io_error, "write failed for " + path);
}

void write_skeleton_csv(const SkeletonSequence& seq, const std::string& path) {
  require(seq.joints.size() == seq.valid.size(), ErrorCode::invalid_config,
          "validity flags must parallel the joints");
  std::ofstream out = open_out(path);
  out << "time,joint,x,y,z,valid\n";
  for (std::size_t j = 0; j < seq.joints.size(); ++j) {
    const auto& samples = seq.joints[j].samples();
    require(samples.size() == seq.valid[j].size(), ErrorCode::invalid_config,
            "validity flags must parallel the samples");
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const TrajectorySample& s = samples[k];
      out << fmt(s.time) << ',' << seq.joints[j].point_id() << ',' << fmt(s.position.x())
          << ',' << fmt(s.position.y()) << ',' << fmt(s.position.z()) << ','
          << (seq.valid[j][k] ? 1 : 0) << '\n';
    }
  }
  require(out.good(), ErrorCode::io_error, "write failed for " + path);
}

SkeletonSequence read_skeleton_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::io_error, path + " is empty");
  std::map<PointId, std::pair<std::vector<TrajectorySample>, std::vector<bool>>> grouped;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    require(f.size() == 6, ErrorCode::io_error, "expected 6 fields in " + path);
    TrajectorySample s;
    s.time = to_double(f[0], path);
    const PointId joint = static_cast<PointId>(to_int(f[1], path));
    s.position = {to_double(f[2], path), to_double(f[3], path), to_double(f[4], path)};
    auto& [samples, flags] = grouped[joint];
    samples.push_back(s);
    flags.push_back(to_int(f[5], path) != 0);
  }
  SkeletonSequence seq;
  for (auto& [joint, data] : grouped) {
    seq.joints.emplace_back(joint, std::move(data.first));
    seq.valid.push_back(std::move(data.second));
  }
  return seq;
}

void write_topology_json(const SkeletonTopology& topology, const std::string& path) {
  json bones = json::array();
  for (const auto& b : topology.bones) bones.push_back(json::array({b[0], b[1]}));
  json mirrors = json::array();
  for (const auto& m : topology.mirror_bones) mirrors.push_back(json::array({m[0], m[1]}));
  dump({{"n_joints", topology.n_joints},
        {"bones", bones},
        {"mirror_bones", mirrors},
        {"sigma_length_m", topology.sigma_length_m},
        {"sigma_symmetry_m", topology.sigma_symmetry_m}},
       path);
}

SkeletonTopology read_topology_json(const std::string& path) {
  const json j = load(path);
  SkeletonTopology topology;
  topology.n_joints = j.at("n_joints").get<int>();
  for (const json& b : j.at("bones")) {
    topology.bones.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
  }
  for (const json& m : j.at("mirror_bones")) {
    topology.mirror_bones.push_back({m.at(0).get<int>(), m.at(1).get<int>()});
  }
  topology.sigma_length_m = j.at("sigma_length_m").get<double>();
  topology.sigma_symmetry_m = j.at("sigma_symmetry_m").get<double>();
  topology.validate();
  return topology;
}

}  // namespace stba
