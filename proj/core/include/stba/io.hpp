#pragma once

#include <string>
#include <vector>

#include "stba/metrics.hpp"
#include "stba/problem.hpp"
#include "stba/scenario.hpp"
#include "stba/skeleton.hpp"
#include "stba/trajectory.hpp"

namespace stba {

// File layout of one scenario directory:
//   scenario.json            config, true cameras (offsets included),
//                            initial offsets, drop counts
//   observations.csv         camera_id,point_id,frame,row,u,v,sigma
//   truth_trajectories.csv   time,x,y,z,point_id,camera_id,frame,row,weight
// All numbers are written with enough digits to round-trip exactly, so a
// fixed seed gives byte-identical files.
void write_scenario(const Scenario& scenario, const std::string& dir);

// Rebuilds a Scenario from a directory. True background positions are not
// persisted (nothing downstream consumes them), so truth.static_points comes
// back empty.
Scenario read_scenario(const std::string& dir);

// A bare ScenarioConfig as JSON; absent keys keep their defaults.
ScenarioConfig read_scenario_config(const std::string& path);

std::vector<Observation2D> read_observations_csv(const std::string& path);
void write_observations_csv(const std::vector<Observation2D>& observations,
                            const std::string& path);

struct SolutionBundle {
  SceneState scene;
  CostReport report;
};

void write_solution(const SolutionBundle& solution, const std::string& path);
SolutionBundle read_solution(const std::string& path);

void write_metrics(const MetricsReport& metrics, const std::string& path);
MetricsReport read_metrics(const std::string& path);

// time,x,y,z,point_id rows; trajectories ordered by ascending point id.
void export_trajectories_csv(const std::vector<Trajectory3D>& trajectories,
                             const std::string& path);
std::vector<Trajectory3D> import_trajectories_csv(const std::string& path);

// ASCII point cloud; one vertex per sample with the capture time and point
// id as scalar properties.
void export_trajectories_ply(const std::vector<Trajectory3D>& trajectories,
                             const std::string& path);

// time,joint,x,y,z,valid rows.
void write_skeleton_csv(const SkeletonSequence& seq, const std::string& path);
SkeletonSequence read_skeleton_csv(const std::string& path);

void write_topology_json(const SkeletonTopology& topology, const std::string& path);
SkeletonTopology read_topology_json(const std::string& path);

}  // namespace stba
