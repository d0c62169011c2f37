#pragma once

#include <string>
#include <vector>

#include "stba/problem.hpp"
#include "stba/scenario.hpp"

namespace stba {

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

// Accuracy of a solved scene against the generating truth. Everything except
// the timings is a pure function of (solution, scenario), so a report can be
// regenerated from saved files.
struct MetricsReport {
  // Per camera, |recovered - true| relative offset in frames, measured
  // against the first camera so the unobservable time origin cancels.
  std::vector<double> offset_error_frames;
  double median_offset_error_frames = 0.0;
  // Recovered sub-frame camera order (offsets modulo one frame) matches the
  // true order.
  bool sequencing_correct = false;
  double static_rmse_px = 0.0;
  double dynamic_rmse_px = 0.0;
  // Over solution samples matched to truth by (point, camera, frame), after
  // similarity alignment.
  double trajectory_rmse_m = 0.0;
  int matched_samples = 0;
  int invalid_projections = 0;
  std::vector<StageTiming> timings;
};

MetricsReport evaluate(const SceneState& solution, const Scenario& scenario,
                       std::vector<StageTiming> timings = {});

double median(std::vector<double> values);

}  // namespace stba
