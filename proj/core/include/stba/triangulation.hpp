#pragma once

#include <vector>

#include "stba/camera.hpp"
#include "stba/types.hpp"

namespace stba {

struct TriangulationOptions {
  // Minimum angle between any two viewing rays, radians.
  double min_ray_angle = 1.0 * M_PI / 180.0;
  // Gauss-Newton refinement iterations on the reprojection cost after DLT.
  int refine_iterations = 5;
};

// Linear (DLT) triangulation refined by a few Gauss-Newton steps.
// Observations may come from different cameras and frames; each uses the
// pose of its own (camera, frame). Throws degenerate_geometry when all rays
// are within min_ray_angle of each other, too_few_samples for < 2 views.
Vec3 triangulate_point(const std::vector<CameraModel>& cameras,
                       const std::vector<Observation2D>& observations,
                       const TriangulationOptions& options = {});

// Largest pairwise angle between the viewing rays, radians.
double max_ray_angle(const std::vector<CameraModel>& cameras,
                     const std::vector<Observation2D>& observations);

}  // namespace stba
