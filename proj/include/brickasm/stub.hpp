#pragma once

#include <cstdint>
#include <string>

#include "brickasm/model.hpp"

namespace brickasm {

struct NoiseConfig {
  double keypoint_sigma = 0.0;      // normalized image units, per axis
  double label_flip_prob = 0.0;     // shape and texture flipped independently
  double rotation_sigma = 0.0;      // radians, continuous-yaw styles
  double rotation_flip_prob = 0.0;  // quarter-turn flips, stud-grid styles
  int mask_shift_px = 0;
  double count_error_prob = 0.0;
  double drop_detection_prob = 0.0;  // per brick and view
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument naming the first bad field.
  void validate() const;
};

/// "noiseless", "mild" or "harsh"; throws kInvalidArgument otherwise.
NoiseConfig noise_preset(const std::string& name);

/// Shifts every set cell by (dx, dy); cells leaving the raster are lost.
Mask shift_mask(const Mask& mask, int dx, int dy);

/// Simulated perception output for an annotated scene.
///
/// Per view: Gaussian keypoint noise clipped to [0,1]^2, yaw jitter (or a
/// random quarter-turn flip for LEGO scenes), a mask shift of up to
/// mask_shift_px, and confidence = IoU(shifted, gt) * visible_ratio. A dropped
/// view loses its keypoint and mask and gets confidence 0. A count error
/// removes a random brick or duplicates one. The random stream depends only on
/// cfg.seed and the scene name.
PredictionSet perturb(const Scene& scene, const Library& library, const NoiseConfig& cfg);

}  // namespace brickasm
