#pragma once

#include <vector>

#include "brickasm/error.hpp"
#include "brickasm/model.hpp"

namespace fixtures {

// Brick whose bottom sits at `bottom`.
inline brickasm::BrickInstance brick_on(const brickasm::Library& lib, int shape, int texture, double x, double y,
                                        double bottom, double yaw = 0.0) {
  brickasm::BrickInstance b;
  b.shape_id = shape;
  b.texture_id = texture;
  b.pose.position = {x, y, bottom + lib.shape(shape).height / 2.0};
  b.pose.yaw = yaw;
  return b;
}

inline brickasm::Scene clevr_scene(std::vector<brickasm::BrickInstance> bricks, std::vector<brickasm::Edge> edges) {
  brickasm::Scene s;
  s.name = "fixture";
  s.style = "clevr";
  s.library_ref = "clevr";
  s.bricks = std::move(bricks);
  s.support_edges = std::move(edges);
  return s;
}

template <class Fn>
inline bool throws_code(Fn&& fn, brickasm::Errc code) {
  try {
    fn();
  } catch (const brickasm::Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace fixtures
