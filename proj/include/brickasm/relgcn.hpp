#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "brickasm/model.hpp"

namespace brickasm {

// Two-layer perceptron: in -> hidden (ReLU) -> out (linear).
struct Mlp {
  Eigen::MatrixXd w1;  // hidden x in
  Eigen::MatrixXd b1;  // hidden x 1
  Eigen::MatrixXd w2;  // out x hidden
  Eigen::MatrixXd b2;  // out x 1

  static Mlp zeros(int in, int hidden, int out);
};

struct GcnParams {
  int feature_width = 0;
  int hidden = 64;
  std::vector<Mlp> edge_layers;  // one per message-passing step, each 2F -> hidden -> F
  Mlp scorer;                    // F -> hidden -> 1

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  static GcnParams init(int feature_width, std::uint64_t seed, int layers = 2, int hidden = 64);
  static GcnParams zeros_like(const GcnParams& other);

  std::vector<Eigen::MatrixXd*> tensors();
  std::vector<const Eigen::MatrixXd*> tensors() const;
  bool all_finite() const;
};

/// Node feature width for a library: |shapes| + |textures| + 3 (position / 3) + 2 (sin, cos yaw).
int feature_width(const Library& library);

/// One row per brick: shape one-hot, texture one-hot, position / 3, sin yaw, cos yaw.
/// One-hot slots follow the order of shapes/textures in the library.
Eigen::MatrixXd node_features(std::span<const BrickInstance> bricks, const Library& library);

// Edge tensors are stored with one row per ordered pair, row i * n + j.
// Diagonal rows stay zero.
struct MessagePassResult {
  std::vector<Eigen::MatrixXd> nodes;        // T + 1 entries, n x F
  std::vector<Eigen::MatrixXd> edges;        // T entries, (n*n) x F
  std::vector<Eigen::MatrixXd> hidden_pre;   // T entries, (n*n) x hidden
};

MessagePassResult message_pass(const GcnParams& params, const Eigen::MatrixXd& features);

struct GcnForward {
  MessagePassResult passes;
  Eigen::MatrixXd scorer_pre;  // (n*n) x hidden
  Eigen::MatrixXd logits;      // n x n
  Eigen::MatrixXd probs;       // n x n, diagonal set to 0
};

GcnForward gcn_forward(const GcnParams& params, const Eigen::MatrixXd& features);

/// Sigmoid of the scoring MLP applied to the final edge features.
Eigen::MatrixXd edge_probabilities(const GcnParams& params, const Eigen::MatrixXd& features);

/// Parameter gradient given dL/dprobs (diagonal ignored).
GcnParams gcn_backward(const GcnParams& params, const GcnForward& forward, const Eigen::MatrixXd& dprobs);

struct GraphLossOptions {
  double epsilon = 1e-12;
  double positive_weight = 1.0;  // 1 = unbalanced cross-entropy
};

struct GraphLoss {
  double value = 0.0;
  Eigen::MatrixXd grad;  // dL/dprobs
};

/// Full-edge cross-entropy plus the mean of top-k subset losses for
/// k = 1..count_gt + 1. Pairs are ranked by descending probability, ties in
/// lexicographic (i, j) order; ranking is treated as constant for the gradient.
GraphLoss graph_loss(const Eigen::MatrixXd& probs, std::span<const Edge> gt_edges, int count_gt,
                     const GraphLossOptions& opts = {});

struct TrainSample {
  Eigen::MatrixXd features;
  std::vector<Edge> edges;
  int count = 0;
};

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 5e-4;
  double lr_decay = 0.8;  // multiplied in once per epoch
  double weight_decay = 1e-3;
  int batch_size = 8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  int layers = 2;
  int hidden = 64;
  GraphLossOptions loss;
};

struct TrainLog {
  std::vector<double> epoch_loss;  // mean per-sample L_graph
  int steps = 0;
};

/// AdamW with decoupled weight decay; deterministic for a fixed seed.
/// Throws kNonFiniteLoss if a loss or gradient stops being finite.
GcnParams train(std::span<const TrainSample> data, const TrainConfig& config, TrainLog* log = nullptr);
GcnParams train(GcnParams params, std::span<const TrainSample> data, const TrainConfig& config,
                TrainLog* log = nullptr);

}  // namespace brickasm
