#include "brickasm/relgcn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "brickasm/error.hpp"
#include "brickasm/rng.hpp"

namespace brickasm {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;

Mlp Mlp::zeros(int in, int hidden, int out) {
  return Mlp{MatrixXd::Zero(hidden, in), MatrixXd::Zero(hidden, 1), MatrixXd::Zero(out, hidden), MatrixXd::Zero(out, 1)};
}

namespace {

void fill_uniform(MatrixXd& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
}

Mlp init_mlp(int in, int hidden, int out, Rng& rng) {
  Mlp m = Mlp::zeros(in, hidden, out);
  const double b_in = 1.0 / std::sqrt(static_cast<double>(in));
  const double b_hid = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(m.w1, b_in, rng);
  fill_uniform(m.b1, b_in, rng);
  fill_uniform(m.w2, b_hid, rng);
  fill_uniform(m.b2, b_hid, rng);
  return m;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

GcnParams GcnParams::init(int feature_width, std::uint64_t seed, int layers, int hidden) {
  if (feature_width < 1 || layers < 1 || hidden < 1)
    throw Error(Errc::kInvalidArgument, "GcnParams::init needs positive sizes");
  Rng rng(splitmix64(seed));
  GcnParams p;
  p.feature_width = feature_width;
  p.hidden = hidden;
  for (int t = 0; t < layers; ++t) p.edge_layers.push_back(init_mlp(2 * feature_width, hidden, feature_width, rng));
  p.scorer = init_mlp(feature_width, hidden, 1, rng);
  return p;
}

GcnParams GcnParams::zeros_like(const GcnParams& other) {
  GcnParams p = other;
  for (MatrixXd* t : p.tensors()) t->setZero();
  return p;
}

std::vector<MatrixXd*> GcnParams::tensors() {
  std::vector<MatrixXd*> out;
  for (Mlp& m : edge_layers) out.insert(out.end(), {&m.w1, &m.b1, &m.w2, &m.b2});
  out.insert(out.end(), {&scorer.w1, &scorer.b1, &scorer.w2, &scorer.b2});
  return out;
}

std::vector<const MatrixXd*> GcnParams::tensors() const {
  std::vector<const MatrixXd*> out;
  for (const Mlp& m : edge_layers) out.insert(out.end(), {&m.w1, &m.b1, &m.w2, &m.b2});
  out.insert(out.end(), {&scorer.w1, &scorer.b1, &scorer.w2, &scorer.b2});
  return out;
}

bool GcnParams::all_finite() const {
  for (const MatrixXd* t : tensors())
    if (!t->allFinite()) return false;
  return true;
}

int feature_width(const Library& library) {
  return static_cast<int>(library.shapes.size() + library.textures.size()) + 5;
}

MatrixXd node_features(std::span<const BrickInstance> bricks, const Library& library) {
  const int ns = static_cast<int>(library.shapes.size());
  const int nt = static_cast<int>(library.textures.size());
  MatrixXd x = MatrixXd::Zero(static_cast<Eigen::Index>(bricks.size()), feature_width(library));
  for (std::size_t i = 0; i < bricks.size(); ++i) {
    const auto& b = bricks[i];
    int s = -1, t = -1;
    for (int k = 0; k < ns; ++k)
      if (library.shapes[k].id == b.shape_id) s = k;
    for (int k = 0; k < nt; ++k)
      if (library.textures[k].id == b.texture_id) t = k;
    if (s < 0 || t < 0) throw Error(Errc::kInvalidArgument, "brick label does not resolve in library");
    const auto r = static_cast<Eigen::Index>(i);
    x(r, s) = 1.0;
    x(r, ns + t) = 1.0;
    x(r, ns + nt + 0) = b.pose.position.x() / 3.0;
    x(r, ns + nt + 1) = b.pose.position.y() / 3.0;
    x(r, ns + nt + 2) = b.pose.position.z() / 3.0;
    x(r, ns + nt + 3) = std::sin(b.pose.yaw);
    x(r, ns + nt + 4) = std::cos(b.pose.yaw);
  }
  return x;
}

MessagePassResult message_pass(const GcnParams& params, const MatrixXd& features) {
  const Eigen::Index f = params.feature_width;
  if (features.cols() != f) throw Error(Errc::kInvalidArgument, "feature width does not match parameters");
  const Eigen::Index n = features.rows();
  const Eigen::Index h = params.hidden;

  MessagePassResult res;
  res.nodes.push_back(features);
  for (const Mlp& layer : params.edge_layers) {
    const MatrixXd& p = res.nodes.back();
    const MatrixXd a = p * layer.w1.leftCols(f).transpose();
    const MatrixXd b = p * layer.w1.rightCols(f).transpose();
    MatrixXd pre = MatrixXd::Zero(n * n, h);
    MatrixXd e = MatrixXd::Zero(n * n, f);
    MatrixXd next = n > 1 ? MatrixXd(MatrixXd::Zero(n, f)) : p;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const Eigen::Index row = i * n + j;
        pre.row(row) = a.row(i) + b.row(j) + layer.b1.transpose();
        e.row(row) = pre.row(row).cwiseMax(0.0) * layer.w2.transpose() + layer.b2.transpose();
        next.row(j) += e.row(row) / static_cast<double>(n - 1);
      }
    res.hidden_pre.push_back(std::move(pre));
    res.edges.push_back(std::move(e));
    res.nodes.push_back(std::move(next));
  }
  return res;
}

GcnForward gcn_forward(const GcnParams& params, const MatrixXd& features) {
  GcnForward fw;
  fw.passes = message_pass(params, features);
  const Eigen::Index n = features.rows();
  const MatrixXd& e = fw.passes.edges.back();
  fw.scorer_pre = MatrixXd::Zero(n * n, params.hidden);
  fw.logits = MatrixXd::Zero(n, n);
  fw.probs = MatrixXd::Zero(n, n);
  const Mlp& s = params.scorer;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Eigen::Index row = i * n + j;
      fw.scorer_pre.row(row) = e.row(row) * s.w1.transpose() + s.b1.transpose();
      fw.logits(i, j) = (fw.scorer_pre.row(row).cwiseMax(0.0) * s.w2.transpose())(0, 0) + s.b2(0, 0);
      fw.probs(i, j) = sigmoid(fw.logits(i, j));
    }
  return fw;
}

MatrixXd edge_probabilities(const GcnParams& params, const MatrixXd& features) {
  return gcn_forward(params, features).probs;
}

GcnParams gcn_backward(const GcnParams& params, const GcnForward& fw, const MatrixXd& dprobs) {
  const Eigen::Index n = fw.probs.rows();
  const Eigen::Index f = params.feature_width;
  GcnParams grad = GcnParams::zeros_like(params);
  if (n < 2) return grad;

  const Mlp& s = params.scorer;
  Mlp& gs = grad.scorer;
  const MatrixXd& e_last = fw.passes.edges.back();
  MatrixXd de = MatrixXd::Zero(n * n, f);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Eigen::Index row = i * n + j;
      const double p = fw.probs(i, j);
      const double dlogit = dprobs(i, j) * p * (1.0 - p);
      const RowVectorXd hs = fw.scorer_pre.row(row).cwiseMax(0.0);
      gs.w2 += dlogit * hs;
      gs.b2(0, 0) += dlogit;
      RowVectorXd dpre = dlogit * s.w2.row(0);
      for (Eigen::Index k = 0; k < dpre.size(); ++k)
        if (fw.scorer_pre(row, k) <= 0.0) dpre(k) = 0.0;
      gs.w1 += dpre.transpose() * e_last.row(row);
      gs.b1 += dpre.transpose();
      de.row(row) = dpre * s.w1;
    }

  MatrixXd dnext = MatrixXd::Zero(n, f);  // dL/d p^{t+1}
  for (int t = static_cast<int>(params.edge_layers.size()) - 1; t >= 0; --t) {
    const Mlp& layer = params.edge_layers[t];
    Mlp& gl = grad.edge_layers[t];
    const MatrixXd& p = fw.passes.nodes[t];
    const MatrixXd& pre = fw.passes.hidden_pre[t];
    const bool last = t == static_cast<int>(params.edge_layers.size()) - 1;
    MatrixXd dp = MatrixXd::Zero(n, f);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const Eigen::Index row = i * n + j;
        RowVectorXd de_row = dnext.row(j) / static_cast<double>(n - 1);
        if (last) de_row += de.row(row);
        const RowVectorXd hrow = pre.row(row).cwiseMax(0.0);
        gl.w2 += de_row.transpose() * hrow;
        gl.b2 += de_row.transpose();
        RowVectorXd dpre = de_row * layer.w2;
        for (Eigen::Index k = 0; k < dpre.size(); ++k)
          if (pre(row, k) <= 0.0) dpre(k) = 0.0;
        gl.w1.leftCols(f) += dpre.transpose() * p.row(i);
        gl.w1.rightCols(f) += dpre.transpose() * p.row(j);
        gl.b1 += dpre.transpose();
        dp.row(i) += dpre * layer.w1.leftCols(f);
        dp.row(j) += dpre * layer.w1.rightCols(f);
      }
    dnext = std::move(dp);
  }
  return grad;
}

GraphLoss graph_loss(const MatrixXd& probs, std::span<const Edge> gt_edges, int count_gt,
                     const GraphLossOptions& opts) {
  const Eigen::Index n = probs.rows();
  GraphLoss out;
  out.grad = MatrixXd::Zero(n, n);
  if (n < 2) return out;

  MatrixXd label = MatrixXd::Zero(n, n);
  for (const Edge& e : gt_edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n || e.from == e.to)
      throw Error(Errc::kInvalidArgument, "ground-truth edge out of range");
    label(e.from, e.to) = 1.0;
  }

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) pairs.emplace_back(i, j);
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    return probs(a.first, a.second) > probs(b.first, b.second);
  });

  const double k_e = static_cast<double>(std::max(count_gt, 0) + 1);
  const double eps = opts.epsilon;
  for (std::size_t rank = 0; rank < pairs.size(); ++rank) {
    const auto [i, j] = pairs[rank];
    // Present in E (once) and in E_top_k for every k >= rank + 1, each weighted 1/K_E.
    const double in_topk = std::max(0.0, k_e - static_cast<double>(rank));
    const double mult = 1.0 + in_topk / k_e;
    const double p = probs(i, j);
    const double pc = std::clamp(p, eps, 1.0 - eps);
    const double y = label(i, j);
    const double ce = -(opts.positive_weight * y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
    out.value += mult * ce;
    if (p > eps && p < 1.0 - eps) out.grad(i, j) = mult * (-opts.positive_weight * y / p + (1.0 - y) / (1.0 - p));
  }
  return out;
}

namespace {

struct AdamState {
  std::vector<MatrixXd> m;
  std::vector<MatrixXd> v;
  int step = 0;
};

std::string describe_nonfinite(int epoch, int step, std::size_t sample, double loss) {
  std::ostringstream os;
  os << "epoch " << epoch << " step " << step << " sample " << sample << " loss " << loss;
  return os.str();
}

}  // namespace

GcnParams train(std::span<const TrainSample> data, const TrainConfig& config, TrainLog* log) {
  if (data.empty()) throw Error(Errc::kEmptyDataset, "training needs at least one sample");
  const int f = static_cast<int>(data.front().features.cols());
  return train(GcnParams::init(f, config.seed, config.layers, config.hidden), data, config, log);
}

GcnParams train(GcnParams params, std::span<const TrainSample> data, const TrainConfig& config, TrainLog* log) {
  if (data.empty()) throw Error(Errc::kEmptyDataset, "training needs at least one sample");
  if (config.batch_size < 1) throw Error(Errc::kInvalidArgument, "batch_size must be >= 1");

  AdamState adam;
  for (const MatrixXd* t : params.tensors()) {
    adam.m.push_back(MatrixXd::Zero(t->rows(), t->cols()));
    adam.v.push_back(MatrixXd::Zero(t->rows(), t->cols()));
  }
  Rng rng(derive_seed(config.seed, 0x7a1dULL));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double lr = config.learning_rate;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      GcnParams grad = GcnParams::zeros_like(params);
      auto gt = grad.tensors();
      for (std::size_t b = start; b < stop; ++b) {
        const TrainSample& sample = data[order[b]];
        const GcnForward fw = gcn_forward(params, sample.features);
        const GraphLoss loss = graph_loss(fw.probs, sample.edges, sample.count, config.loss);
        if (!std::isfinite(loss.value))
          throw Error(Errc::kNonFiniteLoss, describe_nonfinite(epoch, adam.step, order[b], loss.value));
        epoch_loss += loss.value;
        const GcnParams g = gcn_backward(params, fw, loss.grad);
        const auto gs = g.tensors();
        for (std::size_t k = 0; k < gt.size(); ++k) *gt[k] += *gs[k] / static_cast<double>(stop - start);
      }
      if (!grad.all_finite()) throw Error(Errc::kNonFiniteLoss, describe_nonfinite(epoch, adam.step, order[start], NAN));

      ++adam.step;
      const double bc1 = 1.0 - std::pow(config.beta1, adam.step);
      const double bc2 = 1.0 - std::pow(config.beta2, adam.step);
      auto pt = params.tensors();
      for (std::size_t k = 0; k < pt.size(); ++k) {
        MatrixXd& w = *pt[k];
        const MatrixXd& g = *gt[k];
        w *= (1.0 - lr * config.weight_decay);
        adam.m[k] = config.beta1 * adam.m[k] + (1.0 - config.beta1) * g;
        adam.v[k] = config.beta2 * adam.v[k] + (1.0 - config.beta2) * g.cwiseProduct(g);
        w.array() -= lr * (adam.m[k].array() / bc1) / ((adam.v[k].array() / bc2).sqrt() + config.adam_epsilon);
      }
    }
    if (log) log->epoch_loss.push_back(epoch_loss / static_cast<double>(data.size()));
    lr *= config.lr_decay;
  }
  if (log) log->steps = adam.step;
  return params;
}

}  // namespace brickasm
