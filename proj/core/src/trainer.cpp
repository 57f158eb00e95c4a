#include "vrcp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "vrcp/autodiff.hpp"
#include "vrcp/error.hpp"
#include "vrcp/random.hpp"

namespace vrcp {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0,1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
}

Network init_network(const Architecture& arch, std::uint64_t seed) {
  if (arch.input_dim == 0 || arch.output_dim == 0) throw ConfigError("architecture dimensions must be positive");
  if (arch.activation != LayerKind::relu && arch.activation != LayerKind::leaky_relu)
    throw ConfigError("hidden activation must be relu or leaky_relu");
  Rng rng(seed);
  std::vector<Layer> layers;
  std::size_t in = arch.input_dim;
  auto dense = [&](std::size_t out, double gain) {
    const double bound = std::sqrt(gain / static_cast<double>(in));
    Matrix w(out, in);
    for (double& v : w.data()) v = uniform(rng, -bound, bound);
    layers.push_back(Layer::affine(std::move(w), Vector(out, 0.0)));
    in = out;
  };
  for (std::size_t width : arch.hidden) {
    dense(width, 6.0);
    layers.push_back(arch.activation == LayerKind::relu ? Layer::relu() : Layer::leaky_relu(arch.leaky_slope));
  }
  dense(arch.output_dim, 3.0);
  if (arch.softmax_output) layers.push_back(Layer::softmax());
  return Network(arch.input_dim, std::move(layers));
}

double accuracy(const Network& classifier, const Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Vector out = forward(classifier, ds.features[i]);
    const auto best = static_cast<std::size_t>(std::max_element(out.begin(), out.end()) - out.begin());
    if (best == ds.label(i)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

namespace {

using ObjectiveFor = std::function<Objective(std::size_t)>;

std::vector<double> sgd(Network& net, const Dataset& train, const TrainConfig& cfg,
                        const ObjectiveFor& objective_for) {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  for (const Layer& l : net.layers())
    if (l.kind == LayerKind::affine) {
      weights.push_back(l.weight);
      biases.push_back(l.bias);
    }
  std::vector<Matrix> vel_w;
  std::vector<Vector> vel_b;
  for (const Matrix& w : weights) vel_w.emplace_back(w.rows(), w.cols());
  for (const Vector& b : biases) vel_b.emplace_back(b.size(), 0.0);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(cfg.seed, {2}));
  std::vector<double> history;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<Vector> xs;
      std::vector<Objective> objs;
      for (std::size_t k = start; k < end; ++k) {
        xs.push_back(train.features[order[k]]);
        objs.push_back(objective_for(order[k]));
      }
      const ParameterGradients g = grad_params(net, xs, objs);
      if (!std::isfinite(g.mean_loss))
        throw DivergenceError(epoch, "training diverged (non-finite loss) in epoch " + std::to_string(epoch));
      epoch_loss += g.mean_loss * static_cast<double>(end - start);

      for (std::size_t p = 0; p < weights.size(); ++p) {
        auto w = weights[p].data();
        auto gw = g.weights[p].data();
        auto vw = vel_w[p].data();
        for (std::size_t k = 0; k < w.size(); ++k) {
          vw[k] = cfg.momentum * vw[k] + gw[k] + cfg.weight_decay * w[k];
          w[k] -= cfg.learning_rate * vw[k];
        }
        for (std::size_t k = 0; k < biases[p].size(); ++k) {
          vel_b[p][k] = cfg.momentum * vel_b[p][k] + g.biases[p][k];
          biases[p][k] -= cfg.learning_rate * vel_b[p][k];
        }
      }
      for (const Matrix& w : weights)
        if (!all_finite(w.data()))
          throw DivergenceError(epoch, "training diverged (non-finite weights) in epoch " + std::to_string(epoch));
      net = net.with_parameters(weights, biases);
    }
    history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return history;
}

}  // namespace

ClassifierTraining train_classifier(const Dataset& train, const Architecture& arch,
                                    const TrainConfig& cfg, const Dataset* test) {
  cfg.validate();
  if (train.kind != TargetKind::label) throw ConfigError("classifier training needs label targets");
  if (!arch.softmax_output) throw ConfigError("classifier architecture must end in softmax");
  if (train.size() == 0) throw ConfigError("empty training set");
  train.validate();
  if (train.num_classes > arch.output_dim) throw ConfigError("labels exceed classifier outputs");

  ClassifierTraining out{init_network(arch, derive_seed(cfg.seed, {1})), {}, 0.0, std::nullopt};
  out.epoch_loss = sgd(out.network, train, cfg,
                       [&](std::size_t i) { return Objective::cross_entropy(train.label(i)); });
  out.train_accuracy = accuracy(out.network, train);
  if (test != nullptr) out.test_accuracy = accuracy(out.network, *test);
  return out;
}

QuantileTraining train_quantile(const Dataset& train, const Architecture& arch, double tau,
                                const TrainConfig& cfg) {
  cfg.validate();
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("quantile level must lie in (0,1)");
  if (train.kind != TargetKind::real) throw ConfigError("quantile training needs real targets");
  if (arch.output_dim != 1 || arch.softmax_output)
    throw ConfigError("quantile architecture must have one unnormalized output");
  if (train.size() == 0) throw ConfigError("empty training set");
  train.validate();

  Network net = init_network(arch, derive_seed(cfg.seed, {1}));
  std::vector<double> sorted = train.targets;
  std::sort(sorted.begin(), sorted.end());
  const auto idx = std::min(sorted.size() - 1, static_cast<std::size_t>(tau * static_cast<double>(sorted.size())));
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  for (const Layer& l : net.layers())
    if (l.kind == LayerKind::affine) {
      weights.push_back(l.weight);
      biases.push_back(l.bias);
    }
  biases.back()[0] = sorted[idx];
  net = net.with_parameters(weights, biases);

  QuantileTraining out{std::move(net), tau, {}};
  out.epoch_loss = sgd(out.network, train, cfg,
                       [&](std::size_t i) { return Objective::pinball(train.targets[i], tau); });
  return out;
}

QuantilePair train_quantile_pair(const Dataset& train, const Architecture& arch, double alpha,
                                 const TrainConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  TrainConfig lo_cfg = cfg;
  TrainConfig hi_cfg = cfg;
  lo_cfg.seed = derive_seed(cfg.seed, {10});
  hi_cfg.seed = derive_seed(cfg.seed, {11});
  return {train_quantile(train, arch, alpha / 2.0, lo_cfg), train_quantile(train, arch, 1.0 - alpha / 2.0, hi_cfg)};
}

}  // namespace vrcp
