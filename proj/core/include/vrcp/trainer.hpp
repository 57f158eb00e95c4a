#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "vrcp/data.hpp"
#include "vrcp/network.hpp"

namespace vrcp {

/// Dense MLP: affine -> act -> ... -> affine [-> softmax].
struct Architecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t output_dim = 1;
  LayerKind activation = LayerKind::relu;  // relu or leaky_relu
  double leaky_slope = 0.1;
  bool softmax_output = false;
};

/// Minibatch SGD with (PyTorch-style) momentum and L2 weight decay.
struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

/// He-uniform weights, zero biases. Deterministic in `seed`.
Network init_network(const Architecture& arch, std::uint64_t seed);

double accuracy(const Network& classifier, const Dataset& ds);

struct ClassifierTraining {
  Network network;
  std::vector<double> epoch_loss;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
};

/// Cross-entropy training. Requires label targets and an architecture ending
/// in softmax. Throws DivergenceError naming the epoch on a non-finite loss.
ClassifierTraining train_classifier(const Dataset& train, const Architecture& arch,
                                    const TrainConfig& cfg, const Dataset* test = nullptr);

struct QuantileTraining {
  Network network;
  double tau = 0.5;
  std::vector<double> epoch_loss;
};

/// Pinball-loss training of a single-output network at level tau. The output
/// bias starts at the empirical tau-quantile of the training targets.
QuantileTraining train_quantile(const Dataset& train, const Architecture& arch, double tau,
                                const TrainConfig& cfg);

struct QuantilePair {
  QuantileTraining lo;  // tau = alpha / 2
  QuantileTraining hi;  // tau = 1 - alpha / 2
};

QuantilePair train_quantile_pair(const Dataset& train, const Architecture& arch, double alpha,
                                 const TrainConfig& cfg);

}  // namespace vrcp
