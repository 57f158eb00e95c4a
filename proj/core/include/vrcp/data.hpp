#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrcp/random.hpp"
#include "vrcp/tensor.hpp"

namespace vrcp {

enum class TargetKind { label, real };

/// x_normalized = (x_raw - offset) / scale, per feature.
struct Normalization {
  Vector offset;
  Vector scale;
};

struct Dataset {
  std::vector<Vector> features;
  std::vector<double> targets;  // class index stored as a double for labels
  TargetKind kind = TargetKind::real;
  std::size_t num_classes = 0;
  std::string provenance;
  std::optional<Normalization> normalization;

  std::size_t size() const noexcept { return features.size(); }
  std::size_t dim() const noexcept { return features.empty() ? 0 : features.front().size(); }
  std::size_t label(std::size_t i) const { return static_cast<std::size_t>(targets[i]); }

  /// Throws DataError on ragged rows, length mismatch, non-finite values or
  /// out-of-range labels.
  void validate() const;
};

/// Rescales every column to [0,1] in place (constant columns map to 0).
Normalization min_max_normalize(std::vector<Vector>& features);

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

/// `classes` isotropic unit-variance Gaussian clusters in `dim` dimensions
/// with pairwise center distance `separation`; labels are balanced
/// (counts differ by at most one) and features min-max normalized.
Dataset gen_gaussian_classes(std::size_t classes, std::size_t dim, std::size_t n, double separation,
                             std::uint64_t seed);

/// 2-D point mass steered towards a goal by a noisy PD policy.
struct DynamicsParams {
  double dt = 0.2;
  double gain_position = 1.0;
  double gain_velocity = 0.5;
  double noise_floor = 0.2;  // action noise std at zero command
  double noise_gain = 0.6;   // extra std per unit of commanded acceleration
  double reward_max = 1.0;   // per-step reward is reward_max - distance to goal
  std::size_t rollouts = 1;  // Monte-Carlo rollouts averaged into each target
};

/// Initial state layout: {px, py, vx, vy, gx, gy}.
inline constexpr std::size_t kDynamicsStateDim = 6;

/// Cumulative reward of one rollout of `horizon` steps.
double simulate_rollout(std::span<const double> state, std::size_t horizon, const DynamicsParams& params,
                        Rng& rng);

/// Regression data: features are the (normalized) initial state, targets the
/// cumulative reward. Command magnitude grows with distance to the goal, so the
/// noise (and target spread) does too.
Dataset gen_regression_dynamics(std::size_t n, std::size_t horizon, std::uint64_t seed,
                                const DynamicsParams& params = {});

/// Column layout for CSV ingestion. An empty `feature_columns` means every
/// column named x<digits>, in header order.
struct CsvSchema {
  std::vector<std::string> feature_columns;
  std::string target_column = "y";
  TargetKind kind = TargetKind::real;
};

Dataset parse_csv(std::string_view text, const CsvSchema& schema, std::string_view origin = "<memory>");
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
/// Header x0..x{d-1},y; shortest round-trip number text.
std::string to_csv(const Dataset& ds);

struct SplitPlan {
  std::size_t n_train = 0;
  std::size_t n_cal = 0;
  std::size_t n_test = 0;
  std::size_t n_splits = 1;
  std::uint64_t seed = 0;

  void validate(std::size_t dataset_size) const;
};

/// Disjoint index sets drawn from one seeded permutation.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> cal;
  std::vector<std::size_t> test;
};

/// Split `index` of the plan; depends only on (dataset size, plan, index).
Split make_split(std::size_t dataset_size, const SplitPlan& plan, std::size_t index);
std::vector<Split> make_splits(const Dataset& ds, const SplitPlan& plan);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace vrcp
