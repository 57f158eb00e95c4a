#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrcp/data.hpp"
#include "vrcp/tensor.hpp"
#include "vrcp/trainer.hpp"
#include "vrcp/verifier.hpp"

namespace vrcp {

enum class Task { classification, regression };
enum class Method { vanilla, vrcp_i, vrcp_c };
enum class AttackKind { none, fgsm, pgd };

const char* to_string(Task task) noexcept;
const char* to_string(Method method) noexcept;
const char* to_string(AttackKind kind) noexcept;
Method parse_method(std::string_view text);

struct DatasetSpec {
  enum class Kind { gaussian_classes, dynamics, csv };
  Kind kind = Kind::gaussian_classes;
  std::size_t n = 0;
  std::size_t classes = 3;
  std::size_t dim = 8;
  double separation = 3.0;
  std::size_t horizon = 5;
  DynamicsParams dynamics;
  std::string path;  // csv only
  std::optional<std::uint64_t> seed;  // default: derived from the master seed
};

struct ModelSpec {
  std::vector<std::size_t> hidden;
  LayerKind activation = LayerKind::relu;
  double leaky_slope = 0.1;
  TrainConfig train;
  // Pre-trained models replace training when given.
  std::optional<std::string> path;     // classifier
  std::optional<std::string> path_lo;  // quantile pair
  std::optional<std::string> path_hi;
};

struct AttackSpec {
  AttackKind kind = AttackKind::none;
  int steps = 100;
  std::optional<double> step_size;  // default 2.5 * epsilon / steps
  bool random_start = true;
  std::optional<Norm> norm;  // must equal the experiment norm when given
};

struct ExperimentConfig {
  Task task = Task::classification;
  DatasetSpec dataset;
  ModelSpec model;
  std::vector<Method> methods{Method::vanilla, Method::vrcp_i, Method::vrcp_c};
  BoundMethod verifier = BoundMethod::crown;
  Norm norm = Norm::linf;
  std::vector<double> epsilons{0.0};
  double alpha = 0.1;
  AttackSpec attack;
  SplitPlan splits;
  std::string output = ".";
  bool trace = false;
  bool timing = true;  // false writes wall_ms = 0 for byte-stable reports

  /// Throws ConfigError describing the first problem found.
  void validate() const;
};

/// Parses the JSON experiment document (see README for the schema).
/// Throws ConfigError on malformed or invalid input.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig read_experiment_config(const std::string& path);
std::string dump_experiment_config(const ExperimentConfig& cfg);

/// One (method, epsilon, split) cell.
struct ReportRow {
  std::string method;
  double epsilon = 0.0;
  Norm norm = Norm::linf;
  std::size_t split = 0;
  double coverage = 0.0;
  double avg_size = 0.0;
  double wall_ms = 0.0;
};

struct ContainmentSummary {
  std::string method;
  double epsilon = 0.0;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::vector<std::string> examples;  // first few, with split and point index
};

/// Set-size counts (index = size 0..K) of one (method, epsilon, split).
struct SizeCounts {
  std::string method;
  double epsilon = 0.0;
  std::size_t split = 0;
  std::vector<std::size_t> counts;
};

/// Per-point audit record. `score` is the score compared against `bound`
/// (the best-case score for VRCP-I, the plain score otherwise) at the true
/// target; `region` is the textual region.
struct TracePoint {
  std::string method;
  double epsilon = 0.0;
  std::size_t split = 0;
  std::size_t point = 0;
  double score = 0.0;
  double bound = 0.0;
  std::string region;
  bool covered = false;
  double size = 0.0;
};

struct ExperimentReport {
  Task task = Task::classification;
  double alpha = 0.1;
  Norm norm = Norm::linf;
  std::size_t num_classes = 0;
  std::size_t n_splits = 0;
  std::string provenance;
  std::vector<ReportRow> rows;
  std::vector<ContainmentSummary> containment;
  std::vector<SizeCounts> size_counts;
  std::vector<TracePoint> trace;
  std::vector<double> model_accuracy;  // clean test accuracy per split (classification)

  std::size_t containment_violations() const noexcept;
};

struct RunOptions {
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;  // overrides splits.seed
};

/// Runs the full protocol: for each split, train (or load) the model,
/// calibrate every method, attack each test point at every epsilon and record
/// coverage, size and containment. Deterministic given the master seed,
/// independently of the thread count.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

}  // namespace vrcp
