#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "vrcp/error.hpp"
#include "vrcp/network.hpp"

namespace vrcp {

/// What a stored network predicts.
struct ModelTask {
  enum class Kind { classifier, quantile };
  Kind kind = Kind::classifier;
  double tau = 0.0;  // quantile level, only for Kind::quantile

  static ModelTask classifier() { return {}; }
  static ModelTask quantile(double tau) { return {Kind::quantile, tau}; }
  bool operator==(const ModelTask&) const = default;
};

struct ModelFile {
  Network network;
  ModelTask task;
};

enum class ModelErrorKind { parse, version, schema, dimension, non_finite, structure };

const char* to_string(ModelErrorKind kind) noexcept;

/// Rejection of a model document. `layer()` names the offending layer
/// (0-based) when the problem is local to one layer.
class ModelError : public Error {
 public:
  ModelError(ModelErrorKind kind, std::optional<std::size_t> layer, const std::string& what);
  ModelErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> layer() const noexcept { return layer_; }

 private:
  ModelErrorKind kind_;
  std::optional<std::size_t> layer_;
};

inline constexpr int kModelFormatVersion = 1;

/// Parses and validates a model document:
///
///   {"version":1, "input_dim":d,
///    "task":{"kind":"classifier"} | {"kind":"quantile","tau":t},
///    "layers":[{"kind":"affine","w":[[...]],"b":[...]}, {"kind":"relu"},
///              {"kind":"leaky_relu","a":0.1}, ..., {"kind":"softmax"}]}
ModelFile load_model(std::string_view text);

/// Canonical serialization: sorted keys, shortest round-trip float text,
/// no insignificant whitespace. Identical models give identical bytes.
std::string save_model(const Network& net, const ModelTask& task = ModelTask::classifier());
std::string save_model(const ModelFile& model);

ModelFile read_model_file(const std::filesystem::path& path);
void write_model_file(const std::filesystem::path& path, const ModelFile& model);

}  // namespace vrcp
