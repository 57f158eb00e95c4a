#include "vrcp/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace vrcp {

using nlohmann::json;

const char* to_string(ModelErrorKind kind) noexcept {
  switch (kind) {
    case ModelErrorKind::parse: return "parse";
    case ModelErrorKind::version: return "version";
    case ModelErrorKind::schema: return "schema";
    case ModelErrorKind::dimension: return "dimension";
    case ModelErrorKind::non_finite: return "non_finite";
    case ModelErrorKind::structure: return "structure";
  }
  return "?";
}

ModelError::ModelError(ModelErrorKind kind, std::optional<std::size_t> layer,
                       const std::string& what)
    : Error(std::string(to_string(kind)) + " error" +
            (layer ? " at layer " + std::to_string(*layer) : std::string()) + ": " + what),
      kind_(kind),
      layer_(layer) {}

namespace {

[[noreturn]] void fail(ModelErrorKind kind, std::optional<std::size_t> layer,
                       const std::string& what) {
  throw ModelError(kind, layer, what);
}

const json& field(const json& obj, const char* key, std::optional<std::size_t> layer) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ModelErrorKind::schema, layer, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& v, std::optional<std::size_t> layer, const char* what) {
  if (!v.is_number()) fail(ModelErrorKind::schema, layer, std::string(what) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(ModelErrorKind::non_finite, layer, std::string(what) + " is not finite");
  return x;
}

Vector number_array(const json& v, std::size_t layer, const char* what) {
  if (!v.is_array()) fail(ModelErrorKind::schema, layer, std::string(what) + " must be an array");
  Vector out;
  out.reserve(v.size());
  for (const json& e : v) out.push_back(number(e, layer, what));
  return out;
}

Layer parse_layer(const json& j, std::size_t index, std::size_t in_dim, std::size_t n_layers) {
  if (!j.is_object()) fail(ModelErrorKind::schema, index, "layer must be an object");
  const json& kind = field(j, "kind", index);
  if (!kind.is_string()) fail(ModelErrorKind::schema, index, "layer kind must be a string");
  const std::string k = kind.get<std::string>();
  if (k == "affine") {
    const json& w = field(j, "w", index);
    if (!w.is_array() || w.empty()) fail(ModelErrorKind::schema, index, "w must be a non-empty array of rows");
    std::vector<Vector> rows;
    for (const json& r : w) rows.push_back(number_array(r, index, "weight"));
    for (const Vector& r : rows)
      if (r.size() != in_dim)
        fail(ModelErrorKind::dimension, index,
             "weight row has " + std::to_string(r.size()) + " entries, layer receives " +
                 std::to_string(in_dim) + " inputs");
    Vector b = number_array(field(j, "b", index), index, "bias");
    if (b.size() != rows.size())
      fail(ModelErrorKind::dimension, index,
           "bias has " + std::to_string(b.size()) + " entries, weight has " +
               std::to_string(rows.size()) + " rows");
    return Layer::affine(Matrix::from_rows(rows), std::move(b));
  }
  if (k == "relu") return Layer::relu();
  if (k == "leaky_relu") {
    const double a = number(field(j, "a", index), index, "leaky slope");
    if (!(a > 0.0 && a < 1.0)) fail(ModelErrorKind::structure, index, "leaky slope must lie in (0,1)");
    return Layer::leaky_relu(a);
  }
  if (k == "softmax") {
    if (index + 1 != n_layers) fail(ModelErrorKind::structure, index, "softmax must be the final layer");
    return Layer::softmax();
  }
  fail(ModelErrorKind::schema, index, "unknown layer kind '" + k + "'");
}

json layer_to_json(const Layer& l) {
  json j;
  j["kind"] = to_string(l.kind);
  switch (l.kind) {
    case LayerKind::affine: {
      json w = json::array();
      for (std::size_t r = 0; r < l.weight.rows(); ++r) {
        const auto row = l.weight.row(r);
        w.push_back(json(Vector(row.begin(), row.end())));
      }
      j["w"] = std::move(w);
      j["b"] = l.bias;
      break;
    }
    case LayerKind::leaky_relu:
      j["a"] = l.slope;
      break;
    default:
      break;
  }
  return j;
}

// Builds the DOM while tracking the position inside "layers", so that number
// overflow (the only way JSON text yields a non-finite value) can name its
// layer.
class TrackingSax {
 public:
  explicit TrackingSax(json& out) : dom_(out, true) {}

  bool null() { return value() && dom_.null(); }
  bool boolean(bool v) { return value() && dom_.boolean(v); }
  bool number_integer(json::number_integer_t v) { return value() && dom_.number_integer(v); }
  bool number_unsigned(json::number_unsigned_t v) { return value() && dom_.number_unsigned(v); }
  bool number_float(json::number_float_t v, const json::string_t& s) { return value() && dom_.number_float(v, s); }
  bool string(json::string_t& v) { return value() && dom_.string(v); }
  bool binary(json::binary_t& v) { return value() && dom_.binary(v); }
  bool start_object(std::size_t n) {
    value();
    stack_.push_back({false, {}, 0});
    return dom_.start_object(n);
  }
  bool key(json::string_t& k) {
    stack_.back().key = k;
    return dom_.key(k);
  }
  bool end_object() {
    stack_.pop_back();
    return dom_.end_object();
  }
  bool start_array(std::size_t n) {
    value();
    stack_.push_back({true, {}, 0});
    return dom_.start_array(n);
  }
  bool end_array() {
    stack_.pop_back();
    return dom_.end_array();
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
    kind_ = ex.id == 406 ? ModelErrorKind::non_finite : ModelErrorKind::parse;
    message_ = ex.what();
    if (stack_.size() >= 2 && !stack_[0].array && stack_[0].key == "layers" && stack_[1].array &&
        stack_[1].count > 0)
      layer_ = stack_[1].count - 1;
    return false;
  }

  [[noreturn]] void raise() const { fail(kind_, layer_, message_); }

 private:
  struct Frame {
    bool array;
    std::string key;
    std::size_t count;
  };

  bool value() {
    if (!stack_.empty() && stack_.back().array) ++stack_.back().count;
    return true;
  }

  nlohmann::detail::json_sax_dom_parser<json> dom_;
  std::vector<Frame> stack_;
  ModelErrorKind kind_ = ModelErrorKind::parse;
  std::optional<std::size_t> layer_;
  std::string message_;
};

}  // namespace

ModelFile load_model(std::string_view text) {
  json doc;
  TrackingSax sax(doc);
  if (!json::sax_parse(text.begin(), text.end(), &sax)) sax.raise();
  if (!doc.is_object()) fail(ModelErrorKind::schema, std::nullopt, "document must be an object");

  const json& version = field(doc, "version", std::nullopt);
  if (!version.is_number_integer() || version.get<long long>() != kModelFormatVersion)
    fail(ModelErrorKind::version, std::nullopt, "unsupported format version " + version.dump());

  const json& input = field(doc, "input_dim", std::nullopt);
  if (!input.is_number_unsigned() || input.get<std::size_t>() == 0)
    fail(ModelErrorKind::schema, std::nullopt, "input_dim must be a positive integer");
  const std::size_t input_dim = input.get<std::size_t>();

  ModelTask task;
  const json& t = field(doc, "task", std::nullopt);
  if (!t.is_object()) fail(ModelErrorKind::schema, std::nullopt, "task must be an object");
  const json& tk = field(t, "kind", std::nullopt);
  if (tk == "classifier") {
    task = ModelTask::classifier();
  } else if (tk == "quantile") {
    const double tau = number(field(t, "tau", std::nullopt), std::nullopt, "tau");
    if (!(tau > 0.0 && tau < 1.0)) fail(ModelErrorKind::schema, std::nullopt, "tau must lie in (0,1)");
    task = ModelTask::quantile(tau);
  } else {
    fail(ModelErrorKind::schema, std::nullopt, "unknown task kind " + tk.dump());
  }

  const json& layers = field(doc, "layers", std::nullopt);
  if (!layers.is_array()) fail(ModelErrorKind::schema, std::nullopt, "layers must be an array");
  if (layers.empty()) fail(ModelErrorKind::structure, std::nullopt, "network has no layers");

  std::vector<Layer> parsed;
  std::size_t dim = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    parsed.push_back(parse_layer(layers[i], i, dim, layers.size()));
    if (parsed.back().kind == LayerKind::affine) dim = parsed.back().weight.rows();
  }
  if (task.kind == ModelTask::Kind::quantile && (dim != 1 || parsed.back().kind == LayerKind::softmax))
    fail(ModelErrorKind::structure, std::nullopt, "quantile regressor must have one unnormalized output");
  return {Network(input_dim, std::move(parsed)), task};
}

std::string save_model(const Network& net, const ModelTask& task) {
  json doc;
  doc["version"] = kModelFormatVersion;
  doc["input_dim"] = net.input_dim();
  if (task.kind == ModelTask::Kind::classifier) {
    doc["task"] = {{"kind", "classifier"}};
  } else {
    doc["task"] = {{"kind", "quantile"}, {"tau", task.tau}};
  }
  json layers = json::array();
  for (const Layer& l : net.layers()) layers.push_back(layer_to_json(l));
  doc["layers"] = std::move(layers);
  return doc.dump() + "\n";
}

std::string save_model(const ModelFile& model) { return save_model(model.network, model.task); }

ModelFile read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

void write_model_file(const std::filesystem::path& path, const ModelFile& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path.string());
  out << save_model(model);
}

}  // namespace vrcp
