#include "vrcp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "vrcp/error.hpp"
#include "vrcp/format.hpp"

namespace vrcp {

void Dataset::validate() const {
  if (features.size() != targets.size())
    throw DataError(0, "features and targets differ in length");
  const std::size_t d = dim();
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != d) throw DataError(i + 1, "ragged feature row");
    if (!all_finite(features[i]) || !std::isfinite(targets[i]))
      throw DataError(i + 1, "non-finite value");
    if (kind == TargetKind::label) {
      const double t = targets[i];
      if (t < 0 || t != std::floor(t) || static_cast<std::size_t>(t) >= num_classes)
        throw DataError(i + 1, "label out of range");
    }
  }
}

Normalization min_max_normalize(std::vector<Vector>& features) {
  Normalization norm;
  if (features.empty()) return norm;
  const std::size_t d = features.front().size();
  Vector lo(d, INFINITY), hi(d, -INFINITY);
  for (const Vector& x : features)
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], x[j]);
      hi[j] = std::max(hi[j], x[j]);
    }
  norm.offset = lo;
  norm.scale.resize(d);
  for (std::size_t j = 0; j < d; ++j) norm.scale[j] = hi[j] > lo[j] ? hi[j] - lo[j] : 1.0;
  for (Vector& x : features)
    for (std::size_t j = 0; j < d; ++j) x[j] = (x[j] - norm.offset[j]) / norm.scale[j];
  return norm;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.kind = ds.kind;
  out.num_classes = ds.num_classes;
  out.provenance = ds.provenance;
  out.normalization = ds.normalization;
  out.features.reserve(indices.size());
  out.targets.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= ds.size()) throw ShapeError("subset index out of range");
    out.features.push_back(ds.features[i]);
    out.targets.push_back(ds.targets[i]);
  }
  return out;
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

Dataset gen_gaussian_classes(std::size_t classes, std::size_t dim, std::size_t n, double separation,
                             std::uint64_t seed) {
  if (classes < 2) throw DomainError("need at least two classes");
  if (dim < 2) throw DomainError("need at least two feature dimensions");
  if (!(separation > 0.0)) throw DomainError("class separation must be positive");
  Rng rng(seed);

  // Scaled basis vectors are pairwise `separation` apart. With more classes
  // than dimensions, centers are random directions of the same norm.
  const double radius = separation / std::sqrt(2.0);
  std::vector<Vector> centers(classes, Vector(dim, 0.0));
  for (std::size_t k = 0; k < classes; ++k) {
    if (classes <= dim) {
      centers[k][k] = radius;
    } else {
      for (double& v : centers[k]) v = standard_normal(rng);
      const double nrm = lp_norm(centers[k], Norm::l2);
      for (double& v : centers[k]) v *= radius / nrm;
    }
  }

  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % classes;
  shuffle(labels, rng);

  Dataset ds;
  ds.kind = TargetKind::label;
  ds.num_classes = classes;
  ds.features.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector x = centers[labels[i]];
    for (double& v : x) v += standard_normal(rng);
    ds.features.push_back(std::move(x));
    ds.targets.push_back(static_cast<double>(labels[i]));
  }
  ds.normalization = min_max_normalize(ds.features);
  ds.provenance = "gaussian_classes(K=" + std::to_string(classes) + ",d=" + std::to_string(dim) +
                  ",n=" + std::to_string(n) + ",sep=" + format_double(separation) +
                  ",seed=" + std::to_string(seed) + ")";
  return ds;
}

double simulate_rollout(std::span<const double> state, std::size_t horizon, const DynamicsParams& p,
                        Rng& rng) {
  if (state.size() != kDynamicsStateDim) throw ShapeError("dynamics state must have 6 entries");
  double px = state[0], py = state[1], vx = state[2], vy = state[3];
  const double gx = state[4], gy = state[5];
  double total = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const double ux = p.gain_position * (gx - px) - p.gain_velocity * vx;
    const double uy = p.gain_position * (gy - py) - p.gain_velocity * vy;
    const double sd = p.noise_floor + p.noise_gain * std::hypot(ux, uy);
    double ax = ux, ay = uy;
    if (sd > 0.0) {
      ax += sd * standard_normal(rng);
      ay += sd * standard_normal(rng);
    }
    vx += p.dt * ax;
    vy += p.dt * ay;
    px += p.dt * vx;
    py += p.dt * vy;
    total += p.reward_max - std::hypot(px - gx, py - gy);
  }
  return total;
}

Dataset gen_regression_dynamics(std::size_t n, std::size_t horizon, std::uint64_t seed,
                                const DynamicsParams& params) {
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  if (params.rollouts < 1) throw DomainError("need at least one rollout per state");
  Rng rng(seed);
  Dataset ds;
  ds.kind = TargetKind::real;
  ds.features.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector s{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -0.5, 0.5),
                   uniform(rng, -0.5, 0.5), uniform(rng, -1, 1), uniform(rng, -1, 1)};
    double y = 0.0;
    for (std::size_t r = 0; r < params.rollouts; ++r) y += simulate_rollout(s, horizon, params, rng);
    ds.features.push_back(s);
    ds.targets.push_back(y / static_cast<double>(params.rollouts));
  }
  ds.normalization = min_max_normalize(ds.features);
  ds.provenance = "regression_dynamics(n=" + std::to_string(n) + ",k=" + std::to_string(horizon) +
                  ",seed=" + std::to_string(seed) + ")";
  return ds;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool is_feature_name(std::string_view name) {
  return name.size() > 1 && name[0] == 'x' &&
         std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

Dataset parse_csv(std::string_view text, const CsvSchema& schema, std::string_view origin) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.empty()) throw DataError(1, "missing header row");
  const auto header = split_fields(lines[0]);

  auto column = [&](std::string_view name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(1, "missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (is_feature_name(header[c])) feature_cols.push_back(c);
  } else {
    for (const std::string& name : schema.feature_columns) feature_cols.push_back(column(name));
  }
  if (feature_cols.empty()) throw DataError(1, "no feature columns");
  const std::size_t target_col = column(schema.target_column);

  Dataset ds;
  ds.kind = schema.kind;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    std::string_view raw = lines[ln];
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (raw.empty()) continue;
    const auto fields = split_fields(raw);
    if (fields.size() != header.size())
      throw DataError(ln + 1, "expected " + std::to_string(header.size()) + " fields, found " +
                                  std::to_string(fields.size()));
    auto number = [&](std::size_t c) {
      double v = 0.0;
      const std::string_view f = fields[c];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v))
        throw DataError(ln + 1, "bad number '" + std::string(f) + "' in column " + std::string(header[c]));
      return v;
    };
    Vector x;
    x.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) x.push_back(number(c));
    const double y = number(target_col);
    if (schema.kind == TargetKind::label && (y < 0 || y != std::floor(y)))
      throw DataError(ln + 1, "label must be a non-negative integer");
    ds.features.push_back(std::move(x));
    ds.targets.push_back(y);
  }
  if (schema.kind == TargetKind::label) {
    double max_label = -1;
    for (double y : ds.targets) max_label = std::max(max_label, y);
    ds.num_classes = static_cast<std::size_t>(max_label + 1);
  }
  std::ostringstream prov;
  prov << "csv(" << origin << ",fnv1a64=" << std::hex << fnv1a64(text) << ")";
  ds.provenance = prov.str();
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(0, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, path.string());
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  for (std::size_t j = 0; j < ds.dim(); ++j) out += "x" + std::to_string(j) + ",";
  out += "y\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features[i]) out += format_double(v) + ",";
    out += format_double(ds.targets[i]) + "\n";
  }
  return out;
}

void SplitPlan::validate(std::size_t dataset_size) const {
  if (n_splits < 1) throw ConfigError("split plan needs at least one split");
  if (n_cal < 1 || n_test < 1) throw ConfigError("calibration and test sets must be non-empty");
  if (n_train + n_cal + n_test > dataset_size)
    throw ConfigError("split sizes " + std::to_string(n_train + n_cal + n_test) + " exceed dataset size " +
                      std::to_string(dataset_size));
}

Split make_split(std::size_t dataset_size, const SplitPlan& plan, std::size_t index) {
  plan.validate(dataset_size);
  std::vector<std::size_t> perm(dataset_size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(plan.seed, {0x5b1a, index}));
  shuffle(perm, rng);
  Split s;
  auto take = [&](std::size_t from, std::size_t count) {
    return std::vector<std::size_t>(perm.begin() + static_cast<std::ptrdiff_t>(from),
                                    perm.begin() + static_cast<std::ptrdiff_t>(from + count));
  };
  s.train = take(0, plan.n_train);
  s.cal = take(plan.n_train, plan.n_cal);
  s.test = take(plan.n_train + plan.n_cal, plan.n_test);
  return s;
}

std::vector<Split> make_splits(const Dataset& ds, const SplitPlan& plan) {
  std::vector<Split> out;
  out.reserve(plan.n_splits);
  for (std::size_t i = 0; i < plan.n_splits; ++i) out.push_back(make_split(ds.size(), plan, i));
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace vrcp
