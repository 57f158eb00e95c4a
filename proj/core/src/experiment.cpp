#include "vrcp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vrcp/attacks.hpp"
#include "vrcp/conformal.hpp"
#include "vrcp/error.hpp"
#include "vrcp/model_io.hpp"
#include "vrcp/parallel.hpp"
#include "vrcp/robust.hpp"

namespace vrcp {

using nlohmann::json;

const char* to_string(Task task) noexcept {
  return task == Task::classification ? "classification" : "regression";
}

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::vanilla: return "vanilla";
    case Method::vrcp_i: return "vrcp_i";
    case Method::vrcp_c: return "vrcp_c";
  }
  return "?";
}

const char* to_string(AttackKind kind) noexcept {
  switch (kind) {
    case AttackKind::none: return "none";
    case AttackKind::fgsm: return "fgsm";
    case AttackKind::pgd: return "pgd";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  if (text == "vanilla") return Method::vanilla;
  if (text == "vrcp_i") return Method::vrcp_i;
  if (text == "vrcp_c") return Method::vrcp_c;
  throw ConfigError("unknown method '" + std::string(text) + "' (expected vanilla, vrcp_i or vrcp_c)");
}

void ExperimentConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (epsilons.empty()) throw ConfigError("epsilon list is empty");
  for (double e : epsilons)
    if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("epsilon values must be finite and >= 0");
  if (methods.empty()) throw ConfigError("no methods selected");
  if (std::set<Method>(methods.begin(), methods.end()).size() != methods.size())
    throw ConfigError("duplicate method");
  if (attack.norm && *attack.norm != norm)
    throw ConfigError("attack norm " + to_string(*attack.norm) + " differs from verifier norm " + to_string(norm) +
                      "; the guarantee holds per norm");
  if (attack.kind != AttackKind::none) {
    if (norm == Norm::l1) throw ConfigError("l1 attacks are not supported; use attack kind none");
    if (attack.kind == AttackKind::fgsm && norm != Norm::linf) throw ConfigError("FGSM requires the l_inf norm");
    if (attack.steps < 1) throw ConfigError("attack steps must be >= 1");
    if (attack.step_size && !(*attack.step_size > 0.0)) throw ConfigError("attack step size must be positive");
  }
  const bool classification = task == Task::classification;
  switch (dataset.kind) {
    case DatasetSpec::Kind::gaussian_classes:
      if (!classification) throw ConfigError("gaussian_classes data needs the classification task");
      if (dataset.classes < 2 || dataset.dim < 2 || !(dataset.separation > 0.0))
        throw ConfigError("gaussian_classes needs classes >= 2, dim >= 2, separation > 0");
      break;
    case DatasetSpec::Kind::dynamics:
      if (classification) throw ConfigError("dynamics data needs the regression task");
      if (dataset.horizon < 1) throw ConfigError("dynamics horizon must be >= 1");
      break;
    case DatasetSpec::Kind::csv:
      if (dataset.path.empty()) throw ConfigError("csv dataset needs a path");
      break;
  }
  if (dataset.kind != DatasetSpec::Kind::csv &&
      splits.n_train + splits.n_cal + splits.n_test > dataset.n)
    throw ConfigError("split sizes exceed the generated dataset size");
  if (splits.n_splits < 1 || splits.n_cal < 1 || splits.n_test < 1)
    throw ConfigError("need n_splits, n_cal and n_test >= 1");
  if (classification) {
    if (model.path_lo || model.path_hi) throw ConfigError("path_lo/path_hi are for regression models");
    if (!model.path && splits.n_train < 1) throw ConfigError("training needs n_train >= 1");
  } else {
    if (model.path) throw ConfigError("regression uses path_lo and path_hi, not path");
    if (model.path_lo.has_value() != model.path_hi.has_value())
      throw ConfigError("give both path_lo and path_hi or neither");
    if (!model.path_lo && splits.n_train < 1) throw ConfigError("training needs n_train >= 1");
  }
  model.train.validate();
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

LayerKind parse_activation(const std::string& s) {
  if (s == "relu") return LayerKind::relu;
  if (s == "leaky_relu") return LayerKind::leaky_relu;
  throw ConfigError("unknown activation '" + s + "'");
}

ExperimentConfig from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, {"task", "dataset", "model", "methods", "verifier", "norm", "epsilons", "alpha", "attack",
                     "splits", "output", "trace", "timing"},
                 "config");
  ExperimentConfig c;
  const std::string task = j.at("task").get<std::string>();
  if (task == "classification") {
    c.task = Task::classification;
  } else if (task == "regression") {
    c.task = Task::regression;
  } else {
    throw ConfigError("unknown task '" + task + "'");
  }

  const json& d = j.at("dataset");
  reject_unknown(d, {"kind", "n", "classes", "dim", "separation", "horizon", "params", "path", "seed"}, "dataset");
  const std::string kind = d.at("kind").get<std::string>();
  if (kind == "gaussian_classes") {
    c.dataset.kind = DatasetSpec::Kind::gaussian_classes;
  } else if (kind == "dynamics") {
    c.dataset.kind = DatasetSpec::Kind::dynamics;
  } else if (kind == "csv") {
    c.dataset.kind = DatasetSpec::Kind::csv;
  } else {
    throw ConfigError("unknown dataset kind '" + kind + "'");
  }
  read(d, "n", c.dataset.n);
  read(d, "classes", c.dataset.classes);
  read(d, "dim", c.dataset.dim);
  read(d, "separation", c.dataset.separation);
  read(d, "horizon", c.dataset.horizon);
  read(d, "path", c.dataset.path);
  if (d.contains("seed")) c.dataset.seed = d.at("seed").get<std::uint64_t>();
  if (d.contains("params")) {
    const json& p = d.at("params");
    reject_unknown(p, {"dt", "gain_position", "gain_velocity", "noise_floor", "noise_gain", "reward_max", "rollouts"},
                   "dataset.params");
    DynamicsParams& dp = c.dataset.dynamics;
    read(p, "dt", dp.dt);
    read(p, "gain_position", dp.gain_position);
    read(p, "gain_velocity", dp.gain_velocity);
    read(p, "noise_floor", dp.noise_floor);
    read(p, "noise_gain", dp.noise_gain);
    read(p, "reward_max", dp.reward_max);
    read(p, "rollouts", dp.rollouts);
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m, {"hidden", "activation", "leaky_slope", "train", "path", "path_lo", "path_hi"}, "model");
    read(m, "hidden", c.model.hidden);
    if (m.contains("activation")) c.model.activation = parse_activation(m.at("activation").get<std::string>());
    read(m, "leaky_slope", c.model.leaky_slope);
    if (m.contains("path")) c.model.path = m.at("path").get<std::string>();
    if (m.contains("path_lo")) c.model.path_lo = m.at("path_lo").get<std::string>();
    if (m.contains("path_hi")) c.model.path_hi = m.at("path_hi").get<std::string>();
    if (m.contains("train")) {
      const json& t = m.at("train");
      reject_unknown(t, {"epochs", "batch_size", "learning_rate", "momentum", "weight_decay"}, "model.train");
      read(t, "epochs", c.model.train.epochs);
      read(t, "batch_size", c.model.train.batch_size);
      read(t, "learning_rate", c.model.train.learning_rate);
      read(t, "momentum", c.model.train.momentum);
      read(t, "weight_decay", c.model.train.weight_decay);
    }
  }

  if (j.contains("methods")) {
    c.methods.clear();
    for (const json& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
  }
  if (j.contains("verifier")) c.verifier = parse_bound_method(j.at("verifier").get<std::string>());
  if (j.contains("norm")) {
    const json& n = j.at("norm");
    c.norm = parse_norm(n.is_string() ? n.get<std::string>() : n.dump());
  }
  read(j, "epsilons", c.epsilons);
  read(j, "alpha", c.alpha);
  if (j.contains("attack")) {
    const json& a = j.at("attack");
    reject_unknown(a, {"kind", "steps", "step_size", "random_start", "norm"}, "attack");
    const std::string ak = a.at("kind").get<std::string>();
    if (ak == "none") {
      c.attack.kind = AttackKind::none;
    } else if (ak == "fgsm") {
      c.attack.kind = AttackKind::fgsm;
    } else if (ak == "pgd") {
      c.attack.kind = AttackKind::pgd;
    } else {
      throw ConfigError("unknown attack kind '" + ak + "'");
    }
    read(a, "steps", c.attack.steps);
    if (a.contains("step_size")) c.attack.step_size = a.at("step_size").get<double>();
    read(a, "random_start", c.attack.random_start);
    if (a.contains("norm")) {
      const json& n = a.at("norm");
      c.attack.norm = parse_norm(n.is_string() ? n.get<std::string>() : n.dump());
    }
  }
  const json& s = j.at("splits");
  reject_unknown(s, {"n_train", "n_cal", "n_test", "n_splits", "seed"}, "splits");
  read(s, "n_train", c.splits.n_train);
  read(s, "n_cal", c.splits.n_cal);
  read(s, "n_test", c.splits.n_test);
  read(s, "n_splits", c.splits.n_splits);
  read(s, "seed", c.splits.seed);
  read(j, "output", c.output);
  read(j, "trace", c.trace);
  read(j, "timing", c.timing);
  return c;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  ExperimentConfig cfg;
  try {
    cfg = from_json(json::parse(json_text.begin(), json_text.end()));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig read_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string dump_experiment_config(const ExperimentConfig& c) {
  json j;
  j["task"] = to_string(c.task);
  json d;
  switch (c.dataset.kind) {
    case DatasetSpec::Kind::gaussian_classes:
      d = {{"kind", "gaussian_classes"}, {"n", c.dataset.n}, {"classes", c.dataset.classes},
           {"dim", c.dataset.dim}, {"separation", c.dataset.separation}};
      break;
    case DatasetSpec::Kind::dynamics: {
      const DynamicsParams& p = c.dataset.dynamics;
      d = {{"kind", "dynamics"}, {"n", c.dataset.n}, {"horizon", c.dataset.horizon},
           {"params", {{"dt", p.dt}, {"gain_position", p.gain_position}, {"gain_velocity", p.gain_velocity},
                       {"noise_floor", p.noise_floor}, {"noise_gain", p.noise_gain},
                       {"reward_max", p.reward_max}, {"rollouts", p.rollouts}}}};
      break;
    }
    case DatasetSpec::Kind::csv:
      d = {{"kind", "csv"}, {"path", c.dataset.path}};
      break;
  }
  if (c.dataset.seed) d["seed"] = *c.dataset.seed;
  j["dataset"] = d;
  json m = {{"hidden", c.model.hidden},
            {"activation", to_string(c.model.activation)},
            {"leaky_slope", c.model.leaky_slope},
            {"train", {{"epochs", c.model.train.epochs}, {"batch_size", c.model.train.batch_size},
                       {"learning_rate", c.model.train.learning_rate}, {"momentum", c.model.train.momentum},
                       {"weight_decay", c.model.train.weight_decay}}}};
  if (c.model.path) m["path"] = *c.model.path;
  if (c.model.path_lo) m["path_lo"] = *c.model.path_lo;
  if (c.model.path_hi) m["path_hi"] = *c.model.path_hi;
  j["model"] = m;
  json methods = json::array();
  for (Method me : c.methods) methods.push_back(to_string(me));
  j["methods"] = methods;
  j["verifier"] = to_string(c.verifier);
  j["norm"] = to_string(c.norm);
  j["epsilons"] = c.epsilons;
  j["alpha"] = c.alpha;
  json a = {{"kind", to_string(c.attack.kind)}, {"steps", c.attack.steps}, {"random_start", c.attack.random_start}};
  if (c.attack.step_size) a["step_size"] = *c.attack.step_size;
  if (c.attack.norm) a["norm"] = to_string(*c.attack.norm);
  j["attack"] = a;
  j["splits"] = {{"n_train", c.splits.n_train}, {"n_cal", c.splits.n_cal}, {"n_test", c.splits.n_test},
                 {"n_splits", c.splits.n_splits}, {"seed", c.splits.seed}};
  j["output"] = c.output;
  j["trace"] = c.trace;
  j["timing"] = c.timing;
  return j.dump();
}

std::size_t ExperimentReport::containment_violations() const noexcept {
  std::size_t v = 0;
  for (const ContainmentSummary& c : containment) v += c.violations;
  return v;
}

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(Clock::now()) {}
  double ms() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
  }

 private:
  bool enabled_;
  Clock::time_point start_;
};

constexpr std::size_t kMaxExamples = 5;

struct SplitOutcome {
  std::vector<ReportRow> rows;
  std::vector<ContainmentSummary> containment;
  std::vector<SizeCounts> size_counts;
  std::vector<TracePoint> trace;
  double accuracy = 0.0;
};

struct Context {
  const ExperimentConfig& cfg;
  const Dataset& data;
  std::uint64_t master;
};

double critical_bound(const CriticalValue& q) {
  return q.is_infinite() ? std::numeric_limits<double>::infinity() : q.value();
}

Vector attack_point(const Context& ctx, const AttackObjective& objective, const Vector& x, double eps,
                    std::size_t split, std::size_t e, std::size_t point) {
  const AttackSpec& a = ctx.cfg.attack;
  if (a.kind == AttackKind::none || eps == 0.0) return x;
  AttackConfig ac;
  ac.norm = ctx.cfg.norm;
  ac.epsilon = eps;
  ac.steps = a.steps;
  ac.step_size = a.step_size.value_or(2.5 * eps / static_cast<double>(a.steps));
  ac.random_start = a.random_start;
  ac.seed = derive_seed(ctx.master, {split, e, point, 0xa77ac});
  return a.kind == AttackKind::fgsm ? fgsm(objective, x, ac) : pgd(objective, x, ac);
}

Architecture architecture(const ExperimentConfig& cfg, std::size_t input_dim, std::size_t output_dim,
                          bool softmax) {
  Architecture arch;
  arch.input_dim = input_dim;
  arch.hidden = cfg.model.hidden;
  arch.output_dim = output_dim;
  arch.activation = cfg.model.activation;
  arch.leaky_slope = cfg.model.leaky_slope;
  arch.softmax_output = softmax;
  return arch;
}

// Records one method's results at one epsilon and folds the containment check
// against the vanilla regions into the outcome.
template <typename Region>
void record(SplitOutcome& out, const Context& ctx, Method method, double eps, std::size_t split,
            const std::vector<Region>& regions, const std::vector<Region>& vanilla,
            const std::vector<bool>& covered, const std::vector<double>& sizes, const std::vector<double>& scores,
            double bound, double wall_ms) {
  const std::string name = to_string(method);
  const auto n = static_cast<double>(regions.size());
  double hits = 0.0;
  double size_total = 0.0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    hits += covered[i] ? 1.0 : 0.0;
    size_total += sizes[i];
  }
  if (std::find(ctx.cfg.methods.begin(), ctx.cfg.methods.end(), method) != ctx.cfg.methods.end())
    out.rows.push_back({name, eps, ctx.cfg.norm, split, hits / n, size_total / n, wall_ms});

  if (method != Method::vanilla) {
    ContainmentSummary summary{name, eps, 0, 0, {}};
    const ContainmentReport rep = containment_check(std::span<const Region>(vanilla), std::span<const Region>(regions));
    summary.checked = rep.checked;
    summary.violations = rep.violations.size();
    for (const ContainmentViolation& v : rep.violations) {
      if (summary.examples.size() >= kMaxExamples) break;
      summary.examples.push_back("split " + std::to_string(split) + " point " + std::to_string(v.point) + ": " +
                                 v.detail);
    }
    out.containment.push_back(std::move(summary));
  }

  if constexpr (std::is_same_v<Region, PredictionSet>) {
    SizeCounts counts{name, eps, split, std::vector<std::size_t>(ctx.data.num_classes + 1, 0)};
    for (const PredictionSet& s : regions) ++counts.counts[s.size()];
    out.size_counts.push_back(std::move(counts));
  }

  if (ctx.cfg.trace)
    for (std::size_t i = 0; i < regions.size(); ++i)
      out.trace.push_back({name, eps, split, i, scores[i], bound, describe(regions[i]), covered[i], sizes[i]});
}

bool selected(const ExperimentConfig& cfg, Method m) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

SplitOutcome run_classification_split(const Context& ctx, std::size_t split_index) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Split split = make_split(ctx.data.size(), cfg.splits, split_index);
  const Dataset cal = subset(ctx.data, split.cal);
  const Dataset test = subset(ctx.data, split.test);

  Network net = [&] {
    if (cfg.model.path) return read_model_file(*cfg.model.path).network;
    TrainConfig tc = cfg.model.train;
    tc.seed = derive_seed(ctx.master, {split_index, 0x7a1e});
    const Dataset train = subset(ctx.data, split.train);
    return train_classifier(train, architecture(cfg, ctx.data.dim(), ctx.data.num_classes, true), tc).network;
  }();
  if (net.input_dim() != ctx.data.dim() || net.output_dim() != ctx.data.num_classes)
    throw ConfigError("classifier shape does not match the dataset");

  SplitOutcome out;
  out.accuracy = accuracy(net, test);

  const Stopwatch cal_watch(cfg.timing);
  std::vector<std::size_t> cal_labels(cal.size());
  std::vector<double> cal_scores(cal.size());
  for (std::size_t i = 0; i < cal.size(); ++i) {
    cal_labels[i] = cal.label(i);
    cal_scores[i] = score_class(forward(net, cal.features[i]), cal_labels[i]);
  }
  const CriticalValue q = conformal_quantile(cal_scores, cfg.alpha);
  const double vanilla_cal_ms = cal_watch.ms();

  const std::size_t n = test.size();
  for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
    const double eps = cfg.epsilons[e];
    std::vector<Vector> attacked(n);
    std::vector<Vector> probs(n);
    for (std::size_t i = 0; i < n; ++i) {
      attacked[i] = attack_point(ctx, classification_objective(net, test.label(i)), test.features[i], eps,
                                 split_index, e, i);
      probs[i] = forward(net, attacked[i]);
    }

    const Stopwatch van_watch(cfg.timing);
    std::vector<PredictionSet> vanilla(n);
    std::vector<bool> covered(n);
    std::vector<double> sizes(n), scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      vanilla[i] = vanilla_set_class(probs[i], q);
      covered[i] = vanilla[i].contains(test.label(i));
      sizes[i] = static_cast<double>(vanilla[i].size());
      scores[i] = score_class(probs[i], test.label(i));
    }
    record(out, ctx, Method::vanilla, eps, split_index, vanilla, vanilla, covered, sizes, scores,
           critical_bound(q), vanilla_cal_ms + van_watch.ms());

    if (selected(cfg, Method::vrcp_i)) {
      const Stopwatch watch(cfg.timing);
      std::vector<PredictionSet> robust(n);
      for (std::size_t i = 0; i < n; ++i) {
        const Vector best = best_case_scores_class(net, PerturbationBall(attacked[i], eps, cfg.norm), cfg.verifier);
        robust[i] = set_from_scores(best, q);
        covered[i] = robust[i].contains(test.label(i));
        sizes[i] = static_cast<double>(robust[i].size());
        scores[i] = best[test.label(i)];
      }
      record(out, ctx, Method::vrcp_i, eps, split_index, robust, vanilla, covered, sizes, scores,
             critical_bound(q), vanilla_cal_ms + watch.ms());
    }

    if (selected(cfg, Method::vrcp_c)) {
      const Stopwatch watch(cfg.timing);
      const CriticalValue robust_q =
          vrcp_c_calibrate_class(net, cal.features, cal_labels, eps, cfg.norm, cfg.verifier, cfg.alpha);
      std::vector<PredictionSet> robust(n);
      for (std::size_t i = 0; i < n; ++i) {
        robust[i] = vrcp_c_set_class(probs[i], robust_q);
        covered[i] = robust[i].contains(test.label(i));
        sizes[i] = static_cast<double>(robust[i].size());
        scores[i] = score_class(probs[i], test.label(i));
      }
      record(out, ctx, Method::vrcp_c, eps, split_index, robust, vanilla, covered, sizes, scores,
             critical_bound(robust_q), watch.ms());
    }
  }
  return out;
}

SplitOutcome run_regression_split(const Context& ctx, std::size_t split_index) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Split split = make_split(ctx.data.size(), cfg.splits, split_index);
  const Dataset cal = subset(ctx.data, split.cal);
  const Dataset test = subset(ctx.data, split.test);

  auto [net_lo, net_hi] = [&]() -> std::pair<Network, Network> {
    if (cfg.model.path_lo)
      return {read_model_file(*cfg.model.path_lo).network, read_model_file(*cfg.model.path_hi).network};
    TrainConfig tc = cfg.model.train;
    tc.seed = derive_seed(ctx.master, {split_index, 0x7a1e});
    const Dataset train = subset(ctx.data, split.train);
    QuantilePair pair = train_quantile_pair(train, architecture(cfg, ctx.data.dim(), 1, false), cfg.alpha, tc);
    return {std::move(pair.lo.network), std::move(pair.hi.network)};
  }();
  for (const Network* m : {&net_lo, &net_hi})
    if (m->input_dim() != ctx.data.dim() || m->output_dim() != 1 || m->has_softmax_output())
      throw ConfigError("quantile network shape does not match the dataset");

  SplitOutcome out;
  const Stopwatch cal_watch(cfg.timing);
  std::vector<double> cal_scores(cal.size());
  for (std::size_t i = 0; i < cal.size(); ++i)
    cal_scores[i] = score_cqr(forward(net_lo, cal.features[i])[0], forward(net_hi, cal.features[i])[0],
                              cal.targets[i]);
  const CriticalValue q = conformal_quantile(cal_scores, cfg.alpha);
  const double vanilla_cal_ms = cal_watch.ms();

  const std::size_t n = test.size();
  for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
    const double eps = cfg.epsilons[e];
    std::vector<Vector> attacked(n);
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      attacked[i] = attack_point(ctx, cqr_objective(net_lo, net_hi, test.targets[i]), test.features[i], eps,
                                 split_index, e, i);
      lo[i] = forward(net_lo, attacked[i])[0];
      hi[i] = forward(net_hi, attacked[i])[0];
    }

    const Stopwatch van_watch(cfg.timing);
    std::vector<PredictionInterval> vanilla(n);
    std::vector<bool> covered(n);
    std::vector<double> sizes(n), scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      vanilla[i] = cqr_interval(lo[i], hi[i], q);
      covered[i] = vanilla[i].contains(test.targets[i]);
      sizes[i] = vanilla[i].length();
      scores[i] = score_cqr(lo[i], hi[i], test.targets[i]);
    }
    record(out, ctx, Method::vanilla, eps, split_index, vanilla, vanilla, covered, sizes, scores,
           critical_bound(q), vanilla_cal_ms + van_watch.ms());

    if (selected(cfg, Method::vrcp_i)) {
      const Stopwatch watch(cfg.timing);
      std::vector<PredictionInterval> robust(n);
      for (std::size_t i = 0; i < n; ++i) {
        const PerturbationBall ball(attacked[i], eps, cfg.norm);
        const OutputBounds blo = compute_bounds(net_lo, ball, cfg.verifier);
        const OutputBounds bhi = compute_bounds(net_hi, ball, cfg.verifier);
        robust[i] = cqr_interval(blo.lower[0], bhi.upper[0], q);
        covered[i] = robust[i].contains(test.targets[i]);
        sizes[i] = robust[i].length();
        scores[i] = score_cqr(blo.lower[0], bhi.upper[0], test.targets[i]);
      }
      record(out, ctx, Method::vrcp_i, eps, split_index, robust, vanilla, covered, sizes, scores,
             critical_bound(q), vanilla_cal_ms + watch.ms());
    }

    if (selected(cfg, Method::vrcp_c)) {
      const Stopwatch watch(cfg.timing);
      const CriticalValue robust_q = vrcp_c_calibrate_regress(net_lo, net_hi, cal.features, cal.targets, eps,
                                                              cfg.norm, cfg.verifier, cfg.alpha);
      std::vector<PredictionInterval> robust(n);
      for (std::size_t i = 0; i < n; ++i) {
        robust[i] = cqr_interval(lo[i], hi[i], robust_q);
        covered[i] = robust[i].contains(test.targets[i]);
        sizes[i] = robust[i].length();
        scores[i] = score_cqr(lo[i], hi[i], test.targets[i]);
      }
      record(out, ctx, Method::vrcp_c, eps, split_index, robust, vanilla, covered, sizes, scores,
             critical_bound(robust_q), watch.ms());
    }
  }
  return out;
}

Dataset build_dataset(const ExperimentConfig& cfg, std::uint64_t master) {
  const std::uint64_t seed = cfg.dataset.seed.value_or(derive_seed(master, {0xda7a}));
  switch (cfg.dataset.kind) {
    case DatasetSpec::Kind::gaussian_classes:
      return gen_gaussian_classes(cfg.dataset.classes, cfg.dataset.dim, cfg.dataset.n, cfg.dataset.separation, seed);
    case DatasetSpec::Kind::dynamics:
      return gen_regression_dynamics(cfg.dataset.n, cfg.dataset.horizon, seed, cfg.dataset.dynamics);
    case DatasetSpec::Kind::csv: {
      CsvSchema schema;
      schema.kind = cfg.task == Task::classification ? TargetKind::label : TargetKind::real;
      return load_csv(cfg.dataset.path, schema);
    }
  }
  throw ConfigError("unknown dataset kind");
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const std::uint64_t master = options.seed.value_or(cfg.splits.seed);
  ExperimentConfig effective = cfg;
  effective.splits.seed = master;

  const Dataset data = build_dataset(effective, master);
  data.validate();
  effective.splits.validate(data.size());

  const Context ctx{effective, data, master};
  std::vector<SplitOutcome> outcomes(effective.splits.n_splits);
  parallel_for(outcomes.size(), options.threads, [&](std::size_t s) {
    try {
      outcomes[s] = cfg.task == Task::classification ? run_classification_split(ctx, s)
                                                      : run_regression_split(ctx, s);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      throw Error("split " + std::to_string(s) + " failed: " + ex.what());
    }
  });

  ExperimentReport report;
  report.task = cfg.task;
  report.alpha = cfg.alpha;
  report.norm = cfg.norm;
  report.num_classes = data.num_classes;
  report.n_splits = effective.splits.n_splits;
  report.provenance = data.provenance + "; verifier=" + to_string(cfg.verifier) +
                      "; attack=" + to_string(cfg.attack.kind) + "; master_seed=" + std::to_string(master);

  // Containment is summarized per (method, epsilon) across splits.
  std::map<std::pair<std::string, double>, ContainmentSummary> merged;
  std::vector<std::pair<std::string, double>> order;
  for (SplitOutcome& o : outcomes) {
    report.rows.insert(report.rows.end(), o.rows.begin(), o.rows.end());
    report.size_counts.insert(report.size_counts.end(), o.size_counts.begin(), o.size_counts.end());
    report.trace.insert(report.trace.end(), o.trace.begin(), o.trace.end());
    if (cfg.task == Task::classification) report.model_accuracy.push_back(o.accuracy);
    for (ContainmentSummary& c : o.containment) {
      const auto key = std::make_pair(c.method, c.epsilon);
      auto [it, inserted] = merged.try_emplace(key, ContainmentSummary{c.method, c.epsilon, 0, 0, {}});
      if (inserted) order.push_back(key);
      it->second.checked += c.checked;
      it->second.violations += c.violations;
      for (std::string& ex : c.examples)
        if (it->second.examples.size() < kMaxExamples) it->second.examples.push_back(std::move(ex));
    }
  }
  for (const auto& key : order) report.containment.push_back(merged.at(key));
  return report;
}

}  // namespace vrcp
