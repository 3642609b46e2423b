#include "relureg/experiment.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace relureg {

namespace {

std::string to_shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

MarginalSpec::Kind parse_marginal_kind(const std::string& s) {
  if (s == "gaussian") return MarginalSpec::Kind::gaussian;
  if (s == "uniform_ball_isotropic") return MarginalSpec::Kind::uniform_ball_isotropic;
  if (s == "laplace_product_isotropic")
    return MarginalSpec::Kind::laplace_product_isotropic;
  throw ConfigError("marginal.kind: unknown value '" + s + "'");
}

LabelModel::Kind parse_label_kind(const std::string& s) {
  if (s == "clean") return LabelModel::Kind::clean;
  if (s == "bounded_additive") return LabelModel::Kind::bounded_additive;
  if (s == "zeroing_band") return LabelModel::Kind::zeroing_band;
  if (s == "fraction_adversarial") return LabelModel::Kind::fraction_adversarial;
  throw ConfigError("labels.kind: unknown value '" + s + "'");
}

Activation parse_activation(const json& solver) {
  const std::string kind = solver.value("activation", std::string("relu"));
  if (kind == "relu") return Activation::relu();
  if (kind == "identity") return Activation::identity();
  if (kind == "leaky_relu") return Activation::leaky_relu(solver.value("leaky_alpha", 0.01));
  throw ConfigError("solver.activation: unknown value '" + kind + "'");
}

template <typename T>
T field_as(const json& j, const char* dotted) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(dotted) + ": wrong type");
  }
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  ExperimentConfig cfg;
  if (j.contains("seed")) cfg.seed = field_as<std::uint64_t>(j["seed"], "seed");

  if (j.contains("marginal")) {
    const json& m = j["marginal"];
    if (m.contains("kind"))
      cfg.marginal.kind = parse_marginal_kind(field_as<std::string>(m["kind"], "marginal.kind"));
    if (m.contains("d")) cfg.marginal.d = field_as<int>(m["d"], "marginal.d");
  }
  if (cfg.marginal.d <= 0) throw ConfigError("marginal.d: must be a positive integer");

  if (j.contains("labels")) {
    const json& l = j["labels"];
    if (l.contains("kind"))
      cfg.labels.kind = parse_label_kind(field_as<std::string>(l["kind"], "labels.kind"));
    cfg.labels.rho = l.value("rho", 0.0);
    cfg.labels.b = l.value("b", 0.0);
    cfg.labels.a = l.value("a", 0.0);
    cfg.labels.label_lo = l.value("label_lo", 0.0);
  }

  if (j.contains("w_star")) {
    const json& w = j["w_star"];
    const std::string kind = w.value("kind", std::string("random_unit"));
    if (kind == "random_unit") {
      cfg.w_star.random_unit = true;
      cfg.w_star.scale = w.value("scale", 1.0);
      if (!(cfg.w_star.scale > 0.0) || cfg.w_star.scale > 1.0)
        throw ConfigError("w_star.scale: must lie in (0,1]");
    } else if (kind == "explicit") {
      cfg.w_star.random_unit = false;
      if (!w.contains("values")) throw ConfigError("w_star.values: required for explicit w*");
      const auto vals = field_as<std::vector<double>>(w["values"], "w_star.values");
      cfg.w_star.values = Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    } else {
      throw ConfigError("w_star.kind: unknown value '" + kind + "'");
    }
  }

  cfg.m_train = j.value("m_train", std::int64_t{10000});
  cfg.m_fresh = j.value("m_fresh", std::int64_t{5000});
  cfg.m_holdout = j.value("m_holdout", std::int64_t{5000});

  if (j.contains("solver")) {
    const json& s = j["solver"];
    cfg.solver.step_size = s.value("step_size", cfg.solver.step_size);
    cfg.solver.weight_bound = s.value("weight_bound", cfg.solver.weight_bound);
    cfg.solver.max_iters = s.value("max_iters", std::int64_t{cfg.solver.max_iters});
    cfg.solver.grad_tol = s.value("grad_tol", cfg.solver.grad_tol);
    cfg.solver.use_projection = s.value("use_projection", cfg.solver.use_projection);
    cfg.solver.record_stride = s.value("record_stride", std::int64_t{0});
    cfg.activation = parse_activation(s);
  }

  if (j.contains("ptas") && !j["ptas"].is_null()) {
    cfg.has_ptas = true;
    const json& p = j["ptas"];
    cfg.ptas.eta_accuracy = p.value("eta_accuracy", cfg.ptas.eta_accuracy);
    if (p.contains("gamma") && !p["gamma"].is_string())
      cfg.ptas.gamma = field_as<double>(p["gamma"], "ptas.gamma");
    if (p.contains("degree")) cfg.ptas.degree = field_as<int>(p["degree"], "ptas.degree");
    cfg.ptas.degree_cap = p.value("degree_cap", cfg.ptas.degree_cap);
    if (p.contains("opt_estimate") && !p["opt_estimate"].is_string())
      cfg.ptas.opt_estimate = field_as<double>(p["opt_estimate"], "ptas.opt_estimate");
    cfg.ptas.epsilon = p.value("epsilon", cfg.ptas.epsilon);
  }

  if (j.contains("probe")) {
    const json& p = j["probe"];
    cfg.probe.m = p.value("m", std::int64_t{cfg.probe.m});
    cfg.probe.pairs = p.value("pairs", cfg.probe.pairs);
    cfg.probe.W = p.value("W", cfg.probe.W);
    cfg.probe.min_sep = p.value("min_sep", cfg.probe.min_sep);
  }

  if (j.contains("eval")) {
    const json& e = j["eval"];
    cfg.eval.model = e.value("model", cfg.eval.model);
    cfg.eval.data = e.value("data", cfg.eval.data);
  }

  if (!j.contains("out_dir")) throw ConfigError("out_dir: required");
  cfg.out_dir = field_as<std::string>(j["out_dir"], "out_dir");
  if (cfg.out_dir.empty()) throw ConfigError("out_dir: must be nonempty");

  if (!cfg.w_star.random_unit && cfg.w_star.values.size() != cfg.marginal.d)
    throw ConfigError("w_star.values: dimension must match marginal.d");
  return cfg;
}

namespace {

void apply_override(json& root, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + kv + "': expected key=value");
  const std::string key = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // unquoted strings pass through verbatim
  }
  json* cur = &root;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (part.empty()) throw ConfigError("override '" + kv + "': empty key segment");
    if (dot == std::string::npos) {
      (*cur)[part] = value;
      break;
    }
    cur = &((*cur)[part]);
    pos = dot + 1;
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  json j = load_json_file(path);
  for (const auto& kv : overrides) apply_override(j, kv);
  return parse_config_json(j.dump());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  const char* mk = cfg.marginal.kind == MarginalSpec::Kind::gaussian
                       ? "gaussian"
                       : (cfg.marginal.kind == MarginalSpec::Kind::uniform_ball_isotropic
                              ? "uniform_ball_isotropic"
                              : "laplace_product_isotropic");
  j["marginal"] = {{"kind", mk}, {"d", cfg.marginal.d}};
  const char* lk = "clean";
  switch (cfg.labels.kind) {
    case LabelModel::Kind::clean: lk = "clean"; break;
    case LabelModel::Kind::bounded_additive: lk = "bounded_additive"; break;
    case LabelModel::Kind::zeroing_band: lk = "zeroing_band"; break;
    case LabelModel::Kind::fraction_adversarial: lk = "fraction_adversarial"; break;
  }
  j["labels"] = {{"kind", lk},
                 {"rho", cfg.labels.rho},
                 {"b", cfg.labels.b},
                 {"a", cfg.labels.a},
                 {"label_lo", cfg.labels.label_lo}};
  if (cfg.w_star.random_unit) {
    j["w_star"] = {{"kind", "random_unit"}, {"scale", cfg.w_star.scale}};
  } else {
    j["w_star"] = {{"kind", "explicit"},
                   {"values", std::vector<double>(cfg.w_star.values.data(),
                                                  cfg.w_star.values.data() +
                                                      cfg.w_star.values.size())}};
  }
  j["m_train"] = static_cast<std::int64_t>(cfg.m_train);
  j["m_fresh"] = static_cast<std::int64_t>(cfg.m_fresh);
  j["m_holdout"] = static_cast<std::int64_t>(cfg.m_holdout);
  j["solver"] = {{"step_size", cfg.solver.step_size},
                 {"weight_bound", cfg.solver.weight_bound},
                 {"max_iters", static_cast<std::int64_t>(cfg.solver.max_iters)},
                 {"grad_tol", cfg.solver.grad_tol},
                 {"use_projection", cfg.solver.use_projection},
                 {"record_stride", static_cast<std::int64_t>(cfg.solver.record_stride)},
                 {"activation", cfg.activation.name()},
                 {"leaky_alpha", cfg.activation.alpha}};
  if (cfg.has_ptas) {
    j["ptas"] = {{"eta_accuracy", cfg.ptas.eta_accuracy},
                 {"gamma", cfg.ptas.gamma},
                 {"degree", cfg.ptas.degree},
                 {"degree_cap", cfg.ptas.degree_cap},
                 {"opt_estimate", cfg.ptas.opt_estimate},
                 {"epsilon", cfg.ptas.epsilon}};
  }
  j["probe"] = {{"m", static_cast<std::int64_t>(cfg.probe.m)},
                {"pairs", cfg.probe.pairs},
                {"W", cfg.probe.W},
                {"min_sep", cfg.probe.min_sep}};
  j["eval"] = {{"model", cfg.eval.model}, {"data", cfg.eval.data}};
  j["out_dir"] = cfg.out_dir;
  return j.dump(2);
}

namespace {

Vec draw_w_star(const ExperimentConfig& cfg) {
  if (!cfg.w_star.random_unit) return cfg.w_star.values;
  Rng rng = Rng(cfg.seed).substream(99);
  Vec dir = gaussian_vec(cfg.marginal.d, rng);
  double n = dir.norm();
  while (n < 1e-12) {
    dir = gaussian_vec(cfg.marginal.d, rng);
    n = dir.norm();
  }
  return dir * (cfg.w_star.scale / n);
}

std::string dataset_path(const ExperimentConfig& cfg, const char* name) {
  return (fs::path(cfg.out_dir) / name).string();
}

Dataset read_required_csv(const ExperimentConfig& cfg, const char* name) {
  const std::string path = dataset_path(cfg, name);
  if (!fs::exists(path))
    throw ConfigError(std::string(name) + " not found in out_dir '" + cfg.out_dir +
                      "'; run the gen command first");
  return read_csv(path, cfg.marginal.d);
}

std::optional<Vec> read_meta_w_star(const std::string& csv_path) {
  const std::string meta = csv_path + ".meta.json";
  if (!fs::exists(meta)) return std::nullopt;
  const json j = load_json_file(meta);
  if (!j.contains("w_star")) return std::nullopt;
  const auto vals = j["w_star"].get<std::vector<double>>();
  return Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

LinearModel read_model(const std::string& path, const ExperimentConfig& cfg) {
  if (!fs::exists(path))
    throw ConfigError("model file not found at '" + path + "'; run the train command first");
  const json j = load_json_file(path);
  LinearModel m;
  const auto w = j.at("w").get<std::vector<double>>();
  m.w = Eigen::Map<const Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
  const std::string kind = j.at("activation").at("kind").get<std::string>();
  if (kind == "relu")
    m.activation = Activation::relu();
  else if (kind == "identity")
    m.activation = Activation::identity();
  else
    m.activation = Activation::leaky_relu(j.at("activation").at("alpha").get<double>());
  (void)cfg;
  return m;
}

std::string model_to_json(const LinearModel& m) {
  json j;
  j["w"] = std::vector<double>(m.w.data(), m.w.data() + m.w.size());
  j["activation"] = {{"kind", m.activation.name()}, {"alpha", m.activation.alpha}};
  return j.dump(2);
}

}  // namespace

GenResult cmd_gen(const ExperimentConfig& cfg) {
  if (cfg.m_train < 1) throw InvalidSpec("m_train: must be >= 1");
  if (cfg.m_fresh < 1) throw InvalidSpec("m_fresh: must be >= 1");
  if (cfg.m_holdout < 1) throw InvalidSpec("m_holdout: must be >= 1");
  fs::create_directories(cfg.out_dir);

  const Vec w_star = draw_w_star(cfg);
  Rng root(cfg.seed);

  Rng r_train = root.substream(10);
  auto [train, gt_train] = generate(cfg.marginal, cfg.labels, w_star, cfg.m_train, r_train);
  Rng r_fresh = root.substream(11);
  auto [fresh, gt_fresh] = generate(cfg.marginal, cfg.labels, w_star, cfg.m_fresh, r_fresh);
  Rng r_holdout = root.substream(12);
  auto [holdout, gt_holdout] =
      generate(cfg.marginal, cfg.labels, w_star, cfg.m_holdout, r_holdout);

  write_csv(train, dataset_path(cfg, "train.csv"));
  write_csv(fresh, dataset_path(cfg, "fresh.csv"));
  write_csv(holdout, dataset_path(cfg, "holdout.csv"));

  json rep;
  rep["config"] = json::parse(config_to_json(cfg));
  rep["w_star"] = std::vector<double>(w_star.data(), w_star.data() + w_star.size());
  rep["opt_ref_train"] = gt_train.opt_ref;
  rep["opt_ref_fresh"] = gt_fresh.opt_ref;
  rep["opt_ref_holdout"] = gt_holdout.opt_ref;
  write_text_file(dataset_path(cfg, "gen_report.json"), rep.dump(2) + "\n");

  return {gt_train.opt_ref, gt_holdout.opt_ref, w_star};
}

TrainResult cmd_train(const ExperimentConfig& cfg) {
  const Dataset train = read_required_csv(cfg, "train.csv");
  const Dataset fresh = read_required_csv(cfg, "fresh.csv");
  const Dataset holdout = read_required_csv(cfg, "holdout.csv");

  Rng rng = Rng(cfg.seed).substream(30);
  TrainTrace trace = pgd_train(train, cfg.activation, cfg.solver, rng);
  const LinearModel selected = select_min_gradient(trace, fresh);

  TrainResult res;
  res.selected = selected;
  res.holdout_loss = square_loss(selected, holdout);
  res.fresh_chow_distance =
      chow_distance(chow_model(selected, fresh), chow_true(fresh));
  res.selected_iter = trace.selected_iter;
  res.recorded_iters = trace.iterates.size();
  res.wall_time_ms = trace.wall_time_ms;
  if (const auto w_star = read_meta_w_star(dataset_path(cfg, "train.csv")))
    res.dist_to_w_star = (selected.w - *w_star).norm();

  write_text_file(dataset_path(cfg, "model.json"), model_to_json(selected) + "\n");
  write_text_file(dataset_path(cfg, "trace.json"), trace_to_json(trace) + "\n");

  json rep;
  rep["config"] = json::parse(config_to_json(cfg));
  rep["metrics"] = {
      {"holdout_loss", res.holdout_loss},
      {"fresh_chow_distance", res.fresh_chow_distance},
      {"dist_to_w_star", res.dist_to_w_star >= 0.0 ? json(res.dist_to_w_star) : json()},
      {"selected_iter", res.selected_iter},
      {"recorded_iters", static_cast<std::int64_t>(res.recorded_iters)},
      {"wall_time_ms", res.wall_time_ms}};
  write_text_file(dataset_path(cfg, "train_report.json"), rep.dump(2) + "\n");
  return res;
}

PtasResult cmd_ptas(const ExperimentConfig& cfg) {
  const Dataset train = read_required_csv(cfg, "train.csv");
  const Dataset holdout = read_required_csv(cfg, "holdout.csv");
  const LinearModel const_model = read_model(dataset_path(cfg, "model.json"), cfg);

  const auto t0 = std::chrono::steady_clock::now();
  PtasResult res;
  res.hypothesis = ptas_train(train, holdout, cfg.ptas, const_model);
  res.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  res.holdout_loss = piecewise_square_loss(res.hypothesis, holdout);
  res.const_model_holdout_loss = square_loss(const_model, holdout);

  write_text_file(dataset_path(cfg, "hypothesis.json"),
                  hypothesis_to_json(res.hypothesis) + "\n");

  // per-region holdout diagnostics
  const PartitionIndices idx =
      partition(res.hypothesis.partition.w, res.hypothesis.partition.t, holdout);
  auto region_loss = [&](const std::vector<Eigen::Index>& which) -> json {
    if (which.empty()) return json();
    double acc = 0.0;
    for (const Eigen::Index i : which) {
      const double e = eval_piecewise(res.hypothesis, holdout.X.row(i)) - holdout.y[i];
      acc += e * e;
    }
    return acc / static_cast<double>(which.size());
  };
  double l1 = 0.0;
  for (double c : res.hypothesis.band_poly.coeffs) l1 += std::abs(c);

  json rep;
  rep["config"] = json::parse(config_to_json(cfg));
  rep["metrics"] = {
      {"holdout_loss", res.holdout_loss},
      {"const_model_holdout_loss", res.const_model_holdout_loss},
      {"t", res.hypothesis.partition.t},
      {"opt_estimate_used", res.hypothesis.provenance.opt_estimate_used},
      {"gamma_used", res.hypothesis.provenance.gamma_used},
      {"degree_used", res.hypothesis.provenance.degree_used},
      {"band_l1", l1},
      {"band_l1_ok",
       l1 <= std::pow(4.0, res.hypothesis.provenance.degree_used + 1)},
      {"regions",
       {{"minus", {{"count", static_cast<std::int64_t>(idx.minus.size())},
                   {"loss", region_loss(idx.minus)}}},
        {"band", {{"count", static_cast<std::int64_t>(idx.band.size())},
                  {"loss", region_loss(idx.band)}}},
        {"plus", {{"count", static_cast<std::int64_t>(idx.plus.size())},
                  {"loss", region_loss(idx.plus)}}}}},
      {"wall_time_ms", res.wall_time_ms}};
  write_text_file(dataset_path(cfg, "ptas_report.json"), rep.dump(2) + "\n");
  return res;
}

double cmd_eval(const ExperimentConfig& cfg) {
  const std::string data_path =
      cfg.eval.data.empty() ? dataset_path(cfg, "holdout.csv") : cfg.eval.data;
  if (!fs::exists(data_path))
    throw ConfigError("eval.data: dataset not found at '" + data_path + "'");
  const Dataset ds = read_csv(data_path, cfg.marginal.d);

  double loss = 0.0;
  if (cfg.eval.model == "zero") {
    LinearModel zero{Vec::Zero(cfg.marginal.d), cfg.activation};
    loss = square_loss(zero, ds);
  } else {
    const std::string model_path =
        cfg.eval.model.empty() ? dataset_path(cfg, "model.json") : cfg.eval.model;
    loss = square_loss(read_model(model_path, cfg), ds);
  }

  fs::create_directories(cfg.out_dir);
  json rep;
  rep["config"] = json::parse(config_to_json(cfg));
  rep["metrics"] = {{"loss", loss}, {"data", data_path}, {"model", cfg.eval.model}};
  write_text_file(dataset_path(cfg, "eval_report.json"), rep.dump(2) + "\n");
  return loss;
}

ProbeReport cmd_probe(const ExperimentConfig& cfg) {
  Rng rng_sc = Rng(cfg.seed).substream(40);
  Rng rng_cl = Rng(cfg.seed).substream(40);  // same stream => same pairs
  const ProbeResult sc =
      strong_convexity_probe(cfg.activation, cfg.marginal, cfg.probe.m, cfg.probe.pairs,
                             cfg.probe.W, cfg.probe.min_sep, rng_sc);
  const ProbeResult cl =
      chow_learnability_probe(cfg.activation, cfg.marginal, cfg.probe.m, cfg.probe.pairs,
                              cfg.probe.W, cfg.probe.min_sep, rng_cl);

  fs::create_directories(cfg.out_dir);
  json rep;
  rep["config"] = json::parse(config_to_json(cfg));
  rep["mu_hat"] = sc.value;
  rep["beta_hat"] = cl.value;
  rep["mu_per_pair"] = sc.per_pair;
  rep["beta_per_pair"] = cl.per_pair;
  write_text_file(dataset_path(cfg, "probe.json"), rep.dump(2) + "\n");
  return {sc.value, cl.value, sc.per_pair, cl.per_pair};
}

std::string cmd_bench(const std::string& suite_path) {
  const json suite = load_json_file(suite_path);
  if (!suite.contains("out_dir")) throw ConfigError("suite.out_dir: required");
  const std::string out_dir = suite["out_dir"].get<std::string>();
  fs::create_directories(out_dir);
  const json rows = suite.value("rows", json::array());

  std::string csv =
      "label,status,opt_ref,loss_const,loss_ptas,ratio_const,ratio_ptas,train_ms,ptas_ms\n";

  for (const json& row : rows) {
    const std::string label = row.value("label", std::string("row"));
    std::string status = "ok";
    double opt_ref = 0.0, loss_const = 0.0, loss_ptas = -1.0;
    double train_ms = 0.0, ptas_ms = 0.0;
    bool ran_ptas = false;
    try {
      if (!row.contains("config")) throw ConfigError(label + ": row.config required");
      json cj = row["config"].is_string()
                    ? load_json_file(row["config"].get<std::string>())
                    : row["config"];
      if (row.contains("overrides")) {
        const json& ov = row["overrides"];
        if (ov.is_array())
          for (const auto& kv : ov) apply_override(cj, kv.get<std::string>());
        else if (ov.is_object())
          for (auto it = ov.begin(); it != ov.end(); ++it)
            apply_override(cj, it.key() + "=" + it.value().dump());
        else
          throw ConfigError(label + ": row.overrides must be an array or object");
      }
      cj["out_dir"] = (fs::path(out_dir) / label).string();
      const ExperimentConfig cfg = parse_config_json(cj.dump());

      const GenResult gen = cmd_gen(cfg);
      const TrainResult train = cmd_train(cfg);
      opt_ref = gen.opt_ref_holdout;
      loss_const = train.holdout_loss;
      train_ms = train.wall_time_ms;
      if (cfg.has_ptas) {
        const PtasResult ptas = cmd_ptas(cfg);
        loss_ptas = ptas.holdout_loss;
        ptas_ms = ptas.wall_time_ms;
        ran_ptas = true;
      }
    } catch (const std::exception& e) {
      status = std::string("error: ") + e.what();
      for (char& c : status)
        if (c == ',' || c == '\n') c = ';';
    }

    csv += label;
    csv += ',';
    csv += status;
    if (status == "ok") {
      const double denom = std::max(opt_ref, 1e-6);
      csv += ',' + to_shortest(opt_ref);
      csv += ',' + to_shortest(loss_const);
      csv += ',' + (ran_ptas ? to_shortest(loss_ptas) : std::string());
      csv += ',' + to_shortest(loss_const / denom);
      csv += ',' + (ran_ptas ? to_shortest(loss_ptas / denom) : std::string());
      csv += ',' + to_shortest(train_ms);
      csv += ',' + (ran_ptas ? to_shortest(ptas_ms) : std::string());
    } else {
      csv += ",,,,,,,";
    }
    csv += '\n';
  }

  const std::string csv_path = (fs::path(out_dir) / "bench.csv").string();
  write_text_file(csv_path, csv);
  return csv_path;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"agnostic ReLU / GLM regression toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string eval_model, eval_data;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config path")->required();
    sub->add_option("--override", overrides, "dotted-key override key=value");
  };
  CLI::App* gen = app.add_subcommand("gen", "generate datasets");
  CLI::App* train = app.add_subcommand("train", "gradient-descent training");
  CLI::App* ptas = app.add_subcommand("ptas", "piecewise refinement stage");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a model on a dataset");
  CLI::App* probe = app.add_subcommand("probe", "strong-convexity / Chow probes");
  CLI::App* bench = app.add_subcommand("bench", "run a benchmark suite");
  for (CLI::App* sub : {gen, train, ptas, eval, probe, bench}) add_common(sub);
  eval->add_option("--model", eval_model, "'zero' or a model.json path");
  eval->add_option("--data", eval_data, "dataset CSV path");

  std::vector<const char*> argv;
  argv.push_back("relu-regress");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (app.got_subcommand(bench)) {
      const std::string csv = cmd_bench(config_path);
      out << "wrote " << csv << "\n";
      return 0;
    }
    ExperimentConfig cfg = load_config(config_path, overrides);
    if (app.got_subcommand(gen)) {
      const GenResult r = cmd_gen(cfg);
      out << "wrote datasets to " << cfg.out_dir
          << " opt_ref_train=" << to_shortest(r.opt_ref_train)
          << " opt_ref_holdout=" << to_shortest(r.opt_ref_holdout) << "\n";
    } else if (app.got_subcommand(train)) {
      const TrainResult r = cmd_train(cfg);
      out << "wrote model to " << cfg.out_dir
          << " holdout_loss=" << to_shortest(r.holdout_loss) << "\n";
    } else if (app.got_subcommand(ptas)) {
      const PtasResult r = cmd_ptas(cfg);
      out << "wrote hypothesis to " << cfg.out_dir
          << " holdout_loss=" << to_shortest(r.holdout_loss)
          << " const_loss=" << to_shortest(r.const_model_holdout_loss) << "\n";
    } else if (app.got_subcommand(eval)) {
      if (!eval_model.empty()) cfg.eval.model = eval_model;
      if (!eval_data.empty()) cfg.eval.data = eval_data;
      out << "loss=" << to_shortest(cmd_eval(cfg)) << "\n";
    } else if (app.got_subcommand(probe)) {
      const ProbeReport r = cmd_probe(cfg);
      out << "mu_hat=" << to_shortest(r.mu_hat)
          << " beta_hat=" << to_shortest(r.beta_hat) << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace relureg
