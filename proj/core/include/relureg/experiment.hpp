#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "relureg/dataset.hpp"
#include "relureg/ptas.hpp"
#include "relureg/surrogate.hpp"

// Config-driven experiment harness behind the relu-regress CLI.  Every
// command reads a JSON config (plus dotted-key overrides), writes its primary
// artifacts plus a report echoing the fully resolved config, and is
// byte-deterministic given (config, seed) apart from wall-time fields.

namespace relureg {

struct WStarSpec {
  bool random_unit = true;
  double scale = 1.0;   // for random_unit
  Vec values;           // for explicit vectors
};

struct ProbeSpec {
  Eigen::Index m = 100000;
  int pairs = 100;
  double W = 2.0;
  double min_sep = 0.1;
};

struct EvalSpec {
  std::string model = "zero";  // "zero" or a model.json path
  std::string data;            // dataset CSV; default <out_dir>/holdout.csv
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  MarginalSpec marginal;
  LabelModel labels;
  WStarSpec w_star;
  Eigen::Index m_train = 10000;
  Eigen::Index m_fresh = 5000;
  Eigen::Index m_holdout = 5000;
  SolverConfig solver;
  Activation activation = Activation::relu();
  bool has_ptas = false;
  PtasConfig ptas;
  ProbeSpec probe;
  EvalSpec eval;
  std::string out_dir;
};

// Parses + validates, materializing defaults; ConfigError messages name the
// offending dotted field.
ExperimentConfig parse_config_json(const std::string& json_text);
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides);

// Resolved-config echo used in every report.
std::string config_to_json(const ExperimentConfig& cfg);

// Commands.  Each returns the primary metric(s) it computed so tests can
// drive them without re-parsing report files.
struct GenResult {
  double opt_ref_train = 0.0;
  double opt_ref_holdout = 0.0;
  Vec w_star;
};
GenResult cmd_gen(const ExperimentConfig& cfg);

struct TrainResult {
  LinearModel selected;
  double holdout_loss = 0.0;
  double fresh_chow_distance = 0.0;  // ||chow_model - chow_true|| on the fresh set
  double dist_to_w_star = -1.0;      // -1 when w* unknown
  std::int64_t selected_iter = 0;
  std::size_t recorded_iters = 0;
  double wall_time_ms = 0.0;
};
TrainResult cmd_train(const ExperimentConfig& cfg);

struct PtasResult {
  PiecewiseHypothesis hypothesis;
  double holdout_loss = 0.0;
  double const_model_holdout_loss = 0.0;
  double wall_time_ms = 0.0;
};
PtasResult cmd_ptas(const ExperimentConfig& cfg);

double cmd_eval(const ExperimentConfig& cfg);

struct ProbeReport {
  double mu_hat = 0.0;
  double beta_hat = 0.0;
  std::vector<double> mu_per_pair;
  std::vector<double> beta_per_pair;
};
ProbeReport cmd_probe(const ExperimentConfig& cfg);

// Suite file: {"out_dir": ..., "rows": [{"label", "config": <path|object>,
// "overrides": {dotted: value}}]}.  Writes <out_dir>/bench.csv; a failing row
// records its error and the suite continues.
std::string cmd_bench(const std::string& suite_path);

// argv-style entry point shared by the binary and the tests; returns the
// process exit code (0 ok, 1 usage/config, 2 numeric).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relureg
