#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "relureg/dataset.hpp"
#include "relureg/experiment.hpp"

using namespace relureg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("relureg_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

json small_config(const fs::path& out_dir) {
  return json{{"seed", 9},
              {"marginal", {{"kind", "gaussian"}, {"d", 3}}},
              {"labels", {{"kind", "zeroing_band"}, {"a", 0.3}}},
              {"w_star", {{"kind", "random_unit"}, {"scale", 0.5}}},
              {"m_train", 3000},
              {"m_fresh", 800},
              {"m_holdout", 800},
              {"solver",
               {{"step_size", 0.0625},
                {"weight_bound", 2.0},
                {"max_iters", 120},
                {"use_projection", false}}},
              {"out_dir", out_dir.string()}};
}

}  // namespace

TEST_CASE("config parsing materializes defaults and echoes them") {
  const ExperimentConfig cfg =
      parse_config_json(R"({"marginal": {"d": 3}, "out_dir": "scratch"})");
  CHECK(cfg.seed == 1);
  CHECK(cfg.marginal.kind == MarginalSpec::Kind::gaussian);
  CHECK(cfg.marginal.d == 3);
  CHECK(cfg.labels.kind == LabelModel::Kind::clean);
  CHECK(cfg.w_star.random_unit);
  CHECK(cfg.w_star.scale == 1.0);
  CHECK(cfg.m_train == 10000);
  CHECK(cfg.solver.step_size == 0.0625);
  CHECK(cfg.solver.use_projection);
  CHECK(!cfg.has_ptas);
  CHECK(cfg.eval.model == "zero");

  const json echo = json::parse(config_to_json(cfg));
  CHECK(echo["seed"] == 1);
  CHECK(echo["marginal"]["kind"] == "gaussian");
  CHECK(echo["labels"]["kind"] == "clean");
  CHECK(echo["solver"]["step_size"] == 0.0625);
  CHECK(echo["m_fresh"] == 5000);
  CHECK(!echo.contains("ptas"));

  // the echo itself parses back to the same echo (fixed point)
  const ExperimentConfig cfg2 = parse_config_json(config_to_json(cfg));
  CHECK(config_to_json(cfg2) == config_to_json(cfg));
}

TEST_CASE("config errors name the offending field") {
  CHECK_THROWS_WITH_AS(parse_config_json(R"({"marginal": {"d": 2}})"),
                       doctest::Contains("out_dir"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_json(R"({"marginal": {"kind": "cauchy", "d": 2}, "out_dir": "x"})"),
      doctest::Contains("marginal.kind"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_json(
          R"({"marginal": {"d": 3}, "w_star": {"kind": "explicit", "values": [0.1, 0.2]}, "out_dir": "x"})"),
      doctest::Contains("w_star.values"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_json(
          R"({"marginal": {"d": 2}, "w_star": {"kind": "random_unit", "scale": 1.5}, "out_dir": "x"})"),
      doctest::Contains("w_star.scale"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_json(R"({"marginal": {"d": 0}, "out_dir": "x"})"),
                       doctest::Contains("marginal.d"), ConfigError);
  CHECK_THROWS_AS(parse_config_json("this is not json"), ConfigError);
}

TEST_CASE("overrides rewrite dotted keys") {
  const fs::path dir = fresh_dir("overrides");
  const fs::path cfg_path = dir / "config.json";
  spit(cfg_path, small_config(dir / "out").dump());

  const ExperimentConfig cfg =
      load_config(cfg_path.string(),
                  {"seed=42", "solver.step_size=0.05", "labels.kind=clean",
                   "w_star.scale=0.25", "m_train=500"});
  CHECK(cfg.seed == 42);
  CHECK(cfg.solver.step_size == 0.05);
  CHECK(cfg.labels.kind == LabelModel::Kind::clean);
  CHECK(cfg.w_star.scale == 0.25);
  CHECK(cfg.m_train == 500);

  CHECK_THROWS_WITH_AS(load_config(cfg_path.string(), {"seed"}),
                       doctest::Contains("key=value"), ConfigError);
  CHECK_THROWS_AS(load_config(cfg_path.string(), {"=5"}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json", {}), ConfigError);
}

TEST_CASE("gen writes byte-deterministic datasets") {
  const fs::path dir = fresh_dir("gen");
  ExperimentConfig cfg = parse_config_json(small_config(dir / "out").dump());

  const GenResult r1 = cmd_gen(cfg);
  const std::string train1 = slurp(dir / "out" / "train.csv");
  const std::string holdout1 = slurp(dir / "out" / "holdout.csv");
  const GenResult r2 = cmd_gen(cfg);
  CHECK(slurp(dir / "out" / "train.csv") == train1);
  CHECK(slurp(dir / "out" / "holdout.csv") == holdout1);
  CHECK(r1.opt_ref_train == r2.opt_ref_train);
  CHECK(r1.w_star == r2.w_star);
  CHECK(std::abs(r1.w_star.norm() - 0.5) < 1e-12);

  const json rep = json::parse(slurp(dir / "out" / "gen_report.json"));
  CHECK(rep["opt_ref_train"].get<double>() == r1.opt_ref_train);
  CHECK(rep["config"]["seed"] == 9);
  CHECK(rep["w_star"].size() == 3);

  ExperimentConfig bad = cfg;
  bad.m_train = 0;
  CHECK_THROWS_AS(cmd_gen(bad), InvalidSpec);
}

TEST_CASE("train + eval + ptas pipeline on one directory") {
  const fs::path dir = fresh_dir("pipeline");
  json cj = small_config(dir / "out");
  ExperimentConfig cfg = parse_config_json(cj.dump());
  cmd_gen(cfg);

  const TrainResult tr = cmd_train(cfg);
  CHECK(tr.holdout_loss < 0.05);
  CHECK(tr.dist_to_w_star >= 0.0);  // meta sidecar carries w*
  CHECK(tr.recorded_iters == 121);  // stride 1: every iterate plus the final
  const std::string model1 = slurp(dir / "out" / "model.json");
  cmd_train(cfg);
  CHECK(slurp(dir / "out" / "model.json") == model1);  // byte-deterministic

  const json trep = json::parse(slurp(dir / "out" / "train_report.json"));
  CHECK(trep["metrics"]["holdout_loss"].get<double>() == tr.holdout_loss);
  CHECK(trep["metrics"]["recorded_iters"] == 121);
  // the echoed config is itself a loadable config
  const ExperimentConfig echoed = parse_config_json(trep["config"].dump());
  CHECK(echoed.seed == cfg.seed);
  CHECK(echoed.m_train == cfg.m_train);

  // eval with the zero model reproduces mean y^2 on the holdout
  const double zero_loss = cmd_eval(cfg);
  const Dataset holdout = read_csv((dir / "out" / "holdout.csv").string(), 3);
  CHECK(zero_loss ==
        doctest::Approx(holdout.y.squaredNorm() / holdout.y.size()).epsilon(1e-10));

  // eval with the trained model matches the train report
  ExperimentConfig ecfg = cfg;
  ecfg.eval.model = (dir / "out" / "model.json").string();
  CHECK(cmd_eval(ecfg) == doctest::Approx(tr.holdout_loss).epsilon(1e-12));

  // ptas stage
  cj["ptas"] = {{"eta_accuracy", 0.5}, {"gamma", 1.2}};
  ExperimentConfig pcfg = parse_config_json(cj.dump());
  const PtasResult pr = cmd_ptas(pcfg);
  CHECK(pr.holdout_loss <= pr.const_model_holdout_loss + 0.01);
  const std::string hyp1 = slurp(dir / "out" / "hypothesis.json");
  cmd_ptas(pcfg);
  CHECK(slurp(dir / "out" / "hypothesis.json") == hyp1);

  // per-region losses recombine to the total holdout loss
  const json prep = json::parse(slurp(dir / "out" / "ptas_report.json"));
  const json& regions = prep["metrics"]["regions"];
  double acc = 0.0;
  long total = 0;
  for (const char* name : {"minus", "band", "plus"}) {
    const long count = regions[name]["count"].get<long>();
    total += count;
    if (count > 0) acc += regions[name]["loss"].get<double>() * count;
  }
  CHECK(total == 800);
  CHECK(std::abs(acc / 800.0 - pr.holdout_loss) <= 1e-10);
}

TEST_CASE("train without datasets points back at gen") {
  const fs::path dir = fresh_dir("no_gen");
  ExperimentConfig cfg = parse_config_json(small_config(dir / "out").dump());
  CHECK_THROWS_WITH_AS(cmd_train(cfg), doctest::Contains("train.csv"), ConfigError);
}

TEST_CASE("ptas without a model points back at train") {
  const fs::path dir = fresh_dir("no_train");
  json cj = small_config(dir / "out");
  cj["ptas"] = {{"eta_accuracy", 0.5}};
  ExperimentConfig cfg = parse_config_json(cj.dump());
  cmd_gen(cfg);
  CHECK_THROWS_WITH_AS(cmd_ptas(cfg), doctest::Contains("train command"), ConfigError);
}

TEST_CASE("probe command validates and reports sane values") {
  const fs::path dir = fresh_dir("probe");
  json cj = small_config(dir / "out");
  cj["probe"] = {{"m", 20000}, {"pairs", 5}, {"W", 2.0}, {"min_sep", 0.1}};

  // identity activation: both probe constants sit near 1
  cj["solver"]["activation"] = "identity";
  ExperimentConfig cfg = parse_config_json(cj.dump());
  const ProbeReport rep = cmd_probe(cfg);
  CHECK(rep.mu_hat > 0.9);
  CHECK(rep.mu_hat < 1.1);
  CHECK(rep.beta_hat > 0.9);
  CHECK(rep.beta_hat < 1.1);
  CHECK(rep.mu_per_pair.size() == 5);
  CHECK(rep.beta_per_pair.size() == 5);

  // relu: positive curvature, and the two constants are compatible
  cj["solver"]["activation"] = "relu";
  const ProbeReport rrep = cmd_probe(parse_config_json(cj.dump()));
  CHECK(rrep.mu_hat > 0.0);
  CHECK(rrep.beta_hat <= 1.1 / rrep.mu_hat);

  const json file = json::parse(slurp(dir / "out" / "probe.json"));
  CHECK(file["mu_hat"].get<double>() == rrep.mu_hat);
  CHECK(file["mu_per_pair"].size() == 5);

  cj["probe"]["pairs"] = 0;
  CHECK_THROWS_AS(cmd_probe(parse_config_json(cj.dump())), InvalidSpec);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = fresh_dir("cli");
  const fs::path cfg_path = dir / "config.json";
  json cj = small_config(dir / "out");
  cj["m_train"] = 400;
  cj["m_fresh"] = 200;
  cj["m_holdout"] = 200;
  cj["solver"]["max_iters"] = 30;
  spit(cfg_path, cj.dump());

  std::ostringstream out, err;
  CHECK(run_cli({"gen", "--config", cfg_path.string()}, out, err) == 0);
  CHECK(out.str().find("wrote datasets") != std::string::npos);

  out.str("");
  CHECK(run_cli({"train", "--config", cfg_path.string()}, out, err) == 0);
  CHECK(out.str().find("holdout_loss=") != std::string::npos);

  out.str("");
  CHECK(run_cli({"eval", "--config", cfg_path.string(), "--model", "zero"}, out, err) == 0);
  CHECK(out.str().find("loss=") != std::string::npos);

  // usage and config failures exit 1
  err.str("");
  CHECK(run_cli({"frobnicate"}, out, err) == 1);
  CHECK(err.str().find("usage error") != std::string::npos);
  err.str("");
  CHECK(run_cli({"gen"}, out, err) == 1);  // --config is required
  err.str("");
  CHECK(run_cli({"gen", "--config", "/nonexistent.json"}, out, err) == 1);
  CHECK(err.str().find("config error") != std::string::npos);

  // probe sample size below the probe contract exits 1
  err.str("");
  CHECK(run_cli({"probe", "--config", cfg_path.string(), "--override", "probe.m=100"},
                out, err) == 1);
  CHECK(err.str().find("config error") != std::string::npos);

  // --override flows through to the config
  out.str("");
  err.str("");
  CHECK(run_cli({"gen", "--config", cfg_path.string(), "--override", "m_train=0"}, out,
                err) == 1);
  CHECK(err.str().find("m_train") != std::string::npos);
}

TEST_CASE("bench suite: failing rows do not kill the run") {
  const fs::path dir = fresh_dir("bench");
  json good = small_config(dir / "ignored");
  good["m_train"] = 400;
  good["m_fresh"] = 200;
  good["m_holdout"] = 200;
  good["solver"]["max_iters"] = 30;
  good["ptas"] = {{"eta_accuracy", 0.5}};
  const fs::path good_path = dir / "good.json";
  spit(good_path, good.dump());

  json bad = good;
  bad.erase("ptas");
  bad["labels"]["kind"] = "clean";

  const json suite = {
      {"out_dir", (dir / "suite").string()},
      {"rows",
       json::array(
           {{{"label", "good"}, {"config", good_path.string()}},
            {{"label", "tweaked"},
             {"config", bad},
             {"overrides", {{"seed", 11}, {"m_train", 300}}}},
            {{"label", "broken"},
             {"config", bad},
             {"overrides", json::array({"marginal.kind=cauchy"})}}})}};
  const fs::path suite_path = dir / "suite.json";
  spit(suite_path, suite.dump());

  const std::string csv_path = cmd_bench(suite_path.string());
  const std::string csv = slurp(csv_path);
  std::istringstream lines(csv);
  std::string header, l1, l2, l3;
  std::getline(lines, header);
  std::getline(lines, l1);
  std::getline(lines, l2);
  std::getline(lines, l3);
  CHECK(header ==
        "label,status,opt_ref,loss_const,loss_ptas,ratio_const,ratio_ptas,train_ms,ptas_ms");
  CHECK(l1.substr(0, 8) == "good,ok,");
  CHECK(l2.substr(0, 11) == "tweaked,ok,");
  CHECK(l3.substr(0, 14) == "broken,error: ");
  CHECK(l3.find("marginal.kind") != std::string::npos);
  CHECK(l3.find(',') != std::string::npos);

  // artifacts land under <suite out_dir>/<label>/
  CHECK(fs::exists(dir / "suite" / "good" / "hypothesis.json"));
  CHECK(fs::exists(dir / "suite" / "tweaked" / "model.json"));
  CHECK(!fs::exists(dir / "suite" / "tweaked" / "hypothesis.json"));

  // an empty suite still writes the header
  const json empty = {{"out_dir", (dir / "empty").string()}};
  spit(dir / "empty.json", empty.dump());
  CHECK(slurp(cmd_bench((dir / "empty.json").string())) ==
        "label,status,opt_ref,loss_const,loss_ptas,ratio_const,ratio_ptas,train_ms,ptas_ms\n");
}
