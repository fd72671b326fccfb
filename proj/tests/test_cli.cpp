#include <cstdlib>

#include <doctest.h>
#include <json.hpp>

#include "app_support.hpp"
#include "litlvm/app.hpp"

using namespace litlvm;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string err;
};

Outcome run(const testing::TempDir& dir, const std::string& args) {
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + LITLVM_CLI + "\" " + args + " > \"" + (dir / "stdout.txt").string() +
                          "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Outcome out;
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  out.err = testing::slurp(err);
  return out;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

std::string fixture(const char* name) { return q(testing::fixture(name)); }

void write_config(const std::filesystem::path& path, const std::string& text) { write_text(path, text); }

std::string error_kind_of(const Outcome& o) { return json::parse(o.err)["error"]["kind"].get<std::string>(); }

}  // namespace

TEST_CASE("fit, predict and evaluate end to end") {
  const testing::TempDir dir("cli");
  write_config(dir / "fit.json", R"({"task": "regression", "method": "lit_lvm",
      "penalty": {"lambda2": 0.01, "lambda_l": 0.1},
      "optimizer": {"learning_rate": 0.05, "max_epochs": 200},
      "data": {"path": ")" + testing::fixture("regression.csv").string() + R"("}})");
  const std::string out = " --out-dir " + q(dir.path());
  REQUIRE(run(dir, "fit --config " + q(dir / "fit.json") + out).code == 0);

  const SavedModel m = SavedModel::load(dir / "model.json");
  CHECK(m.standardization.has_value());

  REQUIRE(run(dir, "--out-dir " + q(dir / "a") + " predict --model " + q(dir / "model.json") + " --data " +
                       fixture("regression.csv"))
              .code == 0);
  REQUIRE(run(dir, "--out-dir " + q(dir / "b") + " predict --model " + q(dir / "model.json") + " --data " +
                       fixture("regression_permuted.csv"))
              .code == 0);
  CHECK(testing::slurp(dir / "a" / "predictions.csv") == testing::slurp(dir / "b" / "predictions.csv"));

  REQUIRE(run(dir, "evaluate --model " + q(dir / "model.json") + " --data " + fixture("regression.csv") +
                       " --metrics rmse" + out)
              .code == 0);
  const json report = json::parse(testing::slurp(dir / "eval_report.json"));
  CHECK(report["metrics"]["rmse"]["mean"].get<double>() >= 0.0);

  REQUIRE(run(dir, "--standardize off fit --config " + q(dir / "fit.json") + " --out-dir " + q(dir / "raw"))
              .code == 0);
  CHECK_FALSE(SavedModel::load(dir / "raw" / "model.json").standardization.has_value());

  REQUIRE(run(dir, "export-latent --model " + q(dir / "model.json") + out).code == 0);
  CHECK(std::filesystem::exists(dir / "latent_coordinates.csv"));
}

TEST_CASE("exit codes and error reports") {
  const testing::TempDir dir("cli_err");
  const std::string out = " --out-dir " + q(dir.path());

  write_config(dir / "bad.json", R"({"penalty": {"lambda9": 1}})");
  Outcome o = run(dir, "fit --config " + q(dir / "bad.json") + out);
  CHECK(o.code == 2);
  CHECK(error_kind_of(o) == "config");
  CHECK(json::parse(o.err)["error"]["message"].get<std::string>().find("lambda9") != std::string::npos);

  o = run(dir, "fit --no-such-flag");
  CHECK(o.code == 2);
  CHECK(run(dir, "").code == 2);

  write_config(dir / "en.json", R"({"method": "elastic_net", "optimizer": {"max_epochs": 20},
      "data": {"path": ")" + testing::fixture("regression.csv").string() + R"("}})");
  REQUIRE(run(dir, "fit --config " + q(dir / "en.json") + out).code == 0);
  o = run(dir, "export-latent --model " + q(dir / "model.json") + out);
  CHECK(o.code == 2);
  CHECK(error_kind_of(o) == "state");

  write_text(dir / "holes.csv", "age,dose,weight,marker,site,y\n1,2,3,4,5,6\n1,2,,4,5,6\n");
  o = run(dir, "predict --model " + q(dir / "model.json") + " --data " + q(dir / "holes.csv") + out);
  CHECK(o.code == 3);
  CHECK(error_kind_of(o) == "data");

  write_config(dir / "cls.json", R"({"task": "classification", "optimizer": {"max_epochs": 20},
      "data": {"path": ")" + testing::fixture("classification.csv").string() + R"(", "target": "label"}})");
  REQUIRE(run(dir, "fit --config " + q(dir / "cls.json") + out).code == 0);
  write_text(dir / "one_class.csv", "f1,f2,f3,f4,label\n1,2,3,4,1\n0,1,0,1,1\n");
  o = run(dir, "evaluate --model " + q(dir / "model.json") + " --data " + q(dir / "one_class.csv") +
                   " --target label --metrics auc" + out);
  CHECK(o.code == 3);

  write_config(dir / "diverge.json", R"({"optimizer": {"learning_rate": 1e300, "max_epochs": 50},
      "data": {"path": ")" + testing::fixture("regression.csv").string() + R"("}})");
  o = run(dir, "--standardize off fit --config " + q(dir / "diverge.json") + out);
  CHECK(o.code == 4);
  CHECK(error_kind_of(o) == "divergence");
}

TEST_CASE("simulate through the binary matches the library") {
  const testing::TempDir dir("cli_sim");
  write_config(dir / "sim.json", R"({"simulation": {"generator": "logistic", "n": 40, "p": 6}})");
  REQUIRE(run(dir, "--seed 11 simulate --config " + q(dir / "sim.json") + " --out-dir " + q(dir.path())).code ==
          0);
  SimConfig sc;
  sc.n = 40;
  sc.p = 6;
  sc.seed = 11;
  sc.lvm_kind = LvmKind::latent_distance;
  const Dataset d = gen_logistic(sc).first;
  DatasetColumns cols;
  cols.task = TaskKind::classification;
  const Dataset back = load_dataset(dir / "dataset.csv", cols);
  CHECK(back.X == d.X);
  CHECK(back.y == d.y);
}
