#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ufcnn/checkpoint.hpp"
#include "ufcnn/market.hpp"
#include "ufcnn/tracking.hpp"
#include "ufcnn/trainer.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = UFCNN_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ufcnn_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string run_capture(const std::string& args, const std::string& out_file) {
  const std::string cmd = kCli + " " + args + " >" + out_file + " 2>&1";
  std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(run("") == 1);
  CHECK(run("no-such-command") == 1);
  CHECK(run("train --task tracking") == 1);           // missing --out-dir
  CHECK(run("train --task bogus --out-dir /tmp/x") == 1);
  CHECK(run("backtest") == 1);                        // needs --ticks or --synth
}

TEST_CASE("gradcheck passes and exits 0") {
  TempDir tmp;
  const std::string out = run_capture("gradcheck --seed 1", tmp.str("grad.txt"));
  CHECK(out.find("PASS") != std::string::npos);
  CHECK(out.find("FAIL") == std::string::npos);
  CHECK(run("gradcheck --seed 1") == 0);
}

TEST_CASE("quote synthesis, labeling, and backtest round-trip through files") {
  TempDir tmp;
  const std::string quotes = tmp.str("q.csv");
  const std::string labeled = tmp.str("l.csv");
  const std::string report = tmp.str("report.csv");
  REQUIRE(run("synth-quotes --out " + quotes + " --T 300 --seed 3") == 0);
  auto ticks = ufcnn::market::load_ticks(quotes);
  CHECK(ticks.size() == 300);

  REQUIRE(run("label-trades --ticks " + quotes + " --out " + labeled) == 0);
  auto [lticks, actions] = ufcnn::market::load_labeled_ticks(labeled);
  CHECK(lticks.size() == 300);
  CHECK(actions.size() == 300);
  // labels are reproducible from the same ticks and default costs
  auto oracle = ufcnn::market::optimal_actions(lticks, ufcnn::market::SimParams{});
  CHECK(oracle.actions == actions);

  REQUIRE(run("backtest --ticks " + quotes + " --out " + report + " --seed 5") == 0);
  std::ifstream rep(report);
  std::string header;
  std::getline(rep, header);
  CHECK(header == "strategy,profit_per_step,accuracy");

  // missing tick file is a data error
  CHECK(run("label-trades --ticks " + tmp.str("none.csv") + " --out " + labeled) == 2);
}

TEST_CASE("tracking dataset generation and zero-iteration training") {
  TempDir tmp;
  const std::string ds_dir = tmp.str("ds");
  REQUIRE(run("gen-tracking --out-dir " + ds_dir +
              " --n-train 4 --n-val 2 --n-test 2 --T 100 --seed 7") == 0);
  auto ds = ufcnn::tracking::load_dataset(ds_dir);
  CHECK(ds.data.train.size() == 4);
  CHECK(ds.data.val.size() == 2);
  CHECK(ds.seq_length == 100);

  const std::string run_dir = tmp.str("run0");
  REQUIRE(run("train --task tracking --data-dir " + ds_dir + " --out-dir " + run_dir +
              " --levels 2 --filters 4 --iters 0") == 0);
  ufcnn::Network net = ufcnn::load_checkpoint(run_dir + "/model.ckpt.json");
  CHECK(net.config().levels == 2);
  CHECK(ufcnn::load_history_csv(run_dir + "/history.csv").empty());

  const std::string run_dir2 = tmp.str("run1");
  REQUIRE(run("train --task tracking --data-dir " + ds_dir + " --out-dir " + run_dir2 +
              " --levels 1 --filters 4 --iters 20 --eval-every 10 --seed 9") == 0);
  CHECK(ufcnn::load_history_csv(run_dir2 + "/history.csv").size() == 2);
  const std::string eval_out = run_capture(
      "eval --task tracking --checkpoint " + run_dir2 + "/model.ckpt.json --data-dir " +
          ds_dir + " --split val",
      tmp.str("eval.txt"));
  CHECK(eval_out.find("mse_per_step,") != std::string::npos);
}

TEST_CASE("options can come from a config file") {
  TempDir tmp;
  const std::string conf = tmp.str("conf.ini");
  const std::string from_conf = tmp.str("c.csv");
  std::ofstream(conf) << "seed=21\n[synth-quotes]\nout=" << from_conf << "\nT=120\n";
  REQUIRE(run("--config " + conf + " synth-quotes") == 0);

  const std::string direct = tmp.str("d.csv");
  REQUIRE(run("synth-quotes --out " + direct + " --T 120 --seed 21") == 0);
  std::ifstream fa(from_conf), fb(direct);
  std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ca == cb);
}

TEST_CASE("commands are deterministic under --seed") {
  TempDir tmp;
  const std::string a = tmp.str("a.csv");
  const std::string b = tmp.str("b.csv");
  REQUIRE(run("synth-quotes --out " + a + " --T 200 --seed 11") == 0);
  REQUIRE(run("synth-quotes --out " + b + " --T 200 --seed 11") == 0);
  std::ifstream fa(a), fb(b);
  std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ca == cb);

  const std::string da = tmp.str("da");
  const std::string db = tmp.str("db");
  REQUIRE(run("gen-tracking --out-dir " + da + " --n-train 2 --n-val 1 --n-test 1 --T 50 --seed 4") == 0);
  REQUIRE(run("gen-tracking --out-dir " + db + " --n-train 2 --n-val 1 --n-test 1 --T 50 --seed 4") == 0);
  std::ifstream ta(da + "/train.csv"), tb(db + "/train.csv");
  std::string sa((std::istreambuf_iterator<char>(ta)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(tb)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
}

TEST_CASE("small ablation grid runs and writes its tables") {
  TempDir tmp;
  const std::string out_dir = tmp.str("abl");
  REQUIRE(run("ablation --levels 1 --filters 4 --variant both --n-train 3 --n-val 2 "
              "--T 60 --iters 10 --eval-every 5 --seed 3 --out-dir " + out_dir) == 0);
  std::ifstream ufcnn_csv(out_dir + "/ablation_ufcnn.csv");
  std::ifstream fcn_csv(out_dir + "/ablation_fcn.csv");
  REQUIRE(ufcnn_csv.good());
  REQUIRE(fcn_csv.good());
  std::string uline, fline;
  std::getline(ufcnn_csv, uline);
  CHECK(uline == "levels,4");
  // level-1 rows of the two variants are bit-identical
  std::getline(ufcnn_csv, uline);
  std::getline(fcn_csv, fline);
  std::getline(fcn_csv, fline);
  CHECK(uline == fline);
}
