#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "uar_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(UAR_CLI_PATH) + " " + args + " >" + (kWork / "stdout.txt").string() + " 2>" +
                          (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string out() { return slurp(kWork / "stdout.txt"); }

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
  ~Workdir() { fs::remove_all(kWork); }
};

}  // namespace

TEST_CASE("timing subcommand and usage exit codes") {
  Workdir w;
  CHECK(run("timing") == 0);
  CHECK(out().find("chirp_length") != std::string::npos);
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("gen --rooms Rz:1 --out " + (kWork / "ds").string()) == 2);

  std::ofstream(kWork / "close.cfg") << "d_min_m = 0.2\n";
  CHECK(run("--config " + (kWork / "close.cfg").string() + " timing") == 2);
  CHECK(out().find("FAIL") != std::string::npos);
  std::ofstream(kWork / "bad.cfg") << "nonsense = 1\n";
  CHECK(run("--config " + (kWork / "bad.cfg").string() + " timing") == 2);
}

TEST_CASE("data errors exit with 3") {
  Workdir w;
  CHECK(run("train --manifest " + (kWork / "missing.jsonl").string() + " --out " + (kWork / "m.bin").string()) == 3);
  std::ofstream(kWork / "junk.bin") << "not a model";
  std::ofstream(kWork / "empty.jsonl") << "";
  CHECK(run("eval --manifest " + (kWork / "empty.jsonl").string() + " --model " + (kWork / "junk.bin").string()) == 3);
}

TEST_CASE("gen, extract, train, eval, xval and report run end to end") {
  Workdir w;
  const auto ds = kWork / "ds";
  const std::string m = " --manifest " + (ds / "manifest.jsonl").string();
  REQUIRE(run("--seed 3 --out " + ds.string() + " gen --rooms Ra:1,Rc:2 --instances 2 --classes sitting,walking") == 0);
  CHECK(fs::exists(ds / "manifest.jsonl"));
  CHECK(fs::exists(ds / "sensing.cfg"));

  CHECK(run("extract" + m + " --kinds F_renv") == 0);
  CHECK(fs::exists(ds / "features" / "Ra-S1-sitting-000.F_renv.f32"));
  CHECK(fs::exists(ds / "features" / "Ra-S1-sitting-000.F_renv.hdr"));

  const auto model = kWork / "model.bin";
  CHECK(run("--out " + model.string() + " train" + m + " --kind F_renv --rooms Rc --epochs 5") == 0);
  CHECK(fs::exists(model));
  CHECK(run("eval" + m + " --model " + model.string() + " --rooms Ra --format csv") == 0);
  CHECK(out().find("accuracy,") != std::string::npos);
  // A model can only be trained with both classes present.
  CHECK(run("--out " + model.string() + " train" + m + " --kind F_renv --rooms Ra --subjects S9") != 0);

  std::ofstream(kWork / "conds.json")
      << R"({"conditions": [{"name": "cross", "train": {"rooms": ["Rc"]}, "eval": {"rooms": ["Ra"]}}]})";
  const auto xout = kWork / "xval";
  CHECK(run("--config " + (kWork / "conds.json").string() + " --out " + xout.string() + " xval" + m +
            " --kinds F_renv,F_ir --epochs 5") == 0);
  CHECK(fs::exists(xout / "cross_F_renv.csv"));
  CHECK(fs::exists(xout / "summary.txt"));
  CHECK(run("report --format summary " + (xout / "cross_F_renv.csv").string() + " " + (xout / "cross_F_ir.csv").string()) == 0);
  CHECK(out().find("F_ir") != std::string::npos);
  CHECK(run("report " + (kWork / "nope.csv").string()) == 3);
}
