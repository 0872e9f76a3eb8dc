#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "nofrills/checkpoint.hpp"
#include "nofrills/synthetic.hpp"
#include "test_util.hpp"

using namespace nofrills;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(NOFRILLS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Pipeline {
  testutil::TempDir dir{"cli"};
  fs::path data() const { return dir.path() / "data"; }
  fs::path run(const std::string& name) const { return dir.path() / name; }

  void gen(int images = 40, int seed = 5) {
    REQUIRE(run_cli("gen-synth --out " + data().string() + " --images " +
                    std::to_string(images) + " --seed " +
                    std::to_string(seed) + " --appearance-dim 12") == 0);
  }
};

}  // namespace

TEST_CASE("gen-synth twice produces identical directory trees") {
  testutil::TempDir dir("gen_det");
  const fs::path a = dir.path() / "a", b = dir.path() / "b";
  REQUIRE(run_cli("gen-synth --out " + a.string() +
                  " --images 30 --seed 7 --appearance-dim 12") == 0);
  REQUIRE(run_cli("gen-synth --out " + b.string() +
                  " --images 30 --seed 7 --appearance-dim 12") == 0);
  for (const char* rel :
       {"taxonomy.json", "train/records.jsonl", "train/features.bin",
        "val/records.jsonl", "val/features.bin", "test/records.jsonl",
        "test/features.bin"}) {
    CHECK(file_bytes(a / rel) == file_bytes(b / rel));
  }
}

TEST_CASE("gen-synth with zero images succeeds with empty splits") {
  testutil::TempDir dir("gen_zero");
  const fs::path out = dir.path() / "empty";
  CHECK(run_cli("gen-synth --out " + out.string() + " --images 0") == 0);
  CHECK(fs::exists(out / "train/records.jsonl"));
  CHECK(fs::file_size(out / "train/records.jsonl") == 0);
}

TEST_CASE("full pipeline: gen-synth, train, eval, confusion, prep") {
  Pipeline p;
  p.gen(60, 11);

  SUBCASE("train + eval round") {
    REQUIRE(run_cli("train --data " + p.data().string() + " --out " +
                    p.run("m1").string() +
                    " --factors det,app,box --epochs 3 --neg-per-pos 50 "
                    "--seed 1") == 0);
    CHECK(fs::exists(p.run("m1") / "checkpoint.json"));
    CHECK(fs::exists(p.run("m1") / "metrics.csv"));
    CHECK(fs::exists(p.run("m1") / "manifest.json"));

    REQUIRE(run_cli("eval --model " +
                    (p.run("m1") / "checkpoint.json").string() + " --data " +
                    p.data().string() + " --split test --report " +
                    (p.run("m1") / "report.csv").string()) == 0);
    CHECK(fs::exists(p.run("m1") / "report.csv"));

    SUBCASE("score dump and live scoring evaluate identically") {
      REQUIRE(run_cli("eval --model " +
                      (p.run("m1") / "checkpoint.json").string() +
                      " --data " + p.data().string() +
                      " --split test --report " +
                      (p.run("m1") / "live.csv").string() + " --dump-scores " +
                      (p.run("m1") / "scores.jsonl").string()) == 0);
      REQUIRE(run_cli("eval --scores " +
                      (p.run("m1") / "scores.jsonl").string() + " --data " +
                      p.data().string() + " --split test --report " +
                      (p.run("m1") / "fromdump.csv").string()) == 0);
      CHECK(file_bytes(p.run("m1") / "live.csv") ==
            file_bytes(p.run("m1") / "fromdump.csv"));
    }

    SUBCASE("confusion export has both blocks") {
      REQUIRE(run_cli("confusion --model " +
                      (p.run("m1") / "checkpoint.json").string() + " --data " +
                      p.data().string() + " --split test --out " +
                      (p.run("m1") / "confusion.csv").string()) == 0);
      const std::string text = file_bytes(p.run("m1") / "confusion.csv");
      CHECK(text.find("# raw") != std::string::npos);
      CHECK(text.find("# softmax") != std::string::npos);
    }
  }

  SUBCASE("prep-candidates writes one line per image") {
    REQUIRE(run_cli("prep-candidates --data " + p.data().string() +
                    " --split test --out " +
                    (p.dir.path() / "cands.jsonl").string()) == 0);
    std::ifstream in(p.dir.path() / "cands.jsonl");
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 12);  // 20% of 60
  }
}

TEST_CASE("det-only training skips MLPs and still evaluates") {
  Pipeline p;
  p.gen(40, 3);
  REQUIRE(run_cli("train --data " + p.data().string() + " --out " +
                  p.run("det").string() + " --factors det --epochs 5") == 0);
  const Taxonomy tax = Taxonomy::load(p.data() / "taxonomy.json");
  FactorModel<float> model =
      load_checkpoint(p.run("det") / "checkpoint.json", tax);
  CHECK(model.factors() == FactorSet::none());
  CHECK(model.state_tensors().empty());
  CHECK(run_cli("eval --model " + (p.run("det") / "checkpoint.json").string() +
                " --data " + p.data().string() + " --split test --report " +
                (p.run("det") / "report.csv").string()) == 0);
}

TEST_CASE("hoi and interaction losses produce different checkpoints") {
  Pipeline p;
  p.gen(40, 9);
  REQUIRE(run_cli("train --data " + p.data().string() + " --out " +
                  p.run("hoi").string() +
                  " --factors det,box --epochs 2 --seed 4 --loss hoi") == 0);
  REQUIRE(run_cli("train --data " + p.data().string() + " --out " +
                  p.run("int").string() +
                  " --factors det,box --epochs 2 --seed 4 "
                  "--loss interaction") == 0);
  CHECK(file_bytes(p.run("hoi") / "checkpoint.bin") !=
        file_bytes(p.run("int") / "checkpoint.bin"));
}

TEST_CASE("train/eval reruns are byte-identical at fixed seed") {
  Pipeline p;
  p.gen(40, 21);
  for (const char* name : {"r1", "r2"}) {
    REQUIRE(run_cli("train --data " + p.data().string() + " --out " +
                    p.run(name).string() +
                    " --factors det,app,box --epochs 2 --seed 12") == 0);
    REQUIRE(run_cli("eval --model " +
                    (p.run(name) / "checkpoint.json").string() + " --data " +
                    p.data().string() + " --split val --report " +
                    (p.run(name) / "report.csv").string()) == 0);
  }
  CHECK(file_bytes(p.run("r1") / "checkpoint.bin") ==
        file_bytes(p.run("r2") / "checkpoint.bin"));
  CHECK(file_bytes(p.run("r1") / "checkpoint.json") ==
        file_bytes(p.run("r2") / "checkpoint.json"));
  CHECK(file_bytes(p.run("r1") / "report.csv") ==
        file_bytes(p.run("r2") / "report.csv"));
}

TEST_CASE("eval refuses a checkpoint from a different taxonomy") {
  Pipeline p;
  p.gen(40, 2);
  REQUIRE(run_cli("train --data " + p.data().string() + " --out " +
                  p.run("m").string() + " --factors det,box --epochs 1") == 0);
  // A different seed changes the generated train counts, hence the hash.
  const fs::path other = p.dir.path() / "other";
  REQUIRE(run_cli("gen-synth --out " + other.string() +
                  " --images 40 --seed 99 --appearance-dim 12") == 0);
  CHECK(run_cli("eval --model " + (p.run("m") / "checkpoint.json").string() +
                " --data " + other.string() + " --split test --report " +
                (p.dir.path() / "r.csv").string()) == 2);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("train --data /nonexistent") == 1);  // missing --out
  CHECK(run_cli("no-such-command") == 1);
  Pipeline p;
  p.gen(20, 1);
  CHECK(run_cli("train --data " + p.data().string() + " --out " +
                p.run("x").string() + " --loss bogus") == 1);
  CHECK(run_cli("eval --data " + p.data().string() + " --report " +
                (p.dir.path() / "r.csv").string()) == 1);  // no model/scores
}

TEST_CASE("data errors exit with code 2") {
  testutil::TempDir dir("cli_data_err");
  CHECK(run_cli("eval --model nope.json --data " + dir.path().string() +
                " --split test --report " + (dir.path() / "r.csv").string()) ==
        2);
}

TEST_CASE("ablate runs a small grid deterministically") {
  Pipeline p;
  p.gen(40, 31);
  const fs::path grid = p.dir.path() / "grid.json";
  {
    std::ofstream out(grid);
    out << R"({"defaults": {"epochs": 2, "seeds": [1, 2], "neg_per_pos": 50},
               "cells": [{"name": "Det", "factors": "det"},
                          {"name": "Det+Box", "factors": "det,box"}]})";
  }
  REQUIRE(run_cli("ablate --data " + p.data().string() + " --grid " +
                  grid.string() + " --out " + p.run("ab1").string()) == 0);
  REQUIRE(run_cli("ablate --data " + p.data().string() + " --grid " +
                  grid.string() + " --out " + p.run("ab2").string()) == 0);
  const std::string table = file_bytes(p.run("ab1") / "table.csv");
  CHECK(table.find("Det,") != std::string::npos);
  CHECK(table.find("Det+Box,") != std::string::npos);
  int lines = 0;
  for (char c : table) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 3);  // header + 2 cells
  CHECK(table == file_bytes(p.run("ab2") / "table.csv"));
}
