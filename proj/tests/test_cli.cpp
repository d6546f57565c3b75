/* Copyright (c) 2026 The cfcondense Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cfcondense/data_model.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const cfcondense::test::TempDir& tmp, const std::string& args) {
  const auto out = tmp.path() / "stdout.txt", err = tmp.path() / "stderr.txt";
  const std::string cmd = std::string(CFCONDENSE_CLI) + " " + args + " >" + out.string() + " 2>" +
                          err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

/// Relative path -> bytes for every regular file below `dir`.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST_CASE("generate, condense and eval are bit reproducible") {
  cfcondense::test::TempDir tmp;
  const auto p = tmp.path().string();
  for (const char* run : {"a", "b"}) {
    const std::string d = p + "/" + run;
    REQUIRE(cli(tmp, "generate --classes 3 --per-class 20 --dim 4 --seed 5 --test-per-class 10 --out " +
                         d + "/data").code == 0);
    const auto c = cli(tmp, "condense --data " + d + "/data --out " + d +
                                "/syn --override dpc=3 syn_batch=3 iterations=4 freq_count=32 eval_every=2");
    REQUIRE(c.code == 0);
    CHECK(c.out.find("iter=3 uni=") != std::string::npos);
    REQUIRE(cli(tmp, "eval --data " + d + "/data --test " + d + "/data/test --syn " + d +
                         "/syn --method herding cfd_condense --dpc 3 --seeds 0,1 --epochs 5 "
                         "--override iterations=3 freq_count=32 --full-reference --report-out " +
                         d + "/report").code == 0);
  }
  const auto a = tree(p + "/a"), b = tree(p + "/b");
  CHECK(a.size() == b.size());
  CHECK(a.count("syn/trace.json"));
  CHECK(a.count("syn/ckpt_2/manifest.json"));
  CHECK(a.count("report/report.csv"));
  for (const auto& [name, bytes] : a) CHECK_MESSAGE(b.at(name) == bytes, name);
}

TEST_CASE("inspect describes each file kind") {
  cfcondense::test::TempDir tmp;
  const auto d = tmp.path() / "data";
  REQUIRE(cli(tmp, "generate --classes 2 --per-class 4 --dim 3 --float32 --out " + d.string()).code == 0);
  const auto embd = cli(tmp, "inspect --file " + (d / "m0.embd").string());
  CHECK(embd.code == 0);
  CHECK(embd.out.find("\"dim\": 3") != std::string::npos);
  CHECK(embd.out.find("float32") != std::string::npos);
  CHECK(cli(tmp, "inspect --file " + (d / "manifest.json").string()).code == 0);

  std::ofstream(tmp.path() / "junk.bin") << "not an embedding";
  const auto junk = cli(tmp, "inspect --file " + (tmp.path() / "junk.bin").string());
  CHECK(junk.code == 1);
  CHECK(junk.err.find("\"error\":\"BadMagic\"") != std::string::npos);
}

TEST_CASE("exit codes") {
  cfcondense::test::TempDir tmp;
  const auto d = (tmp.path() / "data").string();
  REQUIRE(cli(tmp, "generate --classes 2 --per-class 6 --dim 3 --out " + d).code == 0);

  const auto missing = cli(tmp, "condense --data " + d + "/nope --out " + d + "/o");
  CHECK(missing.code == 1);
  CHECK(missing.err.find("NotFound") != std::string::npos);

  const auto bad_key = cli(tmp, "condense --data " + d + " --out " + d + "/o --override bogus=1");
  CHECK(bad_key.code == 2);
  CHECK(bad_key.err.find("ConfigError") != std::string::npos);

  const auto too_big = cli(tmp, "condense --data " + d + " --out " + d + "/o --override dpc=2");
  CHECK(too_big.code == 2);
  CHECK(too_big.err.find("syn_batch") != std::string::npos);

  CHECK(cli(tmp, "condense --data " + d).code == 2);
  CHECK(cli(tmp, "frobnicate").code == 2);
  CHECK(cli(tmp, "eval --data " + d + " --method nope --report-out " + d + "/r").code == 2);

  const auto diverge = cli(tmp, "condense --data " + d + " --out " + d +
                                    "/o --quiet --override dpc=2 syn_batch=2 syn_lr=1e308 clip_norm=0 "
                                    "uni_distance=mmd");
  CHECK(diverge.code == 3);
  CHECK(diverge.err.find("DivergenceError") != std::string::npos);
}
