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

// cfcondense: generate | condense | eval | inspect
//
// Exit codes: 0 success, 1 I/O or format error, 2 flag/config error,
// 3 numerical divergence. On failure stderr carries one JSON object
// {"error": <name>, "message": <text>}.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfcondense/condenser.hpp"
#include "cfcondense/data_model.hpp"
#include "cfcondense/evaluator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cfcondense;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kNotFound:
    case ErrorCode::kBadMagic:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kTruncated:
    case ErrorCode::kNonFinite:
      return kExitIo;
    case ErrorCode::kDivergence:
      return kExitDivergence;
    default:
      return kExitConfig;
  }
}

void report_error(std::string_view name, const std::string& message) {
  std::cerr << json{{"error", name}, {"message", message}}.dump() << '\n';
}

std::string read_text(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) fail(ErrorCode::kNotFound, "no such file: " + path.string());
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failure on " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

CondenseConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  CondenseConfig cfg = path.empty() ? CondenseConfig{} : config_from_json(read_text(path));
  return apply_overrides(cfg, overrides);
}

std::string progress_line(const IterationRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "iter=%u uni=%.9g cross=%.9g joint=%.9g total=%.9g", r.iter, r.uni,
                r.cross, r.joint, r.total);
  return buf;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  CorpusParams params;
  std::uint32_t test_per_class = 0;
  bool float32 = false;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  const PairedDataset data = generate_corpus(a.params);
  const DType dtype = a.float32 ? DType::kFloat32 : DType::kFloat64;
  const fs::path manifest = save_dataset(data, a.out, a.params.seed, dtype);
  json out{{"manifest", manifest.string()}, {"count", data.count()}, {"dim", data.dim()}};
  if (a.test_per_class > 0) {
    const PairedDataset test = generate_corpus_holdout(a.params, a.test_per_class);
    out["test_manifest"] = save_dataset(test, fs::path(a.out) / "test", a.params.seed, dtype).string();
  }
  std::cout << out.dump() << '\n';
  return 0;
}

// --- condense ---------------------------------------------------------------

struct CondenseArgs {
  std::string data;
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  bool quiet = false;
};

int run_condense(const CondenseArgs& a) {
  const CondenseConfig cfg = load_config(a.config, a.overrides);
  const PairedDataset data = load_dataset(a.data);
  cfg.validate(data.num_classes(), data.modality_count());
  make_dir(a.out);
  write_text(fs::path(a.out) / "config.json", config_to_json(cfg) + "\n");

  CondenseCallbacks cb;
  cb.on_iteration = [&](const IterationRecord& r) {
    if (!a.quiet) std::cout << progress_line(r) << '\n';
  };
  cb.on_checkpoint = [&](std::uint32_t iter, const SyntheticSet& syn) {
    // Recorded relative to --out so the trace does not depend on where the run lives.
    const std::string name = "ckpt_" + std::to_string(iter);
    save_checkpoint(syn, CondenseTrace{}, fs::path(a.out) / name);
    return name;
  };
  const CondenseResult result = condense(data, cfg, cb);
  save_checkpoint(result.synthetic, result.trace, a.out);
  const auto& last = result.trace.iterations.back();
  std::cout << json{{"iterations", result.trace.iterations.size()},
                    {"initial_total", result.trace.iterations.front().total},
                    {"final_total", last.total},
                    {"checkpoint", a.out}}
                   .dump()
            << '\n';
  return 0;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string data;
  std::string test;
  std::string syn;
  std::vector<std::string> methods;
  std::vector<std::uint32_t> dpc{10};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string config;
  std::vector<std::string> overrides;
  std::string probe_input = "concat";
  std::uint32_t epochs = ProbeConfig{}.epochs;
  bool full_reference = false;
  std::string report_out;
};

ProbeConfig probe_config(const EvalArgs& a) {
  ProbeConfig pc;
  pc.epochs = a.epochs;
  if (a.probe_input == "concat") {
    pc.input = ProbeInput::kConcat;
  } else if (a.probe_input == "sum") {
    pc.input = ProbeInput::kSum;
  } else if (a.probe_input.rfind("single:", 0) == 0) {
    pc.input = ProbeInput::kSingle;
    pc.modality = std::stoul(a.probe_input.substr(7));
  } else {
    fail(ErrorCode::kConfig, "unknown --probe-input '" + a.probe_input + "'");
  }
  return pc;
}

int run_eval(const EvalArgs& a) {
  require(!a.syn.empty() || !a.methods.empty(), ErrorCode::kConfig,
          "eval needs --syn <checkpoint> or --method <name>");
  const PairedDataset train = load_dataset(a.data);
  const PairedDataset test = a.test.empty() ? train : load_dataset(a.test);
  const ProbeConfig probe = probe_config(a);
  EvalReport report;
  if (!a.syn.empty()) {
    const Checkpoint ck = load_checkpoint(a.syn);
    for (auto seed : a.seeds) {
      EvalRow row = evaluate_synthetic(ck.synthetic, test, method_name(Method::kCheckpoint), seed, probe);
      if (!ck.trace.iterations.empty()) {
        row.initial_loss = ck.trace.iterations.front().total;
        row.final_loss = ck.trace.iterations.back().total;
      }
      report.rows.push_back(std::move(row));
    }
  }
  if (!a.methods.empty()) {
    CompareSpec spec;
    spec.methods.clear();
    for (const auto& m : a.methods) spec.methods.push_back(parse_method(m));
    spec.dpc_list = a.dpc;
    spec.seeds = a.seeds;
    spec.condense = load_config(a.config, a.overrides);
    spec.probe = probe;
    spec.full_data_reference = false;
    const EvalReport cmp = compare_methods(train, test, spec);
    report.rows.insert(report.rows.end(), cmp.rows.begin(), cmp.rows.end());
  }
  if (a.full_reference) {
    std::vector<double> acc;
    for (auto seed : a.seeds) {
      ProbeConfig pc = probe;
      pc.seed = seed;
      acc.push_back(train_linear_probe(train, test, pc));
    }
    std::tie(report.full_data_accuracy_mean, report.full_data_accuracy_std) = mean_std(acc);
  }
  summarize(report);
  report.check_invariants();
  make_dir(a.report_out);
  write_text(fs::path(a.report_out) / "report.csv", report.to_csv());
  write_text(fs::path(a.report_out) / "report.json", report.to_json() + "\n");
  std::cout << report.to_csv();
  return 0;
}

// --- inspect ----------------------------------------------------------------

json inspect_embd(const fs::path& path) {
  const EmbdHeader h = read_embedding_header(path);
  const EmbeddingSet set = read_embedding_file(path);
  std::map<std::uint32_t, std::uint64_t> counts;
  for (auto y : set.labels) ++counts[y];
  json per_class = json::object();
  for (auto [c, n] : counts) per_class[std::to_string(c)] = n;
  return {{"kind", "embd"},
          {"version", h.version},
          {"dim", h.dim},
          {"count", h.count},
          {"dtype", h.dtype == DType::kFloat32 ? "float32" : "float64"},
          {"per_class_counts", per_class},
          {"mean_row_norm", set.data.rowwise().norm().mean()},
          {"finite", set.data.allFinite()}};
}

json inspect_json(const fs::path& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    fail(ErrorCode::kBadMagic, path.string() + " is neither an EMBD file nor JSON");
  }
  if (j.is_object() && j.contains("iterations")) {
    const CondenseTrace t = trace_from_json(text);
    json out{{"kind", "trace"}, {"iterations", t.iterations.size()}};
    if (!t.iterations.empty()) {
      out["initial_total"] = t.iterations.front().total;
      out["final_total"] = t.iterations.back().total;
    }
    return out;
  }
  if (j.is_object() && j.contains("modalities")) {
    const DatasetManifest m = read_manifest(path);
    json mods = json::array();
    for (const auto& e : m.modalities) mods.push_back(e.name);
    return {{"kind", "manifest"}, {"num_classes", m.num_classes}, {"dim", m.dim},
            {"count", m.count},   {"modalities", mods}};
  }
  fail(ErrorCode::kBadMagic, path.string() + " is not a recognised cfcondense file");
}

int run_inspect(const std::string& file) {
  const fs::path path(file);
  std::error_code ec;
  if (!fs::exists(path, ec)) fail(ErrorCode::kNotFound, "no such file: " + file);
  char magic[4] = {};
  {
    std::ifstream in(path, std::ios::binary);
    in.read(magic, 4);
  }
  const bool embd = std::string_view(magic, 4) == "EMBD";
  const bool looks_json = magic[0] == '{' || magic[0] == '[' || std::isspace(static_cast<unsigned char>(magic[0]));
  const json out = embd || !looks_json ? inspect_embd(path) : inspect_json(path);
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Condense paired multi-modal embedding datasets by characteristic function matching"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic paired corpus (manifest + EMBD files)");
  g->add_option("--classes", gen.params.num_classes)->check(CLI::PositiveNumber);
  g->add_option("--per-class", gen.params.per_class)->check(CLI::PositiveNumber);
  g->add_option("--dim", gen.params.dim)->check(CLI::PositiveNumber);
  g->add_option("--modalities", gen.params.modality_count)->check(CLI::PositiveNumber);
  g->add_option("--separation", gen.params.class_separation)->check(CLI::NonNegativeNumber);
  g->add_option("--coupling", gen.params.cross_modal_coupling)->check(CLI::Range(0.0, 1.0));
  g->add_option("--seed", gen.params.seed);
  g->add_option("--test-per-class", gen.test_per_class, "Also write a held-out split to <out>/test");
  g->add_flag("--float32", gen.float32, "Store values as 32-bit floats");
  g->add_option("--out", gen.out, "Output directory")->required();

  CondenseArgs con;
  auto* c = app.add_subcommand("condense", "Optimise a synthetic set against a dataset");
  c->add_option("--data", con.data, "Dataset manifest or directory")->required();
  c->add_option("--config", con.config, "CondenseConfig JSON");
  c->add_option("--out", con.out, "Checkpoint directory")->required();
  c->add_option("--override", con.overrides, "key=value applied over the config");
  c->add_flag("--quiet", con.quiet, "Suppress per-iteration progress lines");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Probe accuracy and retrieval of condensed sets");
  e->add_option("--data", ev.data, "Training dataset manifest or directory")->required();
  e->add_option("--test", ev.test, "Held-out dataset (defaults to --data)");
  e->add_option("--syn", ev.syn, "Checkpoint directory to evaluate");
  e->add_option("--method", ev.methods, "random|herding|mmd_condense|cfd_condense");
  e->add_option("--dpc", ev.dpc)->delimiter(',');
  e->add_option("--seeds", ev.seeds)->delimiter(',');
  e->add_option("--config", ev.config, "CondenseConfig JSON for condense methods");
  e->add_option("--override", ev.overrides, "key=value applied over the config");
  e->add_option("--probe-input", ev.probe_input, "concat|sum|single:<m>");
  e->add_option("--epochs", ev.epochs)->check(CLI::PositiveNumber);
  e->add_flag("--full-reference", ev.full_reference, "Also probe the full training data");
  e->add_option("--report-out", ev.report_out, "Report directory")->required();

  std::string inspect_file;
  auto* i = app.add_subcommand("inspect", "Describe an EMBD, manifest or trace file as JSON");
  i->add_option("--file", inspect_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << app.help() << '\n';
    report_error("UsageError", err.what());
    return kExitConfig;
  }

  try {
    if (*g) return run_generate(gen);
    if (*c) return run_condense(con);
    if (*e) return run_eval(ev);
    if (*i) return run_inspect(inspect_file);
  } catch (const Error& err) {
    report_error(err.name(), err.what());
    return exit_code_for(err.code());
  } catch (const std::exception& err) {
    report_error("InternalError", err.what());
    return kExitIo;
  }
  return 0;
}
