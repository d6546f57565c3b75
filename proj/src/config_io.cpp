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

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cfcondense/condenser.hpp"

namespace cfcondense {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<OptimizerKind> kOptimizers[] = {{OptimizerKind::kSgdMomentum, "sgd_momentum"},
                                                   {OptimizerKind::kAdam, "adam"}};
constexpr EnumName<InitKind> kInits[] = {{InitKind::kRandom, "random"}, {InitKind::kHerding, "herding"}};
constexpr EnumName<RealSampling> kSamplings[] = {
    {RealSampling::kWithoutReplacement, "without_replacement"},
    {RealSampling::kWithReplacement, "with_replacement"}};
constexpr EnumName<UniDistance> kDistances[] = {{UniDistance::kCfd, "cfd"}, {UniDistance::kMmd, "mmd"}};
constexpr EnumName<CrossMode> kCrossModes[] = {{CrossMode::kCosine, "cosine"},
                                               {CrossMode::kCfdInteraction, "cfd_interaction"}};

template <typename E, std::size_t N>
const char* to_name(E v, const EnumName<E> (&table)[N]) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <typename E, std::size_t N>
E from_name(const std::string& key, const std::string& s, const EnumName<E> (&table)[N]) {
  for (const auto& e : table)
    if (s == e.name) return e.value;
  fail(ErrorCode::kConfig, "config key '" + key + "': unknown value '" + s + "'");
}

json to_json(const CondenseConfig& c) {
  return json{
      {"dpc", c.dpc},
      {"iterations", c.iterations},
      {"syn_lr", c.syn_lr},
      {"optimizer", to_name(c.optimizer, kOptimizers)},
      {"momentum", c.momentum},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
      {"adam_eps", c.adam_eps},
      {"real_batch", c.real_batch},
      {"syn_batch", c.syn_batch},
      {"real_sampling", to_name(c.real_sampling, kSamplings)},
      {"freq_count", c.freq_count},
      {"sigma_t", c.sigma_t},
      {"resample_freqs", c.resample_freqs},
      {"lambda_uni", c.weights.uni},
      {"lambda_cross", c.weights.cross},
      {"lambda_joint", c.weights.joint},
      {"uni_distance", to_name(c.uni_distance, kDistances)},
      {"mmd_bandwidth", c.mmd_bandwidth},
      {"cfd_alpha", c.cfd_weights.alpha},
      {"cfd_beta", c.cfd_weights.beta},
      {"cross_mode", to_name(c.cross_mode, kCrossModes)},
      {"clip_norm", c.clip_norm},
      {"normalize", c.normalize},
      {"init", to_name(c.init, kInits)},
      {"seed", c.seed},
      {"eval_every", c.eval_every},
  };
}

CondenseConfig from_json(const json& j) {
  const json defaults = to_json(CondenseConfig{});
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!defaults.contains(it.key()))
      fail(ErrorCode::kConfig, "config key '" + it.key() + "': unknown key");
  json merged = defaults;
  merged.update(j);
  CondenseConfig c;
  const auto get = [&](const char* key, auto& out) {
    try {
      merged.at(key).get_to(out);
    } catch (const json::exception& e) {
      fail(ErrorCode::kConfig, std::string("config key '") + key + "': " + e.what());
    }
  };
  std::string s;
  get("dpc", c.dpc);
  get("iterations", c.iterations);
  get("syn_lr", c.syn_lr);
  get("optimizer", s);
  c.optimizer = from_name("optimizer", s, kOptimizers);
  get("momentum", c.momentum);
  get("adam_beta1", c.adam_beta1);
  get("adam_beta2", c.adam_beta2);
  get("adam_eps", c.adam_eps);
  get("real_batch", c.real_batch);
  get("syn_batch", c.syn_batch);
  get("real_sampling", s);
  c.real_sampling = from_name("real_sampling", s, kSamplings);
  get("freq_count", c.freq_count);
  get("sigma_t", c.sigma_t);
  get("resample_freqs", c.resample_freqs);
  get("lambda_uni", c.weights.uni);
  get("lambda_cross", c.weights.cross);
  get("lambda_joint", c.weights.joint);
  get("uni_distance", s);
  c.uni_distance = from_name("uni_distance", s, kDistances);
  get("mmd_bandwidth", c.mmd_bandwidth);
  get("cfd_alpha", c.cfd_weights.alpha);
  get("cfd_beta", c.cfd_weights.beta);
  get("cross_mode", s);
  c.cross_mode = from_name("cross_mode", s, kCrossModes);
  get("clip_norm", c.clip_norm);
  get("normalize", c.normalize);
  get("init", s);
  c.init = from_name("init", s, kInits);
  get("seed", c.seed);
  get("eval_every", c.eval_every);
  return c;
}

json parse_or_fail(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

std::string config_to_json(const CondenseConfig& config) { return to_json(config).dump(2); }

CondenseConfig config_from_json(const std::string& text) {
  const json j = parse_or_fail(text, "config JSON");
  require(j.is_object(), ErrorCode::kConfig, "config JSON must be an object");
  return from_json(j);
}

CondenseConfig apply_overrides(const CondenseConfig& config,
                               const std::vector<std::string>& overrides) {
  json j = to_json(config);
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    require(eq != std::string::npos && eq > 0, ErrorCode::kConfig,
            "override '" + ov + "' is not of the form key=value");
    const std::string key = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);
    require(j.contains(key), ErrorCode::kConfig, "config key '" + key + "': unknown key");
    json& slot = j[key];
    if (slot.is_string()) {
      slot = value;
    } else if (slot.is_boolean()) {
      require(value == "true" || value == "false", ErrorCode::kConfig,
              "config key '" + key + "': expected true or false");
      slot = value == "true";
    } else {
      json parsed = parse_or_fail(value, "override value");
      require(parsed.is_number(), ErrorCode::kConfig, "config key '" + key + "': expected a number");
      if (slot.is_number_unsigned()) {
        require(parsed.is_number_unsigned() || (parsed.is_number_integer() && parsed.get<long long>() >= 0),
                ErrorCode::kConfig, "config key '" + key + "': expected a non-negative integer");
      }
      slot = parsed;
    }
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------

std::string trace_to_json(const CondenseTrace& trace) {
  json iters = json::array();
  for (const auto& r : trace.iterations) {
    iters.push_back({{"iter", r.iter},
                     {"uni_per_modality", r.uni_per_modality},
                     {"uni", r.uni},
                     {"cross", r.cross},
                     {"joint", r.joint},
                     {"total", r.total},
                     {"rho_cross", r.rho_cross},
                     {"rho_joint", r.rho_joint},
                     {"grad_norm", r.grad_norm}});
  }
  // Wall-clock seconds are left out so identical runs write identical files.
  return json{{"iterations", iters},
              {"checkpoints", trace.checkpoints},
              {"sigma_t", trace.sigma_t},
              {"mmd_bandwidth", trace.mmd_bandwidth}}
      .dump(2);
}

CondenseTrace trace_from_json(const std::string& text) {
  const json j = parse_or_fail(text, "trace JSON");
  CondenseTrace t;
  try {
    for (const auto& r : j.at("iterations")) {
      IterationRecord rec;
      r.at("iter").get_to(rec.iter);
      r.at("uni_per_modality").get_to(rec.uni_per_modality);
      r.at("uni").get_to(rec.uni);
      r.at("cross").get_to(rec.cross);
      r.at("joint").get_to(rec.joint);
      r.at("total").get_to(rec.total);
      r.at("rho_cross").get_to(rec.rho_cross);
      r.at("rho_joint").get_to(rec.rho_joint);
      r.at("grad_norm").get_to(rec.grad_norm);
      rec.seconds = r.value("seconds", 0.0);
      t.iterations.push_back(std::move(rec));
    }
    j.at("checkpoints").get_to(t.checkpoints);
    j.at("sigma_t").get_to(t.sigma_t);
    j.at("mmd_bandwidth").get_to(t.mmd_bandwidth);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed trace JSON: ") + e.what());
  }
  return t;
}

void save_checkpoint(const SyntheticSet& syn, const CondenseTrace& trace, const fs::path& dir) {
  syn.validate();
  save_dataset(syn.as_dataset(), dir);
  std::ofstream out(dir / "trace.json", std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + (dir / "trace.json").string());
  out << trace_to_json(trace) << '\n';
  if (!out) fail(ErrorCode::kIo, "write failure on " + (dir / "trace.json").string());
}

Checkpoint load_checkpoint(const fs::path& dir) {
  std::error_code ec;
  if (!fs::exists(dir / "manifest.json", ec))
    fail(ErrorCode::kNotFound, "no checkpoint at " + dir.string());
  const PairedDataset data = load_dataset(dir);
  Checkpoint ck;
  auto& syn = ck.synthetic;
  syn.num_classes = data.num_classes();
  require(data.count() % data.num_classes() == 0, ErrorCode::kConfig,
          "checkpoint row count is not a multiple of num_classes");
  syn.dpc = static_cast<std::uint32_t>(data.count() / data.num_classes());
  syn.labels = data.labels();
  for (const auto& set : data.modalities()) {
    syn.modality_names.push_back(set.modality_name);
    syn.modalities.push_back(set.data);
  }
  syn.validate();
  const fs::path trace_path = dir / "trace.json";
  if (fs::exists(trace_path, ec)) {
    std::ifstream in(trace_path);
    std::stringstream ss;
    ss << in.rdbuf();
    ck.trace = trace_from_json(ss.str());
  }
  return ck;
}

}  // namespace cfcondense
