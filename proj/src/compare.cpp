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

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cfcondense/evaluator.hpp"

namespace cfcondense {

std::string method_name(Method m) {
  switch (m) {
    case Method::kRandom: return "random";
    case Method::kHerding: return "herding";
    case Method::kMmdCondense: return "mmd_condense";
    case Method::kCfdCondense: return "cfd_condense";
    case Method::kCheckpoint: return "checkpoint";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (auto m : {Method::kRandom, Method::kHerding, Method::kMmdCondense, Method::kCfdCondense,
                 Method::kCheckpoint})
    if (method_name(m) == name) return m;
  fail(ErrorCode::kConfig, "unknown method '" + name + "'");
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  CompensatedSum<double> s;
  for (double x : xs) s.add(x);
  const double mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  CompensatedSum<double> v;
  for (double x : xs) v.add((x - mean) * (x - mean));
  return {mean, std::sqrt(v.value() / static_cast<double>(xs.size() - 1))};
}

SyntheticSet produce_condensed(const PairedDataset& train, Method method, std::uint32_t dpc,
                               std::uint64_t seed, const CondenseConfig& base,
                               CondenseTrace* trace) {
  switch (method) {
    case Method::kRandom: return init_random(train, dpc, seed);
    case Method::kHerding: return init_herding(train, dpc);
    case Method::kMmdCondense:
    case Method::kCfdCondense: {
      CondenseConfig cfg = base;
      cfg.dpc = dpc;
      cfg.seed = seed;
      cfg.syn_batch = std::min(cfg.syn_batch, dpc * train.num_classes());
      cfg.uni_distance = method == Method::kMmdCondense ? UniDistance::kMmd : UniDistance::kCfd;
      auto result = condense(train, cfg);
      if (trace) *trace = std::move(result.trace);
      return std::move(result.synthetic);
    }
    case Method::kCheckpoint: break;
  }
  fail(ErrorCode::kConfig, "method '" + method_name(method) + "' cannot produce a condensed set");
}

EvalRow evaluate_synthetic(const SyntheticSet& syn, const PairedDataset& test,
                           const std::string& method, std::uint64_t seed,
                           const ProbeConfig& probe) {
  EvalRow row;
  row.method = method;
  row.dpc = syn.dpc;
  row.seed = seed;
  ProbeConfig pc = probe;
  pc.seed = seed;
  const PairedDataset train = syn.as_dataset();
  row.probe_accuracy = train_linear_probe(train, test, pc);
  if (train.modality_count() >= 2) row.recall = paired_retrieval(train, test);
  return row;
}

void summarize(EvalReport& report) {
  report.summaries.clear();
  std::vector<std::pair<std::string, std::uint32_t>> keys;
  std::map<std::pair<std::string, std::uint32_t>, std::vector<const EvalRow*>> groups;
  for (const auto& r : report.rows) {
    const auto key = std::make_pair(r.method, r.dpc);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&r);
  }
  for (const auto& key : keys) {
    const auto& rows = groups[key];
    MethodSummary s;
    s.method = key.first;
    s.dpc = key.second;
    std::vector<double> acc;
    for (const auto* r : rows) acc.push_back(r->probe_accuracy);
    std::tie(s.probe_accuracy_mean, s.probe_accuracy_std) = mean_std(acc);
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
      std::vector<double> a2t, t2a;
      for (const auto* r : rows) {
        if (i < r->recall.a2t.size()) a2t.push_back(r->recall.a2t[i]);
        if (i < r->recall.t2a.size()) t2a.push_back(r->recall.t2a[i]);
      }
      s.recall_a2t_mean.push_back(mean_std(a2t).first);
      s.recall_t2a_mean.push_back(mean_std(t2a).first);
    }
    report.summaries.push_back(std::move(s));
  }
}

EvalReport compare_methods(const PairedDataset& train, const PairedDataset& test,
                           const CompareSpec& spec) {
  require(!spec.methods.empty(), ErrorCode::kConfig, "compare_methods: no methods");
  require(!spec.seeds.empty(), ErrorCode::kConfig, "compare_methods: no seeds");
  require(!spec.dpc_list.empty(), ErrorCode::kConfig, "compare_methods: no dpc values");
  EvalReport report;
  for (auto method : spec.methods) {
    for (auto dpc : spec.dpc_list) {
      for (auto seed : spec.seeds) {
        CondenseTrace trace;
        const SyntheticSet syn = produce_condensed(train, method, dpc, seed, spec.condense, &trace);
        EvalRow row = evaluate_synthetic(syn, test, method_name(method), seed, spec.probe);
        if (!trace.iterations.empty()) {
          row.initial_loss = trace.iterations.front().total;
          row.final_loss = trace.iterations.back().total;
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  if (spec.full_data_reference) {
    std::vector<double> acc;
    for (auto seed : spec.seeds) {
      ProbeConfig pc = spec.probe;
      pc.seed = seed;
      acc.push_back(train_linear_probe(train, test, pc));
    }
    std::tie(report.full_data_accuracy_mean, report.full_data_accuracy_std) = mean_std(acc);
  }
  summarize(report);
  return report;
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "method,dpc,seed,probe_accuracy";
  for (const char* dir : {"a2t", "t2a"})
    for (auto k : ks) out << ",recall_" << dir << "@" << k;
  out << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << r.dpc << ',' << r.seed << ',' << fmt(r.probe_accuracy);
    for (const auto* v : {&r.recall.a2t, &r.recall.t2a})
      for (std::size_t i = 0; i < ks.size(); ++i) out << ',' << (i < v->size() ? fmt((*v)[i]) : "");
    out << '\n';
  }
  return out.str();
}

std::string EvalReport::to_json() const {
  using nlohmann::json;
  json j;
  j["ks"] = ks;
  j["full_data_accuracy_mean"] = full_data_accuracy_mean;
  j["full_data_accuracy_std"] = full_data_accuracy_std;
  j["rows"] = json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"method", r.method},
                         {"dpc", r.dpc},
                         {"seed", r.seed},
                         {"probe_accuracy", r.probe_accuracy},
                         {"recall_a2t", r.recall.a2t},
                         {"recall_t2a", r.recall.t2a},
                         {"initial_loss", r.initial_loss},
                         {"final_loss", r.final_loss}});
  }
  j["summaries"] = json::array();
  for (const auto& s : summaries) {
    j["summaries"].push_back({{"method", s.method},
                              {"dpc", s.dpc},
                              {"probe_accuracy_mean", s.probe_accuracy_mean},
                              {"probe_accuracy_std", s.probe_accuracy_std},
                              {"recall_a2t_mean", s.recall_a2t_mean},
                              {"recall_t2a_mean", s.recall_t2a_mean}});
  }
  return j.dump(2);
}

void EvalReport::check_invariants() const {
  const auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  const auto monotone = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] < v[i - 1]) return false;
    return true;
  };
  require(in_unit(full_data_accuracy_mean) && full_data_accuracy_std >= 0,
          ErrorCode::kInvalidArgument, "report: full-data accuracy out of range");
  for (const auto& r : rows) {
    require(in_unit(r.probe_accuracy), ErrorCode::kInvalidArgument, "report: accuracy out of range");
    require(monotone(r.recall.a2t) && monotone(r.recall.t2a), ErrorCode::kInvalidArgument,
            "report: recall not monotone in K");
    for (const auto* v : {&r.recall.a2t, &r.recall.t2a})
      for (double x : *v) require(in_unit(x), ErrorCode::kInvalidArgument, "report: recall out of range");
  }
  for (const auto& s : summaries)
    require(in_unit(s.probe_accuracy_mean) && s.probe_accuracy_std >= 0, ErrorCode::kInvalidArgument,
            "report: summary out of range");
}

}  // namespace cfcondense
