// Copyright 2026 The TAKD Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// takd: command-line front end of the workbench.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "takd/bounds.hpp"
#include "takd/errors.hpp"
#include "takd/experiments.hpp"
#include "takd/landscape.hpp"
#include "takd/model.hpp"
#include "takd/planner.hpp"
#include "takd/records.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using takd::harness::ExperimentConfig;

namespace {

constexpr int kConfigExit = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw takd::ConfigError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (int q : v) s += (s.empty() ? "" : "-") + std::to_string(q);
  return s;
}

// Config file (or an empty document) with command-line overrides applied.
ExperimentConfig load_config(const Common& c, const json& overrides) {
  json doc = c.config.empty()
                 ? json::object()
                 : takd::harness::parse_config_document(slurp(c.config));
  if (!doc.is_object()) throw takd::ConfigError("config must be a JSON object");
  for (const auto& [key, value] : overrides.items()) doc[key] = value;
  if (c.seed) doc["seed"] = *c.seed;
  return takd::harness::experiment_config_from_json(doc);
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) throw takd::Error("cannot write " + path.string());
}

int execute(const Common& c, const ExperimentConfig& cfg) {
  fs::create_directories(c.out);
  takd::harness::RecordWriter writer(fs::path(c.out) / "records.jsonl");
  const auto result = takd::harness::run_experiment(cfg, &writer);
  for (const auto& [name, contents] : result.artifacts) {
    write_file(fs::path(c.out) / name, contents);
  }
  for (const auto& model : result.models) {
    takd::zoo::save_model(
        model,
        fs::path(c.out) /
            ("model_" + join(model.provenance.distillation_path) + ".takd"));
  }
  std::cout << result.summary.dump(2) << "\n";
  return 0;
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw takd::ConfigError("bad size list '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

int report(const Common& c, const std::vector<std::string>& files) {
  struct Group {
    std::size_t count = 0;
    double sum = 0.0, sum_sq = 0.0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Group> groups;
  for (const std::string& f : files) {
    for (const auto& r : takd::harness::read_records(f)) {
      Group& g =
          groups[{r.experiment_id, std::string(takd::zoo::mode_name(r.mode)),
                  join(r.path)}];
      ++g.count;
      g.sum += r.final_acc;
      g.sum_sq += r.final_acc * r.final_acc;
    }
  }
  std::ostringstream csv;
  csv << "experiment_id,mode,path,runs,mean_acc,std_acc\n";
  for (const auto& [key, g] : groups) {
    const double mean = g.sum / g.count;
    const double var =
        g.count > 1 ? (g.sum_sq - g.count * mean * mean) / (g.count - 1) : 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", mean,
                  std::sqrt(std::max(var, 0.0)));
    csv << std::get<0>(key) << ',' << std::get<1>(key) << ','
        << std::get<2>(key) << ',' << g.count << ',' << buf << '\n';
  }
  fs::create_directories(c.out);
  write_file(fs::path(c.out) / "report.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher-assistant knowledge distillation workbench"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Experiment config (JSON)");
    sub->add_option("--seed", common.seed, "Root seed");
    sub->add_option("--out", common.out, "Output directory")
        ->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "Run the task named in the config");
  add_common(run);

  int size = 1;
  auto* train = app.add_subcommand("train", "Train one network from scratch");
  add_common(train);
  train->add_option("--size", size, "Network size")->capture_default_str();

  std::string teacher_model;
  int teacher = 5;
  auto* distill =
      app.add_subcommand("distill", "Distill a student from a teacher");
  add_common(distill);
  distill
      ->add_option("--teacher", teacher, "Teacher size, trained from scratch")
      ->capture_default_str();
  distill->add_option("--teacher-model", teacher_model,
                      "Pretrained teacher file");
  distill->add_option("--student", size, "Student size")->capture_default_str();

  std::string path_text = "5,3,1";
  auto* chain = app.add_subcommand("chain", "Train a distillation path");
  add_common(chain);
  chain->add_option("--path", path_text, "Sizes, teacher first")
      ->capture_default_str();

  std::string ladder_text = "10,8,6,4,2";
  int k = 2;
  std::string mode = "surrogate";
  bool verify = false, graph = false;
  auto* search =
      app.add_subcommand("path-search", "Optimal length-k distillation path");
  add_common(search);
  search->add_option("--ladder", ladder_text, "Ladder sizes, teacher first")
      ->capture_default_str();
  search->add_option("--k", k, "Number of distillation steps")
      ->capture_default_str();
  search->add_option("--mode", mode, "surrogate | train | table")
      ->check(CLI::IsMember({"surrogate", "train", "table"}))
      ->capture_default_str();
  search->add_flag("--verify", verify, "Also run the exhaustive search");
  search->add_flag("--graph", graph, "Export every path prefix");

  std::string params;
  bool crossover = false;
  auto* bounds = app.add_subcommand("bounds", "Evaluate the risk bounds");
  add_common(bounds);
  bounds
      ->add_option("--params", params,
                   "Bound parameters: JSON file or inline JSON")
      ->required();
  bounds->add_flag("--crossover", crossover,
                   "Search for the TAKD/BLKD crossover n");

  std::string model_file;
  int steps = 41;
  double radius = 1.0;
  auto* land =
      app.add_subcommand("landscape", "Loss surface around a trained model");
  add_common(land);
  land->add_option("--model", model_file, "Model file")->required();
  land->add_option("--steps", steps, "Grid points per axis (odd)")
      ->capture_default_str();
  land->add_option("--radius", radius, "Grid half-width")
      ->capture_default_str();

  std::string fixed = "student";
  std::string sizes_text = "5,4,3,2";
  int fixed_size = 1;
  auto* sweep = app.add_subcommand("sweep", "Teacher-student gap sweep");
  add_common(sweep);
  sweep->add_option("--fixed", fixed, "student | teacher")
      ->check(CLI::IsMember({"student", "teacher"}))
      ->capture_default_str();
  sweep->add_option("--sizes", sizes_text, "Varied sizes")
      ->capture_default_str();
  sweep->add_option("--fixed-size", fixed_size, "Size held fixed")
      ->capture_default_str();

  std::vector<std::string> record_files;
  auto* rep = app.add_subcommand("report", "Summarize run records");
  add_common(rep);
  rep->add_option("records", record_files, "Record files (JSON lines)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (common.config.empty()) throw takd::ConfigError("run needs --config");
      return execute(common, load_config(common, json::object()));
    }
    if (*train) {
      return execute(common,
                     load_config(common, {{"task", "nokd"}, {"path", {size}}}));
    }
    if (*distill) {
      if (teacher_model.empty()) {
        return execute(
            common,
            load_config(common, {{"task", "blkd"}, {"path", {teacher, size}}}));
      }
      const takd::zoo::TrainedModel t = takd::zoo::load_model(teacher_model);
      ExperimentConfig cfg = load_config(
          common, {{"task", "blkd"}, {"path", {t.spec.size, size}}});
      const auto data = takd::harness::make_dataset(cfg.dataset);
      const auto specs = takd::harness::make_specs(cfg.model, {size}, data);
      takd::distill::TrainHistory history;
      const auto student =
          takd::distill::train(specs.at(size), data, cfg.distill, &t, &history);
      fs::create_directories(common.out);
      takd::harness::RecordWriter writer(fs::path(common.out) /
                                         "records.jsonl");
      writer.append(takd::harness::make_record(cfg.experiment_id, student,
                                               cfg.distill, history));
      takd::zoo::save_model(
          student, fs::path(common.out) /
                       ("model_" + join(student.provenance.distillation_path) +
                        ".takd"));
      std::cout << json{{"path", student.provenance.distillation_path},
                        {"final_acc", student.metrics.test_acc}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (*chain) {
      return execute(common,
                     load_config(common, {{"task", "chain"},
                                          {"path", parse_sizes(path_text)}}));
    }
    if (*search) {
      return execute(common,
                     load_config(common, {{"task", "path_search"},
                                          {"ladder", parse_sizes(ladder_text)},
                                          {"k", k},
                                          {"planner", mode},
                                          {"verify", verify},
                                          {"graph", graph}}));
    }
    if (*bounds) {
      const std::string text = fs::exists(params) ? slurp(params) : params;
      const auto p = takd::bounds::bound_params_from_json(
          takd::harness::parse_config_document(text));
      json out = {
          {"nokd", takd::bounds::nokd_bound(p)},
          {"blkd", takd::bounds::blkd_bound(p)},
          {"takd", takd::bounds::takd_bound(p)},
          {"ordering", takd::bounds::to_json(takd::bounds::check_ordering(p))}};
      if (crossover) {
        const auto x = takd::bounds::find_crossover_n(p);
        out["crossover"] = x.n ? json(*x.n) : json(nullptr);
        if (!x.n) out["crossover_reason"] = x.reason;
      }
      fs::create_directories(common.out);
      write_file(
          fs::path(common.out) / "bounds.csv",
          takd::bounds::bounds_table_csv(p, takd::bounds::decade_grid(0, 12)));
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*land) {
      const ExperimentConfig cfg = load_config(common, json::object());
      const takd::zoo::TrainedModel model = takd::zoo::load_model(model_file);
      const auto data = takd::harness::make_dataset(cfg.dataset);
      const auto dirs =
          takd::landscape::filter_normalized_directions(model.params, cfg.seed);
      const auto surface =
          takd::landscape::loss_surface(model, data.test, dirs, radius, steps);
      fs::create_directories(common.out);
      write_file(fs::path(common.out) / "landscape.csv",
                 takd::landscape::to_csv(surface));
      json out = {{"center_loss", surface.center_loss},
                  {"has_non_finite", surface.has_non_finite}};
      if (radius >= 1.0 && steps > 1) {
        out["flatness"] = takd::landscape::flatness_metric(surface);
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*sweep) {
      return execute(common,
                     load_config(common, {{"task", "gap_sweep"},
                                          {"gap",
                                           {{"fixed", fixed},
                                            {"sizes", parse_sizes(sizes_text)},
                                            {"fixed_size", fixed_size}}}}));
    }
    if (*rep) return report(common, record_files);
  } catch (const takd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const takd::LadderError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
