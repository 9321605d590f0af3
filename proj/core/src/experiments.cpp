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

#include "takd/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <set>
#include <sstream>

#include "takd/bounds.hpp"
#include "takd/errors.hpp"
#include "takd/landscape.hpp"
#include "takd/planner.hpp"

namespace takd::harness {
namespace {

using nlohmann::json;

// Reads typed fields of one JSON object, naming the full field path in
// every diagnostic.
class Fields {
 public:
  Fields(const json& j, std::string prefix, std::set<std::string> allowed)
      : j_(j), prefix_(std::move(prefix)) {
    if (!j.is_object()) throw ConfigError(where("") + "must be an object");
    for (const auto& [key, value] : j.items()) {
      if (!allowed.contains(key)) {
        throw ConfigError(where(key) + "unknown field");
      }
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string where(const std::string& key) const {
    const std::string name = key.empty()       ? prefix_
                             : prefix_.empty() ? key
                                               : prefix_ + "." + key;
    return "field '" + (name.empty() ? std::string("<root>") : name) + "': ";
  }

  template <class T>
  void get(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + "has the wrong type");
    }
  }

 private:
  const json& j_;
  std::string prefix_;
};

std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

distill::DistillConfig nokd_config(distill::DistillConfig cfg) {
  cfg.lambda = 0.0;
  return cfg;
}

struct Trained {
  zoo::TrainedModel model;
  distill::TrainHistory history;
  distill::DistillConfig config;
};

Trained fit(const zoo::NetworkSpec& spec, const Dataset& data,
            const distill::DistillConfig& cfg,
            const zoo::TrainedModel* teacher) {
  Trained t;
  t.config = teacher ? cfg : nokd_config(cfg);
  t.model = distill::train(spec, data, t.config, teacher, &t.history);
  return t;
}

const zoo::NetworkSpec& spec_for(const std::map<int, zoo::NetworkSpec>& specs,
                                 int size) {
  const auto it = specs.find(size);
  if (it == specs.end()) {
    throw ConfigError("no network spec for size " + std::to_string(size));
  }
  return it->second;
}

struct Tuned {
  Trained best;
  SearchResult search;
};

Tuned tune(const zoo::NetworkSpec& spec, const Dataset& data,
           const distill::DistillConfig& base, const zoo::TrainedModel& teacher,
           const SearchSpace& space, int budget, std::uint64_t seed) {
  Tuned out;
  bool have = false;
  out.search = hyper_search(
      space, budget, base,
      [&](const distill::DistillConfig& cfg) {
        Trained t = fit(spec, data, cfg, &teacher);
        const double acc = t.model.metrics.test_acc;
        if (!have || acc > out.best.model.metrics.test_acc) {
          out.best = std::move(t);
          have = true;
        }
        return acc;
      },
      seed);
  return out;
}

json trials_json(const SearchResult& s) {
  json trials = json::array();
  for (const Trial& t : s.trials) {
    trials.push_back({{"temperature", t.temperature},
                      {"lambda", t.lambda},
                      {"test_acc", t.objective}});
  }
  return trials;
}

RunRecord record_of(const std::string& id, const Trained& t) {
  return make_record(id, t.model, t.config, t.history);
}

void emit(RunRecord r, RecordWriter* writer, std::vector<RunRecord>& out) {
  if (writer) writer->append(r);
  out.push_back(std::move(r));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string path_key(const std::vector<int>& path) {
  std::string s;
  for (int q : path) s += (s.empty() ? "" : "-") + std::to_string(q);
  return s;
}

std::unique_ptr<planner::PathEvaluator> make_evaluator(
    const ExperimentConfig& cfg, const planner::SizeLadder& ladder,
    const Dataset* data, const std::map<int, zoo::NetworkSpec>* specs) {
  if (cfg.planner_mode == "surrogate") {
    planner::SurrogateEvaluator::Params p;
    const int lo = ladder.student(), hi = ladder.teacher();
    for (int q : ladder.sizes) {
      p.base[q] = 0.5 + 0.4 * (q - lo) / static_cast<double>(hi - lo);
    }
    try {
      const json& s = cfg.surrogate;
      if (s.contains("base")) {
        for (const auto& [k, v] : s.at("base").items()) {
          p.base[std::stoi(k)] = v.get<double>();
        }
      }
      if (s.contains("capacity")) {
        for (const auto& [k, v] : s.at("capacity").items()) {
          p.capacity[std::stoi(k)] = v.get<double>();
        }
      }
      p.beta = s.value("beta", p.beta);
      p.gamma = s.value("gamma", p.gamma);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("field 'surrogate': ") + e.what());
    }
    return std::make_unique<planner::SurrogateEvaluator>(std::move(p));
  }
  if (cfg.planner_mode == "table") {
    std::map<std::vector<int>, double> table;
    try {
      for (const auto& row : cfg.table) {
        table[row.at("path").get<std::vector<int>>()] =
            row.at("accuracy").get<double>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(std::string("field 'table': ") + e.what());
    }
    return std::make_unique<planner::TableEvaluator>(std::move(table));
  }
  return std::make_unique<planner::TrainingEvaluator>(*specs, *data,
                                                      cfg.distill, cfg.seed);
}

}  // namespace

std::vector<int> ExperimentConfig::effective_path() const {
  if (!path.empty()) return path;
  if (task == "nokd") return {student};
  if (task == "blkd") return {teacher, student};
  return {teacher, assistant, student};
}

distill::DistillConfig desk_distill_config(std::uint64_t seed) {
  distill::DistillConfig cfg;
  cfg.temperature = 4.0;
  cfg.lambda = 0.5;
  cfg.epochs = 60;
  cfg.batch_size = 64;
  cfg.optimizer.learning_rate = 0.1;
  cfg.optimizer.momentum = 0.9;
  cfg.optimizer.nesterov = true;
  cfg.optimizer.schedule = {{30, 0.01}, {45, 0.001}};
  cfg.seed = seed;
  return cfg;
}

json parse_config_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError("malformed JSON at line " + std::to_string(line) +
                      ", column " + std::to_string(col) + ": " + e.what());
  }
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  return experiment_config_from_json(parse_config_document(text));
}

ExperimentConfig experiment_config_from_json(const json& j) {
  static const std::set<std::string> kTop = {
      "task",    "experiment_id", "seed",      "dataset", "model",  "distill",
      "path",    "teacher",       "assistant", "student", "ladder", "k",
      "planner", "surrogate",     "table",     "verify",  "graph",  "search",
      "seeds",   "gap",           "landscape", "bounds"};
  ExperimentConfig cfg;
  const Fields top(j, "", kTop);
  top.get("task", cfg.task);
  top.get("experiment_id", cfg.experiment_id);
  top.get("seed", cfg.seed);

  if (top.has("dataset")) {
    const Fields d(top.raw("dataset"), "dataset",
                   {"kind", "n", "classes", "noise", "seed", "images", "labels",
                    "test_fraction"});
    d.get("kind", cfg.dataset.kind);
    d.get("n", cfg.dataset.n);
    d.get("classes", cfg.dataset.classes);
    d.get("noise", cfg.dataset.noise);
    d.get("seed", cfg.dataset.seed);
    d.get("images", cfg.dataset.idx_images);
    d.get("labels", cfg.dataset.idx_labels);
    d.get("test_fraction", cfg.dataset.test_fraction);
    if (cfg.dataset.kind != "spirals" && cfg.dataset.kind != "blobs" &&
        cfg.dataset.kind != "idx") {
      throw ConfigError(d.where("kind") + "expected spirals, blobs or idx");
    }
    if (cfg.dataset.kind == "idx" &&
        (cfg.dataset.idx_images.empty() || cfg.dataset.idx_labels.empty())) {
      throw ConfigError(d.where("images") +
                        "idx datasets need images and labels");
    }
    if (cfg.dataset.classes < 1)
      throw ConfigError(d.where("classes") + "must be >= 1");
    if (cfg.dataset.n < static_cast<std::size_t>(cfg.dataset.classes) * 10) {
      throw ConfigError(d.where("n") + "must be at least 10 per class");
    }
    if (!(cfg.dataset.noise >= 0.0))
      throw ConfigError(d.where("noise") + "must be >= 0");
    if (!(cfg.dataset.test_fraction > 0.0 && cfg.dataset.test_fraction < 1.0)) {
      throw ConfigError(d.where("test_fraction") + "must lie in (0, 1)");
    }
  }

  if (top.has("model")) {
    const Fields m(top.raw("model"), "model",
                   {"family", "width", "batch_norm"});
    m.get("family", cfg.model.family);
    m.get("width", cfg.model.width);
    m.get("batch_norm", cfg.model.batch_norm);
    if (cfg.model.family != "mlp" && cfg.model.family != "plain_cnn_cifar10" &&
        cfg.model.family != "plain_cnn_cifar100") {
      throw ConfigError(
          m.where("family") +
          "expected mlp, plain_cnn_cifar10 or plain_cnn_cifar100");
    }
    if (cfg.model.width < 1)
      throw ConfigError(m.where("width") + "must be >= 1");
  }

  cfg.distill = desk_distill_config(cfg.seed);
  if (top.has("distill")) {
    const Fields d(
        top.raw("distill"), "distill",
        {"temperature", "lambda", "epochs", "batch_size", "optimizer"});
    try {
      cfg.distill =
          distill::distill_config_from_json(top.raw("distill"), cfg.distill);
    } catch (const Error& e) {
      throw ConfigError(d.where("") + e.what());
    }
  }
  cfg.distill.seed = cfg.seed;

  top.get("path", cfg.path);
  top.get("teacher", cfg.teacher);
  top.get("assistant", cfg.assistant);
  top.get("student", cfg.student);
  top.get("ladder", cfg.ladder);
  top.get("k", cfg.k);
  top.get("planner", cfg.planner_mode);
  if (top.has("surrogate")) cfg.surrogate = top.raw("surrogate");
  if (top.has("table")) cfg.table = top.raw("table");
  top.get("verify", cfg.verify);
  top.get("graph", cfg.graph);
  top.get("seeds", cfg.seeds);
  if (top.has("bounds")) cfg.bounds = top.raw("bounds");

  if (top.has("search")) {
    const Fields s(top.raw("search"), "search",
                   {"budget", "temperatures", "lambdas"});
    s.get("budget", cfg.budget);
    s.get("temperatures", cfg.space.temperatures);
    s.get("lambdas", cfg.space.lambdas);
    if (cfg.budget < 1) throw ConfigError(s.where("budget") + "must be >= 1");
    if (cfg.space.temperatures.empty() || cfg.space.lambdas.empty()) {
      throw ConfigError(s.where("temperatures") + "search grid is empty");
    }
  }
  if (top.has("gap")) {
    const Fields g(top.raw("gap"), "gap", {"fixed", "sizes", "fixed_size"});
    g.get("fixed", cfg.gap_fixed);
    g.get("sizes", cfg.gap_sizes);
    g.get("fixed_size", cfg.gap_fixed_size);
    if (cfg.gap_fixed != "student" && cfg.gap_fixed != "teacher") {
      throw ConfigError(g.where("fixed") + "expected student or teacher");
    }
    if (cfg.gap_sizes.empty()) throw ConfigError(g.where("sizes") + "is empty");
  }
  if (top.has("landscape")) {
    const Fields l(top.raw("landscape"), "landscape", {"radius", "steps"});
    l.get("radius", cfg.radius);
    l.get("steps", cfg.steps);
    if (cfg.steps < 1 || cfg.steps % 2 == 0) {
      throw ConfigError(l.where("steps") + "must be odd and positive");
    }
    if (!(cfg.radius >= 0.0))
      throw ConfigError(l.where("radius") + "must be >= 0");
  }

  static const std::set<std::string> kTasks = {
      "nokd",        "blkd",      "takd",          "chain",     "table1",
      "path_search", "gap_sweep", "ta_provenance", "landscape", "bounds"};
  if (!kTasks.contains(cfg.task)) {
    throw ConfigError(top.where("task") + "unknown task '" + cfg.task + "'");
  }
  if (cfg.planner_mode != "surrogate" && cfg.planner_mode != "train" &&
      cfg.planner_mode != "table") {
    throw ConfigError(top.where("planner") +
                      "expected surrogate, train or table");
  }
  try {
    distill::validate_path(cfg.effective_path());
  } catch (const Error& e) {
    throw ConfigError(top.where("path") + e.what());
  }
  const std::size_t len = cfg.effective_path().size();
  if ((cfg.task == "nokd" && len != 1) || (cfg.task == "blkd" && len != 2) ||
      (cfg.task == "takd" && len < 3)) {
    throw ConfigError(top.where("path") + "length does not match task " +
                      cfg.task);
  }
  if (cfg.task == "path_search") {
    try {
      planner::SizeLadder{cfg.ladder}.validate();
    } catch (const Error& e) {
      throw ConfigError(top.where("ladder") + e.what());
    }
    if (cfg.k < 1 || static_cast<std::size_t>(cfg.k) >= cfg.ladder.size()) {
      throw ConfigError(top.where("k") + "must be in [1, n]");
    }
  }
  if ((cfg.task == "table1" || cfg.task == "ta_provenance") &&
      !(cfg.teacher > cfg.assistant && cfg.assistant > cfg.student)) {
    throw ConfigError(top.where("assistant") +
                      "need teacher > assistant > student");
  }
  if (cfg.seeds.empty()) throw ConfigError(top.where("seeds") + "is empty");
  return cfg;
}

Dataset make_dataset(const DatasetConfig& cfg) {
  if (cfg.kind == "idx") {
    Dataset ds = load_idx(cfg.idx_images, cfg.idx_labels);
    split_train_test(ds, cfg.test_fraction, cfg.seed);
    return ds;
  }
  return gen_synthetic(parse_synthetic_kind(cfg.kind), cfg.n, cfg.classes,
                       cfg.noise, cfg.seed);
}

std::map<int, zoo::NetworkSpec> make_specs(const ModelConfig& cfg,
                                           const std::vector<int>& sizes,
                                           const Dataset& data) {
  std::map<int, zoo::NetworkSpec> specs;
  for (int size : sizes) {
    zoo::NetworkSpec spec;
    if (cfg.family == "mlp") {
      std::size_t input_dim = 1;
      for (std::size_t d : data.feature_shape) input_dim *= d;
      spec = zoo::make_mlp(size, cfg.width, input_dim, data.num_classes,
                           cfg.batch_norm);
    } else {
      spec = cfg.family == "plain_cnn_cifar10" ? zoo::plain_cnn_cifar10(size)
                                               : zoo::plain_cnn_cifar100(size);
      if (spec.input_shape != data.feature_shape ||
          spec.num_classes != data.num_classes) {
        throw ConfigError("dataset shape does not fit model family " +
                          cfg.family);
      }
    }
    specs.emplace(size, std::move(spec));
  }
  return specs;
}

Table1Summary table1_suite(const Dataset& data,
                           const std::map<int, zoo::NetworkSpec>& specs,
                           const Table1Options& o, RecordWriter* writer) {
  Table1Summary out;
  for (std::uint64_t seed : o.seeds) {
    distill::DistillConfig cfg = o.base;
    cfg.seed = seed;
    const Trained teacher = fit(spec_for(specs, o.teacher), data, cfg, nullptr);
    const Trained nokd = fit(spec_for(specs, o.student), data, cfg, nullptr);
    const Tuned blkd = tune(spec_for(specs, o.student), data, cfg,
                            teacher.model, o.space, o.budget, seed);
    const Tuned ta = tune(spec_for(specs, o.assistant), data, cfg,
                          teacher.model, o.space, o.budget, seed);
    const Tuned takd = tune(spec_for(specs, o.student), data, cfg,
                            ta.best.model, o.space, o.budget, seed);

    Table1Row row;
    row.seed = seed;
    row.teacher_acc = teacher.model.metrics.test_acc;
    row.assistant_acc = ta.best.model.metrics.test_acc;
    row.nokd = nokd.model.metrics.test_acc;
    row.blkd = blkd.best.model.metrics.test_acc;
    row.takd = takd.best.model.metrics.test_acc;
    row.blkd_config = blkd.best.config;
    row.assistant_config = ta.best.config;
    row.takd_config = takd.best.config;
    out.rows.push_back(row);

    RunRecord r = record_of(o.experiment_id, nokd);
    r.extra = {{"teacher_acc", row.teacher_acc}};
    emit(std::move(r), writer, out.records);
    r = record_of(o.experiment_id, blkd.best);
    r.extra = {{"search_best", blkd.search.best_objective},
               {"trials", trials_json(blkd.search)},
               {"teacher_acc", row.teacher_acc}};
    emit(std::move(r), writer, out.records);
    r = record_of(o.experiment_id, takd.best);
    r.extra = {{"search_best", takd.search.best_objective},
               {"trials", trials_json(takd.search)},
               {"teacher_acc", row.teacher_acc},
               {"assistant_acc", row.assistant_acc},
               {"assistant_config", distill::to_json(row.assistant_config)}};
    emit(std::move(r), writer, out.records);

    out.takd_ge_blkd += row.takd >= row.blkd;
    out.blkd_ge_nokd += row.blkd >= row.nokd;
  }
  const double count = static_cast<double>(out.rows.size());
  for (const Table1Row& row : out.rows) {
    out.mean_nokd += row.nokd / count;
    out.mean_blkd += row.blkd / count;
    out.mean_takd += row.takd / count;
  }
  return out;
}

std::string to_csv(const Table1Summary& s) {
  std::ostringstream out;
  out << "seed,teacher,assistant,nokd,blkd,takd\n";
  for (const Table1Row& r : s.rows) {
    out << r.seed << ',' << fmt(r.teacher_acc) << ',' << fmt(r.assistant_acc)
        << ',' << fmt(r.nokd) << ',' << fmt(r.blkd) << ',' << fmt(r.takd)
        << '\n';
  }
  return out.str();
}

double percentage_gain(double distilled, double scratch) {
  if (scratch == 0.0) throw DomainError("scratch accuracy is zero");
  return 100.0 * (distilled - scratch) / scratch;
}

bool is_non_monotone(const std::vector<double>& values) {
  bool up = false, down = false;
  for (std::size_t i = 1; i < values.size(); ++i) {
    up |= values[i] > values[i - 1];
    down |= values[i] < values[i - 1];
  }
  return up && down;
}

GapSweep gap_sweep(std::vector<int> sizes, int fixed_size, GapFixed fixed,
                   const Dataset& data,
                   const std::map<int, zoo::NetworkSpec>& specs,
                   const distill::DistillConfig& cfg) {
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  GapSweep out;
  out.fixed = fixed;
  out.fixed_size = fixed_size;
  if (fixed == GapFixed::kStudent) {
    const Trained scratch =
        fit(spec_for(specs, fixed_size), data, cfg, nullptr);
    for (int t : sizes) {
      if (t <= fixed_size)
        throw ConfigError("teacher sizes must exceed the student");
      const Trained teacher = fit(spec_for(specs, t), data, cfg, nullptr);
      const Trained student =
          fit(spec_for(specs, fixed_size), data, cfg, &teacher.model);
      GapRow row;
      row.size = t;
      row.distilled = student.model.metrics.test_acc;
      row.scratch = scratch.model.metrics.test_acc;
      row.teacher_acc = teacher.model.metrics.test_acc;
      row.gain_pct = percentage_gain(row.distilled, row.scratch);
      out.rows.push_back(row);
    }
  } else {
    const Trained teacher =
        fit(spec_for(specs, fixed_size), data, cfg, nullptr);
    for (int s : sizes) {
      if (s >= fixed_size)
        throw ConfigError("student sizes must be below the teacher");
      const Trained scratch = fit(spec_for(specs, s), data, cfg, nullptr);
      const Trained student =
          fit(spec_for(specs, s), data, cfg, &teacher.model);
      GapRow row;
      row.size = s;
      row.distilled = student.model.metrics.test_acc;
      row.scratch = scratch.model.metrics.test_acc;
      row.teacher_acc = teacher.model.metrics.test_acc;
      row.gain_pct = percentage_gain(row.distilled, row.scratch);
      out.rows.push_back(row);
    }
  }
  std::vector<double> distilled;
  for (const GapRow& r : out.rows) distilled.push_back(r.distilled);
  out.non_monotone = is_non_monotone(distilled);
  return out;
}

std::string to_csv(const GapSweep& s) {
  std::ostringstream out;
  out << (s.fixed == GapFixed::kStudent ? "teacher_size" : "student_size")
      << ",distilled,scratch,teacher_acc,gain_pct\n";
  for (const GapRow& r : s.rows) {
    out << r.size << ',' << fmt(r.distilled) << ',' << fmt(r.scratch) << ','
        << fmt(r.teacher_acc) << ',' << fmt(r.gain_pct) << '\n';
  }
  return out.str();
}

ProvenanceResult ta_provenance_experiment(
    int teacher, int assistant, int student, const Dataset& data,
    const std::map<int, zoo::NetworkSpec>& specs,
    const distill::DistillConfig& base,
    const std::vector<std::uint64_t>& seeds) {
  if (!(teacher > assistant && assistant > student)) {
    throw ConfigError(
        "assistant must lie strictly between teacher and student");
  }
  ProvenanceResult out;
  for (std::uint64_t seed : seeds) {
    distill::DistillConfig cfg = base;
    cfg.seed = seed;
    const Trained t = fit(spec_for(specs, teacher), data, cfg, nullptr);
    const Trained fs = fit(spec_for(specs, assistant), data, cfg, nullptr);
    const Trained kd = fit(spec_for(specs, assistant), data, cfg, &t.model);
    const Trained s_fs = fit(spec_for(specs, student), data, cfg, &fs.model);
    const Trained s_kd = fit(spec_for(specs, student), data, cfg, &kd.model);
    ProvenanceRow row{seed, fs.model.metrics.test_acc,
                      kd.model.metrics.test_acc, s_fs.model.metrics.test_acc,
                      s_kd.model.metrics.test_acc};
    out.rows.push_back(row);
    out.mean_from_scratch += row.student_from_scratch_assistant / seeds.size();
    out.mean_from_distilled +=
        row.student_from_distilled_assistant / seeds.size();
  }
  return out;
}

FlatnessComparison flatness_suite(int teacher, int assistant, int student,
                                  const Dataset& data,
                                  const std::map<int, zoo::NetworkSpec>& specs,
                                  const distill::DistillConfig& cfg,
                                  double radius, int steps) {
  const Trained t = fit(spec_for(specs, teacher), data, cfg, nullptr);
  const Trained ta = fit(spec_for(specs, assistant), data, cfg, &t.model);
  const Trained nokd = fit(spec_for(specs, student), data, cfg, nullptr);
  const Trained blkd = fit(spec_for(specs, student), data, cfg, &t.model);
  const Trained takd = fit(spec_for(specs, student), data, cfg, &ta.model);
  auto flatness = [&](const zoo::TrainedModel& m) {
    const auto dirs =
        landscape::filter_normalized_directions(m.params, cfg.seed);
    return landscape::flatness_metric(
        landscape::loss_surface(m, data.test, dirs, radius, steps));
  };
  FlatnessComparison out;
  out.nokd = flatness(nokd.model);
  out.blkd = flatness(blkd.model);
  out.takd = flatness(takd.model);
  out.takd_flatter_than_nokd = out.takd <= out.nokd;
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                RecordWriter* writer) {
  ExperimentOutput out;
  const std::string& task = cfg.task;

  if (task == "bounds") {
    const bounds::BoundParams p = bounds::bound_params_from_json(cfg.bounds);
    const bounds::Crossover x = bounds::find_crossover_n(p);
    out.summary = {{"params", bounds::to_json(p)},
                   {"nokd", bounds::nokd_bound(p)},
                   {"blkd", bounds::blkd_bound(p)},
                   {"takd", bounds::takd_bound(p)},
                   {"ordering", bounds::to_json(bounds::check_ordering(p))},
                   {"crossover", x.n ? json(*x.n) : json(nullptr)}};
    if (!x.n) out.summary["crossover_reason"] = x.reason;
    out.artifacts["bounds.csv"] =
        bounds::bounds_table_csv(p, bounds::decade_grid(0, 12));
    return out;
  }

  if (task == "path_search" && cfg.planner_mode != "train") {
    const planner::SizeLadder ladder{cfg.ladder};
    auto ev = make_evaluator(cfg, ladder, nullptr, nullptr);
    planner::ModelCache cache;
    const auto dp = planner::dp_optimal_path(ladder, cfg.k, *ev, cache);
    out.summary = {{"dp", planner::to_json(dp, ladder, cfg.k)}};
    if (cfg.verify) {
      const auto bf = planner::brute_force_optimal_path(ladder, cfg.k, *ev);
      out.summary["brute_force"] = planner::to_json(bf, ladder, cfg.k);
      out.summary["agree"] = bf.path == dp.path && bf.best.loss == dp.best.loss;
    }
    if (cfg.graph) out.summary["graph"] = planner::path_graph_json(ladder, *ev);
    out.artifacts["path_search.json"] = out.summary.dump(2) + "\n";
    return out;
  }

  const Dataset data = make_dataset(cfg.dataset);
  std::vector<int> sizes = cfg.effective_path();
  for (int q : cfg.ladder) sizes.push_back(q);
  for (int q : cfg.gap_sizes) sizes.push_back(q);
  sizes.push_back(cfg.gap_fixed_size);
  sizes.push_back(cfg.teacher);
  sizes.push_back(cfg.assistant);
  sizes.push_back(cfg.student);
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  sizes.erase(
      std::remove_if(sizes.begin(), sizes.end(), [](int q) { return q < 1; }),
      sizes.end());
  const auto specs = make_specs(cfg.model, sizes, data);

  if (task == "nokd" || task == "blkd" || task == "takd" || task == "chain") {
    const std::vector<int> path = cfg.effective_path();
    std::vector<distill::DistillConfig> configs;
    for (std::size_t i = 0; i < path.size(); ++i) {
      configs.push_back(i == 0 ? nokd_config(cfg.distill) : cfg.distill);
    }
    const auto steps = distill::distill_chain(path, specs, data, configs);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      emit(make_record(cfg.experiment_id, steps[i].model, configs[i],
                       steps[i].history),
           writer, out.records);
      out.models.push_back(steps[i].model);
    }
    out.summary = {{"path", path},
                   {"final_acc", steps.back().model.metrics.test_acc}};
    return out;
  }

  if (task == "table1") {
    Table1Options o;
    o.teacher = cfg.teacher;
    o.assistant = cfg.assistant;
    o.student = cfg.student;
    o.space = cfg.space;
    o.budget = cfg.budget;
    o.seeds = cfg.seeds;
    o.base = cfg.distill;
    o.experiment_id = cfg.experiment_id;
    const Table1Summary s = table1_suite(data, specs, o, writer);
    out.records = s.records;
    out.summary = {
        {"mean_nokd", s.mean_nokd},       {"mean_blkd", s.mean_blkd},
        {"mean_takd", s.mean_takd},       {"takd_ge_blkd", s.takd_ge_blkd},
        {"blkd_ge_nokd", s.blkd_ge_nokd}, {"seeds", s.rows.size()}};
    out.artifacts["table1.csv"] = to_csv(s);
    return out;
  }

  if (task == "path_search") {
    const planner::SizeLadder ladder{cfg.ladder};
    auto ev = make_evaluator(cfg, ladder, &data, &specs);
    planner::ModelCache cache;
    const auto dp = planner::dp_optimal_path(ladder, cfg.k, *ev, cache);
    out.summary = {{"dp", planner::to_json(dp, ladder, cfg.k)}};
    if (cfg.verify) {
      const auto bf = planner::brute_force_optimal_path(ladder, cfg.k, *ev);
      out.summary["brute_force"] = planner::to_json(bf, ladder, cfg.k);
      out.summary["agree"] = bf.path == dp.path && bf.best.loss == dp.best.loss;
    }
    if (cfg.graph) out.summary["graph"] = planner::path_graph_json(ladder, *ev);
    if (dp.best.model) out.models.push_back(*dp.best.model);
    out.artifacts["path_search.json"] = out.summary.dump(2) + "\n";
    return out;
  }

  if (task == "gap_sweep") {
    const GapFixed fixed =
        cfg.gap_fixed == "student" ? GapFixed::kStudent : GapFixed::kTeacher;
    const GapSweep s = gap_sweep(cfg.gap_sizes, cfg.gap_fixed_size, fixed, data,
                                 specs, cfg.distill);
    out.summary = {{"fixed", cfg.gap_fixed},
                   {"fixed_size", cfg.gap_fixed_size},
                   {"non_monotone", s.non_monotone}};
    out.artifacts["gap_sweep.csv"] = to_csv(s);
    return out;
  }

  if (task == "ta_provenance") {
    const ProvenanceResult r =
        ta_provenance_experiment(cfg.teacher, cfg.assistant, cfg.student, data,
                                 specs, cfg.distill, cfg.seeds);
    std::ostringstream csv;
    csv << "seed,scratch_assistant,distilled_assistant,"
           "student_from_scratch_assistant,student_from_distilled_assistant\n";
    for (const ProvenanceRow& row : r.rows) {
      csv << row.seed << ',' << fmt(row.scratch_assistant) << ','
          << fmt(row.distilled_assistant) << ','
          << fmt(row.student_from_scratch_assistant) << ','
          << fmt(row.student_from_distilled_assistant) << '\n';
    }
    out.summary = {{"mean_from_scratch", r.mean_from_scratch},
                   {"mean_from_distilled", r.mean_from_distilled}};
    out.artifacts["ta_provenance.csv"] = csv.str();
    return out;
  }

  // landscape: train the configured path, then map the final model.
  const std::vector<int> path = cfg.effective_path();
  std::vector<distill::DistillConfig> configs;
  for (std::size_t i = 0; i < path.size(); ++i) {
    configs.push_back(i == 0 ? nokd_config(cfg.distill) : cfg.distill);
  }
  const auto steps = distill::distill_chain(path, specs, data, configs);
  const zoo::TrainedModel& model = steps.back().model;
  const auto dirs =
      landscape::filter_normalized_directions(model.params, cfg.seed);
  const auto surface =
      landscape::loss_surface(model, data.test, dirs, cfg.radius, cfg.steps);
  out.summary = {{"path", path},
                 {"center_loss", surface.center_loss},
                 {"has_non_finite", surface.has_non_finite}};
  if (cfg.radius >= 1.0 && cfg.steps > 1) {
    out.summary["flatness"] = landscape::flatness_metric(surface);
  }
  out.artifacts["landscape_" + path_key(path) + ".csv"] =
      landscape::to_csv(surface);
  out.models.push_back(model);
  return out;
}

}  // namespace takd::harness
