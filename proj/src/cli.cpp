#include "jamflow/cli.hpp"

#include <glob.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "jamflow/datagen.hpp"
#include "jamflow/digest.hpp"
#include "jamflow/errors.hpp"
#include "jamflow/eval.hpp"
#include "jamflow/ingest.hpp"
#include "jamflow/manifest.hpp"
#include "jamflow/matrix_io.hpp"
#include "jamflow/parallel.hpp"
#include "jamflow/trees/model_io.hpp"

namespace jamflow {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using trees::ModelKind;
using trees::TrainConfig;

namespace {

json read_json_file(std::string const& path) {
  std::ifstream in{path};
  if (!in) {
    throw_io("cannot open config file", path);
  }
  try {
    return json::parse(in);
  } catch (json::parse_error const& e) {
    throw ConfigError{fmt::format("config file {} is not valid JSON: {}", path, e.what())};
  }
}

void write_text(fs::path const& path, std::string const& text) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out{path, std::ios::binary | std::ios::trunc};
  if (!out) {
    throw_io("cannot open output file", path.string());
  }
  out << text;
  if (!out) {
    throw_io("failed writing output file", path.string());
  }
}

std::vector<fs::path> expand_globs(std::vector<std::string> const& patterns) {
  std::set<std::string> seen;
  std::vector<fs::path> files;
  for (auto const& pattern : patterns) {
    glob_t g{};
    if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
      std::vector<std::string> matched(g.gl_pathv, g.gl_pathv + g.gl_pathc);
      std::sort(matched.begin(), matched.end());
      for (auto& m : matched) {
        if (fs::is_regular_file(m) && seen.insert(m).second) {
          files.emplace_back(std::move(m));
        }
      }
    }
    ::globfree(&g);
  }
  return files;
}

std::string joined_command(std::span<std::string const> args) {
  std::string s;
  for (auto const& a : args) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

/// Shared per-invocation context for manifests.
struct Context {
  std::string command_line;

  RunManifest manifest(std::string const& config_hash, std::optional<std::uint64_t> seed,
                       std::size_t n_workers) const {
    RunManifest m;
    m.command_line = command_line;
    m.config_hash = config_hash;
    m.seed = seed;
    m.n_workers = n_workers;
    m.tool_version = tool_version();
    m.created_utc = utc_now();
    return m;
  }
};

/// Writes one sidecar per artifact, each listing every artifact of the run.
void write_manifests(RunManifest manifest, std::vector<fs::path> const& artifacts) {
  for (auto const& a : artifacts) {
    manifest.artifacts.push_back(digest_file(a));
  }
  for (auto const& a : artifacts) {
    write_manifest(manifest_path_for(a), manifest);
  }
}

// ---------------------------------------------------------------------------
// Tree config flags shared by train and bench.

struct TreeFlags {
  std::optional<std::string> config_file;
  std::optional<std::size_t> n_trees;
  std::optional<int> max_depth;
  std::optional<std::size_t> max_leaves;
  std::optional<double> learning_rate;
  std::optional<double> lambda;
  std::optional<double> gamma;
  std::optional<double> min_child_weight;
  std::optional<std::size_t> max_bins;
  std::optional<double> subsample_rows;
  std::optional<double> subsample_features;
  std::optional<bool> bootstrap;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> partitions;
  double train_fraction{0.75};

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "JSON file of tree settings; explicit flags win")
        ->check(CLI::ExistingFile);
    app.add_option("--trees", n_trees, "Number of trees (default 100)");
    app.add_option("--max-depth", max_depth, "Maximum tree depth (default 5)");
    app.add_option("--max-leaves", max_leaves, "Maximum leaves per tree (default 256)");
    app.add_option("--learning-rate", learning_rate, "Boosting shrinkage (default 0.3)");
    app.add_option("--lambda", lambda, "L2 penalty on leaf weights (default 1)");
    app.add_option("--gamma", gamma, "Minimum split gain (default 0)");
    app.add_option("--min-child-weight", min_child_weight,
                   "Minimum hessian mass per child (default 1)");
    app.add_option("--max-bins", max_bins, "Quantization bins per feature (default 256)");
    app.add_option("--subsample-rows", subsample_rows, "Forest row sampling fraction (default 1)");
    app.add_option("--subsample-features", subsample_features,
                   "Forest per-node feature fraction (default 1)");
    app.add_option("--bootstrap", bootstrap, "Forest rows drawn with replacement (default true)");
    app.add_option("--seed", seed, "Seed for training and the train/test split (default 0)");
    app.add_option("--partitions", partitions,
                   "Row partitions for histogram building (default 16); changes the model");
    app.add_option("--train-fraction", train_fraction,
                   "Share of rows used for training; 1 trains (and evaluates) on every row")
        ->check(CLI::Range(0.0, 1.0));
  }

  TrainConfig resolve() const {
    TrainConfig c;
    if (config_file) {
      c = trees::config_from_json(read_json_file(*config_file), c);
    }
    if (n_trees) c.n_trees = *n_trees;
    if (max_depth) c.max_depth = *max_depth;
    if (max_leaves) c.max_leaves = *max_leaves;
    if (learning_rate) c.learning_rate = *learning_rate;
    if (lambda) c.lambda = *lambda;
    if (gamma) c.gamma = *gamma;
    if (min_child_weight) c.min_child_weight = *min_child_weight;
    if (max_bins) c.max_bins = *max_bins;
    if (subsample_rows) c.subsample_rows = *subsample_rows;
    if (subsample_features) c.subsample_features = *subsample_features;
    if (bootstrap) c.bootstrap = *bootstrap;
    if (seed) c.seed = *seed;
    if (partitions) c.n_partitions = *partitions;
    c.validate();
    return c;
  }
};

void add_workers_flag(CLI::App& app, std::size_t& workers) {
  app.add_option("--workers", workers, "Worker threads (default 1)")
      ->envname("JAMFLOW_WORKERS")
      ->check(CLI::PositiveNumber);
}

/// Columns of `matrix` matching the named feature set (or itself when absent).
FeatureMatrix project(FeatureMatrix matrix, std::optional<std::string> const& feature_set) {
  if (!feature_set) {
    return matrix;
  }
  auto const set = parse_feature_set(*feature_set);
  if (!set || *set == FeatureSet::kCustom) {
    throw ConfigError{fmt::format("unknown feature set '{}'", *feature_set)};
  }
  auto const target = FeatureSchema::named(*set);
  if (matrix.schema() == target) {
    return matrix;
  }
  return matrix.select(target);
}

/// Columns of `matrix` the model was trained on, in model order.
FeatureMatrix project_for(FeatureMatrix const& matrix, trees::Ensemble const& model) {
  FeatureSchema target;
  target.feature_set = model.schema.feature_set;
  for (auto const& name : model.schema.feature_names) {
    auto const idx = matrix.schema().index_of(name);
    if (!idx) {
      throw SchemaError{fmt::format("model feature '{}' is not present in the matrix", name)};
    }
    target.features.push_back(matrix.schema().features[*idx]);
  }
  if (target.fingerprint() != model.schema.fingerprint) {
    throw SchemaError{"matrix columns do not match the model schema fingerprint"};
  }
  return target == matrix.schema() ? matrix : matrix.select(target);
}

ordered_json ingest_report_json(IngestReport const& r) {
  return {{"files_read", r.files_read},
          {"rows_accepted", r.rows_accepted},
          {"rows_rejected", r.rows_rejected},
          {"rejection_reasons", r.rejection_reasons}};
}

// ---------------------------------------------------------------------------
// generate

struct GenerateFlags {
  std::optional<std::string> config_file;
  std::optional<long long> n_jams;
  std::optional<long long> n_alerts;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> level_weights;
  std::optional<std::vector<double>> event_weights;
  std::optional<double> coupling_noise;
  std::optional<long long> window_begin_ms;
  std::optional<long long> window_end_ms;
  std::size_t shards{1};
  std::size_t workers{1};
  std::string out_dir;
};

std::size_t as_count(long long v, char const* what) {
  if (v < 0) {
    throw ConfigError{fmt::format("{} must be non-negative, got {}", what, v)};
  }
  return static_cast<std::size_t>(v);
}

GenConfig resolve(GenerateFlags const& f, std::size_t& shards) {
  GenConfig c;
  auto n_jams = f.n_jams;
  auto n_alerts = f.n_alerts;
  if (f.config_file) {
    auto const j = read_json_file(*f.config_file);
    if (!j.is_object()) {
      throw ConfigError{"generator config must be a JSON object"};
    }
    try {
      if (j.contains("n_jams") && !n_jams) n_jams = j.at("n_jams").get<long long>();
      if (j.contains("n_alerts") && !n_alerts) n_alerts = j.at("n_alerts").get<long long>();
      if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("level_weights")) c.level_weights = j.at("level_weights").get<std::array<double, 5>>();
      if (j.contains("event_weights")) c.event_weights = j.at("event_weights").get<std::array<double, 4>>();
      if (j.contains("coupling_noise")) c.coupling_noise = j.at("coupling_noise").get<double>();
      if (j.contains("window_begin_ms")) {
        c.window_begin = UtcMillis{std::chrono::milliseconds{j.at("window_begin_ms").get<long long>()}};
      }
      if (j.contains("window_end_ms")) {
        c.window_end = UtcMillis{std::chrono::milliseconds{j.at("window_end_ms").get<long long>()}};
      }
      if (j.contains("shards") && shards == 1) shards = j.at("shards").get<std::size_t>();
    } catch (json::exception const& e) {
      throw ConfigError{fmt::format("bad generator config: {}", e.what())};
    }
  }
  if (n_jams) c.n_jams = as_count(*n_jams, "--jams");
  if (n_alerts) c.n_alerts = as_count(*n_alerts, "--alerts");
  if (f.seed) c.seed = *f.seed;
  if (f.level_weights) {
    if (f.level_weights->size() != 5) throw ConfigError{"--level-weights needs 5 values"};
    std::copy(f.level_weights->begin(), f.level_weights->end(), c.level_weights.begin());
  }
  if (f.event_weights) {
    if (f.event_weights->size() != 4) throw ConfigError{"--event-weights needs 4 values"};
    std::copy(f.event_weights->begin(), f.event_weights->end(), c.event_weights.begin());
  }
  if (f.coupling_noise) c.coupling_noise = *f.coupling_noise;
  if (f.window_begin_ms) c.window_begin = UtcMillis{std::chrono::milliseconds{*f.window_begin_ms}};
  if (f.window_end_ms) c.window_end = UtcMillis{std::chrono::milliseconds{*f.window_end_ms}};
  if (shards == 0) throw ConfigError{"--shards must be at least 1"};
  c.validate();
  return c;
}

ordered_json gen_config_json(GenConfig const& c, std::size_t shards) {
  return {{"n_jams", c.n_jams},
          {"n_alerts", c.n_alerts},
          {"seed", c.seed},
          {"level_weights", c.level_weights},
          {"event_weights", c.event_weights},
          {"coupling_noise", c.coupling_noise},
          {"window_begin_ms", c.window_begin.time_since_epoch().count()},
          {"window_end_ms", c.window_end.time_since_epoch().count()},
          {"shards", shards}};
}

void generate_file(fs::path const& path, GenConfig const& c, bool alerts) {
  std::ofstream out{path, std::ios::binary | std::ios::trunc};
  if (!out) {
    throw_io("cannot open output file", path.string());
  }
  if (alerts) {
    generate_alerts(c, out);
  } else {
    generate_jams(c, out);
  }
  out.flush();
  if (!out) {
    throw_io("failed writing output file", path.string());
  }
}

void cmd_generate(GenerateFlags const& f, Context const& ctx, std::ostream& out) {
  auto shards = f.shards;
  auto const config = resolve(f, shards);
  fs::create_directories(f.out_dir);
  fs::path const dir{f.out_dir};

  // Shard i carries its share of rows and seed + i; one shard reproduces the plain stream.
  auto const jam_plan = partition_rows(config.n_jams, shards);
  auto const alert_plan = partition_rows(config.n_alerts, shards);
  auto name = [&](char const* stem, std::size_t i) {
    return shards == 1 ? dir / fmt::format("{}.jsonl", stem)
                       : dir / fmt::format("{}-{:05}.jsonl", stem, i);
  };
  struct Job {
    fs::path path;
    GenConfig config;
    bool alerts;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i != shards; ++i) {
    auto c = config;
    c.seed = config.seed + i;
    c.n_jams = jam_plan.ranges[i].size();
    c.n_alerts = alert_plan.ranges[i].size();
    jobs.push_back({name("jams", i), c, false});
    if (config.n_alerts > 0) {
      jobs.push_back({name("alerts", i), c, true});
    }
  }
  WorkerPool pool{std::min(f.workers, jobs.size())};
  pool.parallel_for(jobs.size(), [&](std::size_t i) {
    generate_file(jobs[i].path, jobs[i].config, jobs[i].alerts);
  });

  std::vector<fs::path> artifacts;
  for (auto const& j : jobs) artifacts.push_back(j.path);
  auto const hash = sha256_hex(gen_config_json(config, shards).dump());
  write_manifests(ctx.manifest(hash, config.seed, f.workers), artifacts);
  for (auto const& a : artifacts) {
    out << a.string() << '\n';
  }
}

// ---------------------------------------------------------------------------
// ingest

struct IngestFlags {
  std::vector<std::string> inputs;
  std::vector<std::string> alert_inputs;
  std::string feature_set{"leaky"};
  std::vector<std::string> features;
  std::optional<std::string> encoding_from;
  bool no_window{false};
  std::string out;
};

void cmd_ingest(IngestFlags const& f, Context const& ctx, std::ostream& out) {
  auto const files = expand_globs(f.inputs);
  if (files.empty()) {
    throw IoError{"no input files"};
  }
  FeatureSchema schema;
  if (!f.features.empty()) {
    schema = FeatureSchema::from_sources(f.features);
  } else {
    auto const set = parse_feature_set(f.feature_set);
    if (!set || *set == FeatureSet::kCustom) {
      throw ConfigError{fmt::format("unknown feature set '{}'", f.feature_set)};
    }
    schema = FeatureSchema::named(*set);
  }
  std::optional<EncodingMap> frozen;
  if (f.encoding_from) {
    frozen = read_matrix(*f.encoding_from).encoding;
  }
  auto const clean_config = f.no_window ? CleanConfig::no_window() : CleanConfig::default_window();
  auto result = ingest_jam_files(files, schema, clean_config, frozen ? &*frozen : nullptr);

  ordered_json report = ingest_report_json(result.report);
  std::vector<fs::path> alert_files;
  if (!f.alert_inputs.empty()) {
    alert_files = expand_globs(f.alert_inputs);
    report["alerts"] = ingest_report_json(ingest_alert_files(alert_files));
  }
  report["feature_set"] = to_string(schema.feature_set);
  report["schema_fingerprint"] = schema.fingerprint();
  report["n_features"] = schema.size();
  std::size_t positives = 0;
  for (auto const l : result.matrix.labels()) positives += l;
  report["positive_rows"] = positives;

  fs::path const matrix_path{f.out};
  if (matrix_path.has_parent_path()) {
    fs::create_directories(matrix_path.parent_path());
  }
  auto report_path = matrix_path;
  report_path.replace_filename(matrix_path.filename().string() + ".report.json");
  auto const manifest_name = manifest_path_for(matrix_path).filename().string();
  report["manifest"] = manifest_path_for(report_path).filename().string();

  write_matrix(matrix_path, {std::move(result.matrix), std::move(result.encoding), manifest_name});
  write_text(report_path, report.dump(2) + "\n");

  ordered_json config = {{"feature_set", to_string(schema.feature_set)},
                         {"schema_fingerprint", schema.fingerprint()},
                         {"window", !f.no_window},
                         {"encoding_from", f.encoding_from.value_or("")}};
  auto manifest = ctx.manifest(sha256_hex(config.dump()), std::nullopt, 1);
  for (auto const& file : files) manifest.inputs.push_back(digest_file(file));
  for (auto const& file : alert_files) manifest.inputs.push_back(digest_file(file));
  write_manifests(std::move(manifest), {matrix_path, report_path});
  out << report.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// train / evaluate / bench

struct TrainFlags {
  std::string matrix;
  std::string model;
  std::optional<std::string> feature_set;
  TreeFlags tree;
  std::size_t workers{1};
  std::string out;
};

FeatureMatrix training_rows(FeatureMatrix const& matrix, double fraction, std::uint64_t seed,
                            bool want_train) {
  if (fraction >= 1.0) {
    return matrix;
  }
  auto const idx = eval::split_indices(matrix.n_rows(), fraction, seed);
  return matrix.take_rows(want_train ? idx.train : idx.test);
}

void cmd_train(TrainFlags const& f, Context const& ctx, std::ostream& out) {
  auto config = f.tree.resolve();
  config.n_workers = f.workers;
  auto const kind = *trees::parse_model_kind(f.model);
  auto const matrix = project(read_matrix(f.matrix).matrix, f.feature_set);
  auto const rows = training_rows(matrix, f.tree.train_fraction, config.seed, true);
  auto const model = trees::train(kind, rows, config);

  fs::path const model_path{f.out};
  if (model_path.has_parent_path()) {
    fs::create_directories(model_path.parent_path());
  }
  trees::write_model(model_path, model, manifest_path_for(model_path).filename().string());

  auto config_json = trees::config_to_json(model.config);
  config_json["model"] = to_string(kind);
  config_json["train_fraction"] = f.tree.train_fraction;
  config_json["feature_set"] = to_string(matrix.schema().feature_set);
  auto manifest = ctx.manifest(sha256_hex(config_json.dump()), config.seed, f.workers);
  manifest.inputs.push_back(digest_file(f.matrix));
  write_manifests(std::move(manifest), {model_path});
  out << fmt::format("trained {} with {} trees on {} rows -> {}\n", to_string(kind),
                     model.trees.size(), rows.n_rows(), model_path.string());
}

struct EvaluateFlags {
  std::string model;
  std::string matrix;
  double train_fraction{0.75};
  std::optional<std::uint64_t> seed;
  double threshold{eval::kDefaultThreshold};
  std::size_t workers{1};
  std::optional<std::string> out;
};

void cmd_evaluate(EvaluateFlags const& f, Context const& ctx, std::ostream& out) {
  auto const model = trees::read_model(f.model);
  auto const matrix = project_for(read_matrix(f.matrix).matrix, model);
  auto const seed = f.seed.value_or(model.config.seed);
  auto const test = training_rows(matrix, f.train_fraction, seed, false);
  auto const report = eval::evaluate(model, test, f.threshold, f.workers);
  auto j = eval::report_to_json(report);
  if (f.out) {
    fs::path const path{*f.out};
    j["manifest"] = manifest_path_for(path).filename().string();
    write_text(path, j.dump(2) + "\n");
    ordered_json config = {{"train_fraction", f.train_fraction},
                           {"seed", seed},
                           {"threshold", f.threshold}};
    auto manifest = ctx.manifest(sha256_hex(config.dump()), seed, f.workers);
    manifest.inputs.push_back(digest_file(f.model));
    manifest.inputs.push_back(digest_file(f.matrix));
    write_manifests(std::move(manifest), {path});
  }
  out << j.dump(2) << '\n';
}

struct BenchFlags {
  std::string matrix;
  std::vector<std::string> models{"rf", "gbt", "xgb"};
  std::optional<std::string> feature_set;
  std::vector<std::size_t> workers;
  TreeFlags tree;
  double threshold{eval::kDefaultThreshold};
  std::optional<std::string> out_json;
  std::optional<std::string> out_csv;
  std::optional<std::string> out_table;
};

void cmd_bench(BenchFlags const& f, Context const& ctx, std::ostream& out) {
  auto const config = f.tree.resolve();
  auto const matrix = project(read_matrix(f.matrix).matrix, f.feature_set);
  auto workers = f.workers;
  if (workers.empty()) {
    workers.push_back(1);
  }
  std::vector<eval::BenchConfig> configs;
  for (auto const& name : f.models) {
    auto const kind = trees::parse_model_kind(name);
    if (!kind) {
      throw ConfigError{fmt::format("unknown model '{}'", name)};
    }
    for (auto const w : workers) {
      auto c = config;
      c.n_workers = w;
      configs.push_back({*kind, c});
    }
  }
  eval::BenchOptions options;
  options.train_fraction = f.tree.train_fraction;
  options.split_seed = config.seed;
  options.threshold = f.threshold;
  auto const reports = eval::bench(matrix, configs, options);
  auto const scaling = eval::scaling_summary(reports);

  auto const table = eval::render_table(reports);
  out << table;
  for (auto const& s : scaling) {
    out << fmt::format("{} speedup {}w vs {}w: {:.2f}x ({:.2f} s -> {:.2f} s)\n",
                       trees::display_name(s.kind), s.top_workers, s.base_workers, s.speedup,
                       s.base_seconds, s.top_seconds);
  }

  std::vector<fs::path> artifacts;
  if (f.out_json) {
    fs::path const path{*f.out_json};
    ordered_json j = {{"manifest", manifest_path_for(path).filename().string()},
                      {"reports", ordered_json::array()},
                      {"scaling", eval::scaling_to_json(scaling)}};
    for (auto const& r : reports) j["reports"].push_back(eval::report_to_json(r));
    write_text(path, j.dump(2) + "\n");
    artifacts.push_back(path);
  }
  if (f.out_csv) {
    write_text(*f.out_csv, eval::render_csv(reports));
    artifacts.emplace_back(*f.out_csv);
  }
  if (f.out_table) {
    write_text(*f.out_table, table);
    artifacts.emplace_back(*f.out_table);
  }
  if (!artifacts.empty()) {
    auto config_json = trees::config_to_json(config);
    config_json["models"] = f.models;
    config_json["workers"] = workers;
    config_json["train_fraction"] = f.tree.train_fraction;
    auto manifest = ctx.manifest(sha256_hex(config_json.dump()), config.seed,
                                 *std::max_element(workers.begin(), workers.end()));
    manifest.inputs.push_back(digest_file(f.matrix));
    write_manifests(std::move(manifest), artifacts);
  }
  for (auto const& r : reports) {
    if (r.error && !r.auc) {
      throw ValidationError{fmt::format("{} failed: {}", to_string(r.kind), *r.error)};
    }
  }
}

}  // namespace

int run_cli(std::span<std::string const> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic jam classification pipeline: generate, ingest, train, evaluate, bench",
               "jamflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "Write synthetic jam and alert JSONL files");
  generate->add_option("--config", gen.config_file, "JSON generator config; explicit flags win")
      ->check(CLI::ExistingFile);
  generate->add_option("--jams", gen.n_jams, "Number of jam rows");
  generate->add_option("--alerts", gen.n_alerts, "Number of alert rows (default 0)");
  generate->add_option("--seed", gen.seed, "Generator seed (default 42)");
  generate->add_option("--level-weights", gen.level_weights, "Five comma-separated level weights")
      ->delimiter(',');
  generate->add_option("--event-weights", gen.event_weights,
                       "Four comma-separated alert type weights")
      ->delimiter(',');
  generate->add_option("--coupling-noise", gen.coupling_noise,
                       "Noise on speed/length/delay relative to the band midpoint (default 0)");
  generate->add_option("--window-begin-ms", gen.window_begin_ms,
                       "Earliest pub_date, epoch milliseconds");
  generate->add_option("--window-end-ms", gen.window_end_ms,
                       "End of the pub_date window (exclusive), epoch milliseconds");
  generate->add_option("--shards", gen.shards, "Output files per stream; shard i uses seed + i");
  add_workers_flag(*generate, gen.workers);
  generate->add_option("--out", gen.out_dir, "Output directory")->required();

  IngestFlags ing;
  auto* ingest = app.add_subcommand("ingest", "Parse, clean and encode jam JSONL into a matrix");
  ingest->add_option("--input", ing.inputs, "Jam file glob(s)")->required();
  ingest->add_option("--alerts", ing.alert_inputs, "Alert file glob(s), validated and reported");
  ingest->add_option("--feature-set", ing.feature_set, "leaky or honest (default leaky)")
      ->check(CLI::IsMember({"leaky", "honest"}));
  ingest->add_option("--features", ing.features, "Custom comma-separated source fields")
      ->delimiter(',');
  ingest->add_option("--encoding-from", ing.encoding_from,
                     "Reuse the category encoding of an existing matrix file")
      ->check(CLI::ExistingFile);
  ingest->add_flag("--no-window", ing.no_window, "Keep rows outside the collection window");
  ingest->add_option("--out", ing.out, "Output matrix path")->required();

  TrainFlags tr;
  auto* train = app.add_subcommand("train", "Train a tree ensemble on a matrix file");
  train->add_option("--matrix", tr.matrix, "Input matrix file")->required()->check(CLI::ExistingFile);
  train->add_option("--model", tr.model, "rf, gbt or xgb")
      ->required()
      ->check(CLI::IsMember({"rf", "gbt", "xgb"}));
  train->add_option("--feature-set", tr.feature_set, "Project the matrix onto leaky or honest")
      ->check(CLI::IsMember({"leaky", "honest"}));
  tr.tree.attach(*train);
  add_workers_flag(*train, tr.workers);
  train->add_option("--out", tr.out, "Output model path")->required();

  EvaluateFlags ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score a trained model on a matrix file");
  evaluate->add_option("--model", ev.model, "Model file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--matrix", ev.matrix, "Matrix file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--train-fraction", ev.train_fraction,
                       "Evaluate on the held-out side of this split; 1 uses every row")
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--seed", ev.seed, "Split seed (default: the model's training seed)");
  evaluate->add_option("--threshold", ev.threshold, "Positive iff score >= threshold");
  add_workers_flag(*evaluate, ev.workers);
  evaluate->add_option("--out", ev.out, "EvalReport JSON path");

  BenchFlags be;
  auto* bench = app.add_subcommand("bench", "Train and score several models; print a table");
  bench->add_option("--matrix", be.matrix, "Input matrix file")->required()->check(CLI::ExistingFile);
  bench->add_option("--models", be.models, "Comma-separated subset of rf,gbt,xgb")
      ->delimiter(',')
      ->check(CLI::IsMember({"rf", "gbt", "xgb"}));
  bench->add_option("--feature-set", be.feature_set, "Project the matrix onto leaky or honest")
      ->check(CLI::IsMember({"leaky", "honest"}));
  bench->add_option("--workers", be.workers, "Comma-separated worker counts (default 1)")
      ->delimiter(',')
      ->envname("JAMFLOW_WORKERS")
      ->check(CLI::PositiveNumber);
  be.tree.attach(*bench);
  bench->add_option("--threshold", be.threshold, "Positive iff score >= threshold");
  bench->add_option("--out-json", be.out_json, "EvalReport JSON path");
  bench->add_option("--out-csv", be.out_csv, "CSV table path");
  bench->add_option("--out-table", be.out_table, "Text table path");

  std::vector<char const*> argv;
  for (auto const& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (CLI::ParseError const& e) {
    return app.exit(e, out, err) == 0 ? 0 : static_cast<int>(ExitCode::kValidation);
  }

  Context const ctx{joined_command(args)};
  try {
    if (*generate) cmd_generate(gen, ctx, out);
    if (*ingest) cmd_ingest(ing, ctx, out);
    if (*train) cmd_train(tr, ctx, out);
    if (*evaluate) cmd_evaluate(ev, ctx, out);
    if (*bench) cmd_bench(be, ctx, out);
  } catch (IoError const& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kIo);
  } catch (fs::filesystem_error const& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kIo);
  } catch (std::exception const& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kValidation);
  }
  return static_cast<int>(ExitCode::kOk);
}

}  // namespace jamflow
