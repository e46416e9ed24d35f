#include "drtk/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "drtk/complexity.hpp"
#include "drtk/error.hpp"
#include "drtk/io.hpp"
#include "drtk/optimize.hpp"
#include "drtk/synth.hpp"

namespace drtk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& arg) {
  const bool plain = !arg.empty() && std::all_of(arg.begin(), arg.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("-_.,/=:[]+").find(c) != std::string_view::npos;
  });
  if (plain) return arg;
  std::string out = "'";
  for (char c : arg) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

class Report {
 public:
  void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, fmt(value)); }
  void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
  void add(const std::string& key, const char* value) { add(key, std::string(value)); }
  void block(std::string text) { block_ = std::move(text); }

  void warnings(const Warnings& w) {
    add("warnings", w.messages.size());
    for (const auto& m : w.messages) add("warning", m);
  }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : lines_) out += k + ": " + v + "\n";
    if (!block_.empty()) out += "curve:\n" + block_;
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
  std::string block_;
};

std::string key_of(std::string column) {
  std::replace(column.begin(), column.end(), ':', '.');
  return column;
}

struct MetricFlags {
  std::vector<std::string> metrics;
  std::vector<std::size_t> ks;
  std::string cvm = "ch_adjusted";
  double growth_rate = 1.0;

  void bind(CLI::App* app, std::string default_metric) {
    metrics = {std::move(default_metric)};
    app->add_option("--metric", metrics, "tnc, mrre, label_tnc, label_tnc[dsc], spearman, pearson")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--k", ks, "neighborhood sizes for tnc, mrre")->delimiter(',');
    app->add_option("--cvm", cvm, "ch_adjusted or dsc, for label_tnc")->capture_default_str();
    app->add_option("--growth-rate", growth_rate, "CH_A logistic growth rate")->capture_default_str();
  }

  std::vector<MetricSpec> specs() const {
    std::vector<MetricSpec> out;
    for (const auto& token : metrics) {
      MetricSpec spec;
      std::string name = token;
      std::string cvm_name = cvm;
      if (const auto open = token.find('['); open != std::string::npos) {
        if (token.back() != ']') throw ParameterError("malformed metric '" + token + "'");
        name = token.substr(0, open);
        cvm_name = token.substr(open + 1, token.size() - open - 2);
      }
      spec.kind = metric_kind_from_string(name);
      if (!ks.empty()) spec.k_list = ks;
      spec.cvm.kind = cvm_kind_from_string(cvm_name);
      spec.cvm.growth_rate = growth_rate;
      spec.cvm.validate();
      out.push_back(std::move(spec));
    }
    if (out.empty()) throw ParameterError("at least one metric is required");
    return out;
  }
};

struct Input {
  CsvMatrix matrix;
  std::string digest;
};

Input load_matrix(const std::string& path) {
  const auto text = read_file(path);
  try {
    return {parse_matrix_csv(text), sha256_hex(text)};
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::optional<LabelPartition> load_labels(const std::string& path, const CsvMatrix& data, Report& report) {
  if (path.empty()) return data.labels;
  const auto text = read_file(path);
  report.add("input.labels.sha256", sha256_hex(text));
  try {
    auto labels = parse_labels_csv(text);
    if (labels.size() != data.data.rows())
      throw ParseError("label file has " + std::to_string(labels.size()) + " entries, data has " +
                       std::to_string(data.data.rows()) + " rows");
    return labels;
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::vector<Technique> parse_techniques(const std::vector<std::string>& names) {
  std::vector<Technique> out;
  for (const auto& n : names) out.push_back(Technique{technique_from_string(n), 2});
  if (out.empty()) throw ParameterError("at least one technique is required");
  return out;
}

void emit(const Report& report, const std::string& report_path, std::ostream& out) {
  const auto text = report.str();
  if (!report_path.empty()) write_file_atomic(report_path, text);
  out << text;
}

// Subcommand handlers -------------------------------------------------------

struct EvaluateCmd {
  std::string data, proj, labels, report_path;
  MetricFlags metric;

  void bind(CLI::App* app) {
    app->add_option("--data", data, "original data CSV")->required();
    app->add_option("--proj", proj, "projection CSV")->required();
    app->add_option("--labels", labels, "one-column label file");
    app->add_option("--report", report_path, "also write the report here");
    metric.bind(app, "tnc");
  }

  void run(Report& report) {
    const auto t0 = Clock::now();
    const auto specs = metric.specs();
    const auto X = load_matrix(data);
    const auto Z = load_matrix(proj);
    report.add("input.data.sha256", X.digest);
    report.add("input.proj.sha256", Z.digest);
    if (X.matrix.data.rows() != Z.matrix.data.rows())
      throw ParseError("projection has " + std::to_string(Z.matrix.data.rows()) + " rows, data has " +
                       std::to_string(X.matrix.data.rows()));
    const auto P = load_labels(labels, X.matrix, report);
    report.add("points", X.matrix.data.rows());
    for (const auto& spec : specs) {
      QualityScore s{};
      try {
        s = metric_eval(X.matrix.data, Z.matrix.data, P ? &*P : nullptr, spec);
      } catch (const Error& e) {
        throw DegenerateInputError("metric " + spec.name() + ": " + e.what());
      }
      const auto cols = metric_columns(spec);
      report.add("score." + key_of(cols[0]), s.value);
      if (s.components) {
        report.add("score." + key_of(cols[1]), s.components->first);
        report.add("score." + key_of(cols[2]), s.components->second);
      }
    }
    report.add("time.seconds", seconds_since(t0));
  }
};

struct ComplexityCmd {
  std::string data, report_path;
  std::vector<std::size_t> ks = kDefaultComplexityKs;

  void bind(CLI::App* app) {
    app->add_option("--data", data, "data CSV")->required();
    app->add_option("--ks", ks, "MNC neighborhood sizes")->delimiter(',')->capture_default_str();
    app->add_option("--report", report_path, "also write the report here");
  }

  void run(Report& report) {
    const auto t0 = Clock::now();
    const auto X = load_matrix(data);
    report.add("input.data.sha256", X.digest);
    report.add("points", X.matrix.data.rows());
    Warnings w;
    const auto f = complexity_features(X.matrix.data, ks, &w);
    report.add("pds", f.pds);
    for (auto k : f.ks) report.add("mnc.k" + std::to_string(k), f.mnc_by_k.at(k));
    report.add("features", f.as_vector().size());
    report.warnings(w);
    report.add("time.seconds", seconds_since(t0));
  }
};

struct OptimizeCmd {
  std::string data, labels, mode = "conventional", models, out_path, report_path;
  std::vector<std::string> techniques{"pca", "random_proj", "tsne"};
  std::size_t top_m = 1, budget = 50;
  std::uint64_t seed = 0;
  bool no_early_stop = false;
  MetricFlags metric;

  void bind(CLI::App* app) {
    app->add_option("--data", data, "data CSV")->required();
    app->add_option("--labels", labels, "one-column label file");
    app->add_option("--mode", mode, "conventional or adaptive")
        ->check(CLI::IsMember({"conventional", "adaptive"}))
        ->capture_default_str();
    app->add_option("--models", models, "model set written by pretrain (adaptive mode)");
    app->add_option("--techniques", techniques, "conventional mode techniques")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--top-m", top_m, "techniques kept by the adaptive workflow")->capture_default_str();
    app->add_option("--budget", budget, "evaluations per technique")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->required();
    app->add_flag("--no-early-stop", no_early_stop, "run every kept search to its full budget");
    app->add_option("--out", out_path, "best projection CSV");
    app->add_option("--report", report_path, "also write the report here");
    metric.bind(app, "tnc");
  }

  void run(Report& report) {
    const auto X = load_matrix(data);
    report.add("input.data.sha256", X.digest);
    const auto P = load_labels(labels, X.matrix, report);
    report.add("points", X.matrix.data.rows());
    report.add("mode", mode);
    Warnings w;
    const auto result = [&]() -> WorkflowResult {
      if (mode == "adaptive") {
        if (models.empty()) throw WorkflowError("adaptive mode requires --models");
        const auto text = read_file(models);
        report.add("input.models.sha256", sha256_hex(text));
        AdaptiveModelSet set;
        try {
          set = model_set_from_json(text);
        } catch (const ParseError& e) {
          throw ParseError(models + ": " + e.what());
        }
        report.add("metric", set.spec.name());
        AdaptiveOptions opt;
        opt.top_m = top_m;
        opt.budget_per_technique = budget;
        opt.seed = seed;
        opt.early_stop = !no_early_stop;
        auto r = adaptive_workflow(X.matrix.data, P ? &*P : nullptr, set, opt, &w);
        for (const auto& [t, pred] : r.predictions) report.add("prediction." + to_string(t.id), pred);
        return r;
      }
      const auto specs = metric.specs();
      if (specs.size() != 1) throw ParameterError("optimize takes exactly one metric");
      report.add("metric", specs[0].name());
      return conventional_workflow(X.matrix.data, P ? &*P : nullptr, parse_techniques(techniques), specs[0], budget,
                                   seed);
    }();
    report.add("chosen", to_string(result.chosen.id));
    for (const auto& [name, v] : result.best_params.values()) report.add("best.param." + name, v);
    report.add("best_score", result.best_score);
    report.add("evaluations", result.total_evaluations);
    for (const auto& tr : result.traces) {
      const auto prefix = "trace." + to_string(tr.technique.id) + ".";
      const auto failed = static_cast<std::size_t>(
          std::count_if(tr.trials.begin(), tr.trials.end(), [](const Trial& t) { return t.failed; }));
      report.add(prefix + "evaluations", tr.evaluations_used);
      report.add(prefix + "failed", failed);
      report.add(prefix + "best_score", tr.best_score);
      report.add(prefix + "terminated_early", tr.terminated_early);
      if (tr.stop_at) report.add(prefix + "stop_at", *tr.stop_at);
    }
    if (!out_path.empty()) {
      write_file_atomic(out_path, format_matrix_csv(result.best_projection));
      report.add("output.projection", out_path);
    }
    report.warnings(w);
    report.add("time.seconds", result.wall_seconds);
  }
};

struct PretrainCmd {
  std::string corpus, out_path, report_path;
  std::vector<std::string> techniques{"pca", "random_proj", "tsne"};
  std::vector<std::size_t> ks = kDefaultComplexityKs;
  std::size_t budget = 50;
  std::uint64_t seed = 0;
  MetricFlags metric;

  void bind(CLI::App* app) {
    app->add_option("--corpus", corpus, "directory of training CSV files")->required();
    app->add_option("--out", out_path, "model-set file")->required();
    app->add_option("--techniques", techniques, "techniques to model")->delimiter(',')->capture_default_str();
    app->add_option("--ks", ks, "MNC neighborhood sizes")->delimiter(',')->capture_default_str();
    app->add_option("--budget", budget, "evaluations per technique and dataset")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->required();
    app->add_option("--report", report_path, "also write the report here");
    metric.bind(app, "tnc");
  }

  void run(Report& report) {
    const auto t0 = Clock::now();
    const auto specs = metric.specs();
    if (specs.size() != 1) throw ParameterError("pretrain takes exactly one metric");
    namespace fs = std::filesystem;
    if (!fs::is_directory(corpus)) throw ParseError("corpus '" + corpus + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(corpus))
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<TrainingDataset> datasets;
    for (const auto& f : files) {
      auto in = load_matrix(f.string());
      report.add("input." + f.filename().string() + ".sha256", in.digest);
      datasets.push_back({std::move(in.matrix.data), std::move(in.matrix.labels), f.filename().string()});
    }
    report.add("datasets", datasets.size());
    report.add("metric", specs[0].name());
    Warnings w;
    const auto set = pretrain(datasets, parse_techniques(techniques), specs[0], ks, budget, seed, &w);
    write_file_atomic(out_path, model_set_to_json(set));
    report.add("output.models", out_path);
    for (const auto& tm : set.models) {
      const auto prefix = "model." + to_string(tm.technique.id) + ".";
      report.add(prefix + "regressor", to_string(tm.chosen));
      for (std::size_t i = 0; i < kRegressorKinds.size(); ++i)
        report.add(prefix + "r2." + to_string(kRegressorKinds[i]), tm.r2[i]);
      report.add(prefix + "r2_undefined", tm.r2_undefined);
      report.add(prefix + "constant_fallback", tm.constant_fallback);
    }
    report.warnings(w);
    report.add("time.seconds", seconds_since(t0));
  }
};

struct ExperimentCmd {
  std::string id, out_path, report_path;
  std::uint64_t seed = 0;
  MetricFlags metric;
  ExperimentParams params;
  std::size_t clusters = 0, per_cluster = 0, dim = 0;
  double spread = 0, separation = -1;

  void bind(CLI::App* app) {
    app->add_option("--id", id, "A, B1, B2, C, D, E, F, theorem_pds, theorem_mnc")->required();
    app->add_option("--seed", seed, "random seed")->required();
    app->add_option("--out", out_path, "curve CSV");
    app->add_option("--report", report_path, "also write the report here");
    app->add_option("--clusters", clusters, "blob clusters (A, C, D, F)");
    app->add_option("--per-cluster", per_cluster, "points per blob");
    app->add_option("--dim", dim, "blob dimension");
    app->add_option("--spread", spread, "blob standard deviation");
    app->add_option("--separation", separation, "blob center separation");
    app->add_option("--points-per-group", params.points_per_group, "ball/disc group size")->capture_default_str();
    app->add_option("--theorem-points", params.theorem_points, "sample size for theorem sweeps");
    app->add_option("--theorem-dims", params.theorem_dims, "dimensions for theorem sweeps")->delimiter(',');
    app->add_option("--theorem-ks", params.theorem_ks, "MNC ks for theorem_mnc")->delimiter(',');
    app->add_option("--theorem-seeds", params.theorem_seeds, "repetitions for theorem sweeps");
    metric.bind(app, "label_tnc");
  }

  void run(Report& report) {
    const auto t0 = Clock::now();
    const auto eid = experiment_from_string(id);
    if (clusters) params.clusters = clusters;
    if (per_cluster) params.per_cluster = per_cluster;
    if (dim) params.dim = dim;
    if (spread > 0) params.spread = spread;
    if (separation >= 0) params.separation = separation;
    const auto specs = metric.specs();
    const auto curve = run_experiment(eid, params, specs, seed);
    const auto csv = curve.to_csv();
    if (!out_path.empty()) {
      write_file_atomic(out_path, csv);
      report.add("output.curve", out_path);
    }
    report.add("experiment", to_string(eid));
    report.add("rows", curve.rows.size());
    report.add("missing", curve.notes.size());
    for (const auto& n : curve.notes) report.add("note", n);
    report.add("time.seconds", seconds_since(t0));
    report.block(csv);
  }
};

struct GenerateCmd {
  std::size_t blobs = 0, points = 100, per_cluster = 50, dim = 2;
  bool gaussian = false, ball = false;
  std::string ball_disc, out_path, proj_out, report_path;
  double spread = 1.0, separation = 10.0, radius = 1.0, value = 4.0;
  std::uint64_t seed = 0;

  void bind(CLI::App* app) {
    auto* g = app->add_option_group("generator");
    g->add_option("--blobs", blobs, "Gaussian blobs with this many clusters");
    g->add_flag("--gaussian", gaussian, "i.i.d. standard normal matrix");
    g->add_flag("--ball", ball, "uniform samples from a ball");
    g->add_option("--ball-disc", ball_disc, "pair_angle, disc_distance or ball_distance");
    g->require_option(1);
    app->add_option("--points", points, "rows for --gaussian and --ball")->capture_default_str();
    app->add_option("--per-cluster", per_cluster, "rows per blob, or per ball/disc group")->capture_default_str();
    app->add_option("--dim", dim, "dimension")->capture_default_str();
    app->add_option("--spread", spread, "blob standard deviation")->capture_default_str();
    app->add_option("--separation", separation, "blob center separation")->capture_default_str();
    app->add_option("--radius", radius, "ball radius")->capture_default_str();
    app->add_option("--value", value, "ball/disc sweep value")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->required();
    app->add_option("--out", out_path, "output CSV")->required();
    app->add_option("--proj-out", proj_out, "ball/disc projection CSV");
    app->add_option("--report", report_path, "also write the report here");
  }

  void run(Report& report) {
    std::string text;
    if (blobs) {
      const auto m = gaussian_blobs(blobs, per_cluster, dim, spread, separation, seed);
      text = format_matrix_csv(m.data, &m.labels);
      report.add("generator", "blobs");
      report.add("rows", m.data.rows());
    } else if (gaussian) {
      text = format_matrix_csv(iid_gaussian(points, dim, seed));
      report.add("generator", "gaussian");
      report.add("rows", points);
    } else if (ball) {
      text = format_matrix_csv(uniform_ball(points, dim, radius, seed));
      report.add("generator", "ball");
      report.add("rows", points);
    } else {
      BallDiscParams p;
      if (ball_disc == "pair_angle")
        p.mode = BallDiscMode::pair_angle;
      else if (ball_disc == "disc_distance")
        p.mode = BallDiscMode::disc_distance;
      else if (ball_disc == "ball_distance")
        p.mode = BallDiscMode::ball_distance;
      else
        throw ParameterError("unknown ball/disc mode '" + ball_disc + "'");
      p.sweep_value = value;
      p.points_per_group = per_cluster;
      p.seed = seed;
      const auto cfg = ball_disc_config(p);
      text = format_matrix_csv(cfg.data, &cfg.labels);
      report.add("generator", "ball_disc." + ball_disc);
      report.add("rows", cfg.data.rows());
      if (!proj_out.empty()) {
        const auto proj = format_matrix_csv(cfg.projection, &cfg.labels);
        write_file_atomic(proj_out, proj);
        report.add("output.projection", proj_out);
        report.add("output.projection.sha256", sha256_hex(proj));
      }
    }
    write_file_atomic(out_path, text);
    report.add("output.data", out_path);
    report.add("output.data.sha256", sha256_hex(text));
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projection quality, dataset complexity and adaptive DR optimization"};
  app.name("drtk");
  app.require_subcommand(1);

  EvaluateCmd evaluate;
  ComplexityCmd complexity;
  OptimizeCmd optimize;
  PretrainCmd pretrain_cmd;
  ExperimentCmd experiment;
  GenerateCmd generate;
  evaluate.bind(app.add_subcommand("evaluate", "score a projection"));
  complexity.bind(app.add_subcommand("complexity", "PDS and MNC features"));
  optimize.bind(app.add_subcommand("optimize", "conventional or adaptive hyperparameter search"));
  pretrain_cmd.bind(app.add_subcommand("pretrain", "fit accuracy predictors on a corpus"));
  experiment.bind(app.add_subcommand("experiment", "export a sensitivity curve"));
  generate.bind(app.add_subcommand("generate", "write a synthetic dataset"));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  Report report;
  std::string command = "drtk";
  for (const auto& a : args) command += " " + quote(a);
  report.add("command", command);

  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    std::string report_path;
    if (name == "evaluate") {
      report.add("seed", "none");
      evaluate.run(report);
      report_path = evaluate.report_path;
    } else if (name == "complexity") {
      report.add("seed", "none");
      complexity.run(report);
      report_path = complexity.report_path;
    } else if (name == "optimize") {
      report.add("seed", std::to_string(optimize.seed));
      optimize.run(report);
      report_path = optimize.report_path;
    } else if (name == "pretrain") {
      report.add("seed", std::to_string(pretrain_cmd.seed));
      pretrain_cmd.run(report);
      report_path = pretrain_cmd.report_path;
    } else if (name == "experiment") {
      report.add("seed", std::to_string(experiment.seed));
      experiment.run(report);
      report_path = experiment.report_path;
    } else {
      report.add("seed", std::to_string(generate.seed));
      generate.run(report);
      report_path = generate.report_path;
    }
    emit(report, report_path, out);
    return kExitOk;
  } catch (const ParseError& e) {
    err << "drtk " << name << ": input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "drtk " << name << ": " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "drtk " << name << ": internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace drtk
