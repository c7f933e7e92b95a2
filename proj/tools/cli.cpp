#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgcp/baselines.hpp"
#include "mgcp/cli.hpp"
#include "mgcp/metrics.hpp"
#include "mgcp/simulate.hpp"

namespace mgcp::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Simulation make_simulation(const BenchmarkConfig& c, std::uint64_t seed) {
  switch (c.setting) {
    case 1:
      return gen_setting1(c.outputs > 0 ? c.outputs : 5, c.points > 0 ? c.points : 10, c.sigma >= 0 ? c.sigma : 0.1,
                          seed);
    case 2:
      return gen_setting2(c.outputs > 0 ? c.outputs : 5, c.points > 0 ? c.points : 20, 10,
                          c.sigma >= 0 ? c.sigma : 1.0, seed);
    case 3:
      if (c.outputs > 0 || c.points > 0) throw ArgumentError("setting 3 has a fixed number of outputs and points");
      return gen_setting3(c.sigma >= 0 ? c.sigma : 0.005, seed);
    default:
      throw ArgumentError("setting must be 1, 2 or 3");
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

FitAllOptions rd_options(const BenchmarkConfig& c, std::uint64_t seed) {
  FitAllOptions opt;
  opt.penalty = c.penalty;
  opt.optimizer = c.optimizer;
  opt.optimizer.seed = seed;
  if (c.cv && c.penalty.kind != PenaltyKind::None) {
    opt.cv = *c.cv;
    opt.cv->seed = seed;
  }
  opt.cv_restarts = c.cv_restarts;
  opt.parallelism = c.parallelism;
  opt.layout = c.layout;
  return opt;
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (replicates < 1) throw ArgumentError("replicates must be >= 1");
  if (methods.empty()) throw ArgumentError("at least one method is required");
  for (const std::string& m : methods) {
    if (m != "gcp" && m != "mgcp" && m != "mgcp-rd") throw ArgumentError("unknown method '" + m + "'");
  }
  if (test_points < 1) throw ArgumentError("test_points must be >= 1");
  if (parallelism < 1) throw ArgumentError("parallelism must be >= 1");
  penalty.validate();
  optimizer.validate();
  if (cv) cv->validate();
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  BenchmarkResult result;
  result.config = config;
  for (const std::string& m : config.methods) result.methods.push_back({m, {}, {}});

  for (int w = 0; w < config.replicates; ++w) {
    const std::uint64_t seed = pair_seed(config.seed, static_cast<std::size_t>(w));
    const Simulation sim = make_simulation(config, seed);
    const Dataset data = config.standardize ? standardize(sim.data) : sim.data;
    const int target = static_cast<int>(data.size()) - 1;
    const auto& scale = data.standardization;
    const auto original = [&](GaussianPrediction p) {
      return config.standardize ? destandardize(p, scale[static_cast<std::size_t>(target)]) : p;
    };

    ReplicateRecord rec;
    rec.seed = seed;
    rec.target_id = data.outputs[static_cast<std::size_t>(target)].id;
    rec.test_x = linspace(sim.test_lo, sim.test_hi, config.test_points);
    rec.truth.resize(config.test_points);
    for (Index k = 0; k < config.test_points; ++k) rec.truth[k] = sim.truth(target, rec.test_x[k]);
    const Matrix X = rec.test_x;

    for (MethodRuns& runs : result.methods) {
      Vector means(config.test_points);
      const Clock::time_point start = Clock::now();
      if (runs.name == "gcp") {
        OptimizerConfig opt = config.optimizer;
        opt.seed = seed;
        const GcpFitResult fit = fit_gcp(data.outputs[static_cast<std::size_t>(target)], opt);
        const UnivariateModel model(fit.params, data.outputs[static_cast<std::size_t>(target)]);
        for (Index k = 0; k < X.rows(); ++k) means[k] = original(model.predict(X.row(k).transpose())).mean;
      } else if (runs.name == "mgcp") {
        OptimizerConfig opt = config.optimizer;
        opt.seed = seed;
        const FullFitResult fit = fit_full_mgcp(data, opt);
        const FullModel model(fit.params, data);
        for (Index k = 0; k < X.rows(); ++k) means[k] = original(model.predict(X.row(k).transpose(), target)).mean;
      } else {
        const PairPlan plan = enumerate_pairs(static_cast<int>(data.size()), target);
        const std::vector<PairFit> fits = fit_all(data, plan, rd_options(config, seed));
        const std::vector<GaussianPrediction> preds = predict_target(fits, data, target, X);
        for (Index k = 0; k < X.rows(); ++k) means[k] = original(preds[static_cast<std::size_t>(k)]).mean;
        for (const PairFit& f : fits) {
          rec.pairs.push_back({data.outputs[static_cast<std::size_t>(f.pair.first)].id,
                               data.outputs[static_cast<std::size_t>(f.pair.second)].id, f.ok, f.fit.lambda_used,
                               f.fit.params.xi0, f.fit.xi0_zeroed});
        }
      }
      runs.seconds.push_back(seconds_since(start));
      runs.mae.push_back(mae(means, rec.truth));
      rec.means[runs.name] = means;
    }
    result.replicates.push_back(std::move(rec));
  }
  return result;
}

std::string benchmark_to_json(const BenchmarkResult& result, bool include_timing) {
  const BenchmarkConfig& c = result.config;
  const auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };

  json methods = json::object();
  for (const MethodRuns& m : result.methods) {
    json entry = {{"mae", m.mae}, {"mean_mae", mean_of(m.mae)}, {"std_mae", std_of(m.mae)}};
    if (include_timing) {
      entry["seconds"] = m.seconds;
      entry["mean_seconds"] = mean_of(m.seconds);
    }
    methods[m.name] = std::move(entry);
  }

  json replicates = json::array();
  for (const ReplicateRecord& r : result.replicates) {
    json means = json::object();
    for (const auto& [name, v] : r.means) means[name] = vec(v);
    json pairs = json::array();
    for (const PairSummary& p : r.pairs) {
      pairs.push_back({{"outputs", {p.id_a, p.id_b}},
                       {"ok", p.ok},
                       {"lambda", p.lambda},
                       {"xi0", p.xi0},
                       {"xi0_zeroed", p.xi0_zeroed}});
    }
    replicates.push_back({{"seed", r.seed},
                          {"target", r.target_id},
                          {"test_x", vec(r.test_x)},
                          {"truth", vec(r.truth)},
                          {"means", means},
                          {"pairs", pairs}});
  }

  json config = {{"setting", c.setting},
                 {"methods", c.methods},
                 {"replicates", c.replicates},
                 {"seed", c.seed},
                 {"outputs", c.outputs},
                 {"points", c.points},
                 {"sigma", c.sigma},
                 {"test_points", c.test_points},
                 {"penalty", to_string(c.penalty.kind)},
                 {"lambda", c.penalty.lambda},
                 {"cross_validation", c.cv.has_value()},
                 {"restarts", c.optimizer.restarts},
                 {"max_iters", c.optimizer.max_iters},
                 {"cv_restarts", c.cv_restarts},
                 {"tie_shared_kernels", c.layout.tie_shared_kernels},
                 {"standardize", c.standardize}};
  if (c.cv) {
    config["folds"] = c.cv->folds;
    config["lambda_grid"] = c.cv->lambda_grid;
  }
  json j = {{"format", "mgcp-rd-benchmark"},
            {"version", kReportFormatVersion},
            {"config", config},
            {"methods", methods},
            {"replicates", replicates}};
  return j.dump(2) + "\n";
}

std::string summarize_report(const std::string& report_json) {
  json j;
  try {
    j = json::parse(report_json);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "mgcp-rd-benchmark") throw ParseError("not a benchmark report");
    if (j.at("version").get<int>() != kReportFormatVersion) throw ParseError("unsupported report version");
    const json& cfg = j.at("config");
    std::ostringstream out;
    out << std::setprecision(6);
    out << "# Benchmark summary\n\n";
    out << "Setting " << cfg.at("setting").get<int>() << ", " << cfg.at("replicates").get<int>()
        << " replicates, seed " << cfg.at("seed").get<std::uint64_t>() << ", penalty "
        << cfg.at("penalty").get<std::string>() << ".\n\n";
    out << "| method | mean MAE | std MAE | median MAE | best in |\n";
    out << "|---|---|---|---|---|\n";

    const json& methods = j.at("methods");
    const std::vector<std::string> names = cfg.at("methods").get<std::vector<std::string>>();
    const std::size_t W = j.at("replicates").size();
    std::vector<int> wins(names.size(), 0);
    for (std::size_t w = 0; w < W; ++w) {
      std::size_t best = 0;
      for (std::size_t m = 1; m < names.size(); ++m) {
        if (methods.at(names[m]).at("mae").at(w).get<double>() < methods.at(names[best]).at("mae").at(w).get<double>())
          best = m;
      }
      ++wins[best];
    }
    for (std::size_t m = 0; m < names.size(); ++m) {
      std::vector<double> v = methods.at(names[m]).at("mae").get<std::vector<double>>();
      std::sort(v.begin(), v.end());
      const double median = v.empty() ? 0.0 : (v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]));
      out << "| " << names[m] << " | " << methods.at(names[m]).at("mean_mae").get<double>() << " | "
          << methods.at(names[m]).at("std_mae").get<double>() << " | " << median << " | " << wins[m] << "/" << W
          << " |\n";
    }

    std::size_t pairs = 0, zeroed = 0;
    for (const json& r : j.at("replicates")) {
      for (const json& p : r.at("pairs")) {
        ++pairs;
        zeroed += p.at("xi0_zeroed").get<bool>();
      }
    }
    if (pairs > 0) out << "\nMGCP-RD submodels with xi0 set to zero: " << zeroed << " of " << pairs << ".\n";
    return out.str();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

// Command line ---------------------------------------------------------------

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ArgumentError("bad lambda grid value '" + item + "'");
    }
    if (used != item.size()) throw ArgumentError("bad lambda grid value '" + item + "'");
    grid.push_back(v);
  }
  if (grid.empty()) throw ArgumentError("lambda grid is empty");
  return grid;
}

bool on_off(const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw ArgumentError("expected on or off, got '" + v + "'");
}

// Options shared by fit and benchmark.
struct ModelFlags {
  std::string penalty = "l1";
  std::string grid;
  int folds = 3;
  std::uint64_t seed = 0;
  int parallelism = 1;
  int restarts = 5;
  int cv_restarts = 1;
  int max_iters = 200;
  bool tie_kernels = false;
  bool scale_penalty = false;

  void add_to(CLI::App& app) {
    app.add_option("--penalty", penalty, "none|ridge|l1|bridge|scad")->capture_default_str();
    app.add_option("--lambda-grid", grid, "comma-separated lambda values (default 0 and 10 log-spaced on [1e-3, 10])");
    app.add_option("--folds", folds, "cross-validation folds")->capture_default_str();
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--parallelism", parallelism, "pair fits run concurrently")->capture_default_str();
    app.add_option("--restarts", restarts, "optimizer restarts per fit")->capture_default_str();
    app.add_option("--cv-restarts", cv_restarts, "optimizer restarts inside cross-validation")->capture_default_str();
    app.add_option("--max-iters", max_iters, "optimizer iterations per restart")->capture_default_str();
    app.add_flag("--tie-kernels", tie_kernels, "use one shared smoothing kernel per pair");
    app.add_flag("--scale-penalty", scale_penalty, "multiply the penalty by the points per output");
  }

  PenaltyConfig penalty_config() const {
    PenaltyConfig p;
    p.kind = parse_penalty_kind(penalty);
    p.scale_by_points = scale_penalty;
    return p;
  }

  CvConfig cv_config() const {
    CvConfig cv;
    cv.folds = folds;
    if (!grid.empty()) cv.lambda_grid = parse_grid(grid);
    cv.seed = seed;
    return cv;
  }

  OptimizerConfig optimizer_config() const {
    OptimizerConfig o;
    o.seed = seed;
    o.restarts = restarts;
    o.max_iters = max_iters;
    return o;
  }
};

int cmd_simulate(int setting, int outputs, Index points, double sigma, std::uint64_t seed, const std::string& path,
                 std::ostream& out) {
  BenchmarkConfig c;
  c.setting = setting;
  c.outputs = outputs;
  c.points = points;
  c.sigma = sigma;
  const Simulation sim = make_simulation(c, seed);
  std::ostringstream csv;
  write_dataset_csv(csv, sim.data);
  write_file(path, csv.str());
  Index rows = 0;
  for (const OutputSeries& s : sim.data.outputs) rows += s.size();
  out << rows << " rows written to " << path << "\n";
  return kOk;
}

int cmd_fit(const std::string& data_path, std::optional<int> target_id, const ModelFlags& flags,
            const std::string& standardize_flag, const std::string& model_path, std::ostream& out,
            std::ostream& err) {
  Model model;
  model.standardized = on_off(standardize_flag);
  model.target_id = target_id;
  model.penalty = flags.penalty_config();
  model.layout.tie_shared_kernels = flags.tie_kernels;
  model.optimizer = flags.optimizer_config();
  const CvConfig cv = flags.cv_config();
  std::istringstream in(read_file(data_path));
  model.data = parse_dataset_csv(in);
  if (model.data.size() < 2) throw DegenerateDataError("need at least two outputs to fit pairs");
  if (model.penalty.kind != PenaltyKind::None) {
    if (cv.lambda_grid.size() > 1) {
      model.cv = cv;
    } else {
      model.penalty.lambda = cv.lambda_grid.front();
    }
  }

  std::optional<int> target;
  if (target_id) target = model.data.index_of(*target_id);
  const Dataset fitted = model.standardized ? standardize(model.data, true) : model.data;
  if (model.standardized) model.data.standardization = fitted.standardization;
  const PairPlan plan = enumerate_pairs(static_cast<int>(fitted.size()), target);

  FitAllOptions options;
  options.penalty = model.penalty;
  options.cv = model.cv;
  options.optimizer = model.optimizer;
  options.cv_restarts = flags.cv_restarts;
  options.parallelism = flags.parallelism;
  options.layout = model.layout;
  model.fits = fit_all(fitted, plan, options);

  int ok = 0;
  for (const PairFit& f : model.fits) {
    if (f.ok) {
      ++ok;
      continue;
    }
    const std::string msg = "pair (" + std::to_string(fitted.outputs[static_cast<std::size_t>(f.pair.first)].id) +
                            ", " + std::to_string(fitted.outputs[static_cast<std::size_t>(f.pair.second)].id) +
                            ") skipped: " + f.error;
    model.warnings.push_back(msg);
    err << "warning: " << msg << "\n";
  }
  write_file(model_path, model_to_json(model));
  out << ok << " of " << model.fits.size() << " pair models written to " << model_path << "\n";
  return kOk;
}

int cmd_predict(const std::string& model_path, const std::string& inputs_path, std::optional<int> target_id,
                const std::string& out_path, std::ostream& out) {
  const Model model = model_from_json(read_file(model_path));
  if (!target_id) target_id = model.target_id;
  if (!target_id) throw ArgumentError("the model has no target output; pass --target");
  std::istringstream in(read_file(inputs_path));
  const Matrix X = parse_inputs_csv(in);
  std::vector<GaussianPrediction> preds;
  if (X.rows() > 0) {
    preds = predict_model(model, *target_id, X);
  } else if (X.cols() != model.data.input_dim()) {
    throw ArgumentError("test inputs have the wrong dimension");
  }
  std::ostringstream csv;
  write_predictions_csv(csv, X, preds);
  write_file(out_path, csv.str());
  out << preds.size() << " predictions written to " << out_path << "\n";
  return kOk;
}

std::vector<std::string> split_methods(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regularized pairwise multi-output convolution GP"};
  app.name(args.empty() ? "mgcp" : args.front());
  app.require_subcommand(1);

  int setting = 1, outputs = 0;
  Index points = 0;
  double sigma = -1.0;
  std::string out_path, data_path, model_path, inputs_path, report_path, standardize_flag = "on";
  std::optional<int> target;
  ModelFlags flags;

  CLI::App* sim = app.add_subcommand("simulate", "write a simulated dataset as CSV");
  sim->add_option("--setting", setting, "1, 2 or 3")->required();
  sim->add_option("--outputs", outputs, "number of outputs (settings 1 and 2)");
  sim->add_option("--points", points, "points per output (settings 1 and 2)");
  sim->add_option("--sigma", sigma, "noise standard deviation");
  sim->add_option("--seed", flags.seed, "random seed");
  sim->add_option("--out", out_path, "output CSV")->required();

  CLI::App* fit = app.add_subcommand("fit", "fit pairwise submodels and write a model file");
  fit->add_option("--data", data_path, "CSV with header output_id,x1,...,y")->required();
  fit->add_option("--target", target, "output id to predict; omit to fit every pair");
  fit->add_option("--standardize", standardize_flag, "on|off")->capture_default_str();
  fit->add_option("--out", model_path, "model JSON")->required();
  flags.add_to(*fit);

  CLI::App* pred = app.add_subcommand("predict", "predict the target output at new inputs");
  pred->add_option("--model", model_path, "model JSON")->required();
  pred->add_option("--inputs", inputs_path, "CSV with header x1,...")->required();
  pred->add_option("--target", target, "output id (defaults to the model's target)");
  pred->add_option("--out", out_path, "predictions CSV")->required();

  std::string methods = "gcp,mgcp,mgcp-rd", bench_standardize = "off";
  int replicates = 2;
  bool omit_timing = false;
  CLI::App* bench = app.add_subcommand("benchmark", "compare methods on a simulated setting");
  bench->add_option("--setting", setting, "1, 2 or 3")->required();
  bench->add_option("--methods", methods, "comma-separated subset of gcp,mgcp,mgcp-rd")->capture_default_str();
  bench->add_option("--replicates", replicates, "number of replicates")->capture_default_str();
  bench->add_option("--outputs", outputs, "number of outputs (settings 1 and 2)");
  bench->add_option("--points", points, "points per output (settings 1 and 2)");
  bench->add_option("--sigma", sigma, "noise standard deviation");
  bench->add_option("--standardize", bench_standardize, "on|off")->capture_default_str();
  bench->add_flag("--omit-timing", omit_timing, "leave wall-clock fields out of the report");
  bench->add_option("--out", report_path, "report JSON")->required();
  flags.add_to(*bench);

  std::string summary_path;
  CLI::App* report = app.add_subcommand("report", "summarize a benchmark report as markdown");
  report->add_option("--in", report_path, "benchmark report JSON")->required();
  report->add_option("--out", summary_path, "markdown file (default: standard output)");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(setting, outputs, points, sigma, flags.seed, out_path, out);
    if (fit->parsed()) return cmd_fit(data_path, target, flags, standardize_flag, model_path, out, err);
    if (pred->parsed()) return cmd_predict(model_path, inputs_path, target, out_path, out);
    if (bench->parsed()) {
      BenchmarkConfig c;
      c.setting = setting;
      c.methods = split_methods(methods);
      c.replicates = replicates;
      c.seed = flags.seed;
      c.outputs = outputs;
      c.points = points;
      c.sigma = sigma;
      c.penalty = flags.penalty_config();
      const CvConfig cv = flags.cv_config();
      if (cv.lambda_grid.size() > 1) {
        c.cv = cv;
      } else {
        c.cv.reset();
        c.penalty.lambda = cv.lambda_grid.front();
      }
      c.optimizer = flags.optimizer_config();
      c.cv_restarts = flags.cv_restarts;
      c.parallelism = flags.parallelism;
      c.layout.tie_shared_kernels = flags.tie_kernels;
      c.standardize = on_off(bench_standardize);
      const BenchmarkResult r = run_benchmark(c);
      write_file(report_path, benchmark_to_json(r, !omit_timing));
      for (const MethodRuns& m : r.methods) out << m.name << ": mean MAE " << mean_of(m.mae) << "\n";
      return kOk;
    }
    if (report->parsed()) {
      const std::string md = summarize_report(read_file(report_path));
      if (summary_path.empty()) {
        out << md;
      } else {
        write_file(summary_path, md);
      }
      return kOk;
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace mgcp::cli
