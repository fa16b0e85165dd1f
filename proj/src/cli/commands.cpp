#include "fides/cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

#include "fides/errors.hpp"
#include "fides/training/report.hpp"
#include "fides/training/trainer.hpp"

namespace fides::cli {

namespace fs = std::filesystem;
using train::format_double;

namespace {

problems::CaseId require_case(const RunConfig& cfg, const char* fallback = nullptr) {
  if (!cfg.case_id && !fallback) throw ConfigError("--case is required");
  return problems::parse_case_id(cfg.case_id ? *cfg.case_id : fallback);
}

fs::path output_dir(const RunConfig& cfg) {
  const fs::path dir = cfg.out ? *cfg.out : ".";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw ConfigError("output directory " + dir.string() + " is not writable");
  return dir;
}

std::ofstream open_file(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

std::string output_name(const problems::Problem& p, int o, const char* what) {
  if (p.spec().output_dims == 1) return std::string("u_") + what;
  return "u" + std::to_string(o + 1) + "_" + what;
}

void write_solution_csv(const fs::path& path, const problems::Problem& p, const nn::Network& net) {
  static const char* axis_names[] = {"x", "y", "z"};
  const auto& spec = p.spec();
  const auto pts = p.collocation_points();
  const Eigen::MatrixXd pred = net.forward(pts);
  const Eigen::MatrixXd exact = spec.has_exact ? p.exact(pts) : Eigen::MatrixXd::Zero(pts.rows(), spec.output_dims);
  auto f = open_file(path);
  for (int d = 0; d < spec.input_dims; ++d) f << (d ? "," : "") << (d < 3 ? axis_names[d] : "x" + std::to_string(d));
  for (int o = 0; o < spec.output_dims; ++o) f << ',' << output_name(p, o, "pred");
  for (int o = 0; o < spec.output_dims; ++o) f << ',' << output_name(p, o, "exact");
  for (int o = 0; o < spec.output_dims; ++o) f << ',' << output_name(p, o, "sq_err");
  f << '\n';
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (int d = 0; d < spec.input_dims; ++d) f << (d ? "," : "") << format_double(pts(i, d));
    for (int o = 0; o < spec.output_dims; ++o) f << ',' << format_double(pred(i, o));
    for (int o = 0; o < spec.output_dims; ++o) f << ',' << format_double(exact(i, o));
    for (int o = 0; o < spec.output_dims; ++o) {
      const double e = pred(i, o) - exact(i, o);
      f << ',' << format_double(e * e);
    }
    f << '\n';
  }
}

void write_artifacts(const RunConfig& cfg, const fs::path& dir, const problems::Problem& p,
                     const train::TrainResult& r) {
  if (cfg.emit_solution.value_or(true)) write_solution_csv(dir / "solution.csv", p, r.network);
  if (cfg.emit_loss.value_or(true)) train::save_loss_csv(dir / "loss.csv", r.report);
  if (cfg.emit_report.value_or(true)) train::save_report(dir / "report.txt", r.report);
}

bool failed(const train::TrainReport& r) { return r.stop_reason == train::StopReason::Diverged; }

// One forward training per value; shared by sweep-n and sensitivity.
int run_table(const RunConfig& cfg, const std::string& column, const std::vector<int>& values,
              const std::function<RunConfig(int)>& adjust, std::ostream& out) {
  const fs::path dir = output_dir(cfg);
  auto table = open_file(dir / "table.csv");
  auto timing = open_file(dir / "timing.csv");
  table << column << ",mse,rel_l2,iterations,stop_reason\n";
  timing << column << ",wall_seconds\n";
  out << column << "\tmse\trel_l2\titerations\tstop_reason\twall_seconds\n";
  bool any_failed = false;
  for (int v : values) {
    const RunConfig c = adjust(v);
    const auto problem = problems::build_case(require_case(c), case_options(c));
    const auto result = train::train_forward(*problem, training_config(*problem, c));
    const auto& rep = result.report;
    any_failed = any_failed || failed(rep);
    table << v << ',' << format_double(rep.mse_vs_exact) << ',' << format_double(rep.rel_l2_vs_exact) << ','
          << rep.iterations_run << ',' << train::to_string(rep.stop_reason) << '\n';
    timing << v << ',' << format_double(rep.wall_seconds) << '\n';
    out << v << '\t' << format_double(rep.mse_vs_exact) << '\t' << format_double(rep.rel_l2_vs_exact) << '\t'
        << rep.iterations_run << '\t' << train::to_string(rep.stop_reason) << '\t' << rep.wall_seconds << '\n';
  }
  return any_failed ? kExitTrainingFailed : kExitOk;
}

}  // namespace

problems::CaseOptions case_options(const RunConfig& cfg) {
  problems::CaseOptions o;
  if (cfg.n) {
    if (*cfg.n < 2) throw ConfigError("--n must be >= 2");
    o.n = *cfg.n;
  }
  o.beta = cfg.beta;
  return o;
}

train::TrainConfig training_config(const problems::Problem& problem, const RunConfig& cfg) {
  const auto& spec = problem.spec();
  train::TrainConfig t;
  t.max_iters = cfg.iters.value_or(spec.default_iters);
  t.seed = cfg.seed.value_or(42);
  if (cfg.layers || cfg.neurons) {
    const int nl = cfg.layers.value_or(static_cast<int>(spec.hidden_layers.size()));
    const int nn = cfg.neurons.value_or(spec.hidden_layers.front());
    if (nl < 1 || nn < 1) throw ConfigError("--layers and --neurons must be >= 1");
    t.hidden_layers.assign(static_cast<std::size_t>(nl), nn);
  }
  if (cfg.schedule) t.lr_schedule = *cfg.schedule;
  if (cfg.plateau_window) t.plateau_window = *cfg.plateau_window;
  if (cfg.plateau_threshold) t.plateau_threshold = *cfg.plateau_threshold;
  t.validate();
  return t;
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto problem = problems::build_case(require_case(cfg), case_options(cfg));
  const auto tc = training_config(*problem, cfg);
  const fs::path dir = output_dir(cfg);
  const auto result = train::train_forward(*problem, tc);
  write_artifacts(cfg, dir, *problem, result);
  const auto& rep = result.report;
  out << "case " << rep.case_id << ": " << rep.iterations_run << " iterations (" << train::to_string(rep.stop_reason)
      << ")\n";
  out << "mse: " << format_double(rep.mse_vs_exact) << "\nrel_l2: " << format_double(rep.rel_l2_vs_exact) << '\n';
  return failed(rep) ? kExitTrainingFailed : kExitOk;
}

int cmd_sweep_n(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto values = cfg.values.value_or(std::vector<int>{16, 32, 64, 128});
  if (values.empty()) throw ConfigError("sweep-n needs at least one N value");
  for (int v : values) {
    if (v < 2) throw ConfigError("sweep-n values must be >= 2");
  }
  require_case(cfg);
  return run_table(cfg, "N", values, [&](int v) {
    RunConfig c = cfg;
    c.n = v;
    return c;
  }, out);
}

int cmd_sensitivity(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const std::string vary = cfg.vary.value_or("");
  if (vary != "layers" && vary != "neurons") throw ConfigError("--vary must be 'layers' or 'neurons'");
  if (!cfg.values || cfg.values->empty()) throw ConfigError("sensitivity needs a non-empty --values list");
  for (int v : *cfg.values) {
    if (v < 1) throw ConfigError("sensitivity values must be positive integers");
  }
  require_case(cfg);
  return run_table(cfg, vary, *cfg.values, [&](int v) {
    RunConfig c = cfg;
    (vary == "layers" ? c.layers : c.neurons) = v;
    return c;
  }, out);
}

int cmd_inverse(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto problem = problems::build_case(require_case(cfg, "C7"), case_options(cfg));
  const auto& spec = problem->spec();
  if (!spec.has_exact) throw ConfigError("inverse mode needs a case with an exact solution");
  const double noise = cfg.noise_std.value_or(0.1);
  if (!(noise >= 0.0)) throw ConfigError("--noise-std must be >= 0");
  const auto tc = training_config(*problem, cfg);
  const fs::path dir = output_dir(cfg);

  problems::OrderMap initial;
  for (const auto& name : spec.trainable_orders) {
    if (name == "alpha") initial[name] = cfg.init_alpha.value_or(0.5);
    else if (name == "beta") initial[name] = cfg.init_beta.value_or(0.8);
  }
  const auto truth = problem->resolve_orders({});
  const auto data = train::synthesize_dataset(*problem, noise, tc.seed + 1);
  const auto result = train::train_inverse(*problem, data, initial, tc);
  write_artifacts(cfg, dir, *problem, result);
  const auto& rep = result.report;
  out << "case " << rep.case_id << ": " << rep.iterations_run << " iterations (" << train::to_string(rep.stop_reason)
      << ")\n";
  for (const auto& [name, value] : *rep.recovered_unknowns) {
    const double t = truth.at(name);
    out << name << ": " << format_double(value) << " (true " << format_double(t)
        << ", rel_err " << format_double(std::abs(value - t) / std::abs(t)) << ")\n";
  }
  return failed(rep) ? kExitTrainingFailed : kExitOk;
}

int cmd_list_cases(std::ostream& out) {
  out << problems::case_catalog();
  return kExitOk;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural solver for fractional integral and integro-differential equations"};
  app.require_subcommand(1);

  struct Flags {
    std::string case_id, out, config, vary, values, schedule;
    int n = 0, layers = 0, neurons = 0, iters = 0;
    std::uint64_t seed = 0;
    double noise_std = 0, beta = 0, init_alpha = 0, init_beta = 0;
  } fl;

  std::vector<CLI::App*> subs;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--case", fl.case_id, "case id (C1..C7, S1..S3)");
    s->add_option("--n", fl.n, "grid intervals per axis");
    s->add_option("--layers", fl.layers, "number of hidden layers");
    s->add_option("--neurons", fl.neurons, "neurons per hidden layer");
    s->add_option("--iters", fl.iters, "maximum iterations");
    s->add_option("--seed", fl.seed, "random seed");
    s->add_option("--out", fl.out, "output directory");
    s->add_option("--config", fl.config, "key = value config file");
    s->add_option("--schedule", fl.schedule, "learning-rate stages, e.g. 0:1e-2,12000:1e-3");
    s->add_option("--beta", fl.beta, "derivative order of the case (C6, C7)");
    subs.push_back(s);
  };
  auto* run = app.add_subcommand("run", "train one case forward");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep-n", "forward runs over a list of grid counts");
  add_common(sweep);
  sweep->add_option("--values", fl.values, "comma-separated N values");
  auto* sens = app.add_subcommand("sensitivity", "forward runs over network depth or width");
  add_common(sens);
  sens->add_option("--vary", fl.vary, "layers or neurons");
  sens->add_option("--values", fl.values, "comma-separated values");
  auto* inv = app.add_subcommand("inverse", "recover operator orders from noisy data");
  add_common(inv);
  inv->add_option("--noise-std", fl.noise_std, "standard deviation of the added noise");
  inv->add_option("--init-alpha", fl.init_alpha, "starting integral order");
  inv->add_option("--init-beta", fl.init_beta, "starting derivative order");
  auto* list = app.add_subcommand("list-cases", "print the case catalog");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (list->parsed()) return cmd_list_cases(out);

  CLI::App* active = nullptr;
  for (auto* s : subs) {
    if (s->parsed()) active = s;
  }
  auto given = [&](const char* name) { return active->count(name) > 0; };

  RunConfig flags;
  try {
    if (given("--case")) flags.case_id = fl.case_id;
    if (given("--n")) flags.n = fl.n;
    if (given("--layers")) flags.layers = fl.layers;
    if (given("--neurons")) flags.neurons = fl.neurons;
    if (given("--iters")) flags.iters = fl.iters;
    if (given("--seed")) flags.seed = fl.seed;
    if (given("--out")) flags.out = fl.out;
    if (given("--schedule")) flags.schedule = parse_schedule(fl.schedule);
    if (given("--beta")) flags.beta = fl.beta;
    if (active->get_option_no_throw("--values") && given("--values")) flags.values = parse_int_list(fl.values);
    if (active->get_option_no_throw("--vary") && given("--vary")) flags.vary = fl.vary;
    if (active->get_option_no_throw("--noise-std") && given("--noise-std")) flags.noise_std = fl.noise_std;
    if (active->get_option_no_throw("--init-alpha") && given("--init-alpha")) flags.init_alpha = fl.init_alpha;
    if (active->get_option_no_throw("--init-beta") && given("--init-beta")) flags.init_beta = fl.init_beta;

    RunConfig cfg = given("--config") ? merge(load_config_file(fl.config), flags) : flags;
    if (active == run) return cmd_run(cfg, out, err);
    if (active == sweep) return cmd_sweep_n(cfg, out, err);
    if (active == sens) return cmd_sensitivity(cfg, out, err);
    return cmd_inverse(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    const std::string msg = e.what();
    if (msg.find("unknown case") != std::string::npos) err << problems::case_catalog();
    return kExitUsage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedOrderError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NonFiniteError& e) {
    err << "training failed: " << e.what() << '\n';
    return kExitTrainingFailed;
  }
}

}  // namespace fides::cli
