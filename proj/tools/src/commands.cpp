#include "canard_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "canard/model_file.hpp"
#include "report.hpp"

namespace canard::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public Error {
 public:
  using Error::Error;
};

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  if (!text.empty() && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(v))
    throw UsageError("invalid number '" + text + "' for " + what);
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, what));
  return out;
}

struct ModelArgs {
  std::string builtin;
  std::string model;
  std::vector<std::string> params;
};

void add_model_flags(CLI::App* cmd, ModelArgs& m) {
  auto* b = cmd->add_option("--builtin", m.builtin, "Built-in model: chua3 or chua4");
  auto* f = cmd->add_option("--model", m.model, "JSON model file");
  b->excludes(f);
  cmd->add_option("--param", m.params, "Override a parameter, name=value (epsilon included)")->take_all();
}

SlowFastSystem load_system(const ModelArgs& m) {
  if (m.builtin.empty() == m.model.empty()) throw UsageError("exactly one of --builtin or --model is required");
  ModelSpec spec;
  if (!m.builtin.empty()) {
    if (m.builtin == "chua3") {
      spec = chua3_spec();
    } else if (m.builtin == "chua4") {
      spec = chua4_spec();
    } else {
      throw UsageError("unknown built-in model '" + m.builtin + "' (expected chua3 or chua4)");
    }
  } else {
    spec = load_model(m.model);
  }
  for (const auto& kv : m.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + kv + "'");
    const std::string name = kv.substr(0, eq);
    const double value = parse_number(kv.substr(eq + 1), "--param " + name);
    if (name == "epsilon") {
      spec.epsilon = value;
    } else if (spec.params.count(name)) {
      spec.params[name] = value;
    } else {
      throw ModelError("unknown parameter '" + name + "'");
    }
  }
  if (m.builtin == "chua4") {
    ChuaParams4 p{spec.params.at("alpha2"), spec.params.at("beta1"), spec.params.at("beta2"),
                  spec.params.at("c1"),     spec.params.at("c2"),    spec.epsilon};
    return chua4(p);
  }
  return SlowFastSystem(spec);
}

SearchBox parse_box(const std::vector<std::string>& items) {
  SearchBox box;
  for (const auto& it : items) {
    const auto eq = it.find('=');
    const auto colon = it.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos)
      throw UsageError("--box expects name=lo:hi, got '" + it + "'");
    const std::string name = it.substr(0, eq);
    const double lo = parse_number(it.substr(eq + 1, colon - eq - 1), "--box " + name);
    const double hi = parse_number(it.substr(colon + 1), "--box " + name);
    box.bounds[name] = {lo, hi};
  }
  return box;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
}

// ---------------------------------------------------------------------------
// simulate

struct SimArgs {
  std::string x0 = "auto";
  double t_end = 100.0;
  double transient = 20.0;
  double dt = 0.01;
  std::string method = "dopri5";
  double rtol = 1e-9;
  double atol = 1e-11;
  double max_step = 1e-2;
  double step = 1e-3;
  double eta = kDefaultEta;
};

void add_sim_flags(CLI::App* cmd, SimArgs& s) {
  cmd->add_option("--x0", s.x0, "Initial full-space state as a,b,c[,d] or 'auto'");
  cmd->add_option("--t-end", s.t_end, "Recorded duration after the transient");
  cmd->add_option("--transient", s.transient, "Discarded initial duration");
  cmd->add_option("--dt", s.dt, "Sample spacing");
  cmd->add_option("--method", s.method, "dopri5 or rk4");
  cmd->add_option("--rtol", s.rtol, "Relative tolerance (dopri5)");
  cmd->add_option("--atol", s.atol, "Absolute tolerance (dopri5)");
  cmd->add_option("--max-step", s.max_step, "Largest step (dopri5)");
  cmd->add_option("--step", s.step, "Fixed step (rk4)");
  cmd->add_option("--eta", s.eta, "Critical-manifold proximity threshold for dwell metrics");
}

std::vector<double> auto_x0(const SlowFastSystem& sys) {
  std::vector<double> chart(sys.p(), 0.0);
  chart.back() = sys.builtin() == BuiltinModel::Chua3 ? 2.0 : 1.5;
  return sys.lift(chart);
}

struct SimOutcome {
  json metrics;
  std::string csv;
  std::string plot;
};

std::string plot_script(const SlowFastSystem& sys, const std::string& csv_name) {
  const auto& names = sys.full_names();
  const std::size_t n = names.size();
  auto col = [&](std::size_t i) { return std::to_string(i + 2); };
  std::ostringstream s;
  s << "# gnuplot script\n";
  s << "set datafile separator ','\n";
  s << "set key off\n";
  if (n == 3) {
    s << "set xlabel '" << names[0] << "'\nset ylabel '" << names[1] << "'\nset zlabel '" << names[2] << "'\n";
    s << "splot '" << csv_name << "' using " << col(0) << ":" << col(1) << ":" << col(2) << " every ::1 with lines\n";
    s << "pause -1\n";
    s << "set xlabel '" << names[2] << "'\nset ylabel '" << names[0] << "'\n";
    s << "plot '" << csv_name << "' using " << col(2) << ":" << col(0) << " every ::1 with lines\n";
  } else {
    s << "set xlabel '" << names[3] << "'\nset ylabel '" << names[2] << "'\nset zlabel '" << names[0] << "'\n";
    s << "splot '" << csv_name << "' using " << col(3) << ":" << col(2) << ":" << col(0) << " every ::1 with lines\n";
    s << "pause -1\n";
    s << "set xlabel '" << names[3] << "'\nset ylabel '" << names[0] << "'\n";
    s << "plot '" << csv_name << "' using " << col(3) << ":" << col(0) << " every ::1 with lines\n";
  }
  s << "pause -1\n";
  return s.str();
}

SimOutcome simulate(const SlowFastSystem& sys, const SimArgs& a, const std::string& csv_name) {
  if (a.t_end < 0.0 || a.transient < 0.0) throw UsageError("--t-end and --transient must be non-negative");
  std::vector<double> x0;
  if (a.x0 == "auto") {
    x0 = auto_x0(sys);
  } else {
    x0 = parse_list(a.x0, "--x0");
    if (x0.size() != sys.dim())
      throw UsageError("--x0 needs " + std::to_string(sys.dim()) + " comma-separated values");
  }
  IntegrateOptions o;
  if (a.method == "dopri5") {
    o.method = OdeMethod::DormandPrince;
  } else if (a.method == "rk4") {
    o.method = OdeMethod::RK4;
  } else {
    throw UsageError("unknown --method '" + a.method + "' (expected dopri5 or rk4)");
  }
  o.rtol = a.rtol;
  o.atol = a.atol;
  o.max_step = a.max_step;
  o.fixed_step = a.step;
  const double t1 = a.transient + a.t_end;
  o.sample_times = sample_grid(a.transient, t1, a.dt);

  auto field = full_vector_field(sys);
  Trajectory traj = integrate(*field, x0, 0.0, t1, o);
  traj.names = sys.full_names();

  SimOutcome out;
  std::ostringstream csv;
  write_csv(traj, csv);
  out.csv = csv.str();
  out.plot = plot_script(sys, csv_name);

  json refs = json::array();
  const SearchResult sr = find_pseudo_singular(sys, SearchBox{});
  for (const auto& p : sr.points) {
    const CanardMetrics m = canard_metrics(traj, sys, p.full, a.eta);
    refs.push_back({{"m", p.full}, {"metrics", to_json(m)}});
  }
  out.metrics = {{"schema_version", kSchemaVersion},
                 {"tool", {{"name", "canard_lab"}, {"version", tool_version()}}},
                 {"model", model_json(sys)},
                 {"x0", x0},
                 {"transient", a.transient},
                 {"t_end", t1},
                 {"sample_dt", a.dt},
                 {"samples", traj.times.size()},
                 {"solver", to_json(traj.meta)},
                 {"final_state", traj.states.back()},
                 {"pseudo_singular_metrics", refs}};
  return out;
}

void write_sim(const SimOutcome& s, const std::string& prefix) {
  write_file(prefix + ".csv", s.csv);
  write_file(prefix + ".plot", s.plot);
  write_file(prefix + ".json", dump(s.metrics));
}

std::size_t thread_cap() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CANARD_LAB_THREADS")) {
    std::size_t v = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size() && v > 0) n = v;
  }
  return n;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"canard_lab: canard detection in slow-fast systems", "canard_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("canard_lab ") + tool_version());

  ModelArgs model;
  std::vector<std::string> box_items;
  std::size_t grid = 10;
  std::string out_path;

  auto* analyze_cmd = app.add_subcommand("analyze", "Locate pseudo-singular points and run both canard tests");
  add_model_flags(analyze_cmd, model);
  analyze_cmd->add_option("--box", box_items, "Search interval, name=lo:hi (default -2:2)")->take_all();
  analyze_cmd->add_option("--grid", grid, "Seeds per chart axis");
  analyze_cmd->add_option("--out", out_path, "Write the JSON report here instead of stdout");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Integrate the full system and write CSV, plot script, metrics");
  add_model_flags(sim_cmd, model);
  add_sim_flags(sim_cmd, sim);
  sim_cmd->add_option("--out", out_path, "Output prefix")->required();

  std::string sweep_name, sweep_values, sweep_mode = "analyze";
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat analyze or simulate over parameter values");
  add_model_flags(sweep_cmd, model);
  add_sim_flags(sweep_cmd, sim);
  sweep_cmd->add_option("--name", sweep_name, "Parameter to vary")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values (may be empty)")->required();
  sweep_cmd->add_option("--mode", sweep_mode, "analyze or simulate");
  sweep_cmd->add_option("--box", box_items, "Search interval, name=lo:hi")->take_all();
  sweep_cmd->add_option("--grid", grid, "Seeds per chart axis");
  sweep_cmd->add_option("--out", out_path, "Output directory")->required();

  auto* export_cmd = app.add_subcommand("export-model", "Write a model as a JSON model file");
  add_model_flags(export_cmd, model);
  export_cmd->add_option("--out", out_path, "Destination file (stdout when omitted)");

  std::vector<std::string> argv_store;
  argv_store.push_back("canard_lab");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    SearchOptions sopts;
    sopts.grid_per_axis = grid;

    if (analyze_cmd->parsed()) {
      const SlowFastSystem sys = load_system(model);
      const AnalysisOutcome a = analyze(sys, parse_box(box_items), sopts);
      const std::string text = dump(a.report);
      if (out_path.empty()) {
        out << text;
      } else {
        write_file(out_path, text);
      }
      return a.numerical_failure ? kExitNumerical : kExitOk;
    }

    if (sim_cmd->parsed()) {
      const SlowFastSystem sys = load_system(model);
      const std::string name = fs::path(out_path).filename().string();
      try {
        const SimOutcome s = simulate(sys, sim, name + ".csv");
        write_sim(s, out_path);
      } catch (const NumericalError& e) {
        err << "simulate: " << e.what() << "\n";
        return kExitNumerical;
      }
      return kExitOk;
    }

    if (export_cmd->parsed()) {
      const SlowFastSystem sys = load_system(model);
      const std::string text = model_to_json(sys.spec());
      if (out_path.empty()) {
        out << text;
      } else {
        write_file(out_path, text);
      }
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      if (sweep_mode != "analyze" && sweep_mode != "simulate")
        throw UsageError("--mode must be analyze or simulate");
      const SlowFastSystem base = load_system(model);
      if (sweep_name != "epsilon" && !base.params().count(sweep_name))
        throw ModelError("unknown parameter '" + sweep_name + "'");
      const std::vector<double> values = parse_list(sweep_values, "--values");
      const SearchBox box = parse_box(box_items);
      fs::create_directories(out_path);

      std::vector<json> entries(values.size());
      std::vector<bool> failed(values.size(), false);
      std::atomic<std::size_t> next{0};
      auto worker = [&]() {
        for (std::size_t i = next++; i < values.size(); i = next++) {
          const double v = values[i];
          const std::string stem = sweep_name + "_" + format_double(v, 0);
          json e;
          e["value"] = v;
          e["stem"] = stem;
          try {
            ModelArgs m = model;
            m.params.push_back(sweep_name + "=" + format_double(v));
            const SlowFastSystem sys = load_system(m);
            const AnalysisOutcome a = analyze(sys, box, sopts);
            write_file(fs::path(out_path) / (stem + ".report.json"), dump(a.report));
            e["jacobian_verdict"] = a.jacobian_verdict;
            e["curvature_verdict"] = a.curvature_verdict;
            e["agree"] = a.agree;
            e["threshold"] = a.report["threshold"];
            if (a.numerical_failure) failed[i] = true;
            if (sweep_mode == "simulate") {
              const SimOutcome s = simulate(sys, sim, stem + ".csv");
              write_sim(s, (fs::path(out_path) / stem).string());
              e["metrics"] = s.metrics["pseudo_singular_metrics"];
            }
          } catch (const std::exception& ex) {
            e["error"] = ex.what();
            failed[i] = true;
          }
          entries[i] = std::move(e);
        }
      };
      const std::size_t nthreads = std::min(thread_cap(), std::max<std::size_t>(values.size(), 1));
      std::vector<std::thread> pool;
      for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      json summary;
      summary["schema_version"] = kSchemaVersion;
      summary["tool"] = {{"name", "canard_lab"}, {"version", tool_version()}};
      summary["model"] = model_json(base);
      summary["parameter"] = sweep_name;
      summary["mode"] = sweep_mode;
      summary["results"] = entries;
      write_file(fs::path(out_path) / "summary.json", dump(summary));
      return std::find(failed.begin(), failed.end(), true) != failed.end() ? kExitNumerical : kExitOk;
    }
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace canard::cli
