// gpid command-line tool. All human-readable output goes to stderr; the exit
// code is the machine contract (0 pass, 2 invalid input, 3 monitor failure).

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "gpid.hpp"

#ifndef GPID_SCENARIO_DIR
#define GPID_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace gpid;
using namespace gpid::sim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitFail = 3;

const std::vector<std::string> kPaperSuite = {
    "quad_attitude",  "ipc_stabilize",   "hoop_fixed",   "hoop_linear",      "hoop_sinusoid",
    "sphere_sinusoid", "sphere_circle", "sphere_fixed", "pendulum_upright",
};

std::vector<Override> parse_overrides(const std::vector<std::string>& raw) {
  std::vector<Override> out;
  for (const auto& r : raw) out.push_back(parse_override(r));
  return out;
}

void write_outputs(const RunResult& r, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path base = fs::path(out_dir) / r.scenario;
  write_csv(base.string() + ".csv", r.columns, r.rows);
  std::ofstream f(base.string() + ".report.json");
  if (!f) throw Error("cannot write report in '" + out_dir + "'");
  f << report_json(r).dump(2) << '\n';
}

void print_monitors(const RunResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& m : r.monitors) {
    std::cerr << "  " << (m.pass ? "PASS " : "FAIL ") << std::left << std::setw(30) << m.name
              << " margin " << format_double(m.worst_margin) << " at t = " << format_double(m.t_worst) << " s";
    if (!m.detail.empty()) std::cerr << "  (" << m.detail << ")";
    std::cerr << '\n';
  }
  std::cerr << "  terminal " << r.error_metric_name << " = " << format_double(r.terminal_error) << '\n';
}

struct Job {
  std::string path;
  std::vector<Override> overrides;
  std::string rename;  ///< output name override (sweep)
};

struct JobOutcome {
  std::string name;
  int code = kExitOk;
  double terminal = std::numeric_limits<double>::quiet_NaN();
  std::string message;
};

JobOutcome run_job(const Job& job, const std::string& out_dir, long decimate) {
  JobOutcome o;
  o.name = job.rename.empty() ? stem_of(job.path) : job.rename;
  try {
    Scenario sc = load_scenario(job.path, job.overrides);
    if (!job.rename.empty()) sc.name = job.rename;
    o.name = sc.name;
    RunResult r = run_scenario(sc, {decimate, true});
    if (!out_dir.empty()) write_outputs(r, out_dir);
    o.code = r.exit_code();
    o.terminal = r.terminal_error;
    for (const auto& m : r.monitors) {
      if (!m.pass) o.message += (o.message.empty() ? "" : ", ") + m.name;
    }
  } catch (const ScenarioError& e) {
    o.code = kExitInvalid;
    o.message = e.what();
  } catch (const Error& e) {
    o.code = kExitInvalid;
    o.message = e.what();
  }
  return o;
}

std::vector<JobOutcome> run_jobs(const std::vector<Job>& jobs, const std::string& out_dir, long decimate, int n) {
  std::vector<JobOutcome> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) out[i] = run_job(jobs[i], out_dir, decimate);
  };
  const int threads = std::max(1, std::min<int>(n, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

void print_table(const std::vector<JobOutcome>& rows) {
  for (const auto& r : rows) {
    const char* tag = r.code == kExitOk ? "PASS" : r.code == kExitFail ? "FAIL" : "ERROR";
    std::cerr << std::left << std::setw(6) << tag << std::setw(40) << r.name << " terminal "
              << format_double(r.terminal);
    if (!r.message.empty()) std::cerr << "  [" << r.message << "]";
    std::cerr << '\n';
  }
}

int cmd_run(const std::string& path, const std::string& out, const std::vector<std::string>& ov, long decimate) {
  Scenario sc = load_scenario(path, parse_overrides(ov));
  RunResult r = run_scenario(sc, {decimate, true});
  write_outputs(r, out);
  std::cerr << sc.name << " (" << sc.system << "): " << (r.all_pass() ? "PASS" : "FAIL") << '\n';
  print_monitors(r);
  return r.exit_code();
}

int cmd_verify(const std::string& path, const std::vector<std::string>& ov) {
  Scenario sc = load_scenario(path, parse_overrides(ov));
  const auto model = make_model(sc);
  GainSet g = model->gains();
  const auto probe = model->morse_probe();
  if (probe) {
    const MuLambda ml = estimate_mu_lambda(*probe);
    std::cerr << "mu (oracle) = " << format_double(ml.mu) << ", lambda (oracle) = " << format_double(ml.lambda)
              << '\n';
    if (!std::isfinite(g.mu)) g.mu = ml.mu;
    if (!std::isfinite(g.lambda)) g.lambda = ml.lambda;
  } else {
    std::cerr << "no error-potential probe for system '" << sc.system << "'; using scenario mu/lambda\n";
  }
  if (!std::isfinite(g.mu) || !std::isfinite(g.lambda)) {
    throw ScenarioError("verify-gains needs mu and lambda for system '" + sc.system + "'");
  }
  if (!std::isfinite(g.kappa)) g.kappa = 1.0 / g.mu;
  try {
    g.validate();
  } catch (const InvalidArgumentError& e) {
    throw ScenarioError(std::string("gains: ") + e.what());
  }
  GainVerdict v;
  try {
    v = verify_gains(g);
  } catch (const InvalidArgumentError& e) {
    throw ScenarioError(std::string("gains: ") + e.what());
  }
  std::cerr << "gains kp = " << format_double(g.kp) << ", kd = " << format_double(g.kd)
            << ", kI = " << format_double(g.kI) << ", kappa = " << format_double(g.kappa) << '\n';
  std::cerr << "mu = " << format_double(g.mu) << ", lambda = " << format_double(g.lambda)
            << ", delta = " << format_double(v.bounds.delta) << '\n';
  std::cerr << "kI_max = " << format_double(v.bounds.kI_max) << "  kI " << (v.kI_ok ? "PASS" : "FAIL")
            << " (margin " << format_double(v.kI_margin) << ")\n";
  std::cerr << "kp_min = " << format_double(v.bounds.kp_min) << "  kp " << (v.kp_ok ? "PASS" : "FAIL")
            << " (margin " << format_double(v.kp_margin) << ")\n";
  std::cerr << "lambda_min(Q) = " << format_double(lyapunov_Q_min_eig(g)) << '\n';
  return v.ok() ? kExitOk : kExitFail;
}

int cmd_sweep(const std::string& path, const std::string& param, const std::string& values, const std::string& out,
              const std::vector<std::string>& ov, long decimate, int jobs) {
  const auto base = parse_overrides(ov);
  const std::string stem = stem_of(path);
  std::vector<Job> list;
  for (const auto& v : split(values, ',')) {
    if (v.empty()) throw ScenarioError("sweep: empty value in --values");
    Job j{path, base, stem + "__" + param + "=" + v};
    j.overrides.push_back(parse_override(param + "=" + v));
    list.push_back(std::move(j));
  }
  // validate once up front so a bad key is an input error, not a per-row failure
  load_scenario(path, list.front().overrides);
  const auto res = run_jobs(list, out, decimate, jobs);
  print_table(res);
  for (const auto& r : res) {
    if (r.code == kExitInvalid) return kExitInvalid;
  }
  return kExitOk;
}

int cmd_suite(const std::string& dir, const std::string& out, const std::vector<std::string>& ov, long decimate,
              int jobs) {
  const auto overrides = parse_overrides(ov);
  std::vector<Job> list;
  for (const auto& n : kPaperSuite) {
    const fs::path p = fs::path(dir) / (n + ".scn");
    if (!fs::exists(p)) throw ScenarioError("bundled scenario missing: " + p.string());
    list.push_back({p.string(), overrides, ""});
  }
  const auto res = run_jobs(list, out, decimate, jobs);
  print_table(res);
  int pass = 0;
  int code = kExitOk;
  for (const auto& r : res) {
    if (r.code == kExitOk) ++pass;
    if (r.code == kExitInvalid) code = kExitInvalid;
    if (r.code == kExitFail && code == kExitOk) code = kExitFail;
  }
  std::cerr << pass << "/" << res.size() << " pass\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric PID simulator"};
  app.require_subcommand(1);

  std::string scenario, out = "out", param, values, dir = GPID_SCENARIO_DIR;
  std::vector<std::string> overrides;
  long decimate = 1;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* run = app.add_subcommand("run", "run one scenario, write <out>/<name>.csv and .report.json");
  run->add_option("scenario", scenario, "scenario file")->required();
  run->add_option("--out", out, "output directory");
  run->add_option("--override", overrides, "[filter:]key=value, repeatable");
  run->add_option("--decimate", decimate, "trace stride in plant steps")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify-gains", "estimate mu/lambda and check the gain inequalities");
  verify->add_option("scenario", scenario, "scenario file")->required();
  verify->add_option("--override", overrides, "[filter:]key=value, repeatable");

  auto* sweep = app.add_subcommand("sweep", "run a scenario once per value of one parameter");
  sweep->add_option("scenario", scenario, "scenario file")->required();
  sweep->add_option("--param", param, "dotted scenario key")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--out", out, "output directory");
  sweep->add_option("--override", overrides, "[filter:]key=value, repeatable");
  sweep->add_option("--decimate", decimate, "trace stride")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);

  auto* suite = app.add_subcommand("paper-suite", "run the nine bundled scenarios");
  suite->add_option("--out", out, "output directory");
  suite->add_option("--scenarios", dir, "directory with the bundled .scn files");
  suite->add_option("--override", overrides, "[filter:]key=value, repeatable");
  suite->add_option("--decimate", decimate, "trace stride")->check(CLI::PositiveNumber);
  suite->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-systems", "list the available plants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, std::cerr, std::cerr);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run) return cmd_run(scenario, out, overrides, decimate);
    if (*verify) return cmd_verify(scenario, overrides);
    if (*sweep) return cmd_sweep(scenario, param, values, out, overrides, decimate, jobs);
    if (*suite) return cmd_suite(dir, out, overrides, decimate, jobs);
    if (*list) {
      for (const auto& s : systems()) std::cerr << std::left << std::setw(10) << s.id << s.summary << '\n';
      return kExitOk;
    }
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
