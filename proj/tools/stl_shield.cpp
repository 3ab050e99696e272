// stl-shield: command-line front end for monitoring, certification and trials.

#include "stlshield/certificate.hpp"
#include "stlshield/errors.hpp"
#include "stlshield/formula.hpp"
#include "stlshield/harness.hpp"
#include "stlshield/monitor.hpp"
#include "stlshield/predicate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace stlshield;

namespace {

enum Exit { kOk = 0, kViolated = 1, kInputError = 2, kNumericError = 3 };

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) throw InputError("cannot write " + p.string());
}

// A formula argument names a file when one exists, otherwise it is the formula text.
std::string formula_text(const std::string& arg) {
  std::error_code ec;
  if (fs::is_regular_file(arg, ec)) return read_file(arg);
  return arg;
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> w;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw InputError("bad weight '" + item + "'");
    w.push_back(v);
  }
  return w;
}

struct EvalArgs {
  std::string formula, predicates, signal;
  double time = 0.0;
};

int cmd_eval(const EvalArgs& a) {
  const auto preds = stl::parse_predicates_json(read_file(a.predicates));
  const auto f = stl::parse(formula_text(a.formula), preds);
  const Signal s = read_signal_csv(fs::path(a.signal));
  const double rho = stl::eval_robustness(f, s, a.time);
  const bool sat = stl::eval_boolean(f, s, a.time);
  nlohmann::ordered_json j;
  j["formula"] = f.to_string();
  j["time"] = a.time;
  j["robustness"] = rho;
  j["satisfied"] = sat;
  std::cout << j.dump() << "\n";
  return sat ? kOk : kViolated;
}

struct CertifyArgs {
  std::string formula, predicates, weights;
};

int cmd_certify(const CertifyArgs& a) {
  const auto preds = stl::parse_predicates_json(read_file(a.predicates));
  const auto f = stl::parse(formula_text(a.formula), preds);
  const auto n = f.dim() > 0 ? f.dim() : 1;
  WeightMatrix q = WeightMatrix::identity(n);
  if (!a.weights.empty()) {
    const auto w = parse_weights(a.weights);
    q = WeightMatrix(Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())));
  }
  std::cout << stl::certificate_json(stl::certify(f, q)) << "\n";
  return kOk;
}

struct EnvArgs {
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_env_gen(const EnvArgs& a) {
  const std::string text = world::environment_json(world::generate_environment(a.seed));
  if (a.out.empty())
    std::cout << text;
  else
    write_file(a.out, text);
  return kOk;
}

struct SimArgs {
  std::uint64_t seed = 0;
  double duration = 60.0;
  double dt = 1.0 / 30.0;
  std::string basing;
  std::string out;
  std::string format = "csv";
  std::string env;
};

int cmd_simulate(const SimArgs& a) {
  sim::TrialConfig cfg;
  cfg.seed = a.seed;
  cfg.duration = a.duration;
  cfg.dt = a.dt;
  cfg.planner.dt = a.dt;
  cfg.basing = sim::parse_basing(a.basing);
  if (!a.env.empty()) cfg.environment = world::parse_environment_json(read_file(a.env));
  const auto log = sim::run_trial(cfg);
  if (!a.out.empty()) {
    const fs::path dir(a.out);
    const std::string stem = "trial_" + std::to_string(a.seed);
    if (a.format == "json") {
      write_file(dir / (stem + ".json"), sim::log_json(log));
    } else {
      std::ostringstream os;
      sim::write_log_csv(os, log);
      write_file(dir / (stem + ".csv"), os.str());
    }
  }
  std::ostringstream os;
  sim::write_summary_csv(os, {sim::summarize(log)});
  std::cout << os.str();
  if (log.outcome == sim::Outcome::Aborted) {
    std::cerr << "trial aborted: " << log.message << "\n";
    return kNumericError;
  }
  return log.outcome == sim::Outcome::Violation ? kViolated : kOk;
}

struct BatchArgs {
  std::string seeds = "0..19";
  int jobs = 1;
  std::string out;
  double duration = 60.0;
  double dt = 1.0 / 30.0;
  std::string basing;
};

int cmd_batch(const BatchArgs& a) {
  sim::TrialConfig cfg;
  cfg.duration = a.duration;
  cfg.dt = a.dt;
  cfg.planner.dt = a.dt;
  cfg.basing = sim::parse_basing(a.basing);
  const auto logs = sim::run_batch(sim::parse_seed_list(a.seeds), cfg, a.jobs);
  std::vector<sim::SummaryRow> rows;
  for (const auto& l : logs) rows.push_back(sim::summarize(l));
  std::ostringstream csv;
  sim::write_summary_csv(csv, rows);
  const fs::path dir(a.out);
  write_file(dir / "summary.csv", csv.str());
  write_file(dir / "summary.json", sim::summary_json(rows));
  std::cout << csv.str();
  int code = kOk;
  for (const auto& l : logs) {
    if (l.outcome == sim::Outcome::Violation) code = std::max(code, static_cast<int>(kViolated));
    if (l.outcome == sim::Outcome::Aborted) code = kNumericError;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signal temporal logic monitoring and barrier-function shielding"};
  app.require_subcommand(1);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Robustness and satisfaction of a formula on a signal");
  eval->add_option("--formula", ev.formula, "Formula text or file")->required();
  eval->add_option("--predicates", ev.predicates, "Predicate declarations (JSON)")->required();
  eval->add_option("--signal", ev.signal, "Signal CSV (t,x1,...,xn)")->required();
  eval->add_option("--time", ev.time, "Evaluation time (a grid time)");

  CertifyArgs ce;
  auto* certify = app.add_subcommand("certify", "Lipschitz certificate of a formula");
  certify->add_option("--formula", ce.formula, "Formula text or file")->required();
  certify->add_option("--predicates", ce.predicates, "Predicate declarations (JSON)")->required();
  certify->add_option("--weights", ce.weights, "Diagonal norm weights, comma separated");

  EnvArgs en;
  auto* env = app.add_subcommand("env", "Environment tools");
  env->require_subcommand(1);
  auto* gen = env->add_subcommand("gen", "Generate an environment from a seed");
  gen->add_option("--seed", en.seed)->required();
  gen->add_option("--out", en.out, "Output file (default stdout)");

  SimArgs si;
  auto* simulate = app.add_subcommand("simulate", "Run one shielded trial");
  simulate->add_option("--seed", si.seed)->required();
  simulate->add_option("--duration", si.duration)->check(CLI::PositiveNumber);
  simulate->add_option("--dt", si.dt)->check(CLI::PositiveNumber);
  simulate->add_option("--basing", si.basing, "Basing toggle times t1,t2,...");
  simulate->add_option("--env", si.env, "Environment JSON instead of generating from the seed");
  simulate->add_option("--out", si.out, "Directory for the trial log");
  simulate->add_option("--format", si.format)->check(CLI::IsMember({"csv", "json"}));

  BatchArgs ba;
  auto* batch = app.add_subcommand("batch", "Run many seeded trials");
  batch->add_option("--seeds", ba.seeds, "Range a..b or list a,b,c");
  batch->add_option("--jobs", ba.jobs)->check(CLI::Range(1, 256));
  batch->add_option("--out", ba.out, "Directory for summary.csv and summary.json")->required();
  batch->add_option("--duration", ba.duration)->check(CLI::PositiveNumber);
  batch->add_option("--dt", ba.dt)->check(CLI::PositiveNumber);
  batch->add_option("--basing", ba.basing);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*eval) return cmd_eval(ev);
    if (*certify) return cmd_certify(ce);
    if (*gen) return cmd_env_gen(en);
    if (*simulate) return cmd_simulate(si);
    if (*batch) return cmd_batch(ba);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::domain_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
