// ommhp: simulate, fit, evaluate and benchmark online Hawkes mixtures.
//
// Every option may also come from a flat key=value config file (--config)
// or from the environment as OMMHP_<OPTION>, e.g. OMMHP_SEED=7 or
// OMMHP_M_STEP=em. Precedence: command line, then environment, then file.
//
// Exit codes: 0 success, 1 invalid input, 2 numeric failure, 3 I/O failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <ommhp/ommhp.hpp>

namespace {

std::string env_name(const std::string& flag) {
  std::string out = "OMMHP_";
  for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

struct Options {
  std::uint64_t seed = 0;
  std::string out_dir = ".";

  std::string scenario = "d1";
  std::size_t n = 10;
  double horizon = 1000.0;
  std::optional<double> decay;
  std::string truth;

  std::string events;
  std::size_t k = 2;
  double delta = 25.0;
  ommhp::MStepStrategy m_step = ommhp::MStepStrategy::sgd;
  ommhp::DecayMode learn_decay = ommhp::DecayMode::fixed;
  ommhp::Preconditioner preconditioner = ommhp::Preconditioner::fisher;
  double step_scale = 1.0;
  double step_offset = 1.0;
  double step_power = 0.5;
  std::size_t em_iterations = 10;
  double em_window = 0.0;
  std::size_t sweeps = 1;

  std::string assignments;
  std::string labels;
  std::string model;

  std::vector<std::size_t> bench_n{10, 20, 40};
  std::vector<std::size_t> bench_p{2};
  std::vector<std::size_t> bench_k{2};
  std::size_t repeats = 3;
};

int run(const std::string& command, const Options& o) {
  namespace fs = std::filesystem;
  if (command == "simulate") {
    ommhp::SimulateConfig c;
    c.scenario = o.scenario;
    if (!o.truth.empty()) c.model = o.truth;
    c.sequences_per_cluster = o.n;
    c.horizon = o.horizon;
    c.decay = o.decay.value_or(ommhp::kSyntheticDecay);
    c.seed = o.seed;
    c.out_dir = o.out_dir;
    const auto out = ommhp::run_simulate(c);
    std::cout << "wrote " << out.num_sequences << " sequences (" << out.num_events << " events) to "
              << out.events.string() << "\n";
    return 0;
  }
  if (command == "fit") {
    if (o.events.empty()) throw ommhp::ValidationError("fit needs --events");
    ommhp::FitConfig c;
    c.events = o.events;
    c.out_dir = o.out_dir;
    if (!o.truth.empty()) c.truth = o.truth;
    c.decay = o.decay;
    c.sweeps = o.sweeps;
    ommhp::LearnerConfig& l = c.learner;
    l.num_clusters = o.k;
    l.delta = o.delta;
    l.m_step = o.m_step;
    l.decay_mode = o.learn_decay;
    l.preconditioner = o.preconditioner;
    l.schedule = {o.step_scale, o.step_offset, o.step_power};
    l.em.iterations = o.em_iterations;
    l.em.window = o.em_window;
    l.seed = o.seed;
    const auto out = ommhp::run_fit(c);
    std::cout << "fitted " << out.intervals << " intervals; wrote " << out.model.string() << ", "
              << out.trajectory.string() << ", " << out.assignments.string() << "\n";
    return 0;
  }
  if (command == "eval") {
    if (o.assignments.empty() || o.labels.empty()) {
      throw ommhp::ValidationError("eval needs --assignments and --labels");
    }
    ommhp::EvalConfig c;
    c.assignments = o.assignments;
    c.labels = o.labels;
    if (!o.model.empty()) c.model = o.model;
    if (!o.truth.empty()) c.truth = o.truth;
    c.out = fs::path(o.out_dir) / "eval.json";
    std::cout << ommhp::run_eval(c).to_text();
    return 0;
  }
  ommhp::BenchConfig c;
  c.sequence_counts = o.bench_n;
  c.type_counts = o.bench_p;
  c.cluster_counts = o.bench_k;
  c.horizon = o.horizon;
  c.delta = o.delta;
  c.repeats = o.repeats;
  c.seed = o.seed;
  c.m_step = o.m_step;
  c.out = fs::path(o.out_dir) / "bench.csv";
  std::cout << ommhp::run_bench(c).to_csv();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online learning of Hawkes process mixtures"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "Flat key=value configuration file");

  Options o;
  const std::map<std::string, ommhp::MStepStrategy> m_steps{{"sgd", ommhp::MStepStrategy::sgd},
                                                            {"em", ommhp::MStepStrategy::em}};
  const std::map<std::string, ommhp::DecayMode> decay_modes{{"fixed", ommhp::DecayMode::fixed},
                                                            {"learned", ommhp::DecayMode::learned}};
  const std::map<std::string, ommhp::Preconditioner> preconditioners{
      {"fisher", ommhp::Preconditioner::fisher}, {"none", ommhp::Preconditioner::none}};

  auto add = [&](CLI::Option* opt) { return opt->envname(env_name(opt->get_name(false, true).substr(2))); };

  add(app.add_option("--seed", o.seed, "Master RNG seed"));
  add(app.add_option("--out-dir", o.out_dir, "Output directory"));

  add(app.add_option("--scenario", o.scenario, "Synthetic scenario: d1 or d2")->group("simulate"));
  add(app.add_option("--n", o.n, "Sequences per cluster")->group("simulate"));
  add(app.add_option("--horizon", o.horizon, "Observation horizon T")->group("simulate"));
  add(app.add_option("--decay", o.decay, "Kernel decay (simulate: scenario decay; fit: initial or fixed decay)"));
  add(app.add_option("--truth", o.truth, "Ground-truth model JSON"));

  add(app.add_option("--events", o.events, "Event log (JSON lines)")->group("fit"));
  add(app.add_option("--k", o.k, "Number of clusters K")->group("fit"));
  add(app.add_option("--delta", o.delta, "Interval length")->group("fit"));
  add(app.add_option("--m-step", o.m_step, "M-step: sgd or em")
          ->transform(CLI::CheckedTransformer(m_steps, CLI::ignore_case))
          ->group("fit"));
  add(app.add_option("--learn-decay", o.learn_decay, "Decay mode: fixed or learned")
          ->transform(CLI::CheckedTransformer(decay_modes, CLI::ignore_case))
          ->group("fit"));
  add(app.add_option("--preconditioner", o.preconditioner, "SGD scaling: fisher or none")
          ->transform(CLI::CheckedTransformer(preconditioners, CLI::ignore_case))
          ->group("fit"));
  add(app.add_option("--step-scale", o.step_scale, "eta_t = scale / (t + offset)^power")->group("fit"));
  add(app.add_option("--step-offset", o.step_offset)->group("fit"));
  add(app.add_option("--step-power", o.step_power)->group("fit"));
  add(app.add_option("--em-iterations", o.em_iterations, "EM passes per interval")->group("fit"));
  add(app.add_option("--em-window", o.em_window, "EM buffer length; 0 keeps all history")->group("fit"));
  add(app.add_option("--sweeps", o.sweeps, "Network coordinate sweeps per interval")->group("fit"));

  add(app.add_option("--assignments", o.assignments, "Assignments CSV")->group("eval"));
  add(app.add_option("--labels", o.labels, "Labels CSV")->group("eval"));
  add(app.add_option("--model", o.model, "Fitted model JSON")->group("eval"));

  add(app.add_option("--bench-n", o.bench_n, "Sequence counts")->delimiter(',')->group("bench"));
  add(app.add_option("--bench-p", o.bench_p, "Type counts")->delimiter(',')->group("bench"));
  add(app.add_option("--bench-k", o.bench_k, "Cluster counts")->delimiter(',')->group("bench"));
  add(app.add_option("--repeats", o.repeats, "Timed fits per cell")->group("bench"));

  for (const char* name : {"simulate", "fit", "eval", "bench"}) {
    app.add_subcommand(name)->fallthrough();
  }
  app.get_subcommand("simulate")->description("Simulate a labeled Hawkes mixture");
  app.get_subcommand("fit")->description("Fit the online mixture learner to an event log");
  app.get_subcommand("eval")->description("Score assignments against labels");
  app.get_subcommand("bench")->description("Time fits over a grid of sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const ommhp::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ommhp::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const ommhp::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 2;
  } catch (const ommhp::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
