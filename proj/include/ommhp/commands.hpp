#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "io.hpp"
#include "learner.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "scenarios.hpp"
#include "simulator.hpp"
#include "types.hpp"

namespace ommhp {

namespace fs = std::filesystem;

struct SimulateConfig {
  std::string scenario = "d1";  // d1, d2, or a model JSON path via `model`
  std::optional<fs::path> model;
  std::size_t sequences_per_cluster = 10;
  double horizon = 1000.0;
  double decay = kSyntheticDecay;
  std::uint64_t seed = 0;
  fs::path out_dir = ".";
};

struct SimulateOutputs {
  fs::path events;
  fs::path labels;
  fs::path truth;
  std::size_t num_sequences = 0;
  std::size_t num_events = 0;
};

/// events.jsonl, labels.csv and truth.json under out_dir.
inline SimulateOutputs run_simulate(const SimulateConfig& config) {
  MixtureScenario scenario;
  if (config.model) {
    scenario.clusters = read_model(*config.model).clusters;
  } else if (config.scenario == "d1" || config.scenario == "d2") {
    scenario.clusters = synthetic_processes(config.decay);
    if (config.scenario == "d1") scenario.clusters.pop_back();
  } else {
    throw ValidationError("unknown scenario '" + config.scenario + "' (expected d1 or d2)");
  }
  scenario.sequences_per_cluster = config.sequences_per_cluster;
  scenario.horizon = config.horizon;
  scenario.seed = config.seed;
  for (const ClusterParams& c : scenario.clusters) {
    if (!stationarity_check(c).stable) {
      throw ValidationError("scenario cluster is not stationary (spectral radius >= 1)");
    }
  }

  const std::size_t p = scenario.clusters.front().num_types();
  const LabeledDataset data = simulate_mixture(scenario);
  SimulateOutputs out{config.out_dir / "events.jsonl", config.out_dir / "labels.csv",
                      config.out_dir / "truth.json", data.sequences.size(), 0};
  for (const auto& s : data.sequences) out.num_events += s.events.size();

  LabelTable labels;
  for (std::size_t n = 0; n < data.ids.size(); ++n) labels.emplace_back(data.ids[n], data.labels[n]);
  MixtureModel truth{scenario.clusters,
                     std::vector<double>(scenario.clusters.size(),
                                         1.0 / static_cast<double>(scenario.clusters.size()))};
  write_event_log(out.events, to_event_log(data, p));
  write_labels(out.labels, labels);
  write_json(out.truth, model_to_json(truth));
  return out;
}

struct FitConfig {
  fs::path events;
  fs::path out_dir = ".";
  std::optional<fs::path> truth;  // ground-truth model for relative errors
  LearnerConfig learner;
  std::optional<double> decay;  // initial (or fixed) decay; defaults to the truth decay, else 1
  std::size_t sweeps = 1;
};

struct FitOutputs {
  fs::path trajectory;
  fs::path model;
  fs::path assignments;
  std::size_t intervals = 0;
  bool network = false;
};

/// trajectory.csv, model.json and assignments.csv under out_dir.
inline FitOutputs run_fit(const FitConfig& config) {
  const EventLog log = read_event_log(config.events);
  LearnerConfig lc = config.learner;
  lc.num_types = log.num_types;

  std::optional<MixtureModel> truth;
  if (config.truth) {
    truth = read_model(*config.truth);
    if (truth->num_types() != log.num_types) throw ValidationError("truth model has wrong P");
  }
  lc.initial_decay = config.decay ? *config.decay
                     : truth      ? truth->clusters.front().decay(0, 0)
                                  : 1.0;

  FitOutputs out{config.out_dir / "trajectory.csv", config.out_dir / "model.json",
                 config.out_dir / "assignments.csv", 0, log.is_network()};
  if (log.is_network()) {
    const NetworkFitResult fit = fit_network(log.network(), {lc, config.sweeps});
    out.intervals = fit.records.size();
    LabelTable assignments;
    for (std::size_t i = 0; i < fit.assignments.size(); ++i) {
      assignments.emplace_back(std::to_string(i), fit.assignments[i]);
    }
    write_file_atomic(out.trajectory, format_network_trajectory(fit.records, lc.num_clusters));
    write_json(out.model, network_model_to_json(fit.model));
    write_labels(out.assignments, assignments, "node");
    return out;
  }

  if (truth && truth->num_clusters() != lc.num_clusters) {
    throw ValidationError("truth model has a different number of clusters than --k");
  }
  std::span<const ClusterParams> truth_clusters;
  if (truth) truth_clusters = truth->clusters;
  const FitResult fit = fit_online(log.sequences, lc, truth_clusters);
  out.intervals = fit.trajectory.records.size();
  LabelTable assignments;
  for (std::size_t n = 0; n < fit.assignments.size(); ++n) {
    assignments.emplace_back(log.ids[n], fit.assignments[n]);
  }
  write_file_atomic(out.trajectory, format_trajectory(fit.trajectory, lc.num_clusters));
  write_json(out.model, model_to_json(fit.state.model));
  write_labels(out.assignments, assignments);
  return out;
}

struct EvalConfig {
  fs::path assignments;
  fs::path labels;
  std::optional<fs::path> model;  // fitted model
  std::optional<fs::path> truth;  // ground-truth model
  std::optional<fs::path> out;    // JSON report
};

struct EvalReport {
  double ari = 0.0;
  std::size_t num_items = 0;
  std::vector<BlockErrors> errors;  // per true cluster, aligned

  [[nodiscard]] Json to_json() const {
    Json j{{"ari", ari}, {"items", num_items}};
    if (!errors.empty()) {
      Json e = Json::array();
      for (const BlockErrors& b : errors) e.push_back({{"mu", b.base_rates}, {"a", b.amplitudes}});
      j["relative_errors"] = std::move(e);
    }
    return j;
  }

  [[nodiscard]] std::string to_text() const {
    std::ostringstream out;
    out << "items: " << num_items << "\nARI: " << ari << "\n";
    for (std::size_t k = 0; k < errors.size(); ++k) {
      out << "cluster " << k << ": relerr_mu " << errors[k].base_rates << ", relerr_a "
          << errors[k].amplitudes << "\n";
    }
    return out.str();
  }
};

/// ARI between assignments and labels (matched by id) and, given both models,
/// aligned per-cluster relative errors.
inline EvalReport run_eval(const EvalConfig& config) {
  const LabelTable assigned = read_labels(config.assignments);
  const LabelTable labels = read_labels(config.labels);
  if (assigned.size() != labels.size()) {
    throw ValidationError("assignments and labels have different lengths (" +
                          std::to_string(assigned.size()) + " vs " + std::to_string(labels.size()) + ")");
  }
  std::map<std::string, std::size_t> by_id;
  for (const auto& [id, label] : labels) by_id[id] = label;
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
  for (const auto& [id, label] : assigned) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("id '" + id + "' has no label");
    a.push_back(label);
    b.push_back(it->second);
  }
  EvalReport report;
  report.num_items = a.size();
  report.ari = adjusted_rand_index(a, b);

  if (config.model && config.truth) {
    const MixtureModel est = read_model(*config.model);
    const MixtureModel truth = read_model(*config.truth);
    const auto perm = align_clusters(est.clusters, truth.clusters);
    for (std::size_t k = 0; k < truth.num_clusters(); ++k) {
      report.errors.push_back(relative_param_error(est.clusters[perm[k]], truth.clusters[k]));
    }
  }
  if (config.out) write_json(*config.out, report.to_json());
  return report;
}

struct BenchConfig {
  std::vector<std::size_t> sequence_counts{10, 20, 40};
  std::vector<std::size_t> type_counts{2};
  std::vector<std::size_t> cluster_counts{2};
  double horizon = 1000.0;
  double delta = 25.0;
  std::size_t repeats = 3;
  std::uint64_t seed = 0;
  MStepStrategy m_step = MStepStrategy::sgd;
  std::optional<fs::path> out;
};

struct BenchRow {
  std::size_t sequences = 0;
  std::size_t types = 0;
  std::size_t clusters = 0;
  std::size_t events = 0;
  double seconds = 0.0;
  double per_sequence = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double slope = 0.0;      // least-squares seconds per sequence over all rows
  double max_ratio = 1.0;  // max / min normalized time within each (P, K) cell

  [[nodiscard]] std::string to_csv() const {
    std::ostringstream out;
    out.precision(9);
    out << "sequences,types,clusters,events,seconds,per_sequence\n";
    for (const BenchRow& r : rows) {
      out << r.sequences << "," << r.types << "," << r.clusters << "," << r.events << ","
          << r.seconds << "," << r.per_sequence << "\n";
    }
    out << "# slope_seconds_per_sequence," << slope << "\n";
    out << "# max_normalized_ratio," << max_ratio << "\n";
    return out.str();
  }
};

/// Fit time over the (n, P, K) grid: n sequences per cluster of the scaling
/// family, minimum wall clock over `repeats` fits. Normalized time is seconds
/// per sequence.
inline BenchReport run_bench(const BenchConfig& config) {
  if (config.sequence_counts.empty() || config.type_counts.empty() || config.cluster_counts.empty()) {
    throw ValidationError("benchmark grid is empty");
  }
  if (config.repeats == 0) throw ValidationError("repeats must be at least 1");
  BenchReport report;
  for (std::size_t p : config.type_counts) {
    for (std::size_t k : config.cluster_counts) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (std::size_t n : config.sequence_counts) {
        if (n < k) throw ValidationError("need at least one sequence per cluster");
        MixtureScenario scenario{scaling_clusters(k, p), n / k, config.horizon, config.seed};
        const LabeledDataset data = simulate_mixture(scenario);
        LearnerConfig lc;
        lc.num_clusters = k;
        lc.num_types = p;
        lc.delta = config.delta;
        lc.initial_decay = kSyntheticDecay;
        lc.m_step = config.m_step;
        lc.seed = config.seed;
        BenchRow row{data.sequences.size(), p, k, 0, std::numeric_limits<double>::infinity(), 0.0};
        for (const auto& s : data.sequences) row.events += s.events.size();
        for (std::size_t r = 0; r < config.repeats; ++r) {
          const auto start = std::chrono::steady_clock::now();
          const FitResult fit = fit_online(data.sequences, lc);
          const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
          if (fit.assignments.size() != data.sequences.size()) throw NumericError("fit failed");
          row.seconds = std::min(row.seconds, dt.count());
        }
        row.per_sequence = row.seconds / static_cast<double>(row.sequences);
        lo = std::min(lo, row.per_sequence);
        hi = std::max(hi, row.per_sequence);
        report.rows.push_back(row);
      }
      if (lo > 0.0) report.max_ratio = std::max(report.max_ratio, hi / lo);
    }
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const BenchRow& r : report.rows) {
    const auto x = static_cast<double>(r.sequences);
    sx += x;
    sy += r.seconds;
    sxx += x * x;
    sxy += x * r.seconds;
  }
  const auto m = static_cast<double>(report.rows.size());
  const double den = m * sxx - sx * sx;
  report.slope = den > 0.0 ? (m * sxy - sx * sy) / den : 0.0;
  if (config.out) write_file_atomic(*config.out, report.to_csv());
  return report;
}

}  // namespace ommhp
