#pragma once

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "learner.hpp"
#include "network.hpp"
#include "types.hpp"

// File formats
//
// Event log, JSON lines. An optional first record carries metadata:
//   {"horizon": 1000.0, "types": 2, "sequences": ["s0", "s1"], "nodes": 4}
// and every other record is one event:
//   {"seq": "s0", "t": 1.25, "p": 0}                 sequence data
//   {"seq": "e3", "t": 1.25, "p": 0, "src": 1, "dst": 2}   network data
// Without metadata the horizon is the last event time, P is one more than the
// largest type and sequences appear in order of first mention. Events are
// written in global time order.
//
// Labels and assignments: CSV with header `seq,label`.
// Trajectory: CSV `interval,elbo,pi_0..,relerr_mu_0..,relerr_a_0..`.

namespace ommhp {

using Json = nlohmann::json;

struct EventLog {
  std::vector<std::string> ids;
  std::vector<EventSequence> sequences;
  std::size_t num_types = 0;
  double horizon = 0.0;
  std::size_t num_nodes = 0;
  std::vector<Edge> edges;  // one per sequence for network data, else empty

  [[nodiscard]] bool is_network() const noexcept { return !edges.empty(); }

  [[nodiscard]] NetworkEventLog network() const {
    if (!is_network()) throw ValidationError("event log has no edges");
    return {num_nodes, edges, sequences, horizon};
  }
};

/// Writes `content` to a temporary sibling and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

[[nodiscard]] inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace detail

[[nodiscard]] inline std::string format_event_log(const EventLog& log) {
  Json meta{{"horizon", log.horizon}, {"types", log.num_types}, {"sequences", log.ids}};
  if (log.is_network()) meta["nodes"] = log.num_nodes;
  std::string out = meta.dump() + "\n";

  struct Ref {
    double time;
    std::size_t seq;
    std::size_t pos;
  };
  std::vector<Ref> refs;
  for (std::size_t n = 0; n < log.sequences.size(); ++n) {
    for (std::size_t i = 0; i < log.sequences[n].events.size(); ++i) {
      refs.push_back({log.sequences[n].events[i].time, n, i});
    }
  }
  std::stable_sort(refs.begin(), refs.end(),
                   [](const Ref& a, const Ref& b) { return a.time < b.time; });
  for (const Ref& r : refs) {
    const Event& e = log.sequences[r.seq].events[r.pos];
    Json rec{{"seq", log.ids[r.seq]}, {"t", e.time}, {"p", e.type}};
    if (log.is_network()) {
      rec["src"] = log.edges[r.seq].source;
      rec["dst"] = log.edges[r.seq].target;
    }
    out += rec.dump();
    out += '\n';
  }
  return out;
}

[[nodiscard]] inline EventLog parse_event_log(const std::string& text) {
  const auto lines = detail::split_lines(text);
  EventLog log;
  std::map<std::string, std::size_t> index;
  std::optional<double> horizon;
  std::optional<std::size_t> types;
  std::optional<std::size_t> nodes;
  std::vector<bool> has_edge;
  bool first_record = true;
  std::size_t max_type = 0;
  bool any_event = false;
  std::optional<bool> network_mode;
  double last_time = 0.0;

  auto sequence_for = [&](const std::string& id) {
    auto [it, inserted] = index.emplace(id, log.ids.size());
    if (inserted) {
      log.ids.push_back(id);
      log.sequences.emplace_back();
      log.edges.emplace_back();
      has_edge.push_back(false);
    }
    return it->second;
  };

  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    if (detail::blank(lines[ln])) continue;
    Json rec;
    try {
      rec = Json::parse(lines[ln]);
    } catch (const Json::exception& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(line_no, "record is not an object");
    try {
      if (first_record && rec.contains("horizon")) {
        first_record = false;
        horizon = rec.at("horizon").get<double>();
        if (!(*horizon > 0.0) || !std::isfinite(*horizon)) throw ParseError(line_no, "horizon must be positive");
        if (rec.contains("types")) types = rec.at("types").get<std::size_t>();
        if (rec.contains("nodes")) nodes = rec.at("nodes").get<std::size_t>();
        if (rec.contains("sequences")) {
          for (const auto& id : rec.at("sequences")) {
            const std::size_t before = log.ids.size();
            if (sequence_for(id.get<std::string>()) != before) {
              throw ParseError(line_no, "duplicate sequence id in metadata");
            }
          }
        }
        continue;
      }
      first_record = false;
      for (const char* key : {"seq", "t", "p"}) {
        if (!rec.contains(key)) throw ParseError(line_no, std::string("missing field '") + key + "'");
      }
      const auto& seq_field = rec.at("seq");
      const std::string id = seq_field.is_string() ? seq_field.get<std::string>() : seq_field.dump();
      const double t = rec.at("t").get<double>();
      const auto& p_field = rec.at("p");
      if (!p_field.is_number_integer() || p_field.get<long long>() < 0) {
        throw ParseError(line_no, "field 'p' must be a nonnegative integer");
      }
      const auto p = p_field.get<std::size_t>();
      if (!std::isfinite(t) || t < 0.0) throw ParseError(line_no, "field 't' must be a finite nonnegative time");
      if (types && p >= *types) throw ParseError(line_no, "event type exceeds the declared type count");
      if (horizon && t > *horizon) throw ParseError(line_no, "event time exceeds the declared horizon");

      const std::size_t n = sequence_for(id);
      auto& events = log.sequences[n].events;
      if (!events.empty() && t < events.back().time) {
        throw ParseError(line_no, "events of sequence '" + id + "' are not in time order");
      }
      const bool edge = rec.contains("src") || rec.contains("dst");
      if (edge) {
        if (!rec.contains("src") || !rec.contains("dst")) throw ParseError(line_no, "edge needs both src and dst");
        const Edge e{rec.at("src").get<std::size_t>(), rec.at("dst").get<std::size_t>()};
        if (has_edge[n] && !(log.edges[n] == e)) {
          throw ParseError(line_no, "sequence '" + id + "' changes edge");
        }
        log.edges[n] = e;
        has_edge[n] = true;
      }
      if (network_mode && *network_mode != edge) {
        throw ParseError(line_no, "mixed network and sequence records");
      }
      network_mode = edge;
      events.push_back({t, p});
      max_type = std::max(max_type, p);
      last_time = std::max(last_time, t);
      any_event = true;
    } catch (const Json::exception& e) {
      throw ParseError(line_no, std::string("bad field: ") + e.what());
    }
  }

  if (log.ids.empty()) throw ValidationError("no sequences");
  log.num_types = types ? *types : (any_event ? max_type + 1 : 1);
  log.horizon = horizon ? *horizon : last_time;
  if (!(log.horizon > 0.0)) throw ValidationError("event log has no positive horizon");
  for (auto& s : log.sequences) s.horizon = log.horizon;

  const bool network = std::any_of(has_edge.begin(), has_edge.end(), [](bool b) { return b; });
  if (network) {
    for (std::size_t n = 0; n < has_edge.size(); ++n) {
      if (!has_edge[n]) throw ValidationError("sequence '" + log.ids[n] + "' has no edge");
    }
    std::size_t max_node = 0;
    for (const Edge& e : log.edges) max_node = std::max({max_node, e.source, e.target});
    log.num_nodes = nodes ? *nodes : max_node + 1;
    log.network().validate(log.num_types);
  } else {
    log.edges.clear();
  }
  return log;
}

inline void write_event_log(const std::filesystem::path& path, const EventLog& log) {
  write_file_atomic(path, format_event_log(log));
}

[[nodiscard]] inline EventLog read_event_log(const std::filesystem::path& path) {
  return parse_event_log(read_file(path));
}

/// Event log of a simulated dataset (ids taken from the dataset).
[[nodiscard]] inline EventLog to_event_log(const LabeledDataset& data, std::size_t num_types) {
  EventLog log;
  log.ids = data.ids;
  log.sequences = data.sequences;
  log.num_types = num_types;
  log.horizon = data.sequences.empty() ? 0.0 : data.sequences.front().horizon;
  return log;
}

// Labels / assignments -------------------------------------------------------

using LabelTable = std::vector<std::pair<std::string, std::size_t>>;

[[nodiscard]] inline std::string format_labels(const LabelTable& labels,
                                               const std::string& key = "seq") {
  std::string out = key + ",label\n";
  for (const auto& [id, label] : labels) out += id + "," + std::to_string(label) + "\n";
  return out;
}

[[nodiscard]] inline LabelTable parse_labels(const std::string& text) {
  const auto lines = detail::split_lines(text);
  LabelTable out;
  bool header = true;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (detail::blank(lines[ln])) continue;
    if (header) {
      header = false;
      if (lines[ln].rfind("seq,", 0) == 0 || lines[ln].rfind("node,", 0) == 0) continue;
    }
    const auto comma = lines[ln].rfind(',');
    if (comma == std::string::npos) throw ParseError(ln + 1, "expected 'id,label'");
    const std::string id = lines[ln].substr(0, comma);
    const std::string value = lines[ln].substr(comma + 1);
    std::size_t label = 0;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(value, &used);
      if (used != value.size() || v < 0) throw std::invalid_argument("label");
      label = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ParseError(ln + 1, "label must be a nonnegative integer");
    }
    out.emplace_back(id, label);
  }
  return out;
}

inline void write_labels(const std::filesystem::path& path, const LabelTable& labels,
                         const std::string& key = "seq") {
  write_file_atomic(path, format_labels(labels, key));
}

[[nodiscard]] inline LabelTable read_labels(const std::filesystem::path& path) {
  return parse_labels(read_file(path));
}

// Models ---------------------------------------------------------------------

[[nodiscard]] inline Json cluster_to_json(const ClusterParams& c) {
  const std::size_t p = c.num_types();
  Json a = Json::array();
  Json b = Json::array();
  for (std::size_t q = 0; q < p; ++q) {
    Json ra = Json::array();
    Json rb = Json::array();
    for (std::size_t r = 0; r < p; ++r) {
      ra.push_back(c.amplitude(q, r));
      rb.push_back(c.decay(q, r));
    }
    a.push_back(std::move(ra));
    b.push_back(std::move(rb));
  }
  return {{"mu", c.base_rates}, {"a", std::move(a)}, {"b", std::move(b)}};
}

[[nodiscard]] inline ClusterParams cluster_from_json(const Json& j) {
  ClusterParams c;
  c.base_rates = j.at("mu").get<std::vector<double>>();
  const std::size_t p = c.base_rates.size();
  const auto a = j.at("a").get<std::vector<std::vector<double>>>();
  c.kernels = Grid<KernelParams>(p, p);
  if (a.size() != p) throw ValidationError("amplitude matrix must be P x P");
  std::vector<std::vector<double>> b;
  const bool scalar_decay = j.at("b").is_number();
  if (!scalar_decay) b = j.at("b").get<std::vector<std::vector<double>>>();
  if (!scalar_decay && b.size() != p) throw ValidationError("decay matrix must be P x P");
  for (std::size_t q = 0; q < p; ++q) {
    if (a[q].size() != p || (!scalar_decay && b[q].size() != p)) {
      throw ValidationError("kernel matrices must be P x P");
    }
    for (std::size_t r = 0; r < p; ++r) {
      c.kernels(q, r) = {a[q][r], scalar_decay ? j.at("b").get<double>() : b[q][r]};
    }
  }
  c.validate();
  return c;
}

[[nodiscard]] inline Json model_to_json(const MixtureModel& m) {
  Json clusters = Json::array();
  for (const ClusterParams& c : m.clusters) clusters.push_back(cluster_to_json(c));
  return {{"num_types", m.num_types()},
          {"num_clusters", m.num_clusters()},
          {"prior", m.prior},
          {"clusters", std::move(clusters)}};
}

[[nodiscard]] inline MixtureModel model_from_json(const Json& j) {
  MixtureModel m;
  try {
    for (const auto& c : j.at("clusters")) m.clusters.push_back(cluster_from_json(c));
    if (j.contains("prior")) {
      m.prior = j.at("prior").get<std::vector<double>>();
    } else {
      m.prior.assign(m.clusters.size(), m.clusters.empty() ? 0.0 : 1.0 / double(m.clusters.size()));
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
  m.validate();
  return m;
}

[[nodiscard]] inline Json network_model_to_json(const PairClusterModel& m) {
  const std::size_t k = m.num_clusters();
  Json blocks = Json::array();
  Json prior = Json::array();
  for (std::size_t k1 = 0; k1 < k; ++k1) {
    Json row = Json::array();
    Json prow = Json::array();
    for (std::size_t k2 = 0; k2 < k; ++k2) {
      row.push_back(cluster_to_json(m.params(k1, k2)));
      prow.push_back(m.prior(k1, k2));
    }
    blocks.push_back(std::move(row));
    prior.push_back(std::move(prow));
  }
  return {{"network", true},
          {"num_types", m.num_types()},
          {"num_clusters", k},
          {"prior", std::move(prior)},
          {"blocks", std::move(blocks)}};
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

[[nodiscard]] inline Json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(1, std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
}

[[nodiscard]] inline MixtureModel read_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path));
}

// Trajectory -----------------------------------------------------------------

[[nodiscard]] inline std::string format_trajectory(const FitTrajectory& trajectory,
                                                   std::size_t num_clusters) {
  std::ostringstream out;
  out.precision(17);
  out << "interval,elbo";
  for (std::size_t k = 0; k < num_clusters; ++k) out << ",pi_" << k;
  const std::size_t errs =
      trajectory.records.empty() ? 0 : trajectory.records.front().relerr_mu.size();
  for (std::size_t k = 0; k < errs; ++k) out << ",relerr_mu_" << k;
  for (std::size_t k = 0; k < errs; ++k) out << ",relerr_a_" << k;
  out << "\n";
  for (const TrajectoryRecord& r : trajectory.records) {
    out << r.interval << "," << r.elbo;
    for (double v : r.prior) out << "," << v;
    for (double v : r.relerr_mu) out << "," << v;
    for (double v : r.relerr_a) out << "," << v;
    out << "\n";
  }
  return out.str();
}

[[nodiscard]] inline std::string format_network_trajectory(
    const std::vector<NetworkTrajectoryRecord>& records, std::size_t num_clusters) {
  std::ostringstream out;
  out.precision(17);
  out << "interval,elbo";
  for (std::size_t k = 0; k < num_clusters * num_clusters; ++k) out << ",pi_" << k;
  out << "\n";
  for (const auto& r : records) {
    out << r.interval << "," << r.elbo;
    for (double v : r.prior) out << "," << v;
    out << "\n";
  }
  return out.str();
}

}  // namespace ommhp
