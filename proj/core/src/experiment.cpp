#include "coloc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "coloc/bus.hpp"
#include "coloc/errors.hpp"
#include "coloc/transport.hpp"

namespace coloc {

std::string to_string(TransportKind kind) {
  switch (kind) {
    case TransportKind::kInproc: return "inproc";
    case TransportKind::kLoopback: return "loopback";
  }
  throw DomainError("unknown transport value");
}

TransportKind transport_from_string(const std::string& name) {
  if (name == "inproc") return TransportKind::kInproc;
  if (name == "loopback") return TransportKind::kLoopback;
  throw DomainError("unknown transport: " + name);
}

double euclidean_error(const Position2D& estimate, const Position2D& truth) {
  return std::hypot(estimate.x - truth.x, estimate.y - truth.y);
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw DomainError("quantile: empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

BoxStats box_stats(const std::vector<double>& sorted) {
  if (sorted.empty()) throw DomainError("box_stats: empty sample");
  BoxStats box;
  box.median = quantile(sorted, 0.5);
  box.q1 = quantile(sorted, 0.25);
  box.q3 = quantile(sorted, 0.75);
  const double iqr = box.q3 - box.q1;
  const double low_fence = box.q1 - 1.5 * iqr;
  const double high_fence = box.q3 + 1.5 * iqr;
  box.whisker_low = box.q1;
  box.whisker_high = box.q3;
  for (double value : sorted) {
    if (value >= low_fence) {
      box.whisker_low = value;
      break;
    }
  }
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
    if (*it <= high_fence) {
      box.whisker_high = *it;
      break;
    }
  }
  for (double value : sorted) {
    if (value < box.whisker_low || value > box.whisker_high) box.outliers.push_back(value);
  }
  return box;
}

ErrorSummary summarize(const RunRecord& record) {
  if (record.poses.empty()) throw DomainError("summarize: run has no epochs");
  if (record.manifest.truth.empty()) throw DomainError("summarize: run has no ground truth");

  ErrorSummary summary;
  double total = 0.0;
  double total_tags = 0.0;
  int tag_count = 0;
  for (const auto& [node, true_position] : record.manifest.truth) {
    NodeErrorStats stats;
    stats.cdf.reserve(record.poses.size());
    double sum_sq = 0.0;
    for (const auto& pose : record.poses) {
      auto it = pose.positions.find(node);
      if (it == pose.positions.end()) {
        throw DomainError("summarize: pose is missing node " + std::to_string(node));
      }
      const double error = euclidean_error(it->second, true_position);
      stats.cdf.push_back(error);
      sum_sq += error * error;
      stats.max_error = std::max(stats.max_error, error);
    }
    std::sort(stats.cdf.begin(), stats.cdf.end());
    stats.rmse = std::sqrt(sum_sq / static_cast<double>(record.poses.size()));
    stats.box = box_stats(stats.cdf);
    total += stats.rmse;
    if (node != 0) {
      total_tags += stats.rmse;
      ++tag_count;
    }
    summary.nodes[node] = std::move(stats);
  }
  summary.mean_rmse = total / static_cast<double>(summary.nodes.size());
  summary.mean_rmse_tags = tag_count > 0 ? total_tags / tag_count : 0.0;
  return summary;
}

namespace {

std::vector<NodeId> tag_nodes(const NetworkTopology& topology) {
  std::vector<NodeId> tags;
  for (const auto& node : topology.nodes) {
    if (node.roles.tag && !topology.pairs_for_tag(node.id).empty()) tags.push_back(node.id);
  }
  return tags;
}

std::int64_t micros_key(double timestamp) { return std::llround(timestamp * 1e6); }

using EpochBuckets = std::map<std::int64_t, std::map<RangingPair, RangeMeasurement>>;

void build_record(const RunConfig& config, EpochBuckets& buckets, std::uint64_t expected_epochs,
                  RunRecord& record) {
  if (buckets.size() != expected_epochs) {
    throw TransportError("run produced " + std::to_string(buckets.size()) + " epochs, expected " +
                         std::to_string(expected_epochs));
  }
  record.measurements.reserve(buckets.size() * record.topology.pairs.size());
  record.poses.reserve(buckets.size());
  std::uint64_t index = 0;
  for (auto& [key, by_pair] : buckets) {
    const double epoch_time = static_cast<double>(key) * 1e-6;
    std::map<RangingPair, double> distances;
    for (const auto& pair : record.topology.pairs) {
      auto it = by_pair.find(pair);
      if (it == by_pair.end()) {
        throw TransportError("epoch " + std::to_string(index) + " is missing pair " +
                             std::to_string(pair.tag) + "->" + std::to_string(pair.anchor));
      }
      RangeMeasurement measurement = it->second;
      measurement.sequence = index;
      measurement.timestamp = epoch_time;
      record.measurements.push_back(measurement);
      distances[pair] = config.calibration
                            ? correct_distance(*config.calibration, pair, measurement.distance)
                            : measurement.distance;
    }
    const PoseEstimate* previous = record.poses.empty() ? nullptr : &record.poses.back();
    record.poses.push_back(estimate_poses(distances, epoch_time, config.solver, previous));
    ++index;
  }
}

void write_summary_csv(const std::filesystem::path& path, const std::string& config_name,
                       const ErrorSummary& summary) {
  std::ofstream out(path);
  if (!out) throw TransportError("cannot write " + path.string());
  out << "config,node,rmse_m,max_err_m,median_m,q1_m,q3_m\n";
  for (const auto& [node, stats] : summary.nodes) {
    out << config_name << ',' << node << ',' << format_double(stats.rmse) << ','
        << format_double(stats.max_error) << ',' << format_double(stats.box.median) << ','
        << format_double(stats.box.q1) << ',' << format_double(stats.box.q3) << '\n';
  }
  out << config_name << ",mean," << format_double(summary.mean_rmse) << ",,,,\n";
  out << config_name << ",mean_ex0," << format_double(summary.mean_rmse_tags) << ",,,,\n";
  out.flush();
  if (!out) throw TransportError("write failed: " + path.string());
}

}  // namespace

std::string run_files::cdf_name(NodeId node) {
  return "cdf_node" + std::to_string(node) + ".csv";
}

void write_run_outputs(const std::filesystem::path& dir, const RunRecord& record,
                       const ErrorSummary& summary) {
  std::filesystem::create_directories(dir);
  save_manifest(dir / run_files::kManifest, record.manifest);
  save_measurements(dir / run_files::kMeasurements, record.measurements);
  save_poses(dir / run_files::kPoses, record.poses);
  write_summary_csv(dir / run_files::kSummary, record.manifest.shape, summary);

  for (const auto& [node, stats] : summary.nodes) {
    std::ofstream cdf(dir / run_files::cdf_name(node));
    if (!cdf) throw TransportError("cannot write cdf file");
    cdf << "error_m,cum_prob\n";
    const auto n = static_cast<double>(stats.cdf.size());
    for (std::size_t i = 0; i < stats.cdf.size(); ++i) {
      cdf << format_double(stats.cdf[i]) << ','
          << format_double(static_cast<double>(i + 1) / n) << '\n';
    }
  }

  std::ofstream box(dir / run_files::kBox);
  if (!box) throw TransportError("cannot write box file");
  box << "node,median_m,q1_m,q3_m,whisker_low_m,whisker_high_m,n_outliers\n";
  for (const auto& [node, stats] : summary.nodes) {
    box << node << ',' << format_double(stats.box.median) << ',' << format_double(stats.box.q1)
        << ',' << format_double(stats.box.q3) << ',' << format_double(stats.box.whisker_low)
        << ',' << format_double(stats.box.whisker_high) << ',' << stats.box.outliers.size()
        << '\n';
  }

  std::ofstream outliers(dir / run_files::kBoxOutliers);
  if (!outliers) throw TransportError("cannot write outlier file");
  outliers << "node,error_m\n";
  for (const auto& [node, stats] : summary.nodes) {
    for (double value : stats.box.outliers) {
      outliers << node << ',' << format_double(value) << '\n';
    }
  }

  std::ofstream xcoord(dir / run_files::kXCoord);
  if (!xcoord) throw TransportError("cannot write xcoord file");
  xcoord << "epoch_time_s,node,x_m\n";
  for (const auto& pose : record.poses) {
    for (const auto& [node, position] : pose.positions) {
      xcoord << format_double(pose.epoch) << ',' << node << ',' << format_double(position.x)
             << '\n';
    }
  }
}

RunResult run_experiment(const RunConfig& config, const std::filesystem::path& out_dir) {
  RunResult result;
  RunRecord& record = result.record;

  std::map<NodeId, Position2D> truth;
  if (config.scene) {
    record.topology = config.scene->topology;
    truth = config.scene->positions;
    record.manifest.shape = "custom";
  } else {
    record.topology = canonical_topology();
    truth = canonical_geometry(config.shape, config.scale);
    record.manifest.shape = to_string(config.shape);
  }
  const ValidationReport validation = validate_topology(record.topology);
  if (!validation.valid) {
    throw DomainError("invalid topology: " + validation.issues.front());
  }
  for (const auto& pair : canonical_pairs()) {
    if (std::find(record.topology.pairs.begin(), record.topology.pairs.end(), pair) ==
        record.topology.pairs.end()) {
      throw DomainError("pose estimation requires pair " + std::to_string(pair.tag) + "->" +
                        std::to_string(pair.anchor));
    }
  }
  if (!(config.rate > 0.0)) throw DomainError("rate must be positive");
  if (!(config.duration > 0.0)) throw DomainError("duration must be positive");

  record.manifest.scale = config.scale;
  record.manifest.rate = config.rate;
  record.manifest.duration = config.duration;
  record.manifest.seed = config.seed;
  record.manifest.transport = to_string(config.transport);
  record.manifest.calibrated = config.calibration.has_value();
  record.manifest.truth = truth;

  ErrorModel error = config.error;
  error.seed = config.seed;

  const auto epochs = static_cast<std::uint64_t>(config.rate * config.duration);
  const std::vector<NodeId> tags = tag_nodes(record.topology);

  TopicBus bus;
  std::map<NodeId, Subscription<RangeMeasurement>> subscriptions;
  std::map<NodeId, std::size_t> expected;
  for (NodeId tag : tags) {
    expected[tag] = record.topology.pairs_for_tag(tag).size() * epochs;
    subscriptions.emplace(tag,
                          bus.subscribe<RangeMeasurement>(ranging_topic(tag), expected[tag] + 16));
  }

  EpochBuckets buckets;
  const auto drain = [&](bool blocking) {
    for (NodeId tag : tags) {
      auto& subscription = subscriptions.at(tag);
      std::size_t received = 0;
      int idle_polls = 0;
      while (received < expected.at(tag)) {
        auto measurement = blocking ? subscription.wait(std::chrono::milliseconds(50))
                                    : subscription.poll();
        if (measurement) {
          buckets[micros_key(measurement->timestamp)][measurement->pair] = *measurement;
          ++received;
          idle_polls = 0;
          continue;
        }
        if (!blocking || ++idle_polls > 100) {
          throw TransportError("ranging stream for tag " + std::to_string(tag) + " delivered " +
                               std::to_string(received) + " of " +
                               std::to_string(expected.at(tag)) + " measurements");
        }
      }
    }
  };

  if (config.transport == TransportKind::kInproc) {
    run_ranging_schedule(record.topology, truth, error, config.clocks, config.rate,
                         config.duration, [&bus](const RangeMeasurement& measurement) {
                           bus.publish(ranging_topic(measurement.pair.tag), measurement);
                           return true;
                         });
    drain(false);
  } else {
    StreamServer server(bus);
    const std::uint16_t port = server.start();
    std::map<NodeId, StreamClient> clients;
    for (NodeId tag : tags) clients[tag].connect("127.0.0.1", port);

    std::int64_t current_key = -1;
    std::map<NodeId, std::vector<RangeMeasurement>> pending;
    const auto flush = [&]() {
      if (current_key < 0) return;
      for (NodeId tag : tags) {
        auto& bundle = pending[tag];
        if (bundle.empty()) continue;
        clients.at(tag).send(
            bundle_measurements(tag, static_cast<std::uint64_t>(current_key), bundle));
        bundle.clear();
      }
    };
    run_ranging_schedule(record.topology, truth, error, config.clocks, config.rate,
                         config.duration, [&](const RangeMeasurement& measurement) {
                           const std::int64_t key = micros_key(measurement.timestamp);
                           if (key != current_key) {
                             flush();
                             current_key = key;
                           }
                           pending[measurement.pair.tag].push_back(measurement);
                           return true;
                         });
    flush();
    for (auto& [tag, client] : clients) client.close();
    drain(true);
    server.stop();
  }

  try {
    build_record(config, buckets, epochs, record);
    result.summary = summarize(record);
  } catch (...) {
    // Flush whatever exists so a broken run can still be inspected.
    if (!out_dir.empty()) {
      try {
        std::filesystem::create_directories(out_dir);
        save_manifest(out_dir / run_files::kManifest, record.manifest);
        if (!record.measurements.empty()) {
          save_measurements(out_dir / run_files::kMeasurements, record.measurements);
        }
        if (!record.poses.empty()) save_poses(out_dir / run_files::kPoses, record.poses);
      } catch (...) {
      }
    }
    throw;
  }

  if (!out_dir.empty()) write_run_outputs(out_dir, record, result.summary);
  return result;
}

RunRecord load_run(const std::filesystem::path& dir) {
  RunRecord record;
  record.manifest = load_manifest(dir / run_files::kManifest);
  record.topology = canonical_topology();
  record.measurements = load_measurements(dir / run_files::kMeasurements);
  record.poses = load_poses(dir / run_files::kPoses);
  return record;
}

std::vector<SummaryRow> load_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "config,node,rmse_m,max_err_m,median_m,q1_m,q3_m") {
    throw ParseError(path.string() + ": bad summary header");
  }
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    fields.resize(7);
    SummaryRow row;
    row.config = fields[0];
    row.node = fields[1];
    row.rmse = fields[2].empty() ? 0.0 : parse_double(fields[2]);
    row.max_error = fields[3].empty() ? 0.0 : parse_double(fields[3]);
    row.median = fields[4].empty() ? 0.0 : parse_double(fields[4]);
    row.q1 = fields[5].empty() ? 0.0 : parse_double(fields[5]);
    row.q3 = fields[6].empty() ? 0.0 : parse_double(fields[6]);
    rows.push_back(std::move(row));
  }
  return rows;
}

DominanceReport compare_runs(const RunRecord& a, const RunRecord& b) {
  const RunManifest& ma = a.manifest;
  const RunManifest& mb = b.manifest;
  if (ma.shape != mb.shape || ma.scale != mb.scale || ma.rate != mb.rate ||
      ma.duration != mb.duration || ma.truth != mb.truth) {
    throw DomainError("compare_runs: runs have different geometry or duration");
  }

  const auto node_errors = [](const RunRecord& record, NodeId node) {
    std::vector<double> errors;
    errors.reserve(record.poses.size());
    const Position2D truth = record.manifest.truth.at(node);
    for (const auto& pose : record.poses) {
      errors.push_back(euclidean_error(pose.positions.at(node), truth));
    }
    std::sort(errors.begin(), errors.end());
    return errors;
  };

  DominanceReport report;
  report.a_dominates_tags = true;
  report.tie = true;
  for (const auto& [node, truth] : ma.truth) {
    const auto errors_a = node_errors(a, node);
    const auto errors_b = node_errors(b, node);
    DecileComparison comparison;
    comparison.a_dominates = true;
    comparison.tie = true;
    for (int i = 0; i < 9; ++i) {
      const double q = 0.1 * (i + 1);
      comparison.a[i] = quantile(errors_a, q);
      comparison.b[i] = quantile(errors_b, q);
      if (comparison.a[i] > comparison.b[i]) comparison.a_dominates = false;
      if (comparison.a[i] != comparison.b[i]) comparison.tie = false;
    }
    if (node != 0 && !comparison.a_dominates) report.a_dominates_tags = false;
    if (!comparison.tie) report.tie = false;
    report.nodes[node] = comparison;
  }
  return report;
}

}  // namespace coloc
