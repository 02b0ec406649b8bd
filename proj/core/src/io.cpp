#include "coloc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "coloc/errors.hpp"

namespace coloc {

std::string format_double(double value) {
  char buffer[32];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw NumericalError("format_double failed");
  return std::string(buffer, end);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("bad number: '" + text + "'");
  }
  return value;
}

namespace {

std::uint64_t parse_u64(const std::string& text) {
  std::uint64_t value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("bad integer: '" + text + "'");
  }
  return value;
}

NodeId parse_node_id(const std::string& text) {
  const std::uint64_t value = parse_u64(text);
  if (value > 0xFFFF) throw ParseError("node id out of range: " + text);
  return static_cast<NodeId>(value);
}

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, delimiter)) fields.push_back(field);
  return fields;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw TransportError("cannot write " + path.string());
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw TransportError("write failed: " + path.string());
}

// Calls fn(tokens) for every non-comment, non-blank line.
template <typename Fn>
void for_each_line(std::ifstream& in, const std::filesystem::path& path, Fn fn) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    try {
      fn(tokens);
    } catch (const ParseError& error) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + error.what());
    }
  }
}

}  // namespace

Scene load_scene(const std::filesystem::path& path) {
  Scene scene;
  auto in = open_input(path);
  for_each_line(in, path, [&scene](const std::vector<std::string>& tokens) {
    if (tokens[0] == "node" && tokens.size() == 3) {
      NodeSpec node;
      node.id = parse_node_id(tokens[1]);
      if (tokens[2] == "A") {
        node.roles = {.anchor = true, .tag = false};
      } else if (tokens[2] == "T") {
        node.roles = {.anchor = false, .tag = true};
      } else if (tokens[2] == "AT") {
        node.roles = {.anchor = true, .tag = true};
      } else {
        throw ParseError("unknown role '" + tokens[2] + "'");
      }
      scene.topology.nodes.push_back(node);
    } else if (tokens[0] == "pair" && tokens.size() == 3) {
      scene.topology.pairs.push_back({parse_node_id(tokens[1]), parse_node_id(tokens[2])});
    } else if (tokens[0] == "pos" && tokens.size() == 4) {
      scene.positions[parse_node_id(tokens[1])] = {parse_double(tokens[2]),
                                                   parse_double(tokens[3])};
    } else {
      throw ParseError("unknown scene directive '" + tokens[0] + "'");
    }
  });
  return scene;
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  auto out = open_output(path);
  for (const auto& node : scene.topology.nodes) {
    const char* role = node.roles.anchor && node.roles.tag ? "AT" : node.roles.anchor ? "A" : "T";
    out << "node " << node.id << ' ' << role << '\n';
  }
  for (const auto& pair : scene.topology.pairs) {
    out << "pair " << pair.tag << ' ' << pair.anchor << '\n';
  }
  for (const auto& [id, pos] : scene.positions) {
    out << "pos " << id << ' ' << format_double(pos.x) << ' ' << format_double(pos.y) << '\n';
  }
  finish_output(out, path);
}

NoiseConfig load_noise_config(const std::filesystem::path& path) {
  NoiseConfig config;
  struct ClockEntry {
    NodeId id;
    double offset;
    double drift;
  };
  std::vector<ClockEntry> clock_entries;
  auto in = open_input(path);
  for_each_line(in, path, [&](const std::vector<std::string>& tokens) {
    if (tokens[0] == "noise" && tokens.size() >= 2 && tokens[1] == "sigma" && tokens.size() == 3) {
      config.error.gaussian_sigma = parse_double(tokens[2]);
    } else if (tokens[0] == "noise" && tokens.size() == 4 && tokens[1] == "outlier") {
      config.error.outlier_prob = parse_double(tokens[2]);
      config.error.outlier_sigma = parse_double(tokens[3]);
    } else if (tokens[0] == "bias" && tokens.size() == 5) {
      const RangingPair pair{parse_node_id(tokens[1]), parse_node_id(tokens[2])};
      config.error.pair_bias[pair] = {parse_double(tokens[3]), parse_double(tokens[4])};
    } else if (tokens[0] == "clock" && tokens.size() == 4) {
      clock_entries.push_back(
          {parse_node_id(tokens[1]), parse_double(tokens[2]), parse_double(tokens[3]) * 1e-6});
    } else if (tokens[0] == "tick" && tokens.size() == 2) {
      config.tick = parse_double(tokens[1]);
    } else {
      throw ParseError("unknown noise directive '" + tokens[0] + "'");
    }
  });
  if (config.tick < 0.0) throw ParseError(path.string() + ": tick must be >= 0");
  for (const auto& entry : clock_entries) {
    config.clocks[entry.id] = {entry.offset, entry.drift, config.tick};
  }
  return config;
}

void save_noise_config(const std::filesystem::path& path, const NoiseConfig& config) {
  auto out = open_output(path);
  out << "noise sigma " << format_double(config.error.gaussian_sigma) << '\n';
  if (config.error.outlier_prob > 0.0) {
    out << "noise outlier " << format_double(config.error.outlier_prob) << ' '
        << format_double(config.error.outlier_sigma) << '\n';
  }
  for (const auto& [pair, bias] : config.error.pair_bias) {
    out << "bias " << pair.tag << ' ' << pair.anchor << ' ' << format_double(bias.slope) << ' '
        << format_double(bias.intercept) << '\n';
  }
  if (config.tick > 0.0) out << "tick " << format_double(config.tick) << '\n';
  for (const auto& [id, clock] : config.clocks) {
    out << "clock " << id << ' ' << format_double(clock.offset) << ' '
        << format_double(clock.drift * 1e6) << '\n';
  }
  finish_output(out, path);
}

void save_calibration(const std::filesystem::path& path, const CalibrationTable& table) {
  auto out = open_output(path);
  out << "tag,anchor,m_c,q_c,residual_rms,n_points\n";
  for (const auto& [pair, model] : table) {
    out << pair.tag << ',' << pair.anchor << ',' << format_double(model.slope) << ','
        << format_double(model.intercept) << ',' << format_double(model.residual_rms) << ','
        << model.n_points << '\n';
  }
  finish_output(out, path);
}

CalibrationTable load_calibration(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "tag,anchor,m_c,q_c,residual_rms,n_points") {
    throw ParseError(path.string() + ": bad calibration header");
  }
  CalibrationTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != 6) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": need 6 fields");
    }
    CalibrationModel model;
    model.pair = {parse_node_id(fields[0]), parse_node_id(fields[1])};
    model.slope = parse_double(fields[2]);
    model.intercept = parse_double(fields[3]);
    model.residual_rms = parse_double(fields[4]);
    model.n_points = static_cast<int>(parse_u64(fields[5]));
    model.flagged = model.residual_rms > kFitQualityGate;
    if (!(model.slope > 0.0)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": slope must be > 0");
    }
    table[model.pair] = model;
  }
  return table;
}

void save_measurements(const std::filesystem::path& path,
                       const std::vector<RangeMeasurement>& measurements) {
  auto out = open_output(path);
  out << "seq,epoch_time_s,tag,anchor,distance_m,quality\n";
  for (const auto& m : measurements) {
    out << m.sequence << ',' << format_double(m.timestamp) << ',' << m.pair.tag << ','
        << m.pair.anchor << ',' << format_double(m.distance) << ',' << m.quality << '\n';
  }
  finish_output(out, path);
}

std::vector<RangeMeasurement> load_measurements(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "seq,epoch_time_s,tag,anchor,distance_m,quality") {
    throw ParseError(path.string() + ": bad measurement header");
  }
  std::vector<RangeMeasurement> measurements;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != 6) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": need 6 fields");
    }
    RangeMeasurement m;
    m.sequence = parse_u64(fields[0]);
    m.timestamp = parse_double(fields[1]);
    m.pair = {parse_node_id(fields[2]), parse_node_id(fields[3])};
    m.distance = parse_double(fields[4]);
    m.quality = static_cast<int>(parse_u64(fields[5]));
    measurements.push_back(m);
  }
  return measurements;
}

void save_poses(const std::filesystem::path& path, const std::vector<PoseEstimate>& poses) {
  auto out = open_output(path);
  out << "epoch_time_s,node,x_m,y_m,residual_norm,converged,iterations\n";
  for (const auto& pose : poses) {
    for (const auto& [node, solve] : pose.solves) {
      out << format_double(pose.epoch) << ',' << node << ',' << format_double(solve.position.x)
          << ',' << format_double(solve.position.y) << ',' << format_double(solve.residual_norm)
          << ',' << (solve.converged ? 1 : 0) << ',' << solve.iterations << '\n';
    }
  }
  finish_output(out, path);
}

std::vector<PoseEstimate> load_poses(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "epoch_time_s,node,x_m,y_m,residual_norm,converged,iterations") {
    throw ParseError(path.string() + ": bad pose header");
  }
  std::vector<PoseEstimate> poses;
  std::string current_epoch_text;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != 7) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": need 7 fields");
    }
    if (poses.empty() || fields[0] != current_epoch_text) {
      current_epoch_text = fields[0];
      PoseEstimate pose;
      pose.epoch = parse_double(fields[0]);
      pose.converged = true;
      poses.push_back(pose);
    }
    PoseEstimate& pose = poses.back();
    const NodeId node = parse_node_id(fields[1]);
    NodeSolve solve;
    solve.position = {parse_double(fields[2]), parse_double(fields[3])};
    solve.residual_norm = parse_double(fields[4]);
    solve.converged = fields[5] == "1";
    solve.iterations = static_cast<int>(parse_u64(fields[6]));
    pose.solves[node] = solve;
    pose.positions[node] = solve.position;
    pose.converged = pose.converged && solve.converged;
    pose.iterations += solve.iterations;
    pose.residual_norm = std::hypot(pose.residual_norm, solve.residual_norm);
  }
  return poses;
}

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  auto out = open_output(path);
  out << "shape " << manifest.shape << '\n';
  out << "scale " << format_double(manifest.scale) << '\n';
  out << "rate " << format_double(manifest.rate) << '\n';
  out << "duration " << format_double(manifest.duration) << '\n';
  out << "seed " << manifest.seed << '\n';
  out << "transport " << manifest.transport << '\n';
  out << "calibrated " << (manifest.calibrated ? 1 : 0) << '\n';
  for (const auto& [id, pos] : manifest.truth) {
    out << "truth " << id << ' ' << format_double(pos.x) << ' ' << format_double(pos.y) << '\n';
  }
  finish_output(out, path);
}

RunManifest load_manifest(const std::filesystem::path& path) {
  RunManifest manifest;
  manifest.truth.clear();
  auto in = open_input(path);
  for_each_line(in, path, [&manifest](const std::vector<std::string>& tokens) {
    if (tokens[0] == "shape" && tokens.size() == 2) {
      manifest.shape = tokens[1];
    } else if (tokens[0] == "scale" && tokens.size() == 2) {
      manifest.scale = parse_double(tokens[1]);
    } else if (tokens[0] == "rate" && tokens.size() == 2) {
      manifest.rate = parse_double(tokens[1]);
    } else if (tokens[0] == "duration" && tokens.size() == 2) {
      manifest.duration = parse_double(tokens[1]);
    } else if (tokens[0] == "seed" && tokens.size() == 2) {
      manifest.seed = parse_u64(tokens[1]);
    } else if (tokens[0] == "transport" && tokens.size() == 2) {
      manifest.transport = tokens[1];
    } else if (tokens[0] == "calibrated" && tokens.size() == 2) {
      manifest.calibrated = tokens[1] == "1";
    } else if (tokens[0] == "truth" && tokens.size() == 4) {
      manifest.truth[parse_node_id(tokens[1])] = {parse_double(tokens[2]),
                                                  parse_double(tokens[3])};
    } else {
      throw ParseError("unknown manifest directive '" + tokens[0] + "'");
    }
  });
  return manifest;
}

}  // namespace coloc
