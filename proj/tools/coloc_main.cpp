#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coloc/calibration.hpp"
#include "coloc/errors.hpp"
#include "coloc/experiment.hpp"
#include "coloc/io.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::istringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    values.push_back(coloc::parse_double(item));
  }
  if (values.empty()) throw coloc::ParseError("empty list: '" + text + "'");
  return values;
}

std::vector<coloc::RangingPair> parse_pair_list(const std::string& text) {
  if (text == "all") return coloc::canonical_pairs();
  std::vector<coloc::RangingPair> pairs;
  std::istringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw coloc::ParseError("pair must be tag:anchor, got '" + item + "'");
    }
    pairs.push_back({static_cast<coloc::NodeId>(std::stoul(item.substr(0, colon))),
                     static_cast<coloc::NodeId>(std::stoul(item.substr(colon + 1)))});
  }
  if (pairs.empty()) throw coloc::ParseError("empty pair list");
  return pairs;
}

void print_summary(const coloc::RunRecord& record, const coloc::ErrorSummary& summary) {
  std::cout << "config " << record.manifest.shape << ", " << record.poses.size()
            << " epochs, transport " << record.manifest.transport
            << (record.manifest.calibrated ? ", calibrated" : ", uncalibrated") << "\n";
  std::cout << std::left << std::setw(8) << "node" << std::right << std::setw(12) << "rmse_m"
            << std::setw(12) << "max_m" << std::setw(12) << "median_m" << std::setw(12) << "q1_m"
            << std::setw(12) << "q3_m" << "\n";
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& [node, stats] : summary.nodes) {
    std::cout << std::left << std::setw(8) << node << std::right << std::setw(12) << stats.rmse
              << std::setw(12) << stats.max_error << std::setw(12) << stats.box.median
              << std::setw(12) << stats.box.q1 << std::setw(12) << stats.box.q3 << "\n";
  }
  std::cout << std::left << std::setw(8) << "mean" << std::right << std::setw(12)
            << summary.mean_rmse << "\n";
  std::cout << std::left << std::setw(8) << "mean>0" << std::right << std::setw(12)
            << summary.mean_rmse_tags << "\n";
  std::cout.unsetf(std::ios::floatfield);
  std::cout << std::setprecision(6);
}

int cmd_calibrate(const std::string& pairs_text, const std::string& refs_text, int samples,
                  const std::string& noise_path, std::uint64_t seed, const std::string& out_path) {
  coloc::NoiseConfig noise;
  if (!noise_path.empty()) noise = coloc::load_noise_config(noise_path);
  noise.error.seed = seed;

  const auto refs = parse_double_list(refs_text);
  coloc::CalibrationTable table;
  for (const auto& pair : parse_pair_list(pairs_text)) {
    const auto model =
        coloc::run_calibration_campaign(pair, noise.error, noise.clocks, refs, samples);
    std::cout << "pair " << pair.tag << "->" << pair.anchor << ": m_c="
              << coloc::format_double(model.slope) << " q_c=" << coloc::format_double(model.intercept)
              << " rms=" << coloc::format_double(model.residual_rms)
              << (model.flagged ? " [flagged]" : "") << "\n";
    table[pair] = model;
  }
  coloc::save_calibration(out_path, table);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_run(const std::string& shape, double scale, double rate, double duration,
            std::uint64_t seed, const std::string& transport, const std::string& calib_path,
            const std::string& noise_path, const std::string& scene_path,
            const std::string& out_dir) {
  coloc::RunConfig config;
  config.shape = coloc::shape_from_string(shape);
  config.scale = scale;
  config.rate = rate;
  config.duration = duration;
  config.seed = seed;
  config.transport = coloc::transport_from_string(transport);
  if (!noise_path.empty()) {
    const auto noise = coloc::load_noise_config(noise_path);
    config.error = noise.error;
    config.clocks = noise.clocks;
  }
  if (!calib_path.empty()) config.calibration = coloc::load_calibration(calib_path);
  if (!scene_path.empty()) config.scene = coloc::load_scene(scene_path);

  const auto result = coloc::run_experiment(config, out_dir);
  print_summary(result.record, result.summary);
  std::cout << "wrote " << out_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& dir) {
  const auto record = coloc::load_run(dir);
  const auto summary = coloc::summarize(record);
  coloc::write_run_outputs(dir, record, summary);
  print_summary(record, summary);
  return 0;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b) {
  const auto record_a = coloc::load_run(dir_a);
  const auto record_b = coloc::load_run(dir_b);
  const auto report = coloc::compare_runs(record_a, record_b);

  std::cout << "A = " << dir_a << "\nB = " << dir_b << "\n";
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& [node, comparison] : report.nodes) {
    std::cout << "node " << node << "  A deciles:";
    for (double value : comparison.a) std::cout << ' ' << value;
    std::cout << "\n        B deciles:";
    for (double value : comparison.b) std::cout << ' ' << value;
    std::cout << "\n        "
              << (comparison.tie ? "tie" : comparison.a_dominates ? "A dominates" : "mixed")
              << "\n";
  }
  std::cout << "verdict: "
            << (report.tie             ? "exact tie"
                : report.a_dominates_tags ? "A dominates B at every decile (nodes > 0)"
                                          : "no full dominance")
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UWB cooperative relative localization toolkit"};
  app.require_subcommand(1);

  auto* calibrate = app.add_subcommand("calibrate", "Run a calibration campaign and fit models");
  std::string pairs_text = "all";
  std::string refs_text = "1,2,3,4";
  int samples = coloc::kDefaultSamplesPerPoint;
  std::string noise_path;
  std::uint64_t calib_seed = 42;
  std::string calib_out = "calib.csv";
  calibrate->add_option("--pairs", pairs_text, "'all' or tag:anchor list, e.g. 2:0,2:1");
  calibrate->add_option("--ref", refs_text, "comma-separated reference distances in meters");
  calibrate->add_option("--samples", samples, "measurements averaged per reference point");
  calibrate->add_option("--noise", noise_path, "noise/clock config file");
  calibrate->add_option("--seed", calib_seed, "campaign noise seed");
  calibrate->add_option("--out", calib_out, "output calibration CSV");

  auto* run = app.add_subcommand("run", "Simulate a geometry campaign and estimate poses");
  std::string shape = "square";
  double scale = 2.0;
  double rate = 10.0;
  double duration = 120.0;
  std::uint64_t seed = 42;
  std::string transport = "inproc";
  std::string calib_path;
  std::string run_noise_path;
  std::string scene_path;
  std::string out_dir;
  run->add_option("--shape", shape, "square|rectangle|quadrilateral")
      ->check(CLI::IsMember({"square", "rectangle", "quadrilateral"}));
  run->add_option("--scale", scale, "geometry scale in meters");
  run->add_option("--rate", rate, "ranging rate in Hz");
  run->add_option("--duration", duration, "run duration in seconds");
  run->add_option("--seed", seed, "noise seed");
  run->add_option("--calib", calib_path, "calibration CSV to apply");
  run->add_option("--noise", run_noise_path, "noise/clock config file");
  run->add_option("--scene", scene_path, "scene file overriding the canonical geometry");
  run->add_option("--transport", transport, "inproc|loopback")
      ->check(CLI::IsMember({"inproc", "loopback"}));
  run->add_option("--out", out_dir, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "Re-evaluate a persisted run directory");
  std::string eval_dir;
  eval->add_option("dir", eval_dir, "run directory")->required();

  auto* compare = app.add_subcommand("compare", "Compare the error distributions of two runs");
  std::string dir_a;
  std::string dir_b;
  compare->add_option("dirA", dir_a, "first run directory")->required();
  compare->add_option("dirB", dir_b, "second run directory")->required();

  try {
    app.parse(argc, argv);
    if (calibrate->parsed()) {
      return cmd_calibrate(pairs_text, refs_text, samples, noise_path, calib_seed, calib_out);
    }
    if (run->parsed()) {
      return cmd_run(shape, scale, rate, duration, seed, transport, calib_path, run_noise_path,
                     scene_path, out_dir);
    }
    if (eval->parsed()) return cmd_eval(eval_dir);
    if (compare->parsed()) return cmd_compare(dir_a, dir_b);
    return 1;
  } catch (const CLI::ParseError& error) {
    return app.exit(error);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
}
