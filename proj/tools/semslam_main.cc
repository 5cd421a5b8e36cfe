#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semslam/evaluation/metrics.h"
#include "semslam/io/kitti_io.h"
#include "semslam/map_post/map_export.h"
#include "semslam/pipeline/config.h"
#include "semslam/pipeline/run.h"
#include "semslam/simgen/simulator.h"

namespace {

using namespace semslam;

std::vector<std::string> SplitCommas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct RunArgs {
  std::string mode = "slam";
  std::string seq;
  std::string labels;
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
};

int Run(const RunArgs& args) {
  auto config = args.config.empty() ? pipeline::PipelineConfig{}
                                    : pipeline::PipelineConfig::FromFile(args.config);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    config.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.Validate();
  auto paths = io::SequencePaths::FromSequenceDir(args.seq);
  if (!args.labels.empty()) paths.labels_dir = args.labels;
  const auto result =
      pipeline::RunKittiSequence(paths, config, pipeline::ParseMode(args.mode), args.out);
  std::printf("scans=%zu submaps=%zu loop_constraints=%d\n", result.trajectory.size(),
              result.submaps.size(), result.loop_constraints);
  return 0;
}

struct EvalArgs {
  std::string est;
  std::string gt;
  std::string metrics = "ate2d,ate3d,rte";
  bool align = true;
  bool scale = false;
  std::string ape_csv;
};

int Eval(const EvalArgs& args) {
  const auto est = io::ReadPosesKitti(args.est);
  const auto gt = io::ReadPosesKitti(args.gt);
  std::vector<std::pair<std::string, std::string>> rows;
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  for (const auto& metric : SplitCommas(args.metrics)) {
    if (metric == "ate2d" || metric == "ate3d") {
      evaluation::AteOptions options;
      options.mode = metric == "ate2d" ? evaluation::AteMode::k2d : evaluation::AteMode::k3d;
      options.align = args.align;
      options.with_scale = args.scale;
      rows.emplace_back(metric + "_m", fmt(evaluation::Ate(est, gt, options)));
    } else if (metric == "rte") {
      try {
        const auto rte = evaluation::RteKitti(est, gt);
        rows.emplace_back("rte_percent", fmt(rte.translation_percent));
        rows.emplace_back("rte_deg_per_m", fmt(rte.rotation_deg_per_m));
      } catch (const Error& e) {
        std::cerr << "rte: " << e.what() << '\n';
        rows.emplace_back("rte_percent", "nan");
        rows.emplace_back("rte_deg_per_m", "nan");
      }
    } else {
      throw ConfigError("unknown metric '" + metric + "'");
    }
  }
  if (!args.ape_csv.empty()) {
    evaluation::AteOptions options;
    options.align = args.align;
    options.with_scale = args.scale;
    evaluation::WriteApeCsv(est, gt, options, args.ape_csv);
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::cout << rows[i].first << (i + 1 < rows.size() ? "," : "\n");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::cout << rows[i].second << (i + 1 < rows.size() ? "," : "\n");
  }
  std::cout << '\n';
  for (const auto& [name, value] : rows) {
    std::printf("  %-16s %s\n", name.c_str(), value.c_str());
  }
  return 0;
}

struct FilterArgs {
  std::string in;
  std::string out;
  std::string exclude;
  bool ascii = false;
};

int FilterMap(const FilterArgs& args) {
  const auto semantic = SemanticConfig::Default();
  std::set<Label> exclude;
  for (const auto& name : SplitCommas(args.exclude)) {
    const auto label = semantic.LookupLabel(name);
    if (!label) throw ConfigError("unknown label '" + name + "'");
    exclude.insert(*label);
  }
  const auto points = map_post::ReadPly(args.in);
  const auto kept = map_post::FilterLabels(points, exclude);
  map_post::ExportPly(kept, args.out,
                      args.ascii ? map_post::PlyFormat::kAscii : map_post::PlyFormat::kBinary);
  std::printf("kept %zu of %zu points\n", kept.size(), points.size());
  return 0;
}

struct SimArgs {
  std::string preset = "loop";
  std::string out;
  simgen::LoopPreset loop;
};

int Simgen(const SimArgs& args) {
  if (args.preset != "loop") throw ConfigError("unknown preset '" + args.preset + "'");
  const auto seq = simgen::MakeLoopSequence(args.loop);
  simgen::WriteKittiSequence(seq.scans, seq.truth, args.out);
  std::printf("wrote %zu scans to %s\n", seq.scans.size(), args.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic LiDAR odometry and mapping"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run odometry or SLAM on a KITTI-layout sequence");
  run_cmd->add_option("--mode", run.mode, "odometry or slam")
      ->check(CLI::IsMember({"odometry", "slam"}));
  run_cmd->add_option("--seq", run.seq, "Sequence directory")->required();
  run_cmd->add_option("--labels", run.labels, "Label directory override");
  run_cmd->add_option("--config", run.config, "key=value config file");
  run_cmd->add_option("--set", run.overrides, "Config override key=value");
  run_cmd->add_option("--out", run.out, "Output directory")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Trajectory metrics against ground truth");
  eval_cmd->add_option("--est", eval.est, "Estimated poses (KITTI format)")->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth poses (KITTI format)")->required();
  eval_cmd->add_option("--metrics", eval.metrics, "Comma list of ate2d, ate3d, rte");
  eval_cmd->add_flag("--align,!--no-align", eval.align, "Umeyama alignment for ATE");
  eval_cmd->add_flag("--scale", eval.scale, "Include scale in the alignment");
  eval_cmd->add_option("--ape-csv", eval.ape_csv, "Per-pose error CSV");

  FilterArgs filter;
  auto* filter_cmd = app.add_subcommand("filter-map", "Remove classes from a PLY map");
  filter_cmd->add_option("--in", filter.in, "Input PLY")->required();
  filter_cmd->add_option("--out", filter.out, "Output PLY")->required();
  filter_cmd->add_option("--exclude", filter.exclude, "Comma list of class names or ids");
  filter_cmd->add_flag("--ascii", filter.ascii, "Write ASCII instead of binary");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simgen", "Write a synthetic KITTI-layout sequence");
  sim_cmd->add_option("--preset", sim.preset, "Scenario")->check(CLI::IsMember({"loop"}));
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  sim_cmd->add_option("--seed", sim.loop.seed, "World and noise seed");
  sim_cmd->add_option("--side", sim.loop.side, "Loop side length in meters");
  sim_cmd->add_option("--scans-per-side", sim.loop.scans_per_side, "Scans per side");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return Run(run);
    if (*eval_cmd) return Eval(eval);
    if (*filter_cmd) return FilterMap(filter);
    if (*sim_cmd) return Simgen(sim);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
