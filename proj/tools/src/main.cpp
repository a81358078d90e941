// voxdet: command-line front end for the volumetric object-detection
// pipeline. Subcommands map one-to-one onto the library stages:
//
//   synth     generate a synthetic volume + ground-truth points
//   labels    object centers -> binary voxel label volume
//   train     volume + centers -> voxel classifier model
//   infer     volume + model -> voxel-wise prediction volume
//   detect    prediction volume -> averaged map -> ranked detections
//   eval      detections vs ground truth -> PR curve, AP, operating point
//   pipeline  end-to-end seeded experiment with a summary JSON
//
// Every command is a pure function of its input files and flags: given the
// same seeds, reruns produce byte-identical outputs (no timestamps anywhere).
// Exit codes: 0 success, 2 I/O error, 3 validation error, 4 infeasible
// config, 1 anything else.

#include <charconv>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "voxdet/classifier.hpp"
#include "voxdet/errors.hpp"
#include "voxdet/eval.hpp"
#include "voxdet/features.hpp"
#include "voxdet/io.hpp"
#include "voxdet/labeling.hpp"
#include "voxdet/parallel.hpp"
#include "voxdet/points.hpp"
#include "voxdet/postproc.hpp"
#include "voxdet/rng.hpp"
#include "voxdet/synthgen.hpp"
#include "voxdet/volume.hpp"

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;
constexpr int kExitInfeasible = 4;

// Seed streams for the pipeline command: every generated volume and every
// stochastic stage gets its own child seed, so e.g. adding a test volume
// never changes the training draw.
constexpr std::uint64_t kTrainVolumeStream = 1000;
constexpr std::uint64_t kTestVolumeStream = 2000;
constexpr std::uint64_t kSamplingStream = 3000;
constexpr std::uint64_t kTrainerStream = 4000;

std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void ensure_parent_dir(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_text_file(const fs::path& path, const std::string& text, const char* what) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw voxdet::IoError(std::string(what) + ": cannot open " + path.string() +
                          " for writing");
  out << text;
  if (!out)
    throw voxdet::IoError(std::string(what) + ": write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Flag groups. Each group mirrors one library config struct and is shared
// between its standalone command and the pipeline command.

struct SynthArgs {
  std::vector<int> dims = {96, 96, 96};
  int n_objects = 8;
  double object_radius = 3.0;
  double object_intensity = 1.0;
  double noise_std = 0.1;
  double min_separation = 28.0;
  int border_clearance = 11;
  std::uint64_t seed = 0;
};

void add_synth_flags(CLI::App* cmd, SynthArgs& args, bool with_seed) {
  cmd->add_option("--dims", args.dims, "volume dimensions: nx ny nz")
      ->expected(3)
      ->capture_default_str();
  cmd->add_option("--n-objects", args.n_objects, "number of objects to place")
      ->capture_default_str();
  cmd->add_option("--object-radius", args.object_radius,
                  "object extent in voxels (bump sigma = radius/2)")
      ->capture_default_str();
  cmd->add_option("--object-intensity", args.object_intensity, "bump peak intensity")
      ->capture_default_str();
  cmd->add_option("--noise-std", args.noise_std, "background Gaussian noise std")
      ->capture_default_str();
  cmd->add_option("--min-separation", args.min_separation,
                  "minimum pairwise center distance (keep above the NMS radius)")
      ->capture_default_str();
  cmd->add_option("--border-clearance", args.border_clearance,
                  "margin centers keep from every face")
      ->capture_default_str();
  if (with_seed)
    cmd->add_option("--seed", args.seed, "generator seed")->capture_default_str();
}

voxdet::SynthConfig to_synth_config(const SynthArgs& args) {
  voxdet::SynthConfig config;
  config.dims = {args.dims[0], args.dims[1], args.dims[2]};
  config.n_objects = args.n_objects;
  config.object_radius = args.object_radius;
  config.object_intensity = args.object_intensity;
  config.background_noise_std = args.noise_std;
  config.min_separation = args.min_separation;
  config.border_clearance = args.border_clearance;
  config.seed = args.seed;
  return config;
}

ordered_json synth_config_json(const voxdet::SynthConfig& config) {
  ordered_json j;
  j["dims"] = {config.dims.nx, config.dims.ny, config.dims.nz};
  j["n_objects"] = config.n_objects;
  j["object_radius"] = config.object_radius;
  j["object_intensity"] = config.object_intensity;
  j["background_noise_std"] = config.background_noise_std;
  j["min_separation"] = config.min_separation;
  j["border_clearance"] = config.border_clearance;
  j["seed"] = config.seed;
  return j;
}

struct TrainArgs {
  double r_l = 7.0;
  int border_margin = -1;  // -1: use the patch receptive radius
  double negative_ratio = 1.0;
  std::vector<int> scales = {1, 2, 4};
  int patch_radius = 2;
  std::vector<int> hidden = {64};
  double learning_rate = 0.01;
  int epochs = 50;
  int minibatch = 32;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;
};

void add_train_flags(CLI::App* cmd, TrainArgs& args, bool with_seed) {
  cmd->add_option("--r-l", args.r_l, "labeling radius around each center (voxels)")
      ->capture_default_str();
  cmd->add_option("--border-margin", args.border_margin,
                  "sample margin from faces (-1: patch receptive radius)")
      ->capture_default_str();
  cmd->add_option("--negative-ratio", args.negative_ratio,
                  "negatives drawn per positive sample")
      ->capture_default_str();
  cmd->add_option("--scales", args.scales, "patch pyramid scale factors")
      ->capture_default_str();
  cmd->add_option("--patch-radius", args.patch_radius,
                  "patch half-width at every scale")
      ->capture_default_str();
  cmd->add_option("--hidden", args.hidden, "hidden layer sizes")->capture_default_str();
  cmd->add_option("--learning-rate", args.learning_rate, "SGD step size")
      ->capture_default_str();
  cmd->add_option("--epochs", args.epochs, "SGD epochs")->capture_default_str();
  cmd->add_option("--minibatch", args.minibatch, "SGD minibatch size")
      ->capture_default_str();
  cmd->add_option("--l2", args.l2_penalty, "L2 penalty on weights")
      ->capture_default_str();
  if (with_seed)
    cmd->add_option("--seed", args.seed, "sampling/training seed")
        ->capture_default_str();
}

voxdet::PatchSpec to_patch_spec(const TrainArgs& args) {
  voxdet::PatchSpec spec;
  spec.scales = args.scales;
  spec.patch_radius = args.patch_radius;
  return spec;
}

voxdet::LabelingConfig to_labeling_config(const TrainArgs& args,
                                          const voxdet::PatchSpec& spec,
                                          std::uint64_t seed) {
  voxdet::LabelingConfig config;
  config.r_l = args.r_l;
  config.border_margin =
      args.border_margin < 0 ? spec.receptive_radius() : args.border_margin;
  config.negative_ratio = args.negative_ratio;
  config.seed = seed;
  return config;
}

voxdet::TrainConfig to_train_config(const TrainArgs& args, std::uint64_t seed) {
  voxdet::TrainConfig config;
  config.hidden_sizes = args.hidden;
  config.learning_rate = args.learning_rate;
  config.epochs = args.epochs;
  config.minibatch_size = args.minibatch;
  config.seed = seed;
  config.l2_penalty = args.l2_penalty;
  return config;
}

ordered_json train_args_json(const TrainArgs& args) {
  ordered_json j;
  j["r_l"] = args.r_l;
  j["border_margin"] = args.border_margin;
  j["negative_ratio"] = args.negative_ratio;
  j["scales"] = args.scales;
  j["patch_radius"] = args.patch_radius;
  j["hidden"] = args.hidden;
  j["learning_rate"] = args.learning_rate;
  j["epochs"] = args.epochs;
  j["minibatch"] = args.minibatch;
  j["l2_penalty"] = args.l2_penalty;
  j["seed"] = args.seed;
  return j;
}

struct DetectArgs {
  double r_a = 7.0;
  double r_n = 21.0;
  double confidence_floor = 1e-6;
  std::int64_t max_detections = 0;  // 0: unbounded
  std::string window = "ball";
};

void add_detect_flags(CLI::App* cmd, DetectArgs& args) {
  cmd->add_option("--r-a", args.r_a, "averaging window radius (voxels)")
      ->capture_default_str();
  cmd->add_option("--r-n", args.r_n, "NMS suppression radius (voxels)")
      ->capture_default_str();
  cmd->add_option("--floor", args.confidence_floor,
                  "stop NMS once the global maximum falls to this value")
      ->capture_default_str();
  cmd->add_option("--max-detections", args.max_detections,
                  "emit at most this many detections (0: unbounded)")
      ->capture_default_str();
  cmd->add_option("--window", args.window, "averaging window shape")
      ->check(CLI::IsMember({"ball", "cube"}))
      ->capture_default_str();
}

voxdet::PostprocConfig to_postproc_config(const DetectArgs& args) {
  voxdet::PostprocConfig config;
  config.r_a = args.r_a;
  config.r_n = args.r_n;
  config.confidence_floor = args.confidence_floor;
  if (args.max_detections > 0) config.max_detections = args.max_detections;
  config.window = args.window == "cube" ? voxdet::AveragingWindow::kCube
                                        : voxdet::AveragingWindow::kBall;
  return config;
}

ordered_json detect_args_json(const DetectArgs& args) {
  ordered_json j;
  j["r_a"] = args.r_a;
  j["r_n"] = args.r_n;
  j["confidence_floor"] = args.confidence_floor;
  j["max_detections"] = args.max_detections;
  j["window"] = args.window;
  return j;
}

// ---------------------------------------------------------------------------
// Commands.

struct SynthCommand {
  SynthArgs synth;
  std::string out_prefix;
};

int run_synth(const SynthCommand& cmd, bool dump_config) {
  const voxdet::SynthConfig config = to_synth_config(cmd.synth);
  if (dump_config) {
    ordered_json j;
    j["command"] = "synth";
    j["config"] = synth_config_json(config);
    j["out_prefix"] = cmd.out_prefix;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  const voxdet::SynthVolume result = voxdet::generate(config);
  ensure_parent_dir(cmd.out_prefix);
  voxdet::save_volume(result.volume, cmd.out_prefix);
  voxdet::save_points(result.ground_truth, cmd.out_prefix + ".gt.json");
  write_text_file(cmd.out_prefix + ".config.json",
                  synth_config_json(config).dump(2) + "\n", "synth");
  std::cerr << "synth: wrote " << cmd.out_prefix << ".{json,raw,gt.json,config.json} ("
            << result.ground_truth.size() << " objects)\n";
  return kExitOk;
}

struct LabelsCommand {
  std::string volume_path;
  std::string points_path;
  double r_l = 7.0;
  std::string out_path;
};

int run_labels(const LabelsCommand& cmd, bool dump_config) {
  if (dump_config) {
    ordered_json j;
    j["command"] = "labels";
    j["volume"] = cmd.volume_path;
    j["points"] = cmd.points_path;
    j["r_l"] = cmd.r_l;
    j["out"] = cmd.out_path;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  const voxdet::Volume3 volume = voxdet::load_volume(cmd.volume_path);
  const voxdet::PointSet points = voxdet::load_points(cmd.points_path);
  voxdet::Volume3 labels = voxdet::make_label_volume(points, volume.dims(), cmd.r_l);
  // Carry the source voxel size through; the mask itself is index-space.
  voxdet::Volume3 out(labels.dims(),
                      std::vector<float>(labels.values().begin(), labels.values().end()),
                      volume.voxel_size_nm());
  ensure_parent_dir(cmd.out_path);
  voxdet::save_volume(out, cmd.out_path);
  std::cerr << "labels: wrote " << cmd.out_path << "\n";
  return kExitOk;
}

struct TrainCommand {
  std::string volume_path;
  std::string points_path;
  TrainArgs train;
  std::string out_model;
};

int run_train(const TrainCommand& cmd, bool dump_config) {
  if (dump_config) {
    ordered_json j;
    j["command"] = "train";
    j["volume"] = cmd.volume_path;
    j["points"] = cmd.points_path;
    j["train"] = train_args_json(cmd.train);
    j["out_model"] = cmd.out_model;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  const voxdet::Volume3 volume = voxdet::load_volume(cmd.volume_path);
  const voxdet::PointSet points = voxdet::load_points(cmd.points_path);
  const voxdet::PatchSpec spec = to_patch_spec(cmd.train);
  const voxdet::LabelingConfig labeling =
      to_labeling_config(cmd.train, spec, cmd.train.seed);
  const voxdet::Volume3 labels =
      voxdet::make_label_volume(points, volume.dims(), labeling.r_l);
  const std::vector<voxdet::LabeledSample> samples =
      voxdet::sample_balanced(labels, labeling);

  voxdet::TrainStats stats;
  const voxdet::MlpModel model = voxdet::train_mlp(
      samples, volume, spec, to_train_config(cmd.train, cmd.train.seed), &stats);
  ensure_parent_dir(cmd.out_model);
  voxdet::save_model(model, cmd.out_model);
  std::cout << "training samples: " << stats.n_samples << " (" << stats.n_positive
            << " positive, " << stats.n_negative << " negative)\n";
  std::cout << "final loss: " << format_double(stats.final_loss) << "\n";
  std::cerr << "train: wrote " << cmd.out_model << "\n";
  return kExitOk;
}

struct InferCommand {
  std::string volume_path;
  std::string model_path;
  std::string out_path;
};

int run_infer(const InferCommand& cmd, int threads, bool dump_config) {
  if (dump_config) {
    ordered_json j;
    j["command"] = "infer";
    j["volume"] = cmd.volume_path;
    j["model"] = cmd.model_path;
    j["out"] = cmd.out_path;
    j["threads"] = threads;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  const voxdet::Volume3 volume = voxdet::load_volume(cmd.volume_path);
  const voxdet::MlpModel model = voxdet::load_model(cmd.model_path);
  const voxdet::Volume3 pred = voxdet::predict_voxelwise(volume, model, threads);
  ensure_parent_dir(cmd.out_path);
  voxdet::save_volume(pred, cmd.out_path);
  std::cerr << "infer: wrote " << cmd.out_path << "\n";
  return kExitOk;
}

struct DetectCommand {
  std::string pred_path;
  DetectArgs detect;
  std::string out_path;
};

int run_detect(const DetectCommand& cmd, int threads, bool dump_config) {
  if (dump_config) {
    ordered_json j;
    j["command"] = "detect";
    j["pred"] = cmd.pred_path;
    j["detect"] = detect_args_json(cmd.detect);
    j["out"] = cmd.out_path;
    j["threads"] = threads;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  const voxdet::Volume3 pred = voxdet::load_volume(cmd.pred_path);
  const voxdet::PostprocConfig config = to_postproc_config(cmd.detect);
  const voxdet::Volume3 averaged =
      voxdet::average_predictions(pred, config.r_a, config.window, threads);
  const voxdet::PointSet detections = voxdet::nms_detect(averaged, config);
  ensure_parent_dir(cmd.out_path);
  voxdet::save_points(detections, cmd.out_path);
  std::cerr << "detect: wrote " << cmd.out_path << " (" << detections.size()
            << " detections)\n";
  return kExitOk;
}

struct EvalCommand {
  std::vector<std::string> dets_paths;
  std::vector<std::string> gt_paths;
  double r_match = 30.0;
  std::string out_csv;
  std::string out_svg;
};

int run_eval(const EvalCommand& cmd, bool dump_config) {
  if (dump_config) {
    ordered_json j;
    j["command"] = "eval";
    j["dets"] = cmd.dets_paths;
    j["gt"] = cmd.gt_paths;
    j["r_match"] = cmd.r_match;
    j["out_csv"] = cmd.out_csv;
    j["out_svg"] = cmd.out_svg;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  if (cmd.dets_paths.size() != cmd.gt_paths.size())
    throw voxdet::ValidationError(
        "eval: got " + std::to_string(cmd.dets_paths.size()) + " --dets for " +
        std::to_string(cmd.gt_paths.size()) + " --gt (must be paired)");
  std::vector<voxdet::PointSet> dets;
  std::vector<voxdet::PointSet> gts;
  for (const std::string& p : cmd.dets_paths) dets.push_back(voxdet::load_points(p));
  for (const std::string& p : cmd.gt_paths) gts.push_back(voxdet::load_points(p));

  const voxdet::PrCurve curve = voxdet::pr_curve(dets, gts, cmd.r_match);
  ensure_parent_dir(cmd.out_csv);
  voxdet::write_pr_csv(curve, cmd.out_csv);
  if (!cmd.out_svg.empty()) {
    ensure_parent_dir(cmd.out_svg);
    voxdet::write_pr_svg(curve, cmd.out_svg);
  }
  std::cout << "average precision: " << format_double(voxdet::average_precision(curve))
            << "\n";
  std::cout << "precision at recall 0.9: "
            << format_double(voxdet::precision_at_recall(curve, 0.9)) << "\n";
  std::cerr << "eval: wrote " << cmd.out_csv << "\n";
  return kExitOk;
}

struct PipelineCommand {
  std::uint64_t seed = 0;
  int n_train_volumes = 1;
  int n_test_volumes = 5;
  SynthArgs synth;
  TrainArgs train;
  DetectArgs detect;
  double r_match = 30.0;
  std::string out_dir;
};

int run_pipeline(const PipelineCommand& cmd, int threads, bool dump_config) {
  ordered_json config_echo;
  config_echo["command"] = "pipeline";
  config_echo["seed"] = cmd.seed;
  config_echo["n_train_volumes"] = cmd.n_train_volumes;
  config_echo["n_test_volumes"] = cmd.n_test_volumes;
  config_echo["synth"] = synth_config_json(to_synth_config(cmd.synth));
  config_echo["train"] = train_args_json(cmd.train);
  config_echo["detect"] = detect_args_json(cmd.detect);
  config_echo["r_match"] = cmd.r_match;
  config_echo["out_dir"] = cmd.out_dir;
  config_echo["threads"] = threads;
  if (dump_config) {
    std::cout << config_echo.dump(2) << "\n";
    return kExitOk;
  }
  if (cmd.n_train_volumes < 1)
    throw voxdet::ValidationError("pipeline: need at least one training volume");
  if (cmd.n_test_volumes < 1)
    throw voxdet::ValidationError("pipeline: need at least one test volume");

  const fs::path out_dir(cmd.out_dir);
  fs::create_directories(out_dir);
  const voxdet::PatchSpec spec = to_patch_spec(cmd.train);

  // Training: pool balanced samples from every training volume.
  voxdet::FeatureMatrix features;
  features.cols = spec.feature_dim();
  std::vector<int> labels;
  for (int t = 0; t < cmd.n_train_volumes; ++t) {
    std::cerr << "[pipeline] training volume " << (t + 1) << "/" << cmd.n_train_volumes
              << "\n";
    voxdet::SynthConfig synth_config = to_synth_config(cmd.synth);
    synth_config.seed = voxdet::derive_seed(cmd.seed, kTrainVolumeStream + t);
    const voxdet::SynthVolume sample = voxdet::generate(synth_config);

    const voxdet::LabelingConfig labeling = to_labeling_config(
        cmd.train, spec, voxdet::derive_seed(cmd.seed, kSamplingStream + t));
    const voxdet::Volume3 label_volume = voxdet::make_label_volume(
        sample.ground_truth, sample.volume.dims(), labeling.r_l);
    const std::vector<voxdet::LabeledSample> samples =
        voxdet::sample_balanced(label_volume, labeling);

    const voxdet::FeaturePyramid pyramid(sample.volume, spec);
    const auto cols = static_cast<std::size_t>(features.cols);
    std::size_t row_start = features.data.size();
    features.data.resize(features.data.size() + samples.size() * cols);
    for (const voxdet::LabeledSample& s : samples) {
      pyramid.features_at(s.position,
                          std::span<float>(features.data.data() + row_start, cols));
      labels.push_back(s.label);
      row_start += cols;
    }
  }

  std::cerr << "[pipeline] training on " << labels.size() << " samples\n";
  voxdet::TrainStats stats;
  const voxdet::MlpModel model = voxdet::train_mlp_on_features(
      features, labels, spec,
      to_train_config(cmd.train, voxdet::derive_seed(cmd.seed, kTrainerStream)),
      &stats);
  voxdet::save_model(model, out_dir / "model.vmlp.json");

  // Held-out evaluation: fresh volumes, full inference + detection, pooled PR.
  const voxdet::PostprocConfig postproc = to_postproc_config(cmd.detect);
  std::vector<voxdet::PointSet> dets_per_volume;
  std::vector<voxdet::PointSet> gts_per_volume;
  ordered_json detection_counts = ordered_json::array();
  for (int j = 0; j < cmd.n_test_volumes; ++j) {
    std::cerr << "[pipeline] test volume " << (j + 1) << "/" << cmd.n_test_volumes
              << "\n";
    voxdet::SynthConfig synth_config = to_synth_config(cmd.synth);
    synth_config.seed = voxdet::derive_seed(cmd.seed, kTestVolumeStream + j);
    const voxdet::SynthVolume sample = voxdet::generate(synth_config);

    const voxdet::Volume3 pred =
        voxdet::predict_voxelwise(sample.volume, model, threads);
    const voxdet::Volume3 averaged =
        voxdet::average_predictions(pred, postproc.r_a, postproc.window, threads);
    const voxdet::PointSet detections = voxdet::nms_detect(averaged, postproc);

    const std::string tag = "test_" + std::to_string(j);
    voxdet::save_points(detections, out_dir / (tag + ".dets.vpts.json"));
    voxdet::save_points(sample.ground_truth, out_dir / (tag + ".gt.vpts.json"));
    detection_counts.push_back(detections.size());
    dets_per_volume.push_back(detections);
    gts_per_volume.push_back(sample.ground_truth);
  }

  const voxdet::PrCurve curve =
      voxdet::pr_curve(dets_per_volume, gts_per_volume, cmd.r_match);
  voxdet::write_pr_csv(curve, out_dir / "pr.csv");
  voxdet::write_pr_svg(curve, out_dir / "pr.svg");
  const double ap = voxdet::average_precision(curve);
  const double p90 = voxdet::precision_at_recall(curve, 0.9);

  // The summary carries only result-affecting parameters: where the files
  // went and how many workers ran must not change a single output byte.
  ordered_json science_config = config_echo;
  science_config.erase("out_dir");
  science_config.erase("threads");

  ordered_json summary;
  summary["config"] = science_config;
  summary["train"] = {{"n_samples", stats.n_samples},
                      {"n_positive", stats.n_positive},
                      {"n_negative", stats.n_negative},
                      {"final_loss", stats.final_loss}};
  summary["detections_per_volume"] = detection_counts;
  summary["average_precision"] = ap;
  summary["precision_at_recall_0.9"] = p90;
  write_text_file(out_dir / "summary.json", summary.dump(2) + "\n", "pipeline");

  std::cout << summary.dump(2) << "\n";
  std::cout << "average precision: " << format_double(ap) << "\n";
  std::cout << "precision at recall 0.9: " << format_double(p90) << "\n";
  std::cerr << "pipeline: wrote " << (out_dir / "summary.json").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxdet: voxel classification + detection pipeline for 3D volumes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "voxdet 0.1.0");

  int threads = voxdet::default_thread_count();
  bool dump_config = false;
  app.add_option("--threads", threads,
                 "worker threads (1 is bit-identical to any other value)")
      ->capture_default_str();
  app.add_flag("--dump-config", dump_config,
               "print the effective configuration as JSON and exit");

  SynthCommand synth_cmd;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic volume");
  synth->fallthrough();
  add_synth_flags(synth, synth_cmd.synth, /*with_seed=*/true);
  synth->add_option("--out-prefix", synth_cmd.out_prefix,
                    "output prefix for .json/.raw/.gt.json/.config.json")
      ->required();

  LabelsCommand labels_cmd;
  CLI::App* labels = app.add_subcommand("labels", "rasterize centers to a label volume");
  labels->fallthrough();
  labels->add_option("--volume", labels_cmd.volume_path, "input volume (vvol)")
      ->required();
  labels->add_option("--points", labels_cmd.points_path, "object centers (vpts)")
      ->required();
  labels->add_option("--r-l", labels_cmd.r_l, "labeling radius (voxels)")
      ->capture_default_str();
  labels->add_option("--out", labels_cmd.out_path, "output label volume")->required();

  TrainCommand train_cmd;
  CLI::App* train = app.add_subcommand("train", "train the voxel classifier");
  train->fallthrough();
  train->add_option("--volume", train_cmd.volume_path, "training volume (vvol)")
      ->required();
  train->add_option("--points", train_cmd.points_path, "object centers (vpts)")
      ->required();
  add_train_flags(train, train_cmd.train, /*with_seed=*/true);
  train->add_option("--out-model", train_cmd.out_model, "output model (vmlp)")
      ->required();

  InferCommand infer_cmd;
  CLI::App* infer = app.add_subcommand("infer", "voxel-wise prediction volume");
  infer->fallthrough();
  infer->add_option("--volume", infer_cmd.volume_path, "input volume (vvol)")
      ->required();
  infer->add_option("--model", infer_cmd.model_path, "model file (vmlp)")->required();
  infer->add_option("--out", infer_cmd.out_path, "output prediction volume")
      ->required();

  DetectCommand detect_cmd;
  CLI::App* detect = app.add_subcommand("detect", "average + NMS detections");
  detect->fallthrough();
  detect->add_option("--pred", detect_cmd.pred_path, "prediction volume (vvol)")
      ->required();
  add_detect_flags(detect, detect_cmd.detect);
  detect->add_option("--out", detect_cmd.out_path, "output detections (vpts)")
      ->required();

  EvalCommand eval_cmd;
  CLI::App* eval = app.add_subcommand("eval", "precision-recall evaluation");
  eval->fallthrough();
  eval->add_option("--dets", eval_cmd.dets_paths,
                   "detection files, repeatable, paired with --gt in order")
      ->required();
  eval->add_option("--gt", eval_cmd.gt_paths, "ground-truth files, repeatable")
      ->required();
  eval->add_option("--r-match", eval_cmd.r_match, "match radius (voxels)")
      ->capture_default_str();
  eval->add_option("--out-csv", eval_cmd.out_csv, "output PR curve CSV")->required();
  eval->add_option("--out-svg", eval_cmd.out_svg, "optional PR curve SVG");

  PipelineCommand pipeline_cmd;
  CLI::App* pipeline =
      app.add_subcommand("pipeline", "seeded end-to-end experiment with summary");
  pipeline->fallthrough();
  pipeline->add_option("--seed", pipeline_cmd.seed, "master seed")
      ->capture_default_str();
  pipeline->add_option("--n-train-volumes", pipeline_cmd.n_train_volumes,
                       "training volumes to generate")
      ->capture_default_str();
  pipeline->add_option("--n-test-volumes", pipeline_cmd.n_test_volumes,
                       "held-out test volumes")
      ->capture_default_str();
  add_synth_flags(pipeline, pipeline_cmd.synth, /*with_seed=*/false);
  add_train_flags(pipeline, pipeline_cmd.train, /*with_seed=*/false);
  add_detect_flags(pipeline, pipeline_cmd.detect);
  pipeline->add_option("--r-match", pipeline_cmd.r_match, "match radius (voxels)")
      ->capture_default_str();
  pipeline->add_option("--out-dir", pipeline_cmd.out_dir, "output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) return run_synth(synth_cmd, dump_config);
    if (*labels) return run_labels(labels_cmd, dump_config);
    if (*train) return run_train(train_cmd, dump_config);
    if (*infer) return run_infer(infer_cmd, threads, dump_config);
    if (*detect) return run_detect(detect_cmd, threads, dump_config);
    if (*eval) return run_eval(eval_cmd, dump_config);
    if (*pipeline) return run_pipeline(pipeline_cmd, threads, dump_config);
  } catch (const voxdet::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const voxdet::InfeasibleConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const voxdet::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;  // unreachable: require_subcommand guarantees a match
}
