#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "voxdet/features.hpp"
#include "voxdet/labeling.hpp"
#include "voxdet/points.hpp"
#include "voxdet/volume.hpp"

namespace voxdet {

/// One affine layer; weights row-major [out][in].
struct MlpLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

/// Voxel classifier: standardization + affine/ReLU stack + logistic output.
struct MlpModel {
  PatchSpec patch_spec;
  std::vector<int> layer_sizes;  // [feature_dim, hidden..., 1]
  std::vector<MlpLayer> layers;
  std::vector<double> feature_mean;
  std::vector<double> feature_std;  // strictly positive componentwise

  std::int64_t input_dim() const {
    return layer_sizes.empty() ? 0 : layer_sizes.front();
  }
  void validate() const;
};

struct TrainConfig {
  std::vector<int> hidden_sizes = {64};
  double learning_rate = 0.01;
  int epochs = 50;
  int minibatch_size = 32;
  std::uint64_t seed = 0;
  double l2_penalty = 1e-4;

  void validate() const;
};

/// Counts and final loss reported by training.
struct TrainStats {
  std::int64_t n_samples = 0;
  std::int64_t n_positive = 0;
  std::int64_t n_negative = 0;
  double final_loss = 0.0;
};

/// Standardizes `raw_features` with the model statistics and runs the net.
/// Returns a probability strictly inside (0, 1). Throws on length mismatch.
double mlp_forward(const MlpModel& model, std::span<const float> raw_features);

/// Gradient of the minibatch loss, same shapes as the model layers.
struct MlpGradient {
  std::vector<MlpLayer> layers;
};

/// Minibatch loss: mean binary cross-entropy over the rows plus
/// l2_penalty * sum of squared weights (biases excluded).
double mlp_batch_loss(const MlpModel& model, const FeatureMatrix& features,
                      std::span<const int> labels, double l2_penalty);

/// Analytic gradient of mlp_batch_loss via backpropagation.
MlpGradient mlp_batch_gradient(const MlpModel& model, const FeatureMatrix& features,
                               std::span<const int> labels, double l2_penalty);

/// Fresh model with seeded uniform Glorot weights and zero biases.
/// Feature statistics are set to identity (mean 0, std 1).
MlpModel make_initial_model(const PatchSpec& spec,
                            const std::vector<int>& hidden_sizes,
                            std::uint64_t seed);

/// Trains on pre-extracted raw feature rows. Feature mean/std are computed
/// from `features` (std floored at 1e-8); optimization is seeded shuffled
/// minibatch SGD on the mlp_batch_loss objective, deterministic given
/// config.seed. Throws if only one class is present or the loss diverges.
MlpModel train_mlp_on_features(const FeatureMatrix& features,
                               std::span<const int> labels, const PatchSpec& spec,
                               const TrainConfig& config,
                               TrainStats* stats = nullptr);

/// Extracts features for `samples` from `volume` and trains.
MlpModel train_mlp(const std::vector<LabeledSample>& samples, const Volume3& volume,
                   const PatchSpec& spec, const TrainConfig& config,
                   TrainStats* stats = nullptr);

/// Voxel-wise inference. Interior voxels (receptive_radius from every face)
/// get the classifier probability; the border band gets 0.0. Output dims
/// equal input dims; values lie in [0, 1]. Bit-identical for any thread
/// count.
Volume3 predict_voxelwise(const Volume3& volume, const MlpModel& model,
                          int threads = 1);

/// Ground-truth stand-in for the classifier stage: the binary label volume
/// reinterpreted as a prediction map.
Volume3 oracle_predict(const PointSet& ground_truth, Dims3 dims, double r_l);

// Model file ("vmlp" JSON): numbers round-trip exactly.
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace voxdet
