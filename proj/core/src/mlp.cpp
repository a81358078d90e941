#include "voxdet/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include <json.hpp>

#include "voxdet/errors.hpp"
#include "voxdet/parallel.hpp"
#include "voxdet/rng.hpp"

namespace voxdet {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr int kModelFormatVersion = 1;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Logistic output nudged into the open interval (0, 1) so downstream code
/// may take logs of either p or 1-p.
double logistic_open(double z) {
  const double p = logistic(z);
  return std::clamp(p, std::numeric_limits<double>::min(),
                    1.0 - std::numeric_limits<double>::epsilon() / 2);
}

/// Cross-entropy for label y and logit z: softplus(z) - y*z, evaluated
/// without forming the probability so large |z| cannot overflow.
double bce_from_logit(double z, int y) {
  const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  return softplus - static_cast<double>(y) * z;
}

/// Per-sample scratch: values[0] is the standardized input, values[l+1] the
/// output of layer l (ReLU applied everywhere except the last layer).
struct Activations {
  std::vector<std::vector<double>> values;
};

void standardize(const MlpModel& model, std::span<const float> raw,
                 std::vector<double>& out) {
  out.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    out[i] = (static_cast<double>(raw[i]) - model.feature_mean[i]) /
             model.feature_std[i];
}

/// Runs the affine/ReLU stack and returns the output logit, keeping all
/// intermediate activations in `acts` for backpropagation.
double forward_logit(const MlpModel& model, std::span<const float> raw,
                     Activations& acts) {
  acts.values.resize(model.layers.size() + 1);
  standardize(model, raw, acts.values[0]);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const MlpLayer& layer = model.layers[l];
    const std::vector<double>& in = acts.values[l];
    std::vector<double>& out = acts.values[l + 1];
    out.resize(static_cast<std::size_t>(layer.out));
    const bool is_output = (l + 1 == model.layers.size());
    for (int o = 0; o < layer.out; ++o) {
      const double* row =
          layer.weights.data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in);
      double s = layer.bias[static_cast<std::size_t>(o)];
      for (int i = 0; i < layer.in; ++i)
        s += row[i] * in[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(o)] = is_output ? s : std::max(s, 0.0);
    }
  }
  return acts.values.back().front();
}

MlpGradient zero_gradient(const MlpModel& model) {
  MlpGradient g;
  g.layers.reserve(model.layers.size());
  for (const MlpLayer& layer : model.layers) {
    MlpLayer zero;
    zero.in = layer.in;
    zero.out = layer.out;
    zero.weights.assign(layer.weights.size(), 0.0);
    zero.bias.assign(layer.bias.size(), 0.0);
    g.layers.push_back(std::move(zero));
  }
  return g;
}

/// Accumulates d(loss)/d(parameters) for one sample into `grad`, given
/// d(loss)/d(logit) and the activations of the forward pass. `delta` and
/// `prev_delta` are caller-owned scratch so batch loops do not reallocate.
void backward_into(const MlpModel& model, const Activations& acts, double dlogit,
                   MlpGradient& grad, std::vector<double>& delta,
                   std::vector<double>& prev_delta) {
  delta.assign(1, dlogit);
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const MlpLayer& layer = model.layers[l];
    MlpLayer& g = grad.layers[l];
    const std::vector<double>& in = acts.values[l];
    for (int o = 0; o < layer.out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      g.bias[static_cast<std::size_t>(o)] += d;
      double* grow =
          g.weights.data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in);
      for (int i = 0; i < layer.in; ++i)
        grow[i] += d * in[static_cast<std::size_t>(i)];
    }
    if (l == 0) break;
    prev_delta.assign(static_cast<std::size_t>(layer.in), 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      const double* row =
          layer.weights.data() + static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in);
      for (int i = 0; i < layer.in; ++i)
        prev_delta[static_cast<std::size_t>(i)] += d * row[i];
    }
    // ReLU derivative, read off the stored activation (0 at the kink).
    for (int i = 0; i < layer.in; ++i)
      if (!(in[static_cast<std::size_t>(i)] > 0.0))
        prev_delta[static_cast<std::size_t>(i)] = 0.0;
    delta.swap(prev_delta);
  }
}

void check_batch(const MlpModel& model, const FeatureMatrix& features,
                 std::span<const int> labels, const char* what) {
  if (features.cols != model.input_dim())
    throw ValidationError(std::string(what) + ": feature width " +
                          std::to_string(features.cols) +
                          " does not match model input dim " +
                          std::to_string(model.input_dim()));
  if (features.rows() == 0)
    throw ValidationError(std::string(what) + ": empty feature matrix");
  if (static_cast<std::int64_t>(labels.size()) != features.rows())
    throw ValidationError(std::string(what) + ": label count " +
                          std::to_string(labels.size()) + " does not match " +
                          std::to_string(features.rows()) + " rows");
  for (const int y : labels)
    if (y != 0 && y != 1)
      throw ValidationError(std::string(what) + ": labels must be 0 or 1");
}

double sum_squared_weights(const MlpModel& model) {
  double s = 0.0;
  for (const MlpLayer& layer : model.layers)
    for (const double w : layer.weights) s += w * w;
  return s;
}

bool all_parameters_finite(const MlpModel& model) {
  for (const MlpLayer& layer : model.layers) {
    for (const double w : layer.weights)
      if (!std::isfinite(w)) return false;
    for (const double b : layer.bias)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

ordered_json parse_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string(what) + ": cannot open " + path.string());
  ordered_json doc = ordered_json::parse(in, nullptr, false);
  if (doc.is_discarded())
    throw ValidationError(std::string(what) + ": malformed JSON in " + path.string());
  return doc;
}

void write_text_file(const fs::path& path, const std::string& text, const char* what) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(std::string(what) + ": cannot open " + path.string() +
                          " for writing");
  out << text;
  if (!out) throw IoError(std::string(what) + ": write failed for " + path.string());
}

}  // namespace

void MlpModel::validate() const {
  patch_spec.validate();
  if (layer_sizes.size() < 2)
    throw ValidationError("MlpModel: need at least input and output layer sizes");
  if (layer_sizes.front() != patch_spec.feature_dim())
    throw ValidationError("MlpModel: input size does not match patch feature dim");
  if (layer_sizes.back() != 1)
    throw ValidationError("MlpModel: output layer size must be 1");
  for (const int n : layer_sizes)
    if (n <= 0) throw ValidationError("MlpModel: layer sizes must be positive");
  if (layers.size() + 1 != layer_sizes.size())
    throw ValidationError("MlpModel: layer count does not match layer_sizes");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const MlpLayer& layer = layers[l];
    if (layer.in != layer_sizes[l] || layer.out != layer_sizes[l + 1])
      throw ValidationError("MlpModel: layer " + std::to_string(l) + " shape mismatch");
    if (layer.weights.size() !=
        static_cast<std::size_t>(layer.in) * static_cast<std::size_t>(layer.out))
      throw ValidationError("MlpModel: layer " + std::to_string(l) +
                            " weight count mismatch");
    if (layer.bias.size() != static_cast<std::size_t>(layer.out))
      throw ValidationError("MlpModel: layer " + std::to_string(l) +
                            " bias count mismatch");
  }
  const auto dim = static_cast<std::size_t>(layer_sizes.front());
  if (feature_mean.size() != dim || feature_std.size() != dim)
    throw ValidationError("MlpModel: feature statistics length mismatch");
  for (const double s : feature_std)
    if (!(s > 0.0))
      throw ValidationError("MlpModel: feature_std must be strictly positive");
}

void TrainConfig::validate() const {
  for (const int h : hidden_sizes)
    if (h <= 0) throw ValidationError("TrainConfig: hidden sizes must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("TrainConfig: learning_rate must be positive and finite");
  if (epochs <= 0) throw ValidationError("TrainConfig: epochs must be positive");
  if (minibatch_size <= 0)
    throw ValidationError("TrainConfig: minibatch_size must be positive");
  if (l2_penalty < 0.0 || !std::isfinite(l2_penalty))
    throw ValidationError("TrainConfig: l2_penalty must be non-negative and finite");
}

double mlp_forward(const MlpModel& model, std::span<const float> raw_features) {
  if (static_cast<std::int64_t>(raw_features.size()) != model.input_dim())
    throw ValidationError("mlp_forward: feature length " +
                          std::to_string(raw_features.size()) +
                          " does not match model input dim " +
                          std::to_string(model.input_dim()));
  Activations acts;
  return logistic_open(forward_logit(model, raw_features, acts));
}

double mlp_batch_loss(const MlpModel& model, const FeatureMatrix& features,
                      std::span<const int> labels, double l2_penalty) {
  check_batch(model, features, labels, "mlp_batch_loss");
  Activations acts;
  double total = 0.0;
  for (std::int64_t r = 0; r < features.rows(); ++r) {
    const double z = forward_logit(model, features.row(r), acts);
    total += bce_from_logit(z, labels[static_cast<std::size_t>(r)]);
  }
  return total / static_cast<double>(features.rows()) +
         l2_penalty * sum_squared_weights(model);
}

MlpGradient mlp_batch_gradient(const MlpModel& model, const FeatureMatrix& features,
                               std::span<const int> labels, double l2_penalty) {
  check_batch(model, features, labels, "mlp_batch_gradient");
  MlpGradient grad = zero_gradient(model);
  Activations acts;
  std::vector<double> delta;
  std::vector<double> prev_delta;
  const double inv_n = 1.0 / static_cast<double>(features.rows());
  for (std::int64_t r = 0; r < features.rows(); ++r) {
    const double z = forward_logit(model, features.row(r), acts);
    const double dlogit =
        (logistic(z) - static_cast<double>(labels[static_cast<std::size_t>(r)])) * inv_n;
    backward_into(model, acts, dlogit, grad, delta, prev_delta);
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const std::vector<double>& w = model.layers[l].weights;
    std::vector<double>& gw = grad.layers[l].weights;
    for (std::size_t k = 0; k < w.size(); ++k) gw[k] += 2.0 * l2_penalty * w[k];
  }
  return grad;
}

MlpModel make_initial_model(const PatchSpec& spec, const std::vector<int>& hidden_sizes,
                            std::uint64_t seed) {
  spec.validate();
  for (const int h : hidden_sizes)
    if (h <= 0)
      throw ValidationError("make_initial_model: hidden sizes must be positive");

  MlpModel model;
  model.patch_spec = spec;
  model.layer_sizes.push_back(static_cast<int>(spec.feature_dim()));
  model.layer_sizes.insert(model.layer_sizes.end(), hidden_sizes.begin(),
                           hidden_sizes.end());
  model.layer_sizes.push_back(1);

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    MlpLayer layer;
    layer.in = model.layer_sizes[l];
    layer.out = model.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    layer.weights.resize(static_cast<std::size_t>(layer.in) *
                         static_cast<std::size_t>(layer.out));
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    layer.bias.assign(static_cast<std::size_t>(layer.out), 0.0);
    model.layers.push_back(std::move(layer));
  }

  model.feature_mean.assign(static_cast<std::size_t>(model.input_dim()), 0.0);
  model.feature_std.assign(static_cast<std::size_t>(model.input_dim()), 1.0);
  model.validate();
  return model;
}

MlpModel train_mlp_on_features(const FeatureMatrix& features,
                               std::span<const int> labels, const PatchSpec& spec,
                               const TrainConfig& config, TrainStats* stats) {
  spec.validate();
  config.validate();
  if (features.cols != spec.feature_dim())
    throw ValidationError("train_mlp_on_features: feature width " +
                          std::to_string(features.cols) +
                          " does not match patch feature dim " +
                          std::to_string(spec.feature_dim()));
  const std::int64_t n = features.rows();
  if (n == 0) throw ValidationError("train_mlp_on_features: no training samples");
  if (static_cast<std::int64_t>(labels.size()) != n)
    throw ValidationError("train_mlp_on_features: label count does not match rows");

  std::int64_t n_positive = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1)
      throw ValidationError("train_mlp_on_features: labels must be 0 or 1");
    n_positive += y;
  }
  const std::int64_t n_negative = n - n_positive;
  if (n_positive == 0 || n_negative == 0)
    throw ValidationError("train_mlp_on_features: need both classes, got " +
                          std::to_string(n_positive) + " positive of " +
                          std::to_string(n) + " samples");

  MlpModel model = make_initial_model(spec, config.hidden_sizes,
                                      derive_seed(config.seed, 0));

  // Per-feature standardization statistics, computed in double. The std is
  // floored so constant features stay harmless instead of dividing by zero.
  const auto cols = static_cast<std::size_t>(features.cols);
  std::vector<double> mean(cols, 0.0);
  std::vector<double> var(cols, 0.0);
  for (std::int64_t r = 0; r < n; ++r) {
    const std::span<const float> row = features.row(r);
    for (std::size_t c = 0; c < cols; ++c) mean[c] += row[c];
  }
  for (std::size_t c = 0; c < cols; ++c) mean[c] /= static_cast<double>(n);
  for (std::int64_t r = 0; r < n; ++r) {
    const std::span<const float> row = features.row(r);
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = row[c] - mean[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    model.feature_mean[c] = mean[c];
    model.feature_std[c] = std::max(std::sqrt(var[c] / static_cast<double>(n)), 1e-8);
  }

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  Rng shuffle_rng(derive_seed(config.seed, 1));

  FeatureMatrix batch;
  batch.cols = features.cols;
  std::vector<int> batch_labels;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::int64_t start = 0; start < n; start += config.minibatch_size) {
      const std::int64_t stop = std::min<std::int64_t>(start + config.minibatch_size, n);
      const auto bsize = static_cast<std::size_t>(stop - start);
      batch.data.resize(bsize * cols);
      batch_labels.resize(bsize);
      for (std::size_t b = 0; b < bsize; ++b) {
        const std::int64_t src = order[static_cast<std::size_t>(start) + b];
        const std::span<const float> row = features.row(src);
        std::copy(row.begin(), row.end(), batch.data.begin() + b * cols);
        batch_labels[b] = labels[static_cast<std::size_t>(src)];
      }
      const MlpGradient grad =
          mlp_batch_gradient(model, batch, batch_labels, config.l2_penalty);
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        MlpLayer& layer = model.layers[l];
        const MlpLayer& g = grad.layers[l];
        for (std::size_t k = 0; k < layer.weights.size(); ++k)
          layer.weights[k] -= config.learning_rate * g.weights[k];
        for (std::size_t k = 0; k < layer.bias.size(); ++k)
          layer.bias[k] -= config.learning_rate * g.bias[k];
      }
    }
    if (!all_parameters_finite(model))
      throw ValidationError("train_mlp_on_features: diverged at epoch " +
                            std::to_string(epoch + 1) +
                            "; lower learning_rate or raise minibatch_size");
  }

  const double final_loss = mlp_batch_loss(model, features, labels, config.l2_penalty);
  if (!std::isfinite(final_loss))
    throw ValidationError("train_mlp_on_features: non-finite final loss");
  if (stats != nullptr) {
    stats->n_samples = n;
    stats->n_positive = n_positive;
    stats->n_negative = n_negative;
    stats->final_loss = final_loss;
  }
  model.validate();
  return model;
}

MlpModel train_mlp(const std::vector<LabeledSample>& samples, const Volume3& volume,
                   const PatchSpec& spec, const TrainConfig& config, TrainStats* stats) {
  spec.validate();
  if (samples.empty()) throw ValidationError("train_mlp: no training samples");

  const FeaturePyramid pyramid(volume, spec);
  FeatureMatrix features;
  features.cols = spec.feature_dim();
  features.data.resize(samples.size() * static_cast<std::size_t>(features.cols));
  std::vector<int> labels(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    std::span<float> row(features.data.data() +
                             s * static_cast<std::size_t>(features.cols),
                         static_cast<std::size_t>(features.cols));
    pyramid.features_at(samples[s].position, row);
    labels[s] = samples[s].label;
  }
  return train_mlp_on_features(features, labels, spec, config, stats);
}

Volume3 predict_voxelwise(const Volume3& volume, const MlpModel& model, int threads) {
  model.validate();
  Volume3 out(volume.dims(), 0.0f, volume.voxel_size_nm());

  const int r = model.patch_spec.receptive_radius();
  const Dims3 dims = volume.dims();
  const int nz_interior = dims.nz - 2 * r;
  if (dims.nx - 2 * r <= 0 || dims.ny - 2 * r <= 0 || nz_interior <= 0)
    return out;  // no interior voxels; everything is border band

  const FeaturePyramid pyramid(volume, model.patch_spec);
  const auto dim = static_cast<std::size_t>(model.input_dim());

  parallel_for_chunks(
      nz_interior, threads, [&](std::int64_t begin, std::int64_t end) {
        std::vector<float> feat(dim);
        Activations acts;
        for (std::int64_t zi = begin; zi < end; ++zi) {
          const int z = r + static_cast<int>(zi);
          for (int y = r; y < dims.ny - r; ++y) {
            for (int x = r; x < dims.nx - r; ++x) {
              pyramid.features_at(Coordinate{x, y, z}, feat);
              out.at(x, y, z) =
                  static_cast<float>(logistic_open(forward_logit(model, feat, acts)));
            }
          }
        }
      });
  return out;
}

Volume3 oracle_predict(const PointSet& ground_truth, Dims3 dims, double r_l) {
  return make_label_volume(ground_truth, dims, r_l);
}

void save_model(const MlpModel& model, const fs::path& path) {
  model.validate();
  if (!all_parameters_finite(model))
    throw ValidationError("save_model: model has non-finite parameters");
  for (const double m : model.feature_mean)
    if (!std::isfinite(m))
      throw ValidationError("save_model: non-finite feature_mean");
  for (const double s : model.feature_std)
    if (!std::isfinite(s)) throw ValidationError("save_model: non-finite feature_std");

  ordered_json doc;
  doc["format"] = "vmlp";
  doc["version"] = kModelFormatVersion;
  doc["patch_spec"] = {{"scales", model.patch_spec.scales},
                       {"patch_radius", model.patch_spec.patch_radius}};
  doc["layer_sizes"] = model.layer_sizes;
  doc["feature_mean"] = model.feature_mean;
  doc["feature_std"] = model.feature_std;
  ordered_json layers = ordered_json::array();
  for (const MlpLayer& layer : model.layers) {
    ordered_json entry;
    entry["weights"] = layer.weights;  // row-major [out][in], flattened
    entry["bias"] = layer.bias;
    layers.push_back(std::move(entry));
  }
  doc["layers"] = std::move(layers);
  write_text_file(path, doc.dump(2) + "\n", "save_model");
}

MlpModel load_model(const fs::path& path) {
  const ordered_json doc = parse_json_file(path, "load_model");
  if (!doc.is_object() || doc.value("format", "") != "vmlp")
    throw ValidationError("load_model: not a vmlp file: " + path.string());
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    throw ValidationError("load_model: missing version in " + path.string());
  if (doc["version"].get<int>() != kModelFormatVersion)
    throw ValidationError("load_model: unsupported vmlp version " +
                          doc["version"].dump() + " in " + path.string());

  MlpModel model;
  try {
    const ordered_json& spec = doc.at("patch_spec");
    model.patch_spec.scales = spec.at("scales").get<std::vector<int>>();
    model.patch_spec.patch_radius = spec.at("patch_radius").get<int>();
    model.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
    model.feature_mean = doc.at("feature_mean").get<std::vector<double>>();
    model.feature_std = doc.at("feature_std").get<std::vector<double>>();
    const ordered_json& layers = doc.at("layers");
    if (!layers.is_array())
      throw ValidationError("load_model: layers must be an array in " + path.string());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      MlpLayer layer;
      layer.in = (l + 1 < model.layer_sizes.size()) ? model.layer_sizes[l] : 0;
      layer.out = (l + 1 < model.layer_sizes.size()) ? model.layer_sizes[l + 1] : 0;
      layer.weights = layers[l].at("weights").get<std::vector<double>>();
      layer.bias = layers[l].at("bias").get<std::vector<double>>();
      model.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("load_model: malformed vmlp in " + path.string() + ": " +
                          e.what());
  }
  model.validate();
  for (const MlpLayer& layer : model.layers) {
    for (const double w : layer.weights)
      if (!std::isfinite(w))
        throw ValidationError("load_model: non-finite weight in " + path.string());
    for (const double b : layer.bias)
      if (!std::isfinite(b))
        throw ValidationError("load_model: non-finite bias in " + path.string());
  }
  return model;
}

}  // namespace voxdet
