#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "stax/random.hpp"
#include "stax/types.hpp"

namespace stax {

enum class Activation : std::uint8_t { linear = 0, selu = 1, relu = 2 };

double selu(double x);

// Anything that maps flattened observations (one per column) to a latent
// space and back. The MLP below is the production codec; tests plug in doubles.
class ObservationCodec {
 public:
  virtual ~ObservationCodec() = default;
  virtual int input_dim() const = 0;
  virtual int latent_dim() const = 0;
  virtual Eigen::MatrixXd encode(const Eigen::MatrixXd& inputs) const = 0;
  virtual Eigen::MatrixXd decode(const Eigen::MatrixXd& latents) const = 0;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::linear;
};

struct LayerGradient {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

struct Gradients {
  std::vector<LayerGradient> layers;
  double loss = 0.0;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Dense autoencoder. Encoder sizes [input, hidden..., latent]; the decoder
// mirrors them. SELU everywhere except the decoder output, which is ReLU so
// reconstructions stay non-negative.
class MlpAutoencoder final : public ObservationCodec {
 public:
  MlpAutoencoder(std::vector<int> encoder_sizes, Rng& rng);

  // Weights and biases ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)].
  void reinitialize(Rng& rng);
  void reset_optimizer();

  int input_dim() const override { return encoder_sizes_.front(); }
  int latent_dim() const override { return encoder_sizes_.back(); }
  Eigen::MatrixXd encode(const Eigen::MatrixXd& inputs) const override;
  Eigen::MatrixXd decode(const Eigen::MatrixXd& latents) const override;
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& inputs) const;

  // Mean over all elements of the squared reconstruction error.
  double loss(const Eigen::MatrixXd& batch) const;
  Gradients backward(const Eigen::MatrixXd& batch) const;
  void apply_adam(const Gradients& grads, const AdamOptions& options);
  std::uint64_t optimizer_steps() const { return steps_; }

  std::size_t parameter_count() const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> params);

  const std::vector<int>& encoder_sizes() const { return encoder_sizes_; }
  std::span<const DenseLayer> layers() const { return layers_; }
  std::span<DenseLayer> mutable_layers() { return layers_; }
  std::size_t encoder_layer_count() const { return encoder_layers_; }

  // Restores the step counter from a checkpoint; moments restart from zero.
  void set_optimizer_steps(std::uint64_t steps);

 private:
  Eigen::MatrixXd run(const Eigen::MatrixXd& x, std::size_t first, std::size_t last) const;

  std::vector<int> encoder_sizes_;
  std::vector<DenseLayer> layers_;
  std::size_t encoder_layers_ = 0;
  std::vector<LayerGradient> first_moment_;
  std::vector<LayerGradient> second_moment_;
  std::uint64_t steps_ = 0;
};

// --- observations -> descriptors ------------------------------------------------

// Columns are the flattened rasters, in trajectory order.
Eigen::MatrixXd observations_matrix(const Observations& observations);

// Concatenated latents of the K sampled observations.
BehaviorDescriptor descriptor_from_trajectory(const ObservationCodec& codec,
                                              const Observations& observations,
                                              std::size_t k_samples);

// Sum over sampled observations of the squared reconstruction error.
double surprise(const ObservationCodec& codec, const Observations& observations);

struct EncodedPolicies {
  std::vector<BehaviorDescriptor> descriptors;
  std::vector<double> surprise;  // empty unless requested
};

// Batched form of the two functions above; every entry must have the same
// number of observations.
EncodedPolicies encode_policies(const ObservationCodec& codec,
                                std::span<const Observations* const> observations,
                                bool with_surprise);

// Recomputes the learned descriptor of every policy in every container from its
// stored observations. Policies sharing an id are encoded once. Returns the
// number of container entries updated.
std::size_t refresh_descriptors(const ObservationCodec& codec,
                                std::span<const std::span<EvaluatedPolicy>> containers);

// --- training -------------------------------------------------------------------

struct Dataset {
  Eigen::MatrixXd train;       // input_dim x n_train
  Eigen::MatrixXd validation;  // input_dim x n_val
  std::size_t size() const { return static_cast<std::size_t>(train.cols() + validation.cols()); }
};

// Shuffles the columns of `samples` and splits them. At least one validation
// sample is kept whenever there are two or more samples.
Dataset split_dataset(const Eigen::MatrixXd& samples, double train_fraction, Rng& rng);

// Every sampled observation of every policy in `sources`, concatenated.
Dataset assemble_dataset(std::span<const std::span<const EvaluatedPolicy>> sources,
                         double train_fraction, Rng& rng);

// Stops once the validation loss has risen above the previous epoch's value
// `patience` epochs in a row.
class ValidationMonitor {
 public:
  explicit ValidationMonitor(int patience = 3) : patience_(patience) {}
  bool observe(double validation_loss);
  int consecutive_increases() const { return increases_; }

 private:
  int patience_;
  int increases_ = 0;
  bool has_previous_ = false;
  double previous_ = 0.0;
};

enum class StopReason { no_epochs, early_stop, max_epochs };

std::string_view to_string(StopReason reason);

struct TrainOptions {
  int max_epochs = 50;
  int batch_size = 64;
  int patience = 3;
  AdamOptions adam;
};

struct TrainingReport {
  double initial_train_loss = 0.0;
  std::vector<double> train_losses;
  std::vector<double> validation_losses;
  int epochs_run = 0;
  StopReason stop_reason = StopReason::no_epochs;
};

// Continues from the current optimizer state.
TrainingReport train_episode(MlpAutoencoder& ae, const Dataset& dataset,
                             const TrainOptions& options, Rng& rng);

// Training cadence: fires every TI exploration steps, TI growing by one after
// each firing (TI starts at 1).
struct TrainingSchedule {
  std::uint64_t interval = 1;  // TI
  std::uint64_t counter = 0;   // TI_C

  bool tick();
};

// --- checkpoint -------------------------------------------------------------------

// Little-endian: magic, layer table (in, out, activation), optimizer steps,
// TI, TI_C, parameter count, float64 parameters.
void save_checkpoint(std::ostream& out, const MlpAutoencoder& ae, const TrainingSchedule& schedule);

// Throws std::runtime_error when the stored layer table differs from `ae`'s.
void load_checkpoint(std::istream& in, MlpAutoencoder& ae, TrainingSchedule& schedule);

}  // namespace stax
