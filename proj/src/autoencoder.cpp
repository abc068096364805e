#include "stax/autoencoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace stax {

namespace {

constexpr double kSeluScale = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

void activate(Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::linear:
      return;
    case Activation::relu:
      z = z.cwiseMax(0.0);
      return;
    case Activation::selu:
      z = z.unaryExpr([](double x) { return selu(x); });
      return;
  }
}

// d act / d z evaluated at the pre-activation.
Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::linear:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::relu:
      return z.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
    case Activation::selu:
      return z.unaryExpr(
          [](double x) { return x > 0.0 ? kSeluScale : kSeluScale * kSeluAlpha * std::exp(x); });
  }
  return {};
}

}  // namespace

double selu(double x) { return x > 0.0 ? kSeluScale * x : kSeluScale * kSeluAlpha * std::expm1(x); }

MlpAutoencoder::MlpAutoencoder(std::vector<int> encoder_sizes, Rng& rng)
    : encoder_sizes_(std::move(encoder_sizes)) {
  if (encoder_sizes_.size() < 2) throw std::invalid_argument("autoencoder needs >= 2 sizes");
  for (int s : encoder_sizes_) {
    if (s <= 0) throw std::invalid_argument("autoencoder layer sizes must be positive");
  }
  std::vector<int> all = encoder_sizes_;
  all.insert(all.end(), encoder_sizes_.rbegin() + 1, encoder_sizes_.rend());
  encoder_layers_ = encoder_sizes_.size() - 1;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    DenseLayer layer;
    layer.weights.resize(all[i + 1], all[i]);
    layer.bias.resize(all[i + 1]);
    layer.activation = (i + 2 == all.size()) ? Activation::relu : Activation::selu;
    layers_.push_back(std::move(layer));
  }
  reinitialize(rng);
  reset_optimizer();
}

void MlpAutoencoder::reinitialize(Rng& rng) {
  for (auto& layer : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = u(rng);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = u(rng);
  }
}

void MlpAutoencoder::reset_optimizer() {
  first_moment_.clear();
  second_moment_.clear();
  for (const auto& layer : layers_) {
    LayerGradient zero{Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                       Eigen::VectorXd::Zero(layer.bias.size())};
    first_moment_.push_back(zero);
    second_moment_.push_back(std::move(zero));
  }
  steps_ = 0;
}

void MlpAutoencoder::set_optimizer_steps(std::uint64_t steps) {
  reset_optimizer();
  steps_ = steps;
}

Eigen::MatrixXd MlpAutoencoder::run(const Eigen::MatrixXd& x, std::size_t first,
                                    std::size_t last) const {
  Eigen::MatrixXd a = x;
  for (std::size_t l = first; l < last; ++l) {
    Eigen::MatrixXd z = layers_[l].weights * a;
    z.colwise() += layers_[l].bias;
    activate(z, layers_[l].activation);
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd MlpAutoencoder::encode(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim()) throw std::invalid_argument("encode: input dimension mismatch");
  return run(inputs, 0, encoder_layers_);
}

Eigen::MatrixXd MlpAutoencoder::decode(const Eigen::MatrixXd& latents) const {
  if (latents.rows() != latent_dim()) throw std::invalid_argument("decode: latent dimension mismatch");
  return run(latents, encoder_layers_, layers_.size());
}

Eigen::MatrixXd MlpAutoencoder::reconstruct(const Eigen::MatrixXd& inputs) const {
  return decode(encode(inputs));
}

double MlpAutoencoder::loss(const Eigen::MatrixXd& batch) const {
  if (batch.cols() == 0) return 0.0;
  return (reconstruct(batch) - batch).squaredNorm() / static_cast<double>(batch.size());
}

Gradients MlpAutoencoder::backward(const Eigen::MatrixXd& batch) const {
  if (batch.cols() == 0) throw std::invalid_argument("backward: empty batch");
  if (batch.rows() != input_dim()) throw std::invalid_argument("backward: input dimension mismatch");
  const std::size_t n_layers = layers_.size();
  std::vector<Eigen::MatrixXd> inputs(n_layers);  // activation entering layer l
  std::vector<Eigen::MatrixXd> pre(n_layers);
  Eigen::MatrixXd a = batch;
  for (std::size_t l = 0; l < n_layers; ++l) {
    inputs[l] = a;
    pre[l] = layers_[l].weights * a;
    pre[l].colwise() += layers_[l].bias;
    a = pre[l];
    activate(a, layers_[l].activation);
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  Eigen::MatrixXd residual = a - batch;

  Gradients grads;
  grads.loss = residual.squaredNorm() * scale;
  grads.layers.resize(n_layers);
  Eigen::MatrixXd upstream = (2.0 * scale) * residual;
  for (std::size_t i = n_layers; i-- > 0;) {
    Eigen::MatrixXd dz = upstream.cwiseProduct(activation_derivative(pre[i], layers_[i].activation));
    grads.layers[i].weights.noalias() = dz * inputs[i].transpose();
    grads.layers[i].bias = dz.rowwise().sum();
    if (i > 0) upstream.noalias() = layers_[i].weights.transpose() * dz;
  }
  return grads;
}

void MlpAutoencoder::apply_adam(const Gradients& grads, const AdamOptions& o) {
  if (grads.layers.size() != layers_.size()) throw std::invalid_argument("gradient layer count");
  ++steps_;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(steps_));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseProduct(g);
    param.array() -= o.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + o.epsilon);
  };
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    update(layers_[l].weights, first_moment_[l].weights, second_moment_[l].weights,
           grads.layers[l].weights);
    update(layers_[l].bias, first_moment_[l].bias, second_moment_[l].bias, grads.layers[l].bias);
  }
}

std::size_t MlpAutoencoder::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

std::vector<double> MlpAutoencoder::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weights.data(), l.weights.data() + l.weights.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

void MlpAutoencoder::set_flat_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
  std::size_t k = 0;
  for (auto& l : layers_) {
    std::copy_n(params.data() + k, l.weights.size(), l.weights.data());
    k += static_cast<std::size_t>(l.weights.size());
    std::copy_n(params.data() + k, l.bias.size(), l.bias.data());
    k += static_cast<std::size_t>(l.bias.size());
  }
}

// --- observations -> descriptors ------------------------------------------------

Eigen::MatrixXd observations_matrix(const Observations& observations) {
  if (observations.empty()) return {};
  const auto dim = static_cast<Eigen::Index>(observations.front().pixels.size());
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(observations.size()));
  for (std::size_t k = 0; k < observations.size(); ++k) {
    const auto& px = observations[k].pixels;
    if (static_cast<Eigen::Index>(px.size()) != dim) {
      throw std::invalid_argument("observations have inconsistent sizes");
    }
    for (Eigen::Index i = 0; i < dim; ++i) m(i, static_cast<Eigen::Index>(k)) = px[i];
  }
  return m;
}

EncodedPolicies encode_policies(const ObservationCodec& codec,
                                std::span<const Observations* const> observations,
                                bool with_surprise) {
  EncodedPolicies out;
  if (observations.empty()) return out;
  const std::size_t k = observations.front()->size();
  const auto dim = static_cast<Eigen::Index>(codec.input_dim());
  Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(observations.size() * k));
  Eigen::Index col = 0;
  for (const Observations* obs : observations) {
    if (obs->size() != k) throw std::invalid_argument("policies have different sample counts");
    for (const auto& raster : *obs) {
      if (static_cast<Eigen::Index>(raster.pixels.size()) != dim) {
        throw std::invalid_argument("raster size does not match the codec input");
      }
      for (Eigen::Index i = 0; i < dim; ++i) x(i, col) = raster.pixels[i];
      ++col;
    }
  }
  const Eigen::MatrixXd z = codec.encode(x);
  const auto latent = z.rows();
  out.descriptors.resize(observations.size());
  for (std::size_t p = 0; p < observations.size(); ++p) {
    auto& bd = out.descriptors[p];
    bd.kind = DescriptorKind::learned;
    bd.values.resize(static_cast<std::size_t>(latent) * k);
    for (std::size_t s = 0; s < k; ++s) {
      const auto c = static_cast<Eigen::Index>(p * k + s);
      for (Eigen::Index i = 0; i < latent; ++i) bd.values[s * latent + i] = z(i, c);
    }
  }
  if (with_surprise) {
    const Eigen::MatrixXd recon = codec.decode(z);
    const Eigen::RowVectorXd err = (recon - x).colwise().squaredNorm();
    out.surprise.assign(observations.size(), 0.0);
    for (std::size_t p = 0; p < observations.size(); ++p) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += err(static_cast<Eigen::Index>(p * k + j));
      out.surprise[p] = s;
    }
  }
  return out;
}

BehaviorDescriptor descriptor_from_trajectory(const ObservationCodec& codec,
                                              const Observations& observations,
                                              std::size_t k_samples) {
  if (observations.size() != k_samples) {
    throw std::invalid_argument("expected " + std::to_string(k_samples) + " observations, got " +
                                std::to_string(observations.size()));
  }
  const Observations* ptr = &observations;
  return encode_policies(codec, std::span(&ptr, 1), false).descriptors.front();
}

double surprise(const ObservationCodec& codec, const Observations& observations) {
  const Observations* ptr = &observations;
  return encode_policies(codec, std::span(&ptr, 1), true).surprise.front();
}

std::size_t refresh_descriptors(const ObservationCodec& codec,
                                std::span<const std::span<EvaluatedPolicy>> containers) {
  std::unordered_map<PolicyId, std::size_t> slot;
  std::vector<const Observations*> unique_obs;
  std::size_t total = 0;
  for (const auto& container : containers) {
    for (const auto& p : container) {
      ++total;
      if (!p.observations) throw std::logic_error("policy without stored observations");
      if (slot.emplace(p.id(), unique_obs.size()).second) unique_obs.push_back(p.observations.get());
    }
  }
  if (unique_obs.empty()) return 0;
  // All sample counts must match for batching; group by count otherwise.
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_count;
  for (std::size_t i = 0; i < unique_obs.size(); ++i) by_count[unique_obs[i]->size()].push_back(i);
  std::vector<BehaviorDescriptor> fresh(unique_obs.size());
  for (const auto& [count, members] : by_count) {
    std::vector<const Observations*> group;
    group.reserve(members.size());
    for (std::size_t i : members) group.push_back(unique_obs[i]);
    auto encoded = encode_policies(codec, group, false);
    for (std::size_t j = 0; j < members.size(); ++j) {
      fresh[members[j]] = std::move(encoded.descriptors[j]);
    }
  }
  // Assign only after everything is encoded.
  for (const auto& container : containers) {
    for (auto& p : container) p.learned_bd = fresh[slot.at(p.id())];
  }
  return total;
}

// --- training -------------------------------------------------------------------

Dataset split_dataset(const Eigen::MatrixXd& samples, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0) || train_fraction > 1.0) {
    throw std::invalid_argument("train fraction must lie in (0, 1]");
  }
  const auto n = static_cast<std::size_t>(samples.cols());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(std::llround((1.0 - train_fraction) * n));
  if (n >= 2) n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  else n_val = 0;
  const std::size_t n_train = n - n_val;
  Dataset ds;
  ds.train.resize(samples.rows(), static_cast<Eigen::Index>(n_train));
  ds.validation.resize(samples.rows(), static_cast<Eigen::Index>(n_val));
  for (std::size_t i = 0; i < n_train; ++i) {
    ds.train.col(static_cast<Eigen::Index>(i)) = samples.col(static_cast<Eigen::Index>(order[i]));
  }
  for (std::size_t i = 0; i < n_val; ++i) {
    ds.validation.col(static_cast<Eigen::Index>(i)) =
        samples.col(static_cast<Eigen::Index>(order[n_train + i]));
  }
  return ds;
}

Dataset assemble_dataset(std::span<const std::span<const EvaluatedPolicy>> sources,
                         double train_fraction, Rng& rng) {
  Eigen::Index count = 0;
  Eigen::Index dim = -1;
  for (const auto& src : sources) {
    for (const auto& p : src) {
      if (!p.observations) throw std::logic_error("policy without stored observations");
      for (const auto& r : *p.observations) {
        if (dim < 0) dim = static_cast<Eigen::Index>(r.pixels.size());
        if (static_cast<Eigen::Index>(r.pixels.size()) != dim) {
          throw std::invalid_argument("inconsistent raster sizes in dataset");
        }
        ++count;
      }
    }
  }
  if (count == 0) throw std::invalid_argument("cannot assemble a dataset from empty sources");
  Eigen::MatrixXd samples(dim, count);
  Eigen::Index col = 0;
  for (const auto& src : sources) {
    for (const auto& p : src) {
      for (const auto& r : *p.observations) {
        for (Eigen::Index i = 0; i < dim; ++i) samples(i, col) = r.pixels[i];
        ++col;
      }
    }
  }
  return split_dataset(samples, train_fraction, rng);
}

bool ValidationMonitor::observe(double loss) {
  if (has_previous_ && loss > previous_) {
    ++increases_;
  } else {
    increases_ = 0;
  }
  has_previous_ = true;
  previous_ = loss;
  return increases_ >= patience_;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::no_epochs:
      return "no_epochs";
    case StopReason::early_stop:
      return "early_stop";
    case StopReason::max_epochs:
      return "max_epochs";
  }
  return "unknown";
}

TrainingReport train_episode(MlpAutoencoder& ae, const Dataset& dataset,
                             const TrainOptions& options, Rng& rng) {
  if (dataset.train.cols() == 0) throw std::invalid_argument("empty training split");
  if (options.batch_size <= 0) throw std::invalid_argument("batch size must be positive");
  TrainingReport report;
  report.initial_train_loss = ae.loss(dataset.train);
  if (options.max_epochs <= 0) return report;

  const auto n = static_cast<std::size_t>(dataset.train.cols());
  const auto batch = static_cast<std::size_t>(options.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  ValidationMonitor monitor(options.patience);
  Eigen::MatrixXd x;
  report.stop_reason = StopReason::max_epochs;
  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double weighted = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      x.resize(dataset.train.rows(), static_cast<Eigen::Index>(len));
      for (std::size_t j = 0; j < len; ++j) {
        x.col(static_cast<Eigen::Index>(j)) =
            dataset.train.col(static_cast<Eigen::Index>(order[start + j]));
      }
      const Gradients g = ae.backward(x);
      weighted += g.loss * static_cast<double>(len);
      ae.apply_adam(g, options.adam);
    }
    report.train_losses.push_back(weighted / static_cast<double>(n));
    const double val = dataset.validation.cols() > 0
                           ? ae.loss(dataset.validation)
                           : std::numeric_limits<double>::quiet_NaN();
    report.validation_losses.push_back(val);
    ++report.epochs_run;
    if (dataset.validation.cols() > 0 && monitor.observe(val)) {
      report.stop_reason = StopReason::early_stop;
      break;
    }
  }
  return report;
}

bool TrainingSchedule::tick() {
  ++counter;
  if (counter == interval) {
    counter = 0;
    ++interval;
    return true;
  }
  return false;
}

// --- checkpoint -------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'T', 'A', 'X', 'A', 'E', '0', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw std::runtime_error("truncated autoencoder checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(std::ostream& out, const MlpAutoencoder& ae, const TrainingSchedule& schedule) {
  out.write(kMagic, sizeof(kMagic));
  const auto layers = ae.layers();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.weights.cols()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.weights.rows()));
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(l.activation));
  }
  put_le<std::uint64_t>(out, ae.optimizer_steps());
  put_le<std::uint64_t>(out, schedule.interval);
  put_le<std::uint64_t>(out, schedule.counter);
  const auto params = ae.flat_parameters();
  put_le<std::uint64_t>(out, params.size());
  for (double p : params) put_le<double>(out, p);
}

void load_checkpoint(std::istream& in, MlpAutoencoder& ae, TrainingSchedule& schedule) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not an autoencoder checkpoint");
  }
  const auto layers = ae.layers();
  const auto n_layers = get_le<std::uint32_t>(in);
  if (n_layers != layers.size()) throw std::runtime_error("checkpoint layer count mismatch");
  for (const auto& l : layers) {
    const auto fan_in = get_le<std::uint32_t>(in);
    const auto fan_out = get_le<std::uint32_t>(in);
    const auto act = get_le<std::uint8_t>(in);
    if (fan_in != l.weights.cols() || fan_out != l.weights.rows() ||
        act != static_cast<std::uint8_t>(l.activation)) {
      throw std::runtime_error("checkpoint layer sizes do not match the autoencoder");
    }
  }
  const auto steps = get_le<std::uint64_t>(in);
  TrainingSchedule sched;
  sched.interval = get_le<std::uint64_t>(in);
  sched.counter = get_le<std::uint64_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  if (count != ae.parameter_count()) throw std::runtime_error("checkpoint parameter count mismatch");
  std::vector<double> params(count);
  for (auto& p : params) p = get_le<double>(in);
  ae.set_flat_parameters(params);
  ae.set_optimizer_steps(steps);
  schedule = sched;
}

}  // namespace stax
