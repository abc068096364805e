#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "stax/autoencoder.hpp"

using namespace stax;
using namespace stax::test;

namespace {

std::shared_ptr<Observations> random_observations(Rng& rng, int g, std::size_t k) {
  auto obs = std::make_shared<Observations>();
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (std::size_t s = 0; s < k; ++s) {
    Raster r(g);
    for (auto& p : r.pixels) p = u(rng);
    obs->push_back(std::move(r));
  }
  return obs;
}

// Reference loss written directly from the definitions, no Eigen products.
double reference_loss(const MlpAutoencoder& ae, const Eigen::MatrixXd& batch) {
  double total = 0.0;
  for (Eigen::Index c = 0; c < batch.cols(); ++c) {
    std::vector<double> a(batch.rows());
    for (Eigen::Index i = 0; i < batch.rows(); ++i) a[i] = batch(i, c);
    for (const auto& l : ae.layers()) {
      std::vector<double> z(l.weights.rows());
      for (Eigen::Index o = 0; o < l.weights.rows(); ++o) {
        double s = l.bias(o);
        for (Eigen::Index i = 0; i < l.weights.cols(); ++i) s += l.weights(o, i) * a[i];
        if (l.activation == Activation::selu) s = selu(s);
        if (l.activation == Activation::relu) s = std::max(0.0, s);
        z[o] = s;
      }
      a = std::move(z);
    }
    for (Eigen::Index i = 0; i < batch.rows(); ++i) total += (a[i] - batch(i, c)) * (a[i] - batch(i, c));
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("selu constants") {
  CHECK(selu(1.0) == doctest::Approx(1.0507009873554805));
  CHECK(selu(-1.0) == doctest::Approx(1.0507009873554805 * 1.6732632423543772 * (std::exp(-1.0) - 1.0)));
  CHECK(selu(0.0) == 0.0);
}

TEST_CASE("layer layout mirrors the encoder") {
  Rng rng(1);
  MlpAutoencoder ae({1024, 256, 64, 10}, rng);
  REQUIRE(ae.layers().size() == 6);
  CHECK(ae.encoder_layer_count() == 3);
  CHECK(ae.layers()[0].weights.rows() == 256);
  CHECK(ae.layers()[2].weights.rows() == 10);
  CHECK(ae.layers()[5].weights.rows() == 1024);
  CHECK(ae.layers()[5].activation == Activation::relu);
  for (std::size_t l = 0; l < 5; ++l) CHECK(ae.layers()[l].activation == Activation::selu);
  CHECK(ae.latent_dim() == 10);
  const double bound = 1.0 / std::sqrt(1024.0);
  CHECK(ae.layers()[0].weights.cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("loss matches a scalar reimplementation") {
  Rng rng(2);
  MlpAutoencoder ae({16, 8, 4}, rng);
  const auto x = random_batch(rng, 16, 5);
  CHECK(ae.loss(x) == doctest::Approx(reference_loss(ae, x)).epsilon(1e-12));
  CHECK(ae.backward(x).loss == doctest::Approx(ae.loss(x)).epsilon(1e-12));
}

TEST_CASE("reconstructions are non-negative") {
  Rng rng(3);
  MlpAutoencoder ae({16, 8, 4}, rng);
  CHECK(ae.reconstruct(random_batch(rng, 16, 20)).minCoeff() >= 0.0);
}

TEST_CASE("backward pass matches central finite differences") {
  Rng rng(4);
  const double h = 1e-5;
  for (int b = 0; b < 20; ++b) {
    MlpAutoencoder ae({16, 8, 4}, rng);
    const auto x = random_batch(rng, 16, 1 + b % 7);
    CHECK(gradient_check_worst(ae, x, h) < 1e-4);
  }
}

TEST_CASE("gradient is invariant to duplicating the whole batch") {
  Rng rng(5);
  MlpAutoencoder ae({16, 8, 4}, rng);
  const auto x = random_batch(rng, 16, 4);
  Eigen::MatrixXd xx(16, 8);
  xx << x, x;
  const auto g1 = ae.backward(x);
  const auto g2 = ae.backward(xx);
  for (std::size_t l = 0; l < g1.layers.size(); ++l) {
    CHECK((g1.layers[l].weights - g2.layers[l].weights).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("zero residual gives zero gradient on the output layer") {
  Rng rng(6);
  MlpAutoencoder ae({6, 4, 2}, rng);
  auto& out = ae.mutable_layers()[3];
  out.weights.setZero();
  out.bias = Eigen::VectorXd::Constant(6, 0.25);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(6, 3, 0.25);
  const auto g = ae.backward(x);
  CHECK(g.loss == 0.0);
  CHECK(g.layers[3].weights.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.layers[3].bias.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Adam lowers the loss on a fixed batch") {
  Rng rng(7);
  MlpAutoencoder ae({16, 8, 4}, rng);
  const auto x = random_batch(rng, 16, 16);
  const double before = ae.loss(x);
  AdamOptions opt;
  opt.learning_rate = 1e-2;
  for (int i = 0; i < 200; ++i) ae.apply_adam(ae.backward(x), opt);
  CHECK(ae.loss(x) < 0.5 * before);
  CHECK(ae.optimizer_steps() == 200);
}

TEST_CASE("first Adam step moves every parameter by about the learning rate") {
  Rng rng(8);
  MlpAutoencoder ae({6, 4, 2}, rng);
  const auto x = random_batch(rng, 6, 3);
  const auto before = ae.flat_parameters();
  const auto g = ae.backward(x);
  ae.apply_adam(g, {});
  const auto after = ae.flat_parameters();
  std::size_t k = 0;
  for (const auto& lg : g.layers) {
    for (Eigen::Index i = 0; i < lg.weights.size(); ++i, ++k) {
      const double gi = lg.weights.data()[i];
      if (std::abs(gi) < 1e-6) continue;
      // m_hat / sqrt(v_hat) = sign(g) at step one.
      CHECK(before[k] - after[k] == doctest::Approx(1e-3 * (gi > 0 ? 1 : -1)).epsilon(1e-3));
    }
    k += static_cast<std::size_t>(lg.bias.size());
  }
}

TEST_CASE("descriptor is the concatenation of per-sample latents") {
  Rng rng(9);
  MlpAutoencoder ae({16, 8, 3}, rng);
  auto obs = random_observations(rng, 4, 5);
  const auto bd = descriptor_from_trajectory(ae, *obs, 5);
  REQUIRE(bd.values.size() == 15);
  CHECK(bd.kind == DescriptorKind::learned);
  const auto z = ae.encode(observations_matrix(*obs));
  for (int s = 0; s < 5; ++s) {
    for (int i = 0; i < 3; ++i) CHECK(bd.values[s * 3 + i] == z(i, s));
  }
  CHECK_THROWS(descriptor_from_trajectory(ae, *obs, 4));
}

TEST_CASE("surprise sums squared reconstruction errors over samples") {
  Rng rng(10);
  MlpAutoencoder ae({16, 8, 3}, rng);
  auto obs = random_observations(rng, 4, 5);
  const auto x = observations_matrix(*obs);
  const double expect = (ae.reconstruct(x) - x).squaredNorm();
  CHECK(surprise(ae, *obs) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("batched encoding agrees with one-at-a-time encoding") {
  Rng rng(11);
  MlpAutoencoder ae({16, 8, 3}, rng);
  std::vector<std::shared_ptr<Observations>> keep;
  std::vector<const Observations*> ptrs;
  for (int i = 0; i < 7; ++i) {
    keep.push_back(random_observations(rng, 4, 5));
    ptrs.push_back(keep.back().get());
  }
  const auto batched = encode_policies(ae, ptrs, true);
  for (int i = 0; i < 7; ++i) {
    const auto single = descriptor_from_trajectory(ae, *ptrs[i], 5);
    for (std::size_t j = 0; j < single.values.size(); ++j) {
      CHECK(batched.descriptors[i].values[j] == doctest::Approx(single.values[j]).epsilon(1e-12));
    }
    CHECK(batched.surprise[i] == doctest::Approx(surprise(ae, *ptrs[i])).epsilon(1e-12));
  }
}

namespace {

void check_close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

}  // namespace

TEST_CASE("refresh rewrites every copy of a policy consistently") {
  Rng rng(12);
  MlpAutoencoder ae({16, 8, 3}, rng);
  std::vector<EvaluatedPolicy> a, b;
  for (PolicyId id = 1; id <= 4; ++id) {
    auto p = test::make_policy(id, {0, 0});
    p.observations = random_observations(rng, 4, 5);
    a.push_back(p);
  }
  b.push_back(a[1]);
  b.push_back(a[3]);
  std::vector<std::span<EvaluatedPolicy>> views = {a, b};
  CHECK(refresh_descriptors(ae, views) == 6);
  CHECK(b[0].learned_bd->values == a[1].learned_bd->values);
  check_close(a[2].learned_bd->values, descriptor_from_trajectory(ae, *a[2].observations, 5).values);

  // After the weights change, a second refresh tracks the new encoder.
  Rng other(99);
  ae.reinitialize(other);
  refresh_descriptors(ae, views);
  check_close(a[0].learned_bd->values, descriptor_from_trajectory(ae, *a[0].observations, 5).values);
}

TEST_CASE("dataset holds every sampled observation") {
  Rng rng(13);
  auto obs = random_observations(rng, 2, 5);
  std::vector<EvaluatedPolicy> pop(100), offspring(200);
  for (auto& p : pop) p.observations = obs;
  for (auto& p : offspring) p.observations = obs;
  const std::span<const EvaluatedPolicy> none;
  const std::span<const EvaluatedPolicy> sources[] = {none, none, pop, offspring};
  const auto ds = assemble_dataset(sources, 0.9, rng);
  CHECK(ds.size() == 1500);
  CHECK(ds.validation.cols() == 150);

  // More archive entries strictly grow the dataset.
  std::vector<EvaluatedPolicy> archive(3);
  for (auto& p : archive) p.observations = obs;
  const std::span<const EvaluatedPolicy> more[] = {archive, none, pop, offspring};
  CHECK(assemble_dataset(more, 0.9, rng).size() == 1515);
  const std::span<const EvaluatedPolicy> empty[] = {none};
  CHECK_THROWS(assemble_dataset(empty, 0.9, rng));
}

TEST_CASE("split keeps at least one validation sample") {
  Rng rng(14);
  const auto ds = split_dataset(random_batch(rng, 3, 4), 0.9, rng);
  CHECK(ds.train.cols() == 3);
  CHECK(ds.validation.cols() == 1);
  CHECK(split_dataset(random_batch(rng, 3, 1), 0.9, rng).validation.cols() == 0);
}

TEST_CASE("validation monitor needs three increases in a row") {
  ValidationMonitor m(3);
  const double losses[] = {0.5, 0.4, 0.41, 0.42, 0.43};
  bool stopped = false;
  int epoch = 0;
  for (double l : losses) {
    ++epoch;
    if (m.observe(l)) {
      stopped = true;
      break;
    }
  }
  CHECK(stopped);
  CHECK(epoch == 5);

  ValidationMonitor n(3);
  for (double l : {0.5, 0.6, 0.7, 0.65, 0.7, 0.8}) CHECK_FALSE(n.observe(l));
  CHECK(n.observe(0.9));
}

TEST_CASE("training with zero epochs leaves the weights alone") {
  Rng rng(15);
  MlpAutoencoder ae({16, 8, 4}, rng);
  const auto before = ae.flat_parameters();
  const auto ds = split_dataset(random_batch(rng, 16, 30), 0.9, rng);
  TrainOptions opt;
  opt.max_epochs = 0;
  const auto report = train_episode(ae, ds, opt, rng);
  CHECK(report.epochs_run == 0);
  CHECK(report.stop_reason == StopReason::no_epochs);
  CHECK(ae.flat_parameters() == before);
}

TEST_CASE("training episode reduces the loss and keeps optimizer state") {
  Rng rng(16);
  MlpAutoencoder ae({16, 8, 4}, rng);
  const auto ds = split_dataset(random_batch(rng, 16, 200), 0.9, rng);
  TrainOptions opt;
  opt.max_epochs = 20;
  opt.batch_size = 32;
  const auto r1 = train_episode(ae, ds, opt, rng);
  CHECK(r1.train_losses.back() < r1.initial_train_loss);
  CHECK(r1.epochs_run == static_cast<int>(r1.train_losses.size()));
  CHECK(r1.validation_losses.size() == r1.train_losses.size());
  // 180 training samples, batches of 32 -> 6 steps per epoch.
  CHECK(ae.optimizer_steps() == static_cast<std::uint64_t>(6 * r1.epochs_run));
  const auto steps = ae.optimizer_steps();
  train_episode(ae, ds, opt, rng);
  CHECK(ae.optimizer_steps() > steps);
}

TEST_CASE("training schedule fires at 1, 3, 6, 10, 15") {
  TrainingSchedule s;
  std::vector<int> fired;
  for (int step = 1; step <= 20; ++step) {
    if (s.tick()) fired.push_back(step);
  }
  CHECK(fired == std::vector<int>{1, 3, 6, 10, 15});
  CHECK(s.interval == 6);
  CHECK(s.counter == 5);
}

TEST_CASE("checkpoint round-trips and rejects other shapes") {
  Rng rng(17);
  MlpAutoencoder ae({16, 8, 4}, rng);
  const auto ds = split_dataset(random_batch(rng, 16, 50), 0.9, rng);
  TrainOptions opt;
  opt.max_epochs = 2;
  train_episode(ae, ds, opt, rng);
  TrainingSchedule sched{4, 2};
  std::stringstream buf;
  save_checkpoint(buf, ae, sched);
  const std::string bytes = buf.str();

  Rng other(18);
  MlpAutoencoder copy({16, 8, 4}, other);
  TrainingSchedule loaded;
  std::stringstream in(bytes);
  load_checkpoint(in, copy, loaded);
  CHECK(copy.flat_parameters() == ae.flat_parameters());
  CHECK(copy.optimizer_steps() == ae.optimizer_steps());
  CHECK(loaded.interval == 4);
  CHECK(loaded.counter == 2);

  // Header: magic, layer count, 4 x (in, out, activation), steps, TI, TI_C, count.
  const std::size_t header = 8 + 4 + 4 * 9 + 8 * 4;
  CHECK(bytes.size() == header + 8 * ae.parameter_count());

  MlpAutoencoder wrong({16, 6, 4}, other);
  std::stringstream in2(bytes);
  CHECK_THROWS_AS(load_checkpoint(in2, wrong, loaded), std::runtime_error);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS(load_checkpoint(truncated, copy, loaded));
}
