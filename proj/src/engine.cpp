#include "stax/engine.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "stax/analysis.hpp"
#include "stax/csv.hpp"
#include "stax/evolution.hpp"

namespace stax {

std::string_view to_string(Phase phase) {
  return phase == Phase::exploration ? "exploration" : "exploitation";
}

std::unique_ptr<MlpAutoencoder> make_autoencoder(const RunConfig& config, int raster_size) {
  std::vector<int> sizes{raster_size * raster_size};
  sizes.insert(sizes.end(), config.ae_hidden.begin(), config.ae_hidden.end());
  sizes.push_back(static_cast<int>(config.latent_dim));
  Rng rng = make_stream(config.seed, RngStream::autoencoder);
  return std::make_unique<MlpAutoencoder>(std::move(sizes), rng);
}

std::string metrics_header(std::size_t reward_areas) {
  std::string h = "evaluations,chunk,phase,generation,chunk_evaluations,coverage";
  for (std::size_t i = 0; i < reward_areas; ++i) h += ",max_reward_area_" + std::to_string(i);
  h += ",novelty_archive,reward_archive,active_emitters,ae_train_loss,ae_val_loss,TI\n";
  return h;
}

namespace {

class Runner {
 public:
  Runner(const RunConfig& config, const Environment& env)
      : cfg_(config),
        env_(env),
        evo_(make_stream(config.seed, RngStream::evolution)),
        ae_rng_(make_stream(config.seed, RngStream::autoencoder)),
        emit_rng_(make_stream(config.seed, RngStream::emitters)),
        sample_rng_(make_stream(config.seed, RngStream::sampling)),
        coverage_(env.bounding_box(), config.grid_cells),
        rewards_(env.reward_areas().size()) {
    validate(cfg_);
    if (cfg_.uses_autoencoder()) {
      std::vector<int> sizes{env.raster_size() * env.raster_size()};
      sizes.insert(sizes.end(), cfg_.ae_hidden.begin(), cfg_.ae_hidden.end());
      sizes.push_back(static_cast<int>(cfg_.latent_dim));
      ae_ = std::make_unique<MlpAutoencoder>(std::move(sizes), ae_rng_);
    }
    if (map_elites()) grid_.resize(static_cast<std::size_t>(cfg_.grid_cells) * cfg_.grid_cells);
    metrics_ << metrics_header(env.reward_areas().size());
  }

  RunResult run() {
    next_metrics_at_ = cfg_.metrics_interval;
    while (d_ < cfg_.budget) {
      exploration_chunk();
      if (d_ >= cfg_.budget) break;
      if (cfg_.emitters && exploitation_.has_work(candidates_)) exploitation_chunk();
    }
    if (!last_logged_) write_metrics_row(chunks_.back());
    return finish();
  }

 private:
  bool map_elites() const { return cfg_.selection == SelectionMode::map_elites_grid; }
  bool needs_surprise() const {
    return cfg_.selection == SelectionMode::nsga2_novelty_surprise ||
           cfg_.selection == SelectionMode::alternating;
  }

  // --- evaluation ---------------------------------------------------------------

  std::vector<EvaluatedPolicy> evaluate(std::vector<Genome> genomes, bool with_surprise) {
    const std::size_t n = genomes.size();
    std::vector<EvaluatedPolicy> out(n);
    const std::size_t threads = std::min<std::size_t>(cfg_.eval_threads, n);
    if (threads > 1) {
      std::vector<std::exception_ptr> errors(threads);
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t i = t; i < n; i += threads) {
              out[i] = stax::evaluate(env_, std::move(genomes[i]), cfg_.k_samples);
            }
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) out[i] = stax::evaluate(env_, std::move(genomes[i]), cfg_.k_samples);
    }
    // Bookkeeping happens serially in input order, so parallel and serial
    // evaluation produce identical runs.
    for (auto& p : out) {
      p.evaluated_at = ++d_;
      const Vec2 pos{p.ground_truth_bd.values[0], p.ground_truth_bd.values[1]};
      coverage_.add(pos);
      if (p.reward > 0.0) rewards_.record(nearest_area(env_.reward_areas(), pos), p.reward);
      final_positions_.push_back(pos);
    }
    if (ae_) encode(out, with_surprise && needs_surprise());
    return out;
  }

  void encode(std::span<EvaluatedPolicy> policies, bool with_surprise) {
    std::vector<const Observations*> obs;
    obs.reserve(policies.size());
    for (const auto& p : policies) obs.push_back(p.observations.get());
    auto enc = encode_policies(*ae_, obs, with_surprise);
    for (std::size_t i = 0; i < policies.size(); ++i) {
      policies[i].learned_bd = std::move(enc.descriptors[i]);
      if (with_surprise) policies[i].surprise = enc.surprise[i];
    }
  }

  // --- exploration ----------------------------------------------------------------

  void exploration_chunk() {
    const std::uint64_t start = d_;
    if (!initialized_) {
      initial_population();
      initialized_ = true;
    }
    std::uint64_t spent = 0;
    const std::uint64_t per_generation = cfg_.population * cfg_.offspring;
    while (spent < cfg_.chunk && d_ < cfg_.budget) {
      if (map_elites()) {
        map_elites_generation();
      } else {
        exploration_generation();
      }
      spent += per_generation;
    }
    ++exploration_steps_;
    close_chunk(Phase::exploration, d_ - start);
    if (ae_) training_tick();
  }

  void initial_population() {
    std::vector<Genome> genomes;
    for (std::size_t i = 0; i < cfg_.population; ++i) {
      genomes.push_back(random_genome(env_.genome_dim(), cfg_.bounds, evo_, ids_));
    }
    auto evaluated = evaluate(std::move(genomes), true);
    if (map_elites()) {
      for (auto& p : evaluated) insert_elite(std::move(p));
    } else {
      population_ = std::move(evaluated);
    }
  }

  void exploration_generation() {
    std::vector<Genome> genomes;
    genomes.reserve(population_.size() * cfg_.offspring);
    for (const auto& parent : population_) {
      for (auto& g : mutate(parent.genome, cfg_.sigma, cfg_.offspring, cfg_.bounds, evo_, ids_)) {
        genomes.push_back(std::move(g));
      }
    }
    offspring_ = evaluate(std::move(genomes), true);
    ++generation_;

    // Pool = population followed by offspring.
    std::vector<EvaluatedPolicy*> pool;
    for (auto& p : population_) pool.push_back(&p);
    for (auto& o : offspring_) pool.push_back(&o);
    score_novelty(pool);

    archive_sample_add(novelty_archive_, offspring_, cfg_.n_q, sample_rng_);
    if (cfg_.emitters) {
      for (const auto& o : offspring_) {
        if (o.reward > 0.0) candidates_.push(o);
      }
    }

    std::vector<PolicyId> ids;
    std::vector<double> novelty, second;
    for (const auto* p : pool) {
      ids.push_back(p->id());
      novelty.push_back(p->novelty);
    }
    std::vector<std::size_t> chosen;
    switch (cfg_.selection) {
      case SelectionMode::nsga2_novelty_surprise:
      case SelectionMode::novelty_reward_nsga2: {
        const bool surprise = cfg_.selection == SelectionMode::nsga2_novelty_surprise;
        std::vector<ObjectivePair> objs;
        for (const auto* p : pool) objs.push_back({p->novelty, surprise ? p->surprise : p->reward});
        chosen = select_next_population(objs, ids, cfg_.population);
        break;
      }
      case SelectionMode::alternating: {
        for (const auto* p : pool) second.push_back(p->surprise);
        chosen = alternating_select(novelty, second, ids, cfg_.population, evo_);
        break;
      }
      case SelectionMode::novelty_only:
        chosen = select_top(novelty, ids, cfg_.population);
        break;
      case SelectionMode::map_elites_grid:
        break;
    }
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    std::vector<EvaluatedPolicy> next;
    next.reserve(chosen.size());
    for (std::size_t i : chosen) next.push_back(*pool[i]);
    population_ = std::move(next);
  }

  // Novelty of every pool member against pool and novelty archive, self excluded.
  void score_novelty(std::span<EvaluatedPolicy* const> pool) {
    const DescriptorKind kind = cfg_.descriptor;
    std::vector<DescriptorView> targets, refs;
    std::vector<PolicyId> target_ids, ref_ids;
    for (const auto* p : pool) {
      targets.push_back(active_descriptor(*p, kind));
      target_ids.push_back(p->id());
    }
    refs = targets;
    ref_ids = target_ids;
    for (const auto& a : novelty_archive_.entries()) {
      refs.push_back(active_descriptor(a, kind));
      ref_ids.push_back(a.id());
    }
    const auto scores = novelty_scores(targets, target_ids, refs, ref_ids, cfg_.k_nn);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i]->novelty = scores[i];
  }

  // --- MAP-Elites ---------------------------------------------------------------------

  void insert_elite(EvaluatedPolicy p) {
    const Vec2 pos{p.ground_truth_bd.values[0], p.ground_truth_bd.values[1]};
    auto& cell = grid_[coverage_.cell_of(pos)];
    if (!cell || p.reward > cell->reward) cell = std::move(p);
  }

  void map_elites_generation() {
    std::vector<std::size_t> filled;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (grid_[i]) filled.push_back(i);
    }
    std::uniform_int_distribution<std::size_t> pick(0, filled.size() - 1);
    std::vector<Genome> genomes;
    const std::size_t n = cfg_.population * cfg_.offspring;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& parent = *grid_[filled[pick(evo_)]];
      genomes.push_back(std::move(mutate(parent.genome, cfg_.sigma, 1, cfg_.bounds, evo_, ids_).front()));
    }
    auto evaluated = evaluate(std::move(genomes), false);
    ++generation_;
    for (auto& p : evaluated) insert_elite(std::move(p));
  }

  // --- autoencoder cadence --------------------------------------------------------

  void training_tick() {
    if (!schedule_.tick()) return;
    TrainingEvent event;
    event.exploration_step = exploration_steps_;
    switch (cfg_.ae_regime) {
      case AeRegime::frozen_random:
        return;  // weights stay as initialized
      case AeRegime::reshuffle_random:
        ae_->reinitialize(ae_rng_);
        event.optimizer_steps_before = ae_->optimizer_steps();
        break;
      case AeRegime::reset_each_episode:
        ae_->reinitialize(ae_rng_);
        ae_->reset_optimizer();
        [[fallthrough]];
      case AeRegime::train: {
        const std::span<const EvaluatedPolicy> sources[] = {
            novelty_archive_.entries(), reward_archive_.entries(), population_, offspring_};
        const Dataset ds = assemble_dataset(sources, cfg_.split_fraction, ae_rng_);
        TrainOptions opt;
        opt.max_epochs = cfg_.ae_max_epochs;
        opt.batch_size = cfg_.ae_batch_size;
        opt.adam.learning_rate = cfg_.ae_learning_rate;
        event.optimizer_steps_before = ae_->optimizer_steps();
        event.report = train_episode(*ae_, ds, opt, ae_rng_);
        if (!event.report.train_losses.empty()) {
          last_train_loss_ = event.report.train_losses.back();
          last_val_loss_ = event.report.validation_losses.back();
        }
        break;
      }
    }
    refresh();
    trainings_.push_back(std::move(event));
  }

  void refresh() {
    std::vector<std::span<EvaluatedPolicy>> views = {population_, offspring_,
                                                     novelty_archive_.refresh_view(),
                                                     reward_archive_.refresh_view(),
                                                     candidates_.refresh_view()};
    for (auto v : emitter_policy_views(exploitation_)) views.push_back(v);
    refresh_descriptors(*ae_, views);
    if (needs_surprise()) {
      for (auto* group : {&population_, &offspring_}) {
        if (group->empty()) continue;
        std::vector<const Observations*> obs;
        for (const auto& p : *group) obs.push_back(p.observations.get());
        const auto enc = encode_policies(*ae_, obs, true);
        for (std::size_t i = 0; i < group->size(); ++i) (*group)[i].surprise = enc.surprise[i];
      }
    }
    if (cfg_.emitters) {
      refresh_emitter_novelty(exploitation_, reward_archive_.entries(), cfg_.descriptor, cfg_.k_nn);
    }
  }

  // --- exploitation ---------------------------------------------------------------

  void exploitation_chunk() {
    const std::uint64_t budget = std::min<std::uint64_t>(cfg_.chunk, cfg_.budget - d_);
    std::vector<Genome> neighbors;
    for (const auto& p : population_) neighbors.push_back(p.genome);
    for (const auto& o : offspring_) neighbors.push_back(o.genome);

    EmitterSettings s;
    s.population_size = cfg_.emitter_population;
    s.offspring_per_parent = cfg_.offspring;
    s.bootstrap_generations = cfg_.lambda;
    s.n_q = cfg_.n_q;
    s.k_nn = cfg_.k_nn;
    s.genome_dim = env_.genome_dim();
    s.fallback_sigma = cfg_.sigma;
    s.bounds = cfg_.bounds;
    s.kind = cfg_.descriptor;

    ExploitationContext ctx{candidates_,
                            novelty_archive_,
                            reward_archive_,
                            neighbors,
                            s,
                            [this](std::vector<Genome> g) { return evaluate(std::move(g), false); },
                            emit_rng_,
                            ids_};
    const std::uint64_t start = d_;
    run_exploitation_phase(exploitation_, ctx, budget);
    close_chunk(Phase::exploitation, d_ - start);
  }

  // --- metrics ----------------------------------------------------------------------

  void close_chunk(Phase phase, std::uint64_t spent) {
    ChunkRecord rec;
    rec.index = chunks_.size() + 1;
    rec.phase = phase;
    rec.evaluations = spent;
    rec.total_evaluations = d_;
    rec.generation = generation_;
    chunks_.push_back(rec);
    last_logged_ = false;
    if (cfg_.metrics_interval == 0 || d_ >= next_metrics_at_) {
      write_metrics_row(rec);
      if (cfg_.metrics_interval > 0) {
        next_metrics_at_ = (d_ / cfg_.metrics_interval + 1) * cfg_.metrics_interval;
      }
    }
  }

  void write_metrics_row(const ChunkRecord& rec) {
    metrics_ << rec.total_evaluations << ',' << rec.index << ',' << to_string(rec.phase) << ','
             << rec.generation << ',' << rec.evaluations << ','
             << csv::format_double(coverage_.coverage());
    for (double m : rewards_.maxima()) metrics_ << ',' << csv::format_double(m);
    const std::size_t archive_size =
        map_elites() ? static_cast<std::size_t>(std::count_if(grid_.begin(), grid_.end(),
                                                              [](const auto& c) { return c.has_value(); }))
                     : novelty_archive_.size();
    metrics_ << ',' << archive_size << ',' << reward_archive_.size() << ','
             << exploitation_.active_emitters() << ',' << csv::format_double(last_train_loss_) << ','
             << csv::format_double(last_val_loss_) << ',' << schedule_.interval << '\n';
    last_logged_ = true;
  }

  RunResult finish() {
    RunResult r;
    r.config = cfg_;
    if (map_elites()) {
      for (auto& cell : grid_) {
        if (cell) r.novelty_archive.append(std::move(*cell));
      }
    } else {
      r.novelty_archive = std::move(novelty_archive_);
    }
    r.reward_archive = std::move(reward_archive_);
    r.autoencoder = std::move(ae_);
    r.schedule = schedule_;
    r.trainings = std::move(trainings_);
    r.chunks = std::move(chunks_);
    r.emitter_events = std::move(exploitation_.events);
    r.metrics_csv = metrics_.str();
    r.evaluations = d_;
    r.coverage = coverage_.coverage();
    r.max_reward_per_area.assign(rewards_.maxima().begin(), rewards_.maxima().end());
    r.final_positions = std::move(final_positions_);
    return r;
  }

  RunConfig cfg_;
  const Environment& env_;
  Rng evo_;
  Rng ae_rng_;
  Rng emit_rng_;
  Rng sample_rng_;
  IdSource ids_;

  std::uint64_t d_ = 0;
  std::uint64_t generation_ = 0;
  std::uint64_t exploration_steps_ = 0;
  bool initialized_ = false;

  std::vector<EvaluatedPolicy> population_;
  std::vector<EvaluatedPolicy> offspring_;
  NoveltyArchive novelty_archive_;
  RewardArchive reward_archive_;
  CandidateEmitterBuffer candidates_;
  ExploitationState exploitation_;
  std::vector<std::optional<EvaluatedPolicy>> grid_;

  std::unique_ptr<MlpAutoencoder> ae_;
  TrainingSchedule schedule_;
  std::vector<TrainingEvent> trainings_;
  double last_train_loss_ = std::numeric_limits<double>::quiet_NaN();
  double last_val_loss_ = std::numeric_limits<double>::quiet_NaN();

  CoverageGrid coverage_;
  RewardTracker rewards_;
  std::vector<Vec2> final_positions_;
  std::vector<ChunkRecord> chunks_;
  std::ostringstream metrics_;
  std::uint64_t next_metrics_at_ = 0;
  bool last_logged_ = false;
};

}  // namespace

RunResult run(const RunConfig& config, const Environment& env) { return Runner(config, env).run(); }

RunResult run(const RunConfig& config) {
  validate(config);
  const auto env = make_environment(config.env, config.environment);
  return run(config, *env);
}

}  // namespace stax
