#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stax/archive.hpp"
#include "stax/autoencoder.hpp"
#include "stax/config.hpp"
#include "stax/emitter.hpp"
#include "stax/environment.hpp"

namespace stax {

enum class Phase { exploration, exploitation };

std::string_view to_string(Phase phase);

struct ChunkRecord {
  std::uint64_t index = 0;
  Phase phase = Phase::exploration;
  std::uint64_t evaluations = 0;        // spent inside this chunk
  std::uint64_t total_evaluations = 0;  // global counter after the chunk
  std::uint64_t generation = 0;         // exploration generation after the chunk
};

struct TrainingEvent {
  std::uint64_t exploration_step = 0;  // 1-based index of the exploration chunk
  std::uint64_t optimizer_steps_before = 0;
  TrainingReport report;
};

struct RunResult {
  RunConfig config;
  NoveltyArchive novelty_archive;
  RewardArchive reward_archive;
  std::unique_ptr<MlpAutoencoder> autoencoder;  // null for variants without one
  TrainingSchedule schedule;
  std::vector<TrainingEvent> trainings;
  std::vector<ChunkRecord> chunks;
  std::vector<EmitterEvent> emitter_events;
  std::string metrics_csv;
  std::uint64_t evaluations = 0;
  double coverage = 0.0;
  std::vector<double> max_reward_per_area;
  std::vector<Vec2> final_positions;  // every evaluation, in order
};

// Builds the autoencoder a run would start with (same seed stream).
std::unique_ptr<MlpAutoencoder> make_autoencoder(const RunConfig& config, int raster_size);

std::string metrics_header(std::size_t reward_areas);

// Runs one configuration to completion on `env`.
RunResult run(const RunConfig& config, const Environment& env);

// Convenience: builds the environment from the config first.
RunResult run(const RunConfig& config);

}  // namespace stax
