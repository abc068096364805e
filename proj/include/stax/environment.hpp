#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stax/types.hpp"

namespace stax {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 v);

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Box {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 1.0;
  double ymax = 1.0;

  bool contains(Vec2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
};

struct RewardArea {
  Vec2 center;
  double radius = 1.0;
  double max_reward = 1.0;
};

struct RewardHit {
  double reward = 0.0;
  int area = -1;  // index of the area that produced the reward, -1 if none
};

// Linear falloff inside an area; a point inside several areas is credited to
// the nearest center.
RewardHit reward_at(std::span<const RewardArea> areas, Vec2 point);

// Index of the area with the nearest center, -1 if `areas` is empty.
int nearest_area(std::span<const RewardArea> areas, Vec2 point);

// --- geometry helpers -------------------------------------------------------------

double point_segment_distance(Vec2 p, const Segment& s);
bool segments_intersect(const Segment& s, const Segment& t);
// Distance along the ray to the first wall, capped at max_range.
double ray_cast(Vec2 origin, double angle, std::span<const Segment> walls, double max_range);

// --- policy network -------------------------------------------------------------

// Fully connected, tanh on every layer. Per layer the parameters are the
// row-major weight matrix (out x in) followed by the bias vector.
class PolicyNetwork {
 public:
  explicit PolicyNetwork(std::vector<int> layer_sizes);

  std::size_t parameter_count() const { return parameter_count_; }
  const std::vector<int>& layer_sizes() const { return sizes_; }

  // `out` must have layer_sizes().back() entries.
  void forward(std::span<const double> params, std::span<const double> input,
               std::span<double> out) const;

 private:
  std::vector<int> sizes_;
  std::size_t parameter_count_ = 0;
  std::size_t widest_ = 0;
};

// --- rasterization ----------------------------------------------------------------

namespace intensity {
inline constexpr float wall = 1.0f;
inline constexpr float agent = 0.5f;
inline constexpr float ball = 0.8f;
inline constexpr float link = 0.5f;
inline constexpr float effector = 0.3f;
}  // namespace intensity

// Maps world coordinates in `box` onto a G x G raster viewed from above
// (row 0 is the top edge, y grows upwards).
class Canvas {
 public:
  Canvas(Box box, int size);

  Raster blank() const { return Raster(size_); }
  // Continuous pixel coordinates (col, row) of a world point.
  Vec2 to_pixel(Vec2 world) const;
  void disk(Raster& r, Vec2 center, double radius_px, float value) const;
  void segment(Raster& r, const Segment& s, double half_width_px, float value) const;

 private:
  Box box_;
  int size_;
};

bool write_pgm(const std::filesystem::path& path, const Raster& raster);

// --- environments -------------------------------------------------------------------

struct Rollout {
  Vec2 final_position;  // ground-truth descriptor
  RewardHit reward;
  Observations observations;
  int steps = 0;  // steps actually simulated (episodes may abort)
};

// Steps at which observations are captured: ceil(j*T/K) for j = 1..K.
std::vector<int> sample_steps(int episode_length, std::size_t k_samples);

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t genome_dim() const = 0;
  virtual Box bounding_box() const = 0;
  virtual std::span<const RewardArea> reward_areas() const = 0;
  virtual int episode_length() const = 0;
  virtual int raster_size() const = 0;

  // Pure function of (params, environment definition).
  virtual Rollout rollout(std::span<const double> params, std::size_t k_samples) const = 0;
};

// Rolls the genome out and packs the result; novelty/surprise are left at 0.
EvaluatedPolicy evaluate(const Environment& env, Genome genome, std::size_t k_samples);

// ---- PointMaze -------------------------------------------------------------------

struct PointMazeConfig {
  Box arena{0.0, 0.0, 100.0, 100.0};
  std::vector<Segment> walls;  // interior walls; the arena border is added automatically
  std::vector<RewardArea> reward_areas;
  Vec2 start{10.0, 10.0};
  double start_heading = 0.0;
  double robot_radius = 2.0;
  double marker_radius = 8.0;  // drawn size of the robot in observations
  double max_speed = 1.5;
  double max_turn = 0.25;
  double sensor_range = 30.0;
  int episode_length = 400;
  int raster_size = 32;

  static PointMazeConfig defaults();
};

struct MazeState {
  Vec2 position;
  double heading = 0.0;
};

class PointMaze final : public Environment {
 public:
  explicit PointMaze(PointMazeConfig config);

  std::string_view name() const override { return "PointMaze"; }
  std::size_t genome_dim() const override { return net_.parameter_count(); }
  Box bounding_box() const override { return config_.arena; }
  std::span<const RewardArea> reward_areas() const override { return config_.reward_areas; }
  int episode_length() const override { return config_.episode_length; }
  int raster_size() const override { return config_.raster_size; }
  Rollout rollout(std::span<const double> params, std::size_t k_samples) const override;

  // Wheel commands in [-1, 1]. Blocked moves fall back to moving along x only,
  // then y only, then not at all.
  MazeState step(const MazeState& s, double left, double right) const;
  std::vector<double> sensors(const MazeState& s) const;  // normalized by range
  bool collides(Vec2 p) const;
  Raster render(const MazeState& s) const;
  std::span<const Segment> walls() const { return walls_; }
  const PointMazeConfig& config() const { return config_; }

 private:
  PointMazeConfig config_;
  std::vector<Segment> walls_;  // interior + border
  PolicyNetwork net_;
  Canvas canvas_;
  Raster background_;
};

// ---- CurlingLite -----------------------------------------------------------------

struct CurlingLiteConfig {
  Box table{0.0, 0.0, 100.0, 100.0};
  Vec2 base{50.0, 0.0};
  double link1 = 30.0;
  double link2 = 25.0;
  double initial_q1 = 1.5707963267948966;
  double initial_q2 = 0.0;
  Vec2 ball_start{50.0, 62.0};
  double ball_radius = 3.0;
  double tip_radius = 2.0;
  double max_joint_speed = 0.08;
  double friction = 0.03;  // fraction of ball speed lost per step
  std::vector<RewardArea> reward_areas;
  int episode_length = 200;
  int raster_size = 32;

  static CurlingLiteConfig defaults();
};

struct CurlingState {
  double q1 = 0.0;
  double q2 = 0.0;
  double dq1 = 0.0;
  double dq2 = 0.0;
  Vec2 ball;
  Vec2 ball_velocity;
};

class CurlingLite final : public Environment {
 public:
  explicit CurlingLite(CurlingLiteConfig config);

  std::string_view name() const override { return "CurlingLite"; }
  std::size_t genome_dim() const override { return net_.parameter_count(); }
  Box bounding_box() const override { return config_.table; }
  std::span<const RewardArea> reward_areas() const override { return config_.reward_areas; }
  int episode_length() const override { return config_.episode_length; }
  int raster_size() const override { return config_.raster_size; }
  Rollout rollout(std::span<const double> params, std::size_t k_samples) const override;

  CurlingState initial_state() const;
  // Joint speed commands in [-1, 1].
  CurlingState step(const CurlingState& s, double cmd1, double cmd2) const;
  Vec2 elbow(const CurlingState& s) const;
  Vec2 tip(const CurlingState& s) const;
  Raster render(const CurlingState& s) const;
  const CurlingLiteConfig& config() const { return config_; }

 private:
  CurlingLiteConfig config_;
  PolicyNetwork net_;
  Canvas canvas_;
  Raster background_;
};

// ---- RedundantArm ----------------------------------------------------------------

struct RedundantArmConfig {
  std::size_t dof = 10;
  std::vector<double> link_lengths;  // empty: dof links of length 1/dof
  Box workspace{-1.1, -1.1, 1.1, 1.1};
  std::vector<Segment> walls;
  std::vector<RewardArea> reward_areas;
  double max_joint_speed = 0.05;
  int episode_length = 100;
  int raster_size = 32;
  bool end_effector_only = false;

  static RedundantArmConfig defaults();
};

class RedundantArm final : public Environment {
 public:
  explicit RedundantArm(RedundantArmConfig config);

  std::string_view name() const override { return "RedundantArm"; }
  std::size_t genome_dim() const override { return net_.parameter_count(); }
  Box bounding_box() const override { return config_.workspace; }
  std::span<const RewardArea> reward_areas() const override { return config_.reward_areas; }
  int episode_length() const override { return config_.episode_length; }
  int raster_size() const override { return config_.raster_size; }
  Rollout rollout(std::span<const double> params, std::size_t k_samples) const override;

  // Joint positions, base first, end effector last (dof + 1 points).
  std::vector<Vec2> forward_kinematics(std::span<const double> angles) const;
  // Integrates joint velocities (commands in [-1, 1]).
  std::vector<double> step(std::span<const double> angles, std::span<const double> commands) const;
  bool self_collision(std::span<const Vec2> joints) const;
  bool wall_collision(std::span<const Vec2> joints) const;
  Raster render(std::span<const double> angles) const;
  const RedundantArmConfig& config() const { return config_; }

 private:
  RedundantArmConfig config_;
  PolicyNetwork net_;
  Canvas canvas_;
  Raster background_;
};

// --- factory ----------------------------------------------------------------------

// Optional overrides applied on top of an environment's default fixture.
struct EnvironmentOverrides {
  std::optional<std::vector<Segment>> walls;
  std::optional<std::vector<RewardArea>> reward_areas;
  std::optional<std::vector<double>> link_lengths;
  std::optional<int> episode_length;
  std::optional<int> raster_size;
  std::optional<std::size_t> arm_dof;
  std::optional<bool> end_effector_only;
  std::optional<double> friction;
};

// Known ids: PointMaze, CurlingLite, RedundantArm. Throws on unknown ids.
std::unique_ptr<Environment> make_environment(std::string_view id,
                                              const EnvironmentOverrides& overrides = {});
bool is_known_environment(std::string_view id);

}  // namespace stax
