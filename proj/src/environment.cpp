#include "stax/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace stax {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

namespace {

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

std::vector<Segment> border_of(const Box& b) {
  return {{{b.xmin, b.ymin}, {b.xmax, b.ymin}},
          {{b.xmax, b.ymin}, {b.xmax, b.ymax}},
          {{b.xmax, b.ymax}, {b.xmin, b.ymax}},
          {{b.xmin, b.ymax}, {b.xmin, b.ymin}}};
}

}  // namespace

RewardHit reward_at(std::span<const RewardArea> areas, Vec2 point) {
  RewardHit hit;
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < areas.size(); ++i) {
    const double d = norm(point - areas[i].center);
    if (d < areas[i].radius && d < nearest) {
      nearest = d;
      hit.area = static_cast<int>(i);
      hit.reward = areas[i].max_reward * (1.0 - d / areas[i].radius);
    }
  }
  return hit;
}

int nearest_area(std::span<const RewardArea> areas, Vec2 point) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < areas.size(); ++i) {
    const double d = norm(point - areas[i].center);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

double point_segment_distance(Vec2 p, const Segment& s) {
  const Vec2 ab = s.b - s.a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - s.a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (s.a + t * ab));
}

bool segments_intersect(const Segment& s, const Segment& t) {
  const int o1 = orientation(s.a, s.b, t.a);
  const int o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a);
  const int o4 = orientation(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

double ray_cast(Vec2 origin, double angle, std::span<const Segment> walls, double max_range) {
  const Vec2 d{std::cos(angle), std::sin(angle)};
  double best = max_range;
  for (const auto& w : walls) {
    const Vec2 e = w.b - w.a;
    const double denom = cross(d, e);
    if (std::abs(denom) < 1e-12) continue;  // parallel
    const Vec2 ao = w.a - origin;
    const double t = cross(ao, e) / denom;
    const double u = cross(ao, d) / denom;
    if (t >= 0.0 && u >= 0.0 && u <= 1.0) best = std::min(best, t);
  }
  return best;
}

// --- policy network -------------------------------------------------------------

namespace {
constexpr std::size_t kMaxWidth = 256;
}

PolicyNetwork::PolicyNetwork(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("policy network needs >= 2 layer sizes");
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (sizes_[i] <= 0) throw std::invalid_argument("policy layer sizes must be positive");
    widest_ = std::max(widest_, static_cast<std::size_t>(sizes_[i]));
    if (i + 1 < sizes_.size()) {
      parameter_count_ += static_cast<std::size_t>(sizes_[i] + 1) * sizes_[i + 1];
    }
  }
  if (widest_ > kMaxWidth) throw std::invalid_argument("policy layer too wide");
}

void PolicyNetwork::forward(std::span<const double> params, std::span<const double> input,
                            std::span<double> out) const {
  if (params.size() != parameter_count_) throw std::invalid_argument("genome dimension mismatch");
  if (input.size() != static_cast<std::size_t>(sizes_.front()) ||
      out.size() != static_cast<std::size_t>(sizes_.back())) {
    throw std::invalid_argument("policy input/output size mismatch");
  }
  double a[kMaxWidth];
  double b[kMaxWidth];
  std::copy(input.begin(), input.end(), a);
  const double* w = params.data();
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int n_in = sizes_[l];
    const int n_out = sizes_[l + 1];
    const double* bias = w + static_cast<std::size_t>(n_in) * n_out;
    for (int o = 0; o < n_out; ++o) {
      double z = bias[o];
      const double* row = w + static_cast<std::size_t>(o) * n_in;
      for (int i = 0; i < n_in; ++i) z += row[i] * a[i];
      b[o] = std::tanh(z);
    }
    w = bias + n_out;
    std::copy(b, b + n_out, a);
  }
  std::copy(a, a + out.size(), out.begin());
}

// --- rasterization ----------------------------------------------------------------

Canvas::Canvas(Box box, int size) : box_(box), size_(size) {
  if (size <= 0) throw std::invalid_argument("raster size must be positive");
  if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin)) throw std::invalid_argument("empty box");
}

Vec2 Canvas::to_pixel(Vec2 world) const {
  return {(world.x - box_.xmin) / (box_.xmax - box_.xmin) * size_,
          (box_.ymax - world.y) / (box_.ymax - box_.ymin) * size_};
}

void Canvas::disk(Raster& r, Vec2 center, double radius_px, float value) const {
  const Vec2 c = to_pixel(center);
  const int c0 = std::max(0, static_cast<int>(std::floor(c.x - radius_px)));
  const int c1 = std::min(size_ - 1, static_cast<int>(std::floor(c.x + radius_px)));
  const int r0 = std::max(0, static_cast<int>(std::floor(c.y - radius_px)));
  const int r1 = std::min(size_ - 1, static_cast<int>(std::floor(c.y + radius_px)));
  const double rr = radius_px * radius_px;
  for (int row = r0; row <= r1; ++row) {
    for (int col = c0; col <= c1; ++col) {
      const double dx = col + 0.5 - c.x;
      const double dy = row + 0.5 - c.y;
      if (dx * dx + dy * dy <= rr) r.at(row, col) = value;
    }
  }
  // Always mark the pixel containing the center, however small the disk.
  const int pc = static_cast<int>(std::floor(c.x));
  const int pr = static_cast<int>(std::floor(c.y));
  if (pc >= 0 && pc < size_ && pr >= 0 && pr < size_) r.at(pr, pc) = value;
}

void Canvas::segment(Raster& r, const Segment& s, double half_width_px, float value) const {
  const Segment px{to_pixel(s.a), to_pixel(s.b)};
  const int c0 = std::max(0, static_cast<int>(std::floor(std::min(px.a.x, px.b.x) - half_width_px)));
  const int c1 =
      std::min(size_ - 1, static_cast<int>(std::floor(std::max(px.a.x, px.b.x) + half_width_px)));
  const int r0 = std::max(0, static_cast<int>(std::floor(std::min(px.a.y, px.b.y) - half_width_px)));
  const int r1 =
      std::min(size_ - 1, static_cast<int>(std::floor(std::max(px.a.y, px.b.y) + half_width_px)));
  for (int row = r0; row <= r1; ++row) {
    for (int col = c0; col <= c1; ++col) {
      if (point_segment_distance({col + 0.5, row + 0.5}, px) <= half_width_px) r.at(row, col) = value;
    }
  }
}

bool write_pgm(const std::filesystem::path& path, const Raster& raster) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << "P5\n" << raster.size << ' ' << raster.size << "\n255\n";
  for (float v : raster.pixels) {
    const auto byte = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
    out.put(static_cast<char>(byte));
  }
  return static_cast<bool>(out);
}

std::vector<int> sample_steps(int episode_length, std::size_t k_samples) {
  std::vector<int> steps;
  const auto T = static_cast<long long>(episode_length);
  const auto K = static_cast<long long>(k_samples);
  for (long long j = 1; j <= K; ++j) steps.push_back(static_cast<int>((j * T + K - 1) / K));
  return steps;
}

EvaluatedPolicy evaluate(const Environment& env, Genome genome, std::size_t k_samples) {
  if (genome.params.size() != env.genome_dim()) {
    throw std::invalid_argument("genome dimension " + std::to_string(genome.params.size()) +
                                " does not match environment (" + std::to_string(env.genome_dim()) +
                                ")");
  }
  Rollout r = env.rollout(genome.params, k_samples);
  EvaluatedPolicy p;
  p.genome = std::move(genome);
  p.observations = std::make_shared<const Observations>(std::move(r.observations));
  p.ground_truth_bd = {{r.final_position.x, r.final_position.y}, DescriptorKind::ground_truth};
  p.reward = r.reward.reward;
  return p;
}

namespace {

// Captures observations at the scheduled steps; after an early abort the last
// state stands in for the remaining samples.
template <typename Render>
class Sampler {
 public:
  Sampler(int episode_length, std::size_t k, Render render)
      : steps_(sample_steps(episode_length, k)), render_(std::move(render)) {}

  template <typename State>
  void after_step(int t, const State& s) {
    while (next_ < steps_.size() && steps_[next_] <= t) {
      out_.push_back(render_(s));
      ++next_;
    }
  }
  template <typename State>
  Observations finish(const State& s) {
    while (next_ < steps_.size()) {
      out_.push_back(render_(s));
      ++next_;
    }
    return std::move(out_);
  }

 private:
  std::vector<int> steps_;
  Render render_;
  std::size_t next_ = 0;
  Observations out_;
};

double disk_radius_px(double world_radius, const Box& box, int size) {
  return std::max(1.0, world_radius / (box.xmax - box.xmin) * size);
}

}  // namespace

// ---- PointMaze -------------------------------------------------------------------

PointMazeConfig PointMazeConfig::defaults() {
  PointMazeConfig c;
  // Schematic zig-zag maze: start bottom-left, two staggered horizontal walls
  // and a few baffles. Coordinates are invented fixtures.
  c.walls = {
      {{0.0, 33.0}, {72.0, 33.0}},   // first floor ceiling, gap on the right
      {{28.0, 66.0}, {100.0, 66.0}},  // second floor ceiling, gap on the left
      {{40.0, 0.0}, {40.0, 20.0}},   // baffle in the start room
      {{55.0, 33.0}, {55.0, 50.0}},  // baffle in the middle corridor
      {{15.0, 66.0}, {15.0, 85.0}},  // baffle in the top room
  };
  c.reward_areas = {
      {{25.0, 25.0}, 5.0, 1.0},  // easy: start room
      {{88.0, 88.0}, 5.0, 1.0},  // hard: far corner of the top room
  };
  return c;
}

PointMaze::PointMaze(PointMazeConfig config)
    : config_(std::move(config)),
      net_({5, 5, 5, 2}),
      canvas_(config_.arena, config_.raster_size),
      background_(config_.raster_size) {
  walls_ = config_.walls;
  for (const auto& s : border_of(config_.arena)) walls_.push_back(s);
  for (const auto& w : config_.walls) canvas_.segment(background_, w, 0.6, intensity::wall);
  if (collides(config_.start)) throw std::invalid_argument("maze start collides with a wall");
}

bool PointMaze::collides(Vec2 p) const {
  for (const auto& w : walls_) {
    if (point_segment_distance(p, w) < config_.robot_radius) return true;
  }
  return false;
}

MazeState PointMaze::step(const MazeState& s, double left, double right) const {
  left = std::clamp(left, -1.0, 1.0);
  right = std::clamp(right, -1.0, 1.0);
  MazeState next = s;
  next.heading = s.heading + config_.max_turn * 0.5 * (right - left);
  const double v = config_.max_speed * 0.5 * (left + right);
  const Vec2 move{v * std::cos(next.heading), v * std::sin(next.heading)};
  const Vec2 candidates[3] = {s.position + move, {s.position.x + move.x, s.position.y},
                              {s.position.x, s.position.y + move.y}};
  for (const auto& c : candidates) {
    if (!collides(c)) {
      next.position = c;
      return next;
    }
  }
  return next;
}

std::vector<double> PointMaze::sensors(const MazeState& s) const {
  static constexpr double kAngles[5] = {-1.5707963267948966, -0.7853981633974483, 0.0,
                                        0.7853981633974483, 1.5707963267948966};
  std::vector<double> out(5);
  for (int i = 0; i < 5; ++i) {
    out[i] = ray_cast(s.position, s.heading + kAngles[i], walls_, config_.sensor_range) /
             config_.sensor_range;
  }
  return out;
}

Raster PointMaze::render(const MazeState& s) const {
  Raster r = background_;
  canvas_.disk(r, s.position, disk_radius_px(config_.marker_radius, config_.arena, config_.raster_size),
               intensity::agent);
  return r;
}

Rollout PointMaze::rollout(std::span<const double> params, std::size_t k_samples) const {
  MazeState s{config_.start, config_.start_heading};
  Sampler sampler(config_.episode_length, k_samples, [this](const MazeState& st) { return render(st); });
  double out[2];
  for (int t = 1; t <= config_.episode_length; ++t) {
    const auto in = sensors(s);
    net_.forward(params, in, out);
    s = step(s, out[0], out[1]);
    sampler.after_step(t, s);
  }
  Rollout r;
  r.final_position = s.position;
  r.reward = reward_at(config_.reward_areas, s.position);
  r.observations = sampler.finish(s);
  r.steps = config_.episode_length;
  return r;
}

// ---- CurlingLite -----------------------------------------------------------------

CurlingLiteConfig CurlingLiteConfig::defaults() {
  CurlingLiteConfig c;
  c.reward_areas = {
      {{50.0, 88.0}, 8.0, 1.0},  // easy: straight ahead of the ball
      {{10.0, 90.0}, 6.0, 1.0},  // hard: far corner
  };
  return c;
}

CurlingLite::CurlingLite(CurlingLiteConfig config)
    : config_(std::move(config)),
      net_({6, 5, 5, 5, 2}),
      canvas_(config_.table, config_.raster_size),
      background_(config_.raster_size) {
  for (const auto& w : border_of(config_.table)) canvas_.segment(background_, w, 0.6, intensity::wall);
}

CurlingState CurlingLite::initial_state() const {
  CurlingState s;
  s.q1 = config_.initial_q1;
  s.q2 = config_.initial_q2;
  s.ball = config_.ball_start;
  return s;
}

Vec2 CurlingLite::elbow(const CurlingState& s) const {
  return config_.base + Vec2{config_.link1 * std::cos(s.q1), config_.link1 * std::sin(s.q1)};
}

Vec2 CurlingLite::tip(const CurlingState& s) const {
  return elbow(s) + Vec2{config_.link2 * std::cos(s.q1 + s.q2), config_.link2 * std::sin(s.q1 + s.q2)};
}

CurlingState CurlingLite::step(const CurlingState& s, double cmd1, double cmd2) const {
  CurlingState n = s;
  n.dq1 = config_.max_joint_speed * std::clamp(cmd1, -1.0, 1.0);
  n.dq2 = config_.max_joint_speed * std::clamp(cmd2, -1.0, 1.0);
  n.q1 = s.q1 + n.dq1;
  n.q2 = s.q2 + n.dq2;
  const Vec2 tip_before = tip(s);
  const Vec2 tip_after = tip(n);
  // Perfectly inelastic contact: the ball takes the tip's velocity.
  if (norm(tip_after - n.ball) < config_.ball_radius + config_.tip_radius) {
    n.ball_velocity = tip_after - tip_before;
  }
  n.ball = n.ball + n.ball_velocity;
  const Box& t = config_.table;
  const double r = config_.ball_radius;
  if (n.ball.x - r < t.xmin) { n.ball.x = 2.0 * (t.xmin + r) - n.ball.x; n.ball_velocity.x = -n.ball_velocity.x; }
  if (n.ball.x + r > t.xmax) { n.ball.x = 2.0 * (t.xmax - r) - n.ball.x; n.ball_velocity.x = -n.ball_velocity.x; }
  if (n.ball.y - r < t.ymin) { n.ball.y = 2.0 * (t.ymin + r) - n.ball.y; n.ball_velocity.y = -n.ball_velocity.y; }
  if (n.ball.y + r > t.ymax) { n.ball.y = 2.0 * (t.ymax - r) - n.ball.y; n.ball_velocity.y = -n.ball_velocity.y; }
  n.ball.x = std::clamp(n.ball.x, t.xmin + r, t.xmax - r);
  n.ball.y = std::clamp(n.ball.y, t.ymin + r, t.ymax - r);
  n.ball_velocity = (1.0 - std::clamp(config_.friction, 0.0, 1.0)) * n.ball_velocity;
  return n;
}

Raster CurlingLite::render(const CurlingState& s) const {
  Raster r = background_;
  const Vec2 e = elbow(s);
  const Vec2 t = tip(s);
  canvas_.segment(r, {config_.base, e}, 0.7, intensity::link);
  canvas_.segment(r, {e, t}, 0.7, intensity::link);
  canvas_.disk(r, s.ball, disk_radius_px(config_.ball_radius, config_.table, config_.raster_size),
               intensity::ball);
  return r;
}

Rollout CurlingLite::rollout(std::span<const double> params, std::size_t k_samples) const {
  CurlingState s = initial_state();
  Sampler sampler(config_.episode_length, k_samples,
                  [this](const CurlingState& st) { return render(st); });
  const Box& t = config_.table;
  double in[6];
  double out[2];
  for (int step_i = 1; step_i <= config_.episode_length; ++step_i) {
    in[0] = 2.0 * (s.ball.x - t.xmin) / (t.xmax - t.xmin) - 1.0;
    in[1] = 2.0 * (s.ball.y - t.ymin) / (t.ymax - t.ymin) - 1.0;
    in[2] = std::remainder(s.q1, 2.0 * 3.141592653589793) / 3.141592653589793;
    in[3] = std::remainder(s.q2, 2.0 * 3.141592653589793) / 3.141592653589793;
    in[4] = s.dq1 / config_.max_joint_speed;
    in[5] = s.dq2 / config_.max_joint_speed;
    net_.forward(params, in, out);
    s = step(s, out[0], out[1]);
    sampler.after_step(step_i, s);
  }
  Rollout r;
  r.final_position = s.ball;
  r.reward = reward_at(config_.reward_areas, s.ball);
  r.observations = sampler.finish(s);
  r.steps = config_.episode_length;
  return r;
}

// ---- RedundantArm ----------------------------------------------------------------

RedundantArmConfig RedundantArmConfig::defaults() {
  RedundantArmConfig c;
  c.walls = {{{0.45, 0.2}, {0.45, 0.75}}};
  c.reward_areas = {
      {{-0.1, 0.85}, 0.12, 1.0},
      {{-0.75, -0.45}, 0.12, 1.0},
      {{0.75, 0.5}, 0.1, 1.0},  // behind the wall
  };
  return c;
}

RedundantArm::RedundantArm(RedundantArmConfig config)
    : config_(std::move(config)),
      net_({static_cast<int>(config_.dof), 5, 5, static_cast<int>(config_.dof)}),
      canvas_(config_.workspace, config_.raster_size),
      background_(config_.raster_size) {
  if (config_.dof == 0) throw std::invalid_argument("arm needs at least one joint");
  if (config_.link_lengths.empty()) {
    config_.link_lengths.assign(config_.dof, 1.0 / static_cast<double>(config_.dof));
  }
  if (config_.link_lengths.size() != config_.dof) {
    throw std::invalid_argument("link_lengths must have one entry per joint");
  }
  for (const auto& w : config_.walls) canvas_.segment(background_, w, 0.6, intensity::wall);
}

std::vector<Vec2> RedundantArm::forward_kinematics(std::span<const double> angles) const {
  std::vector<Vec2> joints{{0.0, 0.0}};
  double heading = 0.0;
  for (std::size_t i = 0; i < config_.dof; ++i) {
    heading += angles[i];
    joints.push_back(joints.back() + config_.link_lengths[i] * Vec2{std::cos(heading), std::sin(heading)});
  }
  return joints;
}

std::vector<double> RedundantArm::step(std::span<const double> angles,
                                       std::span<const double> commands) const {
  std::vector<double> next(angles.begin(), angles.end());
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] += config_.max_joint_speed * std::clamp(commands[i], -1.0, 1.0);
  }
  return next;
}

bool RedundantArm::self_collision(std::span<const Vec2> joints) const {
  const std::size_t links = joints.size() - 1;
  for (std::size_t i = 0; i < links; ++i) {
    for (std::size_t j = i + 2; j < links; ++j) {
      if (segments_intersect({joints[i], joints[i + 1]}, {joints[j], joints[j + 1]})) return true;
    }
  }
  return false;
}

bool RedundantArm::wall_collision(std::span<const Vec2> joints) const {
  for (std::size_t i = 0; i + 1 < joints.size(); ++i) {
    for (const auto& w : config_.walls) {
      if (segments_intersect({joints[i], joints[i + 1]}, w)) return true;
    }
  }
  return false;
}

Raster RedundantArm::render(std::span<const double> angles) const {
  Raster r = background_;
  const auto joints = forward_kinematics(angles);
  if (!config_.end_effector_only) {
    for (std::size_t i = 0; i + 1 < joints.size(); ++i) {
      canvas_.segment(r, {joints[i], joints[i + 1]}, 0.6, intensity::link);
    }
  }
  canvas_.disk(r, joints.back(), 1.2, intensity::effector);
  return r;
}

Rollout RedundantArm::rollout(std::span<const double> params, std::size_t k_samples) const {
  std::vector<double> angles(config_.dof, 0.0);
  using Angles = std::vector<double>;
  Sampler sampler(config_.episode_length, k_samples, [this](const Angles& a) { return render(a); });
  std::vector<double> in(config_.dof);
  std::vector<double> out(config_.dof);
  int steps = 0;
  for (int t = 1; t <= config_.episode_length; ++t) {
    for (std::size_t i = 0; i < config_.dof; ++i) {
      in[i] = std::remainder(angles[i], 2.0 * 3.141592653589793) / 3.141592653589793;
    }
    net_.forward(params, in, out);
    auto next = step(angles, out);
    const auto joints = forward_kinematics(next);
    if (self_collision(joints) || wall_collision(joints)) break;  // keep the last valid pose
    angles = std::move(next);
    steps = t;
    sampler.after_step(t, angles);
  }
  Rollout r;
  r.final_position = forward_kinematics(angles).back();
  r.reward = reward_at(config_.reward_areas, r.final_position);
  r.observations = sampler.finish(angles);
  r.steps = steps;
  return r;
}

// --- factory ----------------------------------------------------------------------

bool is_known_environment(std::string_view id) {
  return id == "PointMaze" || id == "CurlingLite" || id == "RedundantArm";
}

std::unique_ptr<Environment> make_environment(std::string_view id, const EnvironmentOverrides& o) {
  if (id == "PointMaze") {
    auto c = PointMazeConfig::defaults();
    if (o.walls) c.walls = *o.walls;
    if (o.reward_areas) c.reward_areas = *o.reward_areas;
    if (o.episode_length) c.episode_length = *o.episode_length;
    if (o.raster_size) c.raster_size = *o.raster_size;
    return std::make_unique<PointMaze>(std::move(c));
  }
  if (id == "CurlingLite") {
    auto c = CurlingLiteConfig::defaults();
    if (o.reward_areas) c.reward_areas = *o.reward_areas;
    if (o.episode_length) c.episode_length = *o.episode_length;
    if (o.raster_size) c.raster_size = *o.raster_size;
    if (o.friction) c.friction = *o.friction;
    if (o.link_lengths) {
      if (o.link_lengths->size() != 2) throw std::invalid_argument("CurlingLite needs 2 link lengths");
      c.link1 = (*o.link_lengths)[0];
      c.link2 = (*o.link_lengths)[1];
    }
    return std::make_unique<CurlingLite>(std::move(c));
  }
  if (id == "RedundantArm") {
    auto c = RedundantArmConfig::defaults();
    if (o.walls) c.walls = *o.walls;
    if (o.reward_areas) c.reward_areas = *o.reward_areas;
    if (o.episode_length) c.episode_length = *o.episode_length;
    if (o.raster_size) c.raster_size = *o.raster_size;
    if (o.arm_dof) c.dof = *o.arm_dof;
    if (o.end_effector_only) c.end_effector_only = *o.end_effector_only;
    if (o.link_lengths) c.link_lengths = *o.link_lengths;
    return std::make_unique<RedundantArm>(std::move(c));
  }
  throw std::invalid_argument("unknown environment: " + std::string(id));
}

}  // namespace stax
