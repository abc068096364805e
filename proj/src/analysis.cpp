#include "stax/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "stax/archive.hpp"
#include "stax/csv.hpp"
#include "stax/evolution.hpp"

namespace stax {

CoverageGrid::CoverageGrid(Box box, int cells)
    : box_(box), cells_(cells), flags_(static_cast<std::size_t>(cells) * cells, 0) {
  if (cells <= 0) throw std::invalid_argument("coverage grid needs at least one cell");
}

std::size_t CoverageGrid::cell_of(Vec2 p) const {
  auto bin = [&](double v, double lo, double hi) {
    const double f = (v - lo) / (hi - lo) * cells_;
    if (!(f > 0.0)) return 0;  // also catches NaN
    return std::min(cells_ - 1, static_cast<int>(f));
  };
  const int cx = bin(p.x, box_.xmin, box_.xmax);
  const int cy = bin(p.y, box_.ymin, box_.ymax);
  return static_cast<std::size_t>(cy) * cells_ + cx;
}

void CoverageGrid::add(Vec2 p) {
  auto& f = flags_[cell_of(p)];
  if (!f) {
    f = 1;
    ++occupied_;
  }
}

double CoverageGrid::coverage() const {
  return 100.0 * static_cast<double>(occupied_) / static_cast<double>(flags_.size());
}

double coverage(std::span<const Vec2> final_positions, const Box& box, int cells) {
  CoverageGrid g(box, cells);
  for (const auto& p : final_positions) g.add(p);
  return g.coverage();
}

void RewardTracker::record(int area, double reward) {
  if (area < 0 || static_cast<std::size_t>(area) >= maxima_.size() || !(reward > 0.0)) return;
  maxima_[static_cast<std::size_t>(area)] = std::max(maxima_[static_cast<std::size_t>(area)], reward);
}

std::vector<std::vector<double>> max_reward_per_area(std::span<const RewardEvent> log,
                                                     std::size_t areas, std::size_t interval) {
  if (interval == 0) throw std::invalid_argument("interval must be > 0");
  RewardTracker tracker(areas);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < log.size(); ++i) {
    tracker.record(log[i].area, log[i].reward);
    if ((i + 1) % interval == 0) rows.emplace_back(tracker.maxima().begin(), tracker.maxima().end());
  }
  if (log.size() % interval != 0 || log.empty()) {
    rows.emplace_back(tracker.maxima().begin(), tracker.maxima().end());
  }
  return rows;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson needs at least 2 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

DistanceReport distance_structure_report(std::span<const EvaluatedPolicy> archive,
                                         std::size_t anchors, Rng& rng) {
  if (archive.size() < 3) throw std::invalid_argument("distance report needs at least 3 policies");
  for (const auto& p : archive) {
    if (!p.learned_bd) throw std::invalid_argument("distance report needs learned descriptors");
  }
  DistanceReport report;
  for (std::size_t a : sample_without_replacement(archive.size(), anchors, rng)) {
    const auto& anchor = archive[a];
    std::vector<double> gt, learned;
    for (std::size_t j = 0; j < archive.size(); ++j) {
      if (j == a) continue;
      DistancePair pair;
      pair.anchor = anchor.id();
      pair.member = archive[j].id();
      pair.gt_distance = euclidean_distance(anchor.ground_truth_bd.values, archive[j].ground_truth_bd.values);
      pair.learned_distance = euclidean_distance(anchor.learned_bd->values, archive[j].learned_bd->values);
      gt.push_back(pair.gt_distance);
      learned.push_back(pair.learned_distance);
      report.pairs.push_back(pair);
    }
    report.summary.push_back({anchor.id(), pearson(gt, learned)});
  }
  return report;
}

void write_distance_pairs(std::ostream& out, const DistanceReport& report) {
  out << "anchor_id,member_id,gt_dist,learned_dist\n";
  for (const auto& p : report.pairs) {
    out << p.anchor << ',' << p.member << ',' << csv::format_double(p.gt_distance) << ','
        << csv::format_double(p.learned_distance) << '\n';
  }
}

void write_distance_summary(std::ostream& out, const DistanceReport& report) {
  out << "anchor_id,r\n";
  for (const auto& s : report.summary) {
    out << s.anchor << ',' << (s.r ? csv::format_double(*s.r) : std::string("undefined")) << '\n';
  }
}

DistanceReport read_distance_report(std::istream& pairs, std::istream& summary) {
  DistanceReport report;
  std::string line;
  if (!std::getline(pairs, line) || line != "anchor_id,member_id,gt_dist,learned_dist") {
    throw std::runtime_error("malformed distance pairs header");
  }
  while (std::getline(pairs, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line, ',');
    if (f.size() != 4) throw std::runtime_error("malformed distance pair row: " + line);
    report.pairs.push_back({static_cast<PolicyId>(csv::parse_int(f[0])),
                            static_cast<PolicyId>(csv::parse_int(f[1])), csv::parse_double(f[2]),
                            csv::parse_double(f[3])});
  }
  if (!std::getline(summary, line) || line != "anchor_id,r") {
    throw std::runtime_error("malformed distance summary header");
  }
  while (std::getline(summary, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line, ',');
    if (f.size() != 2) throw std::runtime_error("malformed distance summary row: " + line);
    AnchorCorrelation a;
    a.anchor = static_cast<PolicyId>(csv::parse_int(f[0]));
    if (f[1] != "undefined") a.r = csv::parse_double(f[1]);
    report.summary.push_back(a);
  }
  return report;
}

}  // namespace stax
