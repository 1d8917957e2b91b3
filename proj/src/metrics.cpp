// Copyright 2026 The Trajcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trajcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "trajcast/errors.hpp"

namespace trajcast {

std::vector<int> top_k_modes(const Prediction& pred, int k) {
  const int num_modes = static_cast<int>(pred.trajectories.size());
  if (k <= 0) throw ValidationError("metric k must be positive");
  if (k > num_modes)
    throw ValidationError("metric k=" + std::to_string(k) + " exceeds mode count " +
                          std::to_string(num_modes));
  std::vector<int> order(num_modes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return pred.scores[a] > pred.scores[b];  // ties keep mode-index order
  });
  order.resize(k);
  return order;
}

namespace {

void check_gt(const Prediction& pred, const std::vector<Vec2>& gt) {
  for (const auto& traj : pred.trajectories)
    if (traj.size() != gt.size())
      throw ValidationError("prediction/ground-truth length mismatch");
}

}  // namespace

double min_ade(const Prediction& pred, const std::vector<Vec2>& gt, int k) {
  check_gt(pred, gt);
  double best = std::numeric_limits<double>::infinity();
  for (int mode : top_k_modes(pred, k)) {
    double acc = 0.0;
    for (size_t t = 0; t < gt.size(); ++t) acc += (pred.trajectories[mode][t] - gt[t]).norm();
    best = std::min(best, acc / static_cast<double>(gt.size()));
  }
  return best;
}

double min_fde(const Prediction& pred, const std::vector<Vec2>& gt, int k) {
  check_gt(pred, gt);
  double best = std::numeric_limits<double>::infinity();
  for (int mode : top_k_modes(pred, k))
    best = std::min(best, (pred.trajectories[mode].back() - gt.back()).norm());
  return best;
}

bool is_miss_2(const Prediction& pred, const std::vector<Vec2>& gt, int k, bool miss_if_any) {
  check_gt(pred, gt);
  bool all_miss = true;
  bool any_miss = false;
  for (int mode : top_k_modes(pred, k)) {
    double max_dev = 0.0;
    for (size_t t = 0; t < gt.size(); ++t)
      max_dev = std::max(max_dev, (pred.trajectories[mode][t] - gt[t]).norm());
    const bool miss = max_dev > 2.0;  // exactly 2 m is not a miss
    all_miss = all_miss && miss;
    any_miss = any_miss || miss;
  }
  return miss_if_any ? any_miss : all_miss;
}

bool trajectory_on_drivable(const std::vector<Vec2>& trajectory, const LaneGraph& lanes) {
  for (const auto& p : trajectory)
    if (!is_on_drivable(lanes, p)) return false;
  return true;
}

double offroad_rate(const std::vector<Prediction>& preds, const LaneGraph& lanes) {
  std::int64_t total = 0, offroad = 0;
  for (const auto& pred : preds)
    for (const auto& traj : pred.trajectories) {
      ++total;
      if (!trajectory_on_drivable(traj, lanes)) ++offroad;
    }
  return total == 0 ? 0.0 : static_cast<double>(offroad) / static_cast<double>(total);
}

MetricReport evaluate_predictions(const std::vector<Prediction>& preds,
                                  const std::map<std::string, std::vector<Vec2>>& gt_by_agent,
                                  const LaneGraph* lanes, const std::vector<int>& ks,
                                  bool miss_if_any) {
  MetricReport report;
  report.ks = ks;
  report.miss_if_any = miss_if_any;
  std::map<std::string, double> sums;
  int counted = 0;
  for (const auto& pred : preds) {
    auto it = gt_by_agent.find(pred.agent_id);
    if (it == gt_by_agent.end()) continue;
    std::map<std::string, double> row;
    for (int k : ks) {
      row["minADE_" + std::to_string(k)] = min_ade(pred, it->second, k);
      row["minFDE_" + std::to_string(k)] = min_fde(pred, it->second, k);
      row["MR_2_" + std::to_string(k)] = is_miss_2(pred, it->second, k, miss_if_any) ? 1.0 : 0.0;
    }
    for (const auto& [name, v] : row) sums[name] += v;
    report.per_agent.emplace_back(pred.agent_id, std::move(row));
    ++counted;
  }
  for (const auto& [name, v] : sums)
    report.aggregate[name] = counted > 0 ? v / counted : 0.0;
  if (lanes) report.aggregate["ORR"] = offroad_rate(preds, *lanes);
  return report;
}

std::string report_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "agent_id";
  std::vector<std::string> columns;
  if (!report.per_agent.empty())
    for (const auto& [name, v] : report.per_agent.front().second) columns.push_back(name);
  for (const auto& c : columns) out << "," << c;
  out << "\n";
  out << std::setprecision(17);
  for (const auto& [agent, row] : report.per_agent) {
    out << agent;
    for (const auto& c : columns) out << "," << row.at(c);
    out << "\n";
  }
  out << "aggregate";
  for (const auto& c : columns) out << "," << report.aggregate.at(c);
  out << "\n";
  return out.str();
}

std::string report_table(const MetricReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "metric            value\n";
  for (const auto& [name, v] : report.aggregate)
    out << std::left << std::setw(17) << name << " " << v << "\n";
  return out.str();
}

}  // namespace trajcast
