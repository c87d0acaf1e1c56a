// Exact actionable recourse: a multiple-choice knapsack over per-feature
// grids, solved best-first with the LP relaxation as the bound.
//
// Every useful delta of feature j buys gain w_j * delta at cost |delta|, so
// the gain/cost ratio is |w_j| for all of them. The LP relaxation therefore
// fills the remaining deficit greedily by decreasing |w_j|, each feature
// contributing at most its largest gain.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "cvas/recourse.hpp"

namespace cvas {
namespace {

struct Choice {
  double delta;
  double gain;
};

struct Node {
  double bound;
  double cost;
  double gain;
  int depth;
  int parent;    // index into the node arena, -1 for the root
  double delta;  // delta chosen for order[depth - 1]
};

}  // namespace

RecourseResult actionable_recourse(const Vector& x0, const Surrogate& surrogate,
                                   const ActionSpec& actions) {
  const auto d = x0.size();
  if (surrogate.w.size() != d || static_cast<Eigen::Index>(actions.features.size()) != d) {
    throw Error(ErrorCode::kDimensionMismatch, "x0, surrogate and actions must agree");
  }
  if (surrogate.w.isZero(0.0)) throw Error(ErrorCode::kZeroSlope, "w must be nonzero");
  actions.validate();

  const Vector& w = surrogate.w;
  const double deficit = surrogate.b - w.dot(x0);
  const double tol = actionable_tolerance(surrogate.b);

  RecourseResult out;
  out.x_r = x0;
  if (deficit <= tol) {
    out.surrogate_valid = true;
    return out;
  }

  // Active features: those with at least one gain-increasing delta, ordered
  // by decreasing |w_j| (lowest index first on ties).
  std::vector<int> order;
  std::vector<std::vector<Choice>> choices(static_cast<std::size_t>(d));
  std::vector<double> max_gain(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    auto& c = choices[static_cast<std::size_t>(j)];
    c.push_back({0.0, 0.0});
    for (double delta : actions.features[static_cast<std::size_t>(j)].grid) {
      const double g = w[j] * delta;
      if (g > 0.0) c.push_back({delta, g});
    }
    if (c.size() > 1) {
      order.push_back(static_cast<int>(j));
      for (const auto& ch : c) max_gain[static_cast<std::size_t>(j)] = std::max(max_gain[static_cast<std::size_t>(j)], ch.gain);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(w[a]) > std::abs(w[b]);
  });
  const int m = static_cast<int>(order.size());

  // Fractional completion cost of `remaining` using features order[depth..].
  auto completion = [&](int depth, double remaining) {
    double cost = 0.0;
    for (int k = depth; k < m && remaining > tol; ++k) {
      const auto j = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
      const double take = std::min(remaining, max_gain[j]);
      cost += take / std::abs(w[static_cast<Eigen::Index>(j)]);
      remaining -= take;
    }
    return remaining > tol ? std::numeric_limits<double>::infinity() : cost;
  };

  std::vector<Node> arena;
  auto worse = [&arena](int a, int b) {
    const Node& x = arena[static_cast<std::size_t>(a)];
    const Node& y = arena[static_cast<std::size_t>(b)];
    if (x.bound != y.bound) return x.bound > y.bound;
    return x.depth < y.depth;  // prefer deeper nodes on ties
  };
  std::priority_queue<int, std::vector<int>, decltype(worse)> open(worse);

  const double root_bound = completion(0, deficit);
  if (!std::isfinite(root_bound)) {
    throw Error(ErrorCode::kNoActionableRecourse,
                "no grid combination reaches the surrogate boundary");
  }
  arena.push_back({root_bound, 0.0, 0.0, 0, -1, 0.0});
  open.push(0);

  while (!open.empty()) {
    const int id = open.top();
    open.pop();
    const Node node = arena[static_cast<std::size_t>(id)];
    if (deficit - node.gain <= tol) {
      for (int cur = id; arena[static_cast<std::size_t>(cur)].parent >= 0;
           cur = arena[static_cast<std::size_t>(cur)].parent) {
        const Node& n = arena[static_cast<std::size_t>(cur)];
        out.x_r[order[static_cast<std::size_t>(n.depth - 1)]] += n.delta;
      }
      out.cost = (out.x_r - x0).lpNorm<1>();
      out.surrogate_valid = w.dot(out.x_r) - surrogate.b >= -1e-9;
      return out;
    }
    if (node.depth == m) continue;
    const auto j = static_cast<std::size_t>(order[static_cast<std::size_t>(node.depth)]);
    for (const Choice& ch : choices[j]) {
      const double gain = node.gain + ch.gain;
      const double cost = node.cost + std::abs(ch.delta);
      const double bound = cost + completion(node.depth + 1, deficit - gain);
      if (!std::isfinite(bound)) continue;
      arena.push_back({bound, cost, gain, node.depth + 1, id, ch.delta});
      open.push(static_cast<int>(arena.size() - 1));
    }
  }
  throw Error(ErrorCode::kNoActionableRecourse,
              "no grid combination reaches the surrogate boundary");
}

}  // namespace cvas
