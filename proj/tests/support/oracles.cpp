#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace crispbench::testing {

SmallGraph small_graph(const BinaryBoundaryMap& pred, const BinaryBoundaryMap& gt,
                       double max_dist) {
  std::vector<std::pair<int, int>> p, q;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (pred.at(x, y)) p.push_back({x, y});
      if (gt.at(x, y)) q.push_back({x, y});
    }
  }
  SmallGraph g{p.size(), q.size(), std::vector<std::vector<std::pair<std::size_t, double>>>(p.size())};
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double d = std::hypot(p[i].first - q[j].first, p[i].second - q[j].second);
      if (d <= max_dist) g.adj[i].push_back({j, d});
    }
  }
  return g;
}

namespace {

struct Search {
  const SmallGraph& g;
  std::vector<bool> used;
  std::size_t best = 0;

  void run(std::size_t row, std::size_t matched) {
    if (matched > best) best = matched;
    if (row == g.rows) return;
    // Upper bound: remaining rows that still see a free column, capped by the
    // free columns those rows can reach.
    std::size_t live_rows = 0;
    std::vector<bool> reach(g.cols, false);
    for (std::size_t r = row; r < g.rows; ++r) {
      bool live = false;
      for (const auto& [col, d] : g.adj[r]) {
        if (used[col]) continue;
        live = true;
        reach[col] = true;
      }
      live_rows += live;
    }
    std::size_t reach_cols = 0;
    for (bool b : reach) reach_cols += b;
    if (matched + std::min(live_rows, reach_cols) <= best) return;
    for (const auto& [col, d] : g.adj[row]) {
      if (used[col]) continue;
      used[col] = true;
      run(row + 1, matched + 1);
      used[col] = false;
    }
    run(row + 1, matched);
  }
};

struct CostSearch {
  const SmallGraph& g;
  std::vector<bool> used;
  std::size_t best_card = 0;
  double best_cost = 0.0;

  void run(std::size_t row, std::size_t card, double cost) {
    if (row == g.rows) {
      if (card > best_card || (card == best_card && cost < best_cost)) {
        best_card = card;
        best_cost = cost;
      }
      return;
    }
    for (const auto& [col, d] : g.adj[row]) {
      if (used[col]) continue;
      used[col] = true;
      run(row + 1, card + 1, cost + d);
      used[col] = false;
    }
    run(row + 1, card, cost);
  }
};

}  // namespace

std::size_t exhaustive_max_matching(const SmallGraph& g) {
  Search s{g, std::vector<bool>(g.cols, false)};
  s.run(0, 0);
  return s.best;
}

std::pair<std::size_t, double> exhaustive_min_cost(const SmallGraph& g) {
  CostSearch s{g, std::vector<bool>(g.cols, false)};
  s.run(0, 0, 0.0);
  return {s.best_card, s.best_cost};
}

net::Tensor4 naive_conv(const net::Tensor4& x, const net::Tensor4& w, const std::vector<double>& b,
                        int pad) {
  const auto xs = x.shape(), ws = w.shape();
  const int oh = xs.h + 2 * pad - ws.h + 1, ow = xs.w + 2 * pad - ws.w + 1;
  net::Tensor4 out(net::Shape4{xs.n, ws.n, oh, ow});
  for (int n = 0; n < xs.n; ++n)
    for (int o = 0; o < ws.n; ++o)
      for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx) {
          double acc = b.empty() ? 0.0 : b[static_cast<std::size_t>(o)];
          for (int i = 0; i < ws.c; ++i)
            for (int u = 0; u < ws.h; ++u)
              for (int v = 0; v < ws.w; ++v) {
                const int sy = y + u - pad, sx = xx + v - pad;
                if (sy < 0 || sx < 0 || sy >= xs.h || sx >= xs.w) continue;
                acc += x.at(n, i, sy, sx) * w.at(o, i, u, v);
              }
          out.at(n, o, y, xx) = acc;
        }
  return out;
}

}  // namespace crispbench::testing
