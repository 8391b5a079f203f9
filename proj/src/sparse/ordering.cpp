#include "gridflow/sparse/ordering.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

namespace gridflow {

namespace {

enum class NodeState : unsigned char { variable, element, absorbed };

/// Quotient-graph minimum degree. Variables keep two adjacency lists: plain
/// variable neighbours and adjacent elements (eliminated cliques).
class MinimumDegree {
 public:
  explicit MinimumDegree(const SparsityPattern& graph)
      : n_(graph.rows()),
        state_(n_, NodeState::variable),
        vars_(n_),
        elems_(n_),
        members_(n_),
        degree_(n_),
        mark_(n_, 0),
        weight_(n_, 0),
        weight_mark_(n_, 0),
        initial_degree_(n_),
        tie_mark_(n_, 0) {
    for (std::size_t i = 0; i < n_; ++i) {
      const auto r = graph.row(i);
      vars_[i].assign(r.begin(), r.end());
      degree_[i] = vars_[i].size();
      initial_degree_[i] = degree_[i];
      queue_.emplace(degree_[i], initial_degree_[i], i);
    }
  }

  std::vector<std::size_t> run() {
    std::vector<std::size_t> order;
    order.reserve(n_);
    for (std::size_t step = 0; step < n_; ++step) {
      const auto chosen = pick_pivot();
      const std::size_t pivot = std::get<2>(*chosen);
      queue_.erase(chosen);
      order.push_back(pivot);
      eliminate(pivot, n_ - step - 1);
    }
    return order;
  }

 private:
  using QueueEntry = std::tuple<std::size_t, std::size_t, std::size_t>;

  // Among the first few candidates of minimum degree, take the one whose
  // elimination creates the fewest new edges (minimum deficiency). This keeps
  // chordal regions fill-free where plain index order would not.
  static constexpr std::size_t kTieCandidates = 8;
  static constexpr std::size_t kTieDegreeLimit = 16;

  std::set<QueueEntry>::iterator pick_pivot() {
    auto best = queue_.begin();
    const std::size_t d = std::get<0>(*best);
    if (d < 2 || d > kTieDegreeLimit) return best;
    std::size_t best_fill = deficiency(std::get<2>(*best));
    auto it = std::next(best);
    for (std::size_t seen = 1; best_fill > 0 && seen < kTieCandidates && it != queue_.end() && std::get<0>(*it) == d;
         ++seen, ++it) {
      const std::size_t f = deficiency(std::get<2>(*it));
      if (f < best_fill) {
        best_fill = f;
        best = it;
      }
    }
    return best;
  }

  /// Current neighbours of variable v (through plain edges and elements).
  void neighbours(std::size_t v, std::vector<std::size_t>& out) {
    out.clear();
    ++tie_stamp_;
    tie_mark_[v] = tie_stamp_;
    const auto add = [&](std::size_t u) {
      if (state_[u] == NodeState::variable && tie_mark_[u] != tie_stamp_) {
        tie_mark_[u] = tie_stamp_;
        out.push_back(u);
      }
    };
    for (std::size_t u : vars_[v]) add(u);
    for (std::size_t e : elems_[v]) {
      if (state_[e] != NodeState::element) continue;
      for (std::size_t u : members_[e]) add(u);
    }
  }

  /// Number of missing edges among the neighbours of v.
  std::size_t deficiency(std::size_t v) {
    std::vector<std::size_t> nv;
    neighbours(v, nv);
    std::vector<std::size_t> nu;
    std::size_t missing = 0;
    for (std::size_t a = 0; a < nv.size(); ++a) {
      neighbours(nv[a], nu);
      // tie_mark_ now flags the neighbours of nv[a] (and nv[a] itself).
      for (std::size_t b = a + 1; b < nv.size(); ++b) {
        if (tie_mark_[nv[b]] != tie_stamp_) ++missing;
      }
    }
    return missing;
  }

  void eliminate(std::size_t p, std::size_t remaining) {
    ++stamp_;
    std::vector<std::size_t> lp;
    mark_[p] = stamp_;
    for (std::size_t v : vars_[p]) {
      if (state_[v] == NodeState::variable && mark_[v] != stamp_) {
        mark_[v] = stamp_;
        lp.push_back(v);
      }
    }
    for (std::size_t e : elems_[p]) {
      if (state_[e] != NodeState::element) continue;
      for (std::size_t v : members_[e]) {
        if (state_[v] == NodeState::variable && mark_[v] != stamp_) {
          mark_[v] = stamp_;
          lp.push_back(v);
        }
      }
      state_[e] = NodeState::absorbed;
      members_[e].clear();
      members_[e].shrink_to_fit();
    }
    std::sort(lp.begin(), lp.end());

    state_[p] = NodeState::element;
    vars_[p].clear();
    vars_[p].shrink_to_fit();
    elems_[p].clear();
    elems_[p].shrink_to_fit();

    // Prune: variables of L_p are now reached through element p.
    for (std::size_t i : lp) {
      auto& av = vars_[i];
      av.erase(std::remove_if(av.begin(), av.end(),
                              [&](std::size_t v) { return state_[v] != NodeState::variable || mark_[v] == stamp_; }),
               av.end());
      auto& ae = elems_[i];
      ae.erase(std::remove_if(ae.begin(), ae.end(), [&](std::size_t e) { return state_[e] != NodeState::element; }),
               ae.end());
    }

    // w(e) = |L_e \ L_p| for every element touching L_p.
    ++weight_stamp_;
    for (std::size_t i : lp) {
      for (std::size_t e : elems_[i]) {
        if (weight_mark_[e] != weight_stamp_) {
          weight_mark_[e] = weight_stamp_;
          weight_[e] = members_[e].size();
        }
        --weight_[e];
      }
    }
    for (std::size_t i : lp) {
      for (std::size_t e : elems_[i]) {
        if (weight_[e] == 0 && state_[e] == NodeState::element) {
          state_[e] = NodeState::absorbed;
          members_[e].clear();
          members_[e].shrink_to_fit();
        }
      }
    }

    const std::size_t lp_ext = lp.empty() ? 0 : lp.size() - 1;
    for (std::size_t i : lp) {
      auto& ae = elems_[i];
      ae.erase(std::remove_if(ae.begin(), ae.end(), [&](std::size_t e) { return state_[e] != NodeState::element; }),
               ae.end());
      std::size_t d = vars_[i].size() + lp_ext;
      for (std::size_t e : ae) d += weight_[e];
      ae.push_back(p);
      const std::size_t cap = remaining == 0 ? 0 : remaining - 1;
      d = std::min({d, cap, degree_[i] + lp_ext});
      queue_.erase({degree_[i], initial_degree_[i], i});
      degree_[i] = d;
      queue_.emplace(d, initial_degree_[i], i);
    }
    members_[p] = std::move(lp);
  }

  std::size_t n_;
  std::vector<NodeState> state_;
  std::vector<std::vector<std::size_t>> vars_;
  std::vector<std::vector<std::size_t>> elems_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::size_t> degree_;
  std::vector<std::size_t> mark_;
  std::vector<std::size_t> weight_;
  std::vector<std::size_t> weight_mark_;
  std::size_t stamp_ = 0;
  std::size_t weight_stamp_ = 0;
  std::vector<std::size_t> initial_degree_;
  // (approximate degree, original degree, index): ties prefer sparse original rows.
  std::set<QueueEntry> queue_;
  std::vector<std::size_t> tie_mark_;
  std::size_t tie_stamp_ = 0;
};

/// BFS levels from `root` restricted to unvisited nodes; returns the nodes
/// grouped by level.
std::vector<std::vector<std::size_t>> level_structure(const SparsityPattern& g, std::size_t root,
                                                      const std::vector<char>& done) {
  std::vector<std::vector<std::size_t>> levels{{root}};
  std::vector<char> seen(g.rows(), 0);
  seen[root] = 1;
  while (true) {
    std::vector<std::size_t> next;
    for (std::size_t v : levels.back()) {
      for (std::size_t w : g.row(v)) {
        if (!seen[w] && !done[w]) {
          seen[w] = 1;
          next.push_back(w);
        }
      }
    }
    if (next.empty()) break;
    levels.push_back(std::move(next));
  }
  return levels;
}

std::size_t pseudo_peripheral(const SparsityPattern& g, std::size_t start, const std::vector<char>& done) {
  std::size_t root = start;
  auto levels = level_structure(g, root, done);
  while (true) {
    const auto& last = levels.back();
    std::size_t candidate = last.front();
    for (std::size_t v : last) {
      const std::size_t dv = g.row(v).size();
      const std::size_t dc = g.row(candidate).size();
      if (dv < dc || (dv == dc && v < candidate)) candidate = v;
    }
    auto trial = level_structure(g, candidate, done);
    if (trial.size() <= levels.size()) return root;
    root = candidate;
    levels = std::move(trial);
  }
}

}  // namespace

Permutation amd_order(const SparsityPattern& pattern) {
  const SparsityPattern graph = pattern.symmetric_graph();
  return Permutation::from_order(MinimumDegree(graph).run());
}

Permutation rcm_order(const SparsityPattern& pattern) {
  const SparsityPattern g = pattern.symmetric_graph();
  const std::size_t n = g.rows();
  std::vector<char> done(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<std::size_t> nbrs;
  for (std::size_t start = 0; start < n; ++start) {
    if (done[start]) continue;
    const std::size_t root = pseudo_peripheral(g, start, done);
    const std::size_t first = order.size();
    order.push_back(root);
    done[root] = 1;
    for (std::size_t head = first; head < order.size(); ++head) {
      nbrs.clear();
      for (std::size_t w : g.row(order[head])) {
        if (!done[w]) nbrs.push_back(w);
      }
      std::sort(nbrs.begin(), nbrs.end(), [&](std::size_t a, std::size_t b) {
        const std::size_t da = g.row(a).size();
        const std::size_t db = g.row(b).size();
        return da != db ? da < db : a < b;
      });
      for (std::size_t w : nbrs) {
        done[w] = 1;
        order.push_back(w);
      }
    }
    std::reverse(order.begin() + static_cast<std::ptrdiff_t>(first), order.end());
  }
  return Permutation::from_order(std::move(order));
}

std::size_t symbolic_fill(const SparsityPattern& pattern, const Permutation& perm) {
  const SparsityPattern g = pattern.symmetric_graph();
  const std::size_t n = g.rows();
  if (perm.size() != n) throw DimensionError("symbolic_fill: permutation size does not match the pattern");

  // Column structures of the Cholesky factor in the permuted numbering, built
  // bottom-up along the elimination tree.
  std::vector<std::vector<std::size_t>> structure(n);
  std::vector<std::vector<std::size_t>> children(n);
  std::size_t factor_entries = 0;
  std::size_t original_entries = 0;
  std::vector<std::size_t> merged;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t node = perm.old_index(k);
    merged.clear();
    for (std::size_t w : g.row(node)) {
      const std::size_t pw = perm(w);
      if (pw > k) {
        merged.push_back(pw);
        ++original_entries;
      }
    }
    for (std::size_t c : children[k]) {
      for (std::size_t v : structure[c]) {
        if (v != k) merged.push_back(v);
      }
      structure[c].clear();
      structure[c].shrink_to_fit();
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    factor_entries += merged.size();
    if (!merged.empty()) children[merged.front()].push_back(k);
    structure[k] = merged;
  }
  return factor_entries - original_entries;
}

std::size_t bandwidth(const SparsityPattern& pattern) {
  std::size_t bw = 0;
  for (std::size_t i = 0; i < pattern.rows(); ++i) {
    for (std::size_t j : pattern.row(i)) bw = std::max(bw, i > j ? i - j : j - i);
  }
  return bw;
}

std::size_t bandwidth(const SparsityPattern& pattern, const Permutation& perm) {
  std::size_t bw = 0;
  for (std::size_t i = 0; i < pattern.rows(); ++i) {
    const std::size_t pi = perm(i);
    for (std::size_t j : pattern.row(i)) {
      const std::size_t pj = perm(j);
      bw = std::max(bw, pi > pj ? pi - pj : pj - pi);
    }
  }
  return bw;
}

}  // namespace gridflow
