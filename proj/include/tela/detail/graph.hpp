#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <utility>
#include <vector>

namespace tela::detail {

using Adjacency = std::vector<std::vector<unsigned>>;

inline constexpr unsigned kNone = ~0U;

/// Strongly connected components (iterative Tarjan). `comp[v]` is the component
/// index of v, or kNone for vertices not in `active` (when given).
struct SccResult {
  std::vector<unsigned> comp;
  std::vector<std::vector<unsigned>> members;
};

inline SccResult tarjan(const Adjacency& adj, const std::vector<char>* active = nullptr) {
  const unsigned n = static_cast<unsigned>(adj.size());
  SccResult r;
  r.comp.assign(n, kNone);
  std::vector<unsigned> index(n, kNone), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<unsigned> stack;
  std::vector<std::pair<unsigned, std::size_t>> call;
  unsigned counter = 0;
  auto is_active = [&](unsigned v) { return !active || (*active)[v]; };
  for (unsigned root = 0; root < n; ++root) {
    if (index[root] != kNone || !is_active(root)) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, i] = call.back();
      if (i < adj[v].size()) {
        unsigned w = adj[v][i++];
        if (!is_active(w)) continue;
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      unsigned done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<unsigned> members;
        unsigned w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          r.comp[w] = static_cast<unsigned>(r.members.size());
          members.push_back(w);
        } while (w != done);
        std::sort(members.begin(), members.end());
        r.members.push_back(std::move(members));
      }
    }
  }
  return r;
}

/// Vertices reachable from `sources`.
inline std::vector<char> forward_reach(const Adjacency& adj, const std::vector<unsigned>& sources) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<unsigned> work;
  for (unsigned s : sources)
    if (!seen[s]) {
      seen[s] = 1;
      work.push_back(s);
    }
  while (!work.empty()) {
    unsigned v = work.back();
    work.pop_back();
    for (unsigned w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        work.push_back(w);
      }
  }
  return seen;
}

inline Adjacency reverse(const Adjacency& adj) {
  Adjacency r(adj.size());
  for (unsigned v = 0; v < adj.size(); ++v)
    for (unsigned w : adj[v]) r[w].push_back(v);
  return r;
}

}  // namespace tela::detail
