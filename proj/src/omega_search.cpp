#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>

#include "omegaforge/omega_power.hpp"

namespace omegaforge {

namespace {

bool any_of(const std::vector<bool>& avail, std::initializer_list<Letter> xs) {
  for (Letter x : xs)
    if (x < avail.size() && avail[x]) return true;
  return false;
}
bool has(const std::vector<bool>& avail, Letter x) { return x < avail.size() && avail[x]; }

// ---- mu ----
// Key: [phase, blocks, Pprev, Rprev, Pcur, count, ok]
// phase 0: leading run, 1: pre-mark run, 2: post-mark run.
class MuAutomaton : public PrefixAutomaton {
 public:
  Key start() const override { return {0, 0, 0, 0, 0, 0, 0}; }

  void step(const Key& k, Letter a, std::vector<Key>& out) const override {
    Key n = k;
    switch (k[0]) {
      case 0:
        if (a == kRun) out.push_back(n);
        else if (a < 2) out.push_back({1, 0, 0, 0, 0, 0, 0});
        return;
      case 1:
        if (a == kRun) {
          ++n[5];
          out.push_back(n);
        } else if (a == kMark) {
          auto j = m_index(static_cast<std::uint64_t>(k[5]));
          if (!j) return;
          n[0] = 2;
          n[4] = k[5];
          n[5] = 0;
          bool ok = false;
          if (k[1] >= 1) {
            auto jp = m_index(static_cast<std::uint64_t>(k[2]));
            ok = k[2] != k[3] || static_cast<std::uint64_t>(n[4]) != m_bound(*jp + 1);
          }
          n[6] = ok;
          out.push_back(n);
        }
        return;
      case 2:
        if (a == kRun) {
          n[5] = std::min(k[5] + 1, k[4] + 1);
          out.push_back(n);
        } else if (a < 2) {
          out.push_back({1, std::min<std::int64_t>(k[1] + 1, 2), k[4], k[5], 0, 0, 0});
        }
        return;
    }
  }

  bool accept(const Key& k) const override { return k[0] == 2 && k[6]; }

  bool completable(const Key& k, const std::vector<bool>& avail) const override {
    bool m = any_of(avail, {0, 1}), mark = has(avail, kMark);
    switch (k[0]) {
      case 0: return m && mark;
      case 1:
        if (!mark) return false;
        if (!has(avail, kRun) && !m_index(static_cast<std::uint64_t>(k[5]))) return false;
        return k[1] >= 1 || m;
      default: return k[6] || (m && mark);
    }
  }

  bool oversized(const Key& k, std::uint64_t) const override { return k[5] > (std::int64_t{1} << 24); }
};

// ---- pi ----
// Key: [phase, n0, jb, count, m_0, ..., m_i]
// phase 0: leading run (count in n0), 1: pre-mark run of block i, 2: post-mark run.
// jb: index with L_i = M_jb for the current block (-1 before the first mark).
class PiAutomaton : public PrefixAutomaton {
 public:
  explicit PiAutomaton(TransitionTree r) : r_(std::move(r)) {}

  Key start() const override { return {0, 0, -1, 0}; }

  void step(const Key& k, Letter a, std::vector<Key>& out) const override {
    Key n = k;
    std::size_t blocks = k.size() - 4;
    switch (k[0]) {
      case 0:
        if (a == kRun) {
          ++n[1];
          out.push_back(n);
        } else if (a < 2) {
          n[0] = 1;
          n.push_back(static_cast<std::int64_t>(a));
          if (live(n)) out.push_back(n);
        }
        return;
      case 1:
        if (a == kRun) {
          ++n[3];
          if (n[2] < 0 || static_cast<std::uint64_t>(n[3]) <= m_bound(static_cast<std::uint64_t>(n[2]))) out.push_back(n);
        } else if (a == kMark) {
          std::uint64_t c = static_cast<std::uint64_t>(k[3]);
          if (blocks == 1) {
            auto j = m_index(c);
            if (!j || *j == 0 || static_cast<std::uint64_t>(k[1]) > m_bound(*j - 1)) return;
            n[2] = static_cast<std::int64_t>(*j);
          } else if (c != m_bound(static_cast<std::uint64_t>(k[2]))) {
            return;
          }
          n[0] = 2;
          n[3] = 0;
          out.push_back(n);
        }
        return;
      case 2: {
        std::uint64_t l = m_bound(static_cast<std::uint64_t>(k[2]));
        if (a == kRun) {
          if (static_cast<std::uint64_t>(k[3]) < l) {
            ++n[3];
            out.push_back(n);
          }
        } else if (a < 2 && static_cast<std::uint64_t>(k[3]) == l && k[2] < 30) {
          n[0] = 1;
          n[2] = k[2] + 1;
          n[3] = 0;
          n.push_back(static_cast<std::int64_t>(a));
          if (live(n)) out.push_back(n);
        }
        return;
      }
    }
  }

  bool accept(const Key& k) const override {
    if (k[0] != 2) return false;
    std::uint64_t l = m_bound(static_cast<std::uint64_t>(k[2]));
    PairWords q0 = q_pair(static_cast<std::uint64_t>(k[1]));
    PairWords qp = q_pair(l - static_cast<std::uint64_t>(k[3]));
    std::size_t blocks = k.size() - 4;
    if (qp.t.size() != q0.t.size() + blocks || qp.t.back() != 1) return false;
    if (!std::equal(q0.t.begin(), q0.t.end(), qp.t.begin())) return false;
    Word s = q0.s;
    for (std::size_t i = 4; i < k.size(); ++i) s.push_back(static_cast<Letter>(k[i]));
    return qp.s == s && r_.contains(qp.t, qp.s);
  }

  bool completable(const Key& k, const std::vector<bool>& avail) const override {
    bool run = has(avail, kRun), mark = has(avail, kMark), m = any_of(avail, {0, 1});
    switch (k[0]) {
      case 0: return run && mark && m;
      case 1: return mark && (run || (k.size() > 5 && static_cast<std::uint64_t>(k[3]) == m_bound(static_cast<std::uint64_t>(k[2]))));
      default: return run || accept(k);
    }
  }

  bool oversized(const Key& k, std::uint64_t) const override { return k[1] > (std::int64_t{1} << 24); }

 private:
  // Some t-extension of q_{n0} along the letters read so far stays in R.
  bool live(const Key& k) const {
    PairWords q = q_pair(static_cast<std::uint64_t>(k[1]));
    for (std::size_t i = 4; i < k.size(); ++i) q.s.push_back(static_cast<Letter>(k[i]));
    std::size_t extra = k.size() - 4;
    if (extra > 12) return true;
    Word t = q.t;
    std::function<bool(std::size_t)> rec = [&](std::size_t i) {
      if (!r_.contains(t, Word(q.s.begin(), q.s.begin() + t.size()))) return false;
      if (i == extra) return true;
      for (Letter b = 0; b < 2; ++b) {
        t.push_back(b);
        bool ok = rec(i + 1);
        t.pop_back();
        if (ok) return true;
      }
      return false;
    };
    return rec(0);
  }

  TransitionTree r_;
};

class UnionAutomaton : public PrefixAutomaton {
 public:
  UnionAutomaton(std::shared_ptr<const PrefixAutomaton> a, std::shared_ptr<const PrefixAutomaton> b) : a_(std::move(a)), b_(std::move(b)) {}

  Key start() const override { return {-1}; }

  void step(const Key& k, Letter x, std::vector<Key>& out) const override {
    if (k[0] < 0) {
      forward(0, a_->start(), x, out);
      forward(1, b_->start(), x, out);
    } else {
      forward(k[0], inner(k), x, out);
    }
  }

  bool accept(const Key& k) const override {
    if (k[0] < 0) return a_->accept(a_->start()) || b_->accept(b_->start());
    return side(k[0]).accept(inner(k));
  }

  bool completable(const Key& k, const std::vector<bool>& avail) const override {
    if (k[0] < 0) return a_->completable(a_->start(), avail) || b_->completable(b_->start(), avail);
    return side(k[0]).completable(inner(k), avail);
  }

  bool oversized(const Key& k, std::uint64_t d) const override { return k[0] >= 0 && side(k[0]).oversized(inner(k), d); }

 private:
  const PrefixAutomaton& side(std::int64_t t) const { return t == 0 ? *a_ : *b_; }
  static Key inner(const Key& k) { return Key(k.begin() + 1, k.end()); }
  void forward(std::int64_t tag, const Key& k, Letter x, std::vector<Key>& out) const {
    std::vector<Key> tmp;
    side(tag).step(k, x, tmp);
    for (auto& t : tmp) {
      Key o{tag};
      o.insert(o.end(), t.begin(), t.end());
      out.push_back(std::move(o));
    }
  }

  std::shared_ptr<const PrefixAutomaton> a_, b_;
};

class TableAutomaton : public PrefixAutomaton {
 public:
  TableAutomaton(std::vector<std::vector<int>> t, std::vector<bool> acc) : trans_(std::move(t)), acc_(std::move(acc)) {}

  Key start() const override { return {0}; }
  void step(const Key& k, Letter a, std::vector<Key>& out) const override {
    const auto& row = trans_[static_cast<std::size_t>(k[0])];
    if (a < row.size() && row[a] >= 0) out.push_back({row[a]});
  }
  bool accept(const Key& k) const override { return acc_[static_cast<std::size_t>(k[0])]; }
  bool completable(const Key& k, const std::vector<bool>& avail) const override {
    std::vector<bool> seen(trans_.size(), false);
    std::vector<int> stack{static_cast<int>(k[0])};
    seen[static_cast<std::size_t>(k[0])] = true;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      if (acc_[static_cast<std::size_t>(s)]) return true;
      const auto& row = trans_[static_cast<std::size_t>(s)];
      for (std::size_t a = 0; a < row.size(); ++a)
        if (has(avail, a) && row[a] >= 0 && !seen[static_cast<std::size_t>(row[a])]) {
          seen[static_cast<std::size_t>(row[a])] = true;
          stack.push_back(row[a]);
        }
    }
    return false;
  }

 private:
  std::vector<std::vector<int>> trans_;
  std::vector<bool> acc_;
};

}  // namespace

std::shared_ptr<const PrefixAutomaton> union_automaton(std::shared_ptr<const PrefixAutomaton> a,
                                                       std::shared_ptr<const PrefixAutomaton> b) {
  return std::make_shared<UnionAutomaton>(std::move(a), std::move(b));
}

std::shared_ptr<const PrefixAutomaton> table_automaton(std::vector<std::vector<int>> trans, std::vector<bool> accepting) {
  return std::make_shared<TableAutomaton>(std::move(trans), std::move(accepting));
}

std::shared_ptr<const PrefixAutomaton> trie_automaton(const std::vector<Word>& words, std::uint64_t alphabet) {
  std::vector<std::vector<int>> trans{std::vector<int>(alphabet, -1)};
  std::vector<bool> acc{false};
  for (auto& w : words) {
    int s = 0;
    for (Letter a : w) {
      if (a >= alphabet) throw SpaceMismatch("dictionary word leaves the alphabet");
      if (trans[static_cast<std::size_t>(s)][a] < 0) {
        trans[static_cast<std::size_t>(s)][a] = static_cast<int>(trans.size());
        trans.emplace_back(alphabet, -1);
        acc.push_back(false);
      }
      s = trans[static_cast<std::size_t>(s)][a];
    }
    acc[static_cast<std::size_t>(s)] = true;
  }
  return table_automaton(std::move(trans), std::move(acc));
}

Dict finite_dict(std::string name, std::uint64_t alphabet, std::vector<Word> words) {
  Dict d;
  d.name = std::move(name);
  d.alphabet = alphabet;
  auto set = std::make_shared<const std::set<Word>>(words.begin(), words.end());
  d.member = [set](const Word& w) { return set->count(w) > 0; };
  d.automaton = trie_automaton(words, alphabet);
  return d;
}

Dict mu_dict() {
  Dict d;
  d.name = "mu";
  d.alphabet = 4;
  d.member = [](const Word& w) { return mu_member(w).any(); };
  d.automaton = std::make_shared<MuAutomaton>();
  d.has_mu = true;
  return d;
}

Dict pi_dict(const TransitionTree& r) {
  Dict d;
  d.name = "pi";
  d.alphabet = 4;
  d.member = [r](const Word& w) { return pi_member(w, r); };
  d.automaton = std::make_shared<PiAutomaton>(r);
  d.rtree = std::make_shared<const TransitionTree>(r);
  return d;
}

Dict build_dictionary(const TransitionTree& r) {
  Dict mu = mu_dict(), pi = pi_dict(r);
  Dict d;
  d.name = "mu+pi";
  d.alphabet = 4;
  d.member = [mu, pi](const Word& w) { return mu.member(w) || pi.member(w); };
  d.automaton = union_automaton(mu.automaton, pi.automaton);
  d.rtree = pi.rtree;
  d.has_mu = true;
  return d;
}

std::vector<Word> Dict::enumerate(std::size_t max_len) const {
  std::vector<Word> out;
  if (!automaton) {
    for (std::size_t n = 0; n <= max_len; ++n)
      for (auto& w : all_words(Alphabet{alphabet}, n))
        if (member(w)) out.push_back(w);
    return out;
  }
  const PrefixAutomaton& a = *automaton;
  std::vector<bool> all(alphabet, true);
  std::vector<std::pair<Word, std::set<Key>>> level{{Word{}, {a.start()}}};
  std::vector<Key> tmp;
  for (std::size_t n = 1; n <= max_len && !level.empty(); ++n) {
    std::vector<std::pair<Word, std::set<Key>>> next;
    for (auto& [w, keys] : level)
      for (Letter x = 0; x < alphabet; ++x) {
        std::set<Key> nk;
        for (auto& k : keys) {
          tmp.clear();
          a.step(k, x, tmp);
          for (auto& k2 : tmp)
            if (a.completable(k2, all)) nk.insert(k2);
        }
        if (nk.empty()) continue;
        Word w2 = w;
        w2.push_back(x);
        if (std::any_of(nk.begin(), nk.end(), [&](const Key& k) { return a.accept(k); })) out.push_back(w2);
        next.emplace_back(std::move(w2), std::move(nk));
      }
    level = std::move(next);
  }
  return out;
}

// ---- search ----

namespace {

class Interner {
 public:
  std::uint32_t id(const Key& k) {
    auto [it, fresh] = ids_.emplace(k, static_cast<std::uint32_t>(keys_.size()));
    if (fresh) keys_.push_back(k);
    return it->second;
  }
  const Key& key(std::uint32_t i) const { return keys_[i]; }

 private:
  std::map<Key, std::uint32_t> ids_;
  std::vector<Key> keys_;
};

struct Graph {
  std::vector<std::vector<std::pair<std::uint32_t, bool>>> adj;  // (target, is cut)
};

// Tarjan, iterative. Returns component ids.
std::vector<std::uint32_t> scc(const Graph& g) {
  std::size_t n = g.adj.size();
  std::vector<std::uint32_t> comp(n, UINT32_MAX), idx(n, UINT32_MAX), low(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<bool> on(n, false);
  std::uint32_t counter = 0, comps = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> call;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (idx[root] != UINT32_MAX) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      auto& [v, e] = call.back();
      if (e == 0 && idx[v] == UINT32_MAX) {
        idx[v] = low[v] = counter++;
        stack.push_back(v);
        on[v] = true;
      }
      if (e < g.adj[v].size()) {
        std::uint32_t w = g.adj[v][e++].first;
        if (idx[w] == UINT32_MAX) {
          call.push_back({w, 0});
        } else if (on[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
        continue;
      }
      if (low[v] == idx[v]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on[w] = false;
          comp[w] = comps;
        } while (w != v);
        ++comps;
      }
      std::uint32_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }
  return comp;
}

std::size_t node_cap(const Budget& b) { return 4096 * std::max<std::uint64_t>(b.depth, 1); }

Truth3 search_up(const Dict& d, const UPWord& w, const Budget& b, SearchStats& st) {
  const PrefixAutomaton& A = *d.automaton;
  std::size_t U = w.transient().size(), L = U + w.period().size();
  // Letters still to come from each position: the whole period once inside it.
  std::vector<std::vector<bool>> avail(L, std::vector<bool>(d.alphabet, false));
  for (std::size_t p = L; p-- > 0;) {
    if (p + 1 < L) avail[p] = avail[p + 1];
    if (w.at(p) < d.alphabet) avail[p][w.at(p)] = true;
  }
  for (std::size_t p = U + 1; p < L; ++p) avail[p] = avail[U];

  Interner keys;
  std::uint32_t start = keys.id(A.start());
  std::unordered_map<std::uint64_t, std::uint32_t> ids;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, bool>> nodes;
  Graph g;
  auto node = [&](std::uint32_t p, std::uint32_t k, bool fresh) {
    std::uint64_t code = (std::uint64_t{p} << 33) | (std::uint64_t{k} << 1) | fresh;
    auto [it, isnew] = ids.emplace(code, static_cast<std::uint32_t>(nodes.size()));
    if (isnew) {
      nodes.emplace_back(p, k, fresh);
      g.adj.emplace_back();
    }
    return it->second;
  };
  node(0, start, true);
  std::size_t cap = node_cap(b);
  std::vector<Key> tmp;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i >= cap) {
      st.complete = false;
      break;
    }
    auto [p, k, fresh] = nodes[i];
    Key key = keys.key(k);
    std::uint32_t np = p + 1 < L ? p + 1 : static_cast<std::uint32_t>(U);
    tmp.clear();
    A.step(key, w.at(p), tmp);
    for (auto& k2 : tmp) {
      if (A.oversized(k2, b.depth)) {
        st.complete = false;
        continue;
      }
      if (!A.completable(k2, avail[np])) continue;
      std::uint32_t t = node(np, keys.id(k2), false);
      g.adj[i].push_back({t, false});
    }
    if (!fresh && A.accept(key)) {
      std::uint32_t t = node(p, start, true);
      g.adj[i].push_back({t, true});
    }
  }
  st.nodes = nodes.size();
  g.adj.resize(nodes.size());
  auto comp = scc(g);
  for (std::size_t v = 0; v < g.adj.size(); ++v)
    for (auto [t, cut] : g.adj[v])
      if (cut && comp[v] == comp[t]) return Truth3::True;
  return st.complete ? Truth3::False : Truth3::Unknown;
}

// Layered prefix search. Returns the live configurations after all letters,
// or nullopt when the budget ran out.
std::optional<std::set<std::pair<Key, bool>>> prefix_layers(const Dict& d, const std::function<Letter(std::uint64_t)>& at,
                                                            std::uint64_t n, const Budget& b, SearchStats& st) {
  const PrefixAutomaton& A = *d.automaton;
  std::vector<bool> all(d.alphabet, true);
  std::set<std::pair<Key, bool>> layer{{A.start(), true}};
  std::vector<Key> tmp;
  std::size_t cap = node_cap(b);
  for (std::uint64_t i = 0; i < n; ++i) {
    for (auto& [k, fresh] : std::set<std::pair<Key, bool>>(layer))
      if (!fresh && A.accept(k)) layer.insert({A.start(), true});
    std::set<std::pair<Key, bool>> next;
    Letter a = at(i);
    for (auto& [k, fresh] : layer) {
      tmp.clear();
      A.step(k, a, tmp);
      for (auto& k2 : tmp) {
        if (A.oversized(k2, b.depth)) {
          st.complete = false;
          continue;
        }
        if (A.completable(k2, all)) next.insert({k2, false});
      }
    }
    st.nodes += next.size();
    if (next.size() > cap) return std::nullopt;
    layer = std::move(next);
    if (layer.empty()) return layer;
  }
  for (auto& [k, fresh] : std::set<std::pair<Key, bool>>(layer))
    if (!fresh && A.accept(k)) layer.insert({A.start(), true});
  return layer;
}

}  // namespace

Truth3 omega_power_member(const Dict& d, const Word& prefix, const Budget& b, SearchStats* stats) {
  if (!d.automaton) throw std::invalid_argument("dictionary has no prefix automaton");
  SearchStats local;
  SearchStats& st = stats ? *stats : local;
  auto layer = prefix_layers(d, [&](std::uint64_t i) { return prefix[i]; }, prefix.size(), b, st);
  if (!layer) return Truth3::Unknown;
  if (!layer->empty()) return Truth3::True;
  return st.complete ? Truth3::False : Truth3::Unknown;
}

Truth3 omega_power_member(const Dict& d, const OmegaWord& w, const Budget& b, SearchStats* stats) {
  if (!d.automaton) throw std::invalid_argument("dictionary has no prefix automaton");
  if (alphabet_of(w).size != d.alphabet)
    throw SpaceMismatch("word over " + std::to_string(alphabet_of(w).size) + " letters, dictionary over " + std::to_string(d.alphabet));
  SearchStats local;
  SearchStats& st = stats ? *stats : local;
  if (auto* u = std::get_if<UPWord>(&w)) return search_up(d, *u, b, st);
  const auto& pw = std::get<ProgramWord>(w);
  if (auto* kt = std::any_cast<KTail>(&pw.shape)) {
    bool pure = std::all_of(kt->head.begin(), kt->head.end(), [](Letter x) { return x == kRun; });
    if (pure && (d.rtree || d.has_mu)) {
      // A K-word has no defects, so mu words never occur in a factorisation.
      if (!d.rtree) return Truth3::False;
      return pi_block_search(*d.rtree, kt->head.size(), kt->j, kt->alpha, b).value;
    }
  }
  auto layer = prefix_layers(d, pw.gen, b.depth, b, st);
  if (layer && layer->empty() && st.complete) return Truth3::False;
  return Truth3::Unknown;
}

// ---- block-level run search ----

namespace {

Word render_run(std::uint64_t n0, std::uint64_t j, std::size_t from, std::size_t to, const Word& alpha, std::uint64_t p_last) {
  Word w(n0, kRun);
  for (std::size_t i = from; i <= to; ++i) {
    std::uint64_t l = m_bound(j + i + 1);
    w.push_back(alpha[i]);
    w.insert(w.end(), l, kRun);
    w.push_back(kMark);
    w.insert(w.end(), i < to ? l : l - p_last, kRun);
  }
  return w;
}

}  // namespace

BlockSearch pi_block_search(const TransitionTree& r, std::uint64_t n, std::uint64_t j, const OmegaWord& alpha, const Budget& b,
                            std::size_t witness_blocks) {
  BlockSearch out;
  if (n > m_bound(j)) {
    out.value = Truth3::False;
    return out;
  }
  PairWords q = q_pair(n);
  if (!r.contains(q.t, q.s)) {
    out.value = Truth3::False;
    return out;
  }
  const UPWord* up = std::get_if<UPWord>(&alpha);
  if (r.kind() == TransitionTree::Kind::Full) {
    out.value = Truth3::True;
  } else if (r.has_congruence() && up) {
    // Lasso over (position in alpha, class, last t-letter was an accepting 1).
    std::size_t U = up->transient().size(), L = U + up->period().size();
    std::map<std::tuple<std::size_t, int, bool>, std::uint32_t> ids;
    std::vector<std::tuple<std::size_t, int, bool>> nodes;
    Graph g;
    auto node = [&](std::size_t p, int c, bool hit) {
      auto [it, isnew] = ids.emplace(std::tuple{p, c, hit}, static_cast<std::uint32_t>(nodes.size()));
      if (isnew) {
        nodes.emplace_back(p, c, hit);
        g.adj.emplace_back();
      }
      return it->second;
    };
    node(0, *r.rclass(q.t, q.s), false);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto [p, c, hit] = nodes[i];
      std::size_t np = p + 1 < L ? p + 1 : U;
      for (Letter tb = 0; tb < 2; ++tb)
        if (auto c2 = r.rstep(c, tb, up->at(p))) {
          std::uint32_t t = node(np, *c2, tb == 1);
          g.adj[i].push_back({t, false});
        }
    }
    auto comp = scc(g);
    out.value = Truth3::False;
    for (std::size_t v = 0; v < nodes.size(); ++v)
      if (std::get<2>(nodes[v]))
        for (auto [t, cut] : g.adj[v])
          if (comp[t] == comp[v]) out.value = Truth3::True;
  } else {
    // Budgeted: every t-extension dies, or the answer stays open.
    std::set<Word> level{q.t};
    Word s = q.s;
    std::uint64_t steps = std::min<std::uint64_t>(b.depth, 40);
    for (std::uint64_t i = 0; i < steps && !level.empty(); ++i) {
      s.push_back(letter_at(alpha, i));
      std::set<Word> next;
      for (auto& t : level)
        for (Letter tb = 0; tb < 2; ++tb) {
          Word t2 = t;
          t2.push_back(tb);
          if (r.contains(t2, s)) next.insert(std::move(t2));
        }
      if (next.size() > 4096) break;
      level = std::move(next);
    }
    out.value = level.empty() ? Truth3::False : Truth3::Unknown;
  }

  if (out.value == Truth3::True && witness_blocks > 0 && r.has_congruence()) {
    // Full tree: t = 1 1 1 ..., every block closes a word. Diagonal: t = alpha.
    Word a = prefix_of(alpha, witness_blocks), t = q.t, s = q.s;
    std::uint64_t start = n;
    std::size_t from = 0;
    for (std::size_t i = 0; i < witness_blocks; ++i) {
      t.push_back(r.kind() == TransitionTree::Kind::Diagonal ? a[i] : 1);
      s.push_back(a[i]);
      std::uint64_t p = q_index(t, s);
      if (r.accepting(p)) {
        out.words.push_back(render_run(start, j + from, 0, i - from, Word(a.begin() + from, a.end()), p));
        start = p;
        from = i + 1;
      }
    }
  }
  return out;
}

}  // namespace omegaforge
