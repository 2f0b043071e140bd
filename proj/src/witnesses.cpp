#include "omegaforge/witnesses.hpp"

#include <algorithm>
#include <set>

namespace omegaforge {

namespace {

void check3(const Word& s) {
  for (Letter x : s)
    if (x > 2) throw SpaceMismatch("letter outside 3 = {0, 1, 2}");
}

int delta(Letter x) { return x == 1 ? 1 : x == 2 ? -1 : 0; }

}  // namespace

bool t_member(const Word& s) {
  check3(s);
  long h = 0;
  for (Letter x : s)
    if ((h += delta(x)) < 0) return false;
  return true;
}

bool t_member(const UPWord& a) {
  check3(a.transient());
  check3(a.period());
  long drift = 0;
  for (Letter x : a.period()) drift += delta(x);
  if (drift < 0) return false;
  Word p = a.prefix(a.transient().size() + a.period().size());
  return t_member(p);
}

bool EraseState::feed(Letter x) {
  if (x == 2) {
    if (ones.empty()) return false;
    output[ones.back()] = 0;
    ones.pop_back();
    return true;
  }
  if (x == 1) ones.push_back(output.size());
  output.push_back(x);
  return true;
}

Word erase(const Word& s) {
  check3(s);
  EraseState st;
  for (Letter x : s)
    if (!st.feed(x)) throw NotInT(word_to_string(s, Alphabet{3}));
  return st.output;
}

namespace {

// Surplus after each of the first n letters.
std::vector<long> surpluses(const UPWord& a, std::size_t n) {
  std::vector<long> h(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) h[i + 1] = h[i] + delta(a.at(i));
  return h;
}

// For a 1 read at input position n (height after it = h[n+1]): the first m > n
// with h[m] < h[n+1], or nothing. With drift >= 0 the tail past one further
// period never dips lower than that period did.
std::optional<std::size_t> pop_time(const UPWord& a, const std::vector<long>& h, std::size_t n) {
  std::size_t end = std::max(n + 1, a.transient().size()) + a.period().size();
  for (std::size_t m = n + 1; m <= end; ++m)
    if (h[m] < h[n + 1]) return m;
  return std::nullopt;
}

}  // namespace

UPWord erase_limit(const UPWord& a) {
  if (!t_member(a)) throw NotInT(a.to_string());
  std::size_t U = a.transient().size(), V = a.period().size();
  std::vector<long> h = surpluses(a, U + 3 * V + 2);
  Word u, v;
  for (std::size_t n = 0; n < U + V; ++n) {
    Letter x = a.at(n);
    if (x == 2) continue;
    Letter out = x == 1 && !pop_time(a, h, n) ? 1 : 0;
    (n < U ? u : v).push_back(out);
  }
  return UPWord(Alphabet{2}, u, v);
}

std::size_t erase_stabilization(const UPWord& a, std::size_t k) {
  if (!t_member(a)) throw NotInT(a.to_string());
  std::size_t U = a.transient().size(), V = a.period().size();
  std::size_t n0 = 0, seen = 0;
  // Each period carries at least one 0/1 letter, so k letters lie within k periods.
  std::vector<long> h = surpluses(a, U + (k + 3) * V + 2);
  for (std::size_t n = 0; seen < k; ++n) {
    Letter x = a.at(n);
    if (x == 2) continue;
    ++seen;
    n0 = std::max(n0, n + 1);
    if (x == 1)
      if (auto m = pop_time(a, h, n)) n0 = std::max(n0, *m);
  }
  return n0;
}

bool e_member(const Word& s) {
  if (s.empty() || !t_member(s)) return false;
  long n1 = std::count(s.begin(), s.end(), 1), n2 = std::count(s.begin(), s.end(), 2);
  if (n1 != n2) return false;
  Word e = erase(Word(s.begin(), s.end() - 1));
  return !e.empty() && e[0] == 1;
}

bool e_member_counting(const Word& s) {
  check3(s);
  if (s.empty() || s.front() != 1 || s.back() != 2) return false;
  long h = 0;
  for (std::size_t l = 0; l < s.size(); ++l) {
    h += delta(s[l]);
    if (l + 1 < s.size() && h <= 0) return false;
  }
  return h == 0;
}

bool a2_member(const Word& s) {
  check3(s);
  std::size_t n = s.size();
  if (s == Word{0} || e_member_counting(s)) return true;
  // ends[i]: j such that s[i..j) is 0 or an E word.
  std::vector<std::vector<std::size_t>> ends(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i] == 0) ends[i].push_back(i + 1);
    if (s[i] != 1) continue;
    long h = 0;
    for (std::size_t j = i; j < n; ++j) {
      h += delta(s[j]);
      if (h == 0) {
        ends[i].push_back(j + 1);
        break;
      }
    }
  }
  // block[p]: some c_0 1 ... c_k 1 covers s[0..p)
  std::vector<bool> block(n + 1, false), seen(n + 1, false);
  std::vector<std::size_t> starts{0};
  while (!starts.empty()) {
    std::size_t b = starts.back();
    starts.pop_back();
    // C-closure from b
    std::vector<bool> inC(n + 1, false);
    std::vector<std::size_t> st{b};
    inC[b] = true;
    while (!st.empty()) {
      std::size_t p = st.back();
      st.pop_back();
      if (p < n) {
        if (s[p] == 1 && !block[p + 1]) {
          block[p + 1] = true;
          if (!seen[p + 1]) {
            seen[p + 1] = true;
            starts.push_back(p + 1);
          }
        }
        for (std::size_t q : ends[p])
          if (!inC[q]) inC[q] = true, st.push_back(q);
      }
    }
  }
  return block[n] && n >= 2;
}

bool a2_omega_member(const UPWord& a) {
  if (!t_member(a)) return false;
  return !(erase_limit(a) == UPWord(Alphabet{2}, {1}, {0}));
}

// ---- one-counter machines ----

bool OneCounterAutomaton::accepts(const Word& s) const {
  std::set<std::pair<int, std::size_t>> cur{{start, 0}};
  for (Letter x : s) {
    std::set<std::pair<int, std::size_t>> next;
    for (auto [q, c] : cur)
      for (auto& t : transitions) {
        if (t.from != q || t.letter != x) continue;
        if ((t.test == CounterTransition::Test::Zero) != (c == 0)) continue;
        if (t.action < 0 && c == 0) continue;
        next.insert({t.to, c + t.action});
      }
    cur = std::move(next);
    if (cur.empty()) return false;
  }
  for (auto [q, c] : cur)
    if (accepting[static_cast<std::size_t>(q)] && c == 0) return true;
  return false;
}

json OneCounterAutomaton::to_json() const {
  json ts = json::array();
  for (auto& t : transitions)
    ts.push_back({{"from", states[static_cast<std::size_t>(t.from)]},
                  {"letter", t.letter},
                  {"test", t.test == CounterTransition::Test::Zero ? "zero" : "positive"},
                  {"action", t.action},
                  {"to", states[static_cast<std::size_t>(t.to)]}});
  json acc = json::array();
  for (std::size_t i = 0; i < states.size(); ++i)
    if (accepting[i]) acc.push_back(states[i]);
  return {{"name", name},
          {"alphabet", 3},
          {"states", states},
          {"start", states[static_cast<std::size_t>(start)]},
          {"accepting", acc},
          {"acceptance", "accepting state with counter zero"},
          {"transitions", ts}};
}

namespace {

using T = CounterTransition::Test;

// E-block reader: from `in` on letters 0/1/2 with a positive counter; a 2
// may also guess that the counter reached zero and move to `done`.
void e_block(std::vector<CounterTransition>& ts, int in, int done) {
  ts.push_back({in, 0, T::Positive, 0, in});
  ts.push_back({in, 1, T::Positive, +1, in});
  ts.push_back({in, 2, T::Positive, -1, in});
  ts.push_back({in, 2, T::Positive, -1, done});
}

// Boundary state inside a block of c_j 1: a 0 factor, an E factor, or the closing 1.
void c_boundary(std::vector<CounterTransition>& ts, int at, int stay, int e_in, int closed) {
  ts.push_back({at, 0, T::Zero, 0, stay});
  ts.push_back({at, 1, T::Zero, +1, e_in});
  ts.push_back({at, 1, T::Zero, 0, closed});
}

}  // namespace

OneCounterAutomaton counter_e() {
  OneCounterAutomaton m;
  m.name = "E";
  m.states = {"start", "inside", "accept"};
  m.accepting = {false, false, true};
  m.transitions.push_back({0, 1, T::Zero, +1, 1});
  e_block(m.transitions, 1, 2);
  return m;
}

OneCounterAutomaton counter_a() {
  OneCounterAutomaton m;
  m.name = "A";
  // S start; Z the word 0; EI/EA a whole E word; B0/X0 block 0 with c_0
  // nonempty; D1 after a bare first 1; DA just closed a block (accepting);
  // BK/XK later blocks.
  enum { S, Z, EI, EA, B0, X0, D1, DA, BK, XK };
  m.states = {"start", "zero", "e_inside", "e_accept", "c0_boundary", "c0_inside",
              "bare_one", "closed", "ck_boundary", "ck_inside"};
  m.accepting = {false, true, false, true, false, false, false, true, false, false};
  auto& ts = m.transitions;
  ts.push_back({S, 0, T::Zero, 0, Z});
  ts.push_back({S, 0, T::Zero, 0, B0});
  ts.push_back({S, 1, T::Zero, +1, EI});
  ts.push_back({S, 1, T::Zero, +1, X0});
  ts.push_back({S, 1, T::Zero, 0, D1});
  e_block(ts, EI, EA);
  c_boundary(ts, B0, B0, X0, DA);
  e_block(ts, X0, B0);
  c_boundary(ts, D1, BK, XK, DA);
  c_boundary(ts, DA, BK, XK, DA);
  c_boundary(ts, BK, BK, XK, DA);
  e_block(ts, XK, BK);
  return m;
}

namespace {

class CounterPrefix : public PrefixAutomaton {
 public:
  explicit CounterPrefix(OneCounterAutomaton m) : m_(std::move(m)) {}

  Key start() const override { return {m_.start, 0}; }

  void step(const Key& k, Letter x, std::vector<Key>& out) const override {
    for (auto& t : m_.transitions) {
      if (t.from != k[0] || t.letter != x) continue;
      if ((t.test == T::Zero) != (k[1] == 0)) continue;
      if (t.action < 0 && k[1] == 0) continue;
      out.push_back({t.to, k[1] + t.action});
    }
  }

  bool accept(const Key& k) const override { return m_.accepting[static_cast<std::size_t>(k[0])] && k[1] == 0; }

  // Search with the counter capped a little above its start; hitting the cap
  // counts as completable.
  bool completable(const Key& k, const std::vector<bool>& avail) const override {
    std::int64_t cap = k[1] + 2 * static_cast<std::int64_t>(m_.states.size()) + 2;
    std::set<Key> seen{k};
    std::vector<Key> stack{k}, tmp;
    while (!stack.empty()) {
      Key c = stack.back();
      stack.pop_back();
      if (accept(c)) return true;
      for (Letter x = 0; x < avail.size(); ++x) {
        if (!avail[x]) continue;
        tmp.clear();
        step(c, x, tmp);
        for (auto& n : tmp) {
          if (n[1] > cap) return true;
          if (seen.insert(n).second) stack.push_back(n);
        }
      }
    }
    return false;
  }

  bool oversized(const Key& k, std::uint64_t depth) const override { return static_cast<std::uint64_t>(k[1]) > depth; }

 private:
  OneCounterAutomaton m_;
};

}  // namespace

std::shared_ptr<const PrefixAutomaton> counter_prefix_automaton(OneCounterAutomaton m) {
  return std::make_shared<CounterPrefix>(std::move(m));
}

Dict a2_dict() {
  Dict d;
  d.name = "A2";
  d.alphabet = 3;
  d.member = a2_member;
  d.automaton = counter_prefix_automaton(counter_a());
  return d;
}

// ---- gallery ----

namespace {

std::size_t up_bound(const UPWord& a, std::size_t block) {
  return a.transient().size() + block * a.period().size() + block;
}

bool starts_with(const UPWord& a, std::size_t from, const Word& w) {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (a.at(from + i) != w[i]) return false;
  return true;
}

bool period_has_one(const UPWord& a) { return std::count(a.period().begin(), a.period().end(), 1) > 0; }

bool starts(const Word& s, const Word& p) { return s.size() >= p.size() && std::equal(p.begin(), p.end(), s.begin()); }

Dict gallery_dict(std::string name, std::function<bool(const Word&)> member, std::vector<std::vector<int>> trans, std::vector<bool> acc) {
  Dict d;
  d.name = std::move(name);
  d.alphabet = 2;
  d.member = std::move(member);
  d.automaton = table_automaton(std::move(trans), std::move(acc));
  return d;
}

}  // namespace

std::vector<std::string> gallery_names() { return {"delta1", "sigma1", "pi1", "pi2", "d2sigma1", "d2sigma2"}; }

GalleryEntry gallery(const std::string& name) {
  GalleryEntry g;
  g.name = name;
  if (name == "delta1") {
    g.claim = "A = {s : 0 prefix of s or 11 prefix of s}; A^inf = 2^omega minus N_10";
    // 0 start, 1 read "1", 2 inside
    g.dict = gallery_dict(name, [](const Word& s) { return starts(s, {0}) || starts(s, {1, 1}); },
                          {{2, 1}, {-1, 2}, {2, 2}}, {false, false, true});
    g.exact_decider = [](const UPWord& a) { return !(a.at(0) == 1 && a.at(1) == 0); };
  } else if (name == "sigma1") {
    g.claim = "A = {s : 0 prefix of s or 10^k1 prefix of s}; A^inf = 2^omega minus {10^omega}";
    g.dict = gallery_dict(
        name,
        [](const Word& s) {
          if (starts(s, {0})) return true;
          if (!starts(s, {1})) return false;
          auto it = std::find(s.begin() + 1, s.end(), 1);
          return it != s.end();
        },
        {{2, 1}, {1, 2}, {2, 2}}, {false, false, true});
    g.exact_decider = [](const UPWord& a) { return !(a == UPWord(Alphabet{2}, {1}, {0})); };
  } else if (name == "pi1") {
    g.claim = "A = {0}; A^inf = {0^omega}";
    g.dict = gallery_dict(name, [](const Word& s) { return s == Word{0}; }, {{1, -1}, {-1, -1}}, {false, true});
    g.exact_decider = [](const UPWord& a) { return a == UPWord(Alphabet{2}, {}, {0}); };
  } else if (name == "pi2") {
    g.claim = "A = {0^k 1}; A^inf = P_infinity";
    g.dict = gallery_dict(
        name, [](const Word& s) { return !s.empty() && s.back() == 1 && std::count(s.begin(), s.end(), 1) == 1; },
        {{0, 1}, {-1, -1}}, {false, true});
    g.exact_decider = period_has_one;
  } else if (name == "d2sigma1") {
    g.claim =
        "A = {s : 0 prefix of s, or (101)^q 111 prefix of s, or s = 100}; A^inf = union over p of "
        "[N_{(100)^p 0} u union over q of N_{(100)^p (101)^q 111}] u {(100)^omega}";
    // 0 S, 1 "1", 2 "10", 3 "100" (final), 4 "11", 5 B (after (101)^q, q>=1),
    // 6 B1, 7 B10, 8 B11, 9 inside
    g.dict = gallery_dict(
        name,
        [](const Word& s) {
          if (starts(s, {0}) || s == Word{1, 0, 0}) return true;
          for (std::size_t p = 0; p + 3 <= s.size(); p += 3) {
            if (starts(Word(s.begin() + p, s.end()), {1, 1, 1})) return true;
            if (!(s[p] == 1 && s[p + 1] == 0 && s[p + 2] == 1)) return false;
          }
          return false;
        },
        {{9, 1}, {2, 4}, {3, 5}, {-1, -1}, {-1, 9}, {-1, 6}, {7, 8}, {-1, 5}, {-1, 9}, {9, 9}},
        {false, false, false, true, false, false, false, false, false, true});
    g.exact_decider = [](const UPWord& a) {
      const Word hdd{1, 0, 0}, hdh{1, 0, 1}, hhh{1, 1, 1};
      if (a == UPWord(Alphabet{2}, {}, hdd)) return true;
      std::size_t limit = up_bound(a, 3);
      for (std::size_t p = 0; 3 * p <= limit; ++p) {
        if (p > 0 && !starts_with(a, 3 * (p - 1), hdd)) break;
        std::size_t at = 3 * p;
        if (a.at(at) == 0) return true;
        for (std::size_t q = 0; 3 * q <= limit + 3; ++q) {
          if (q > 0 && !starts_with(a, at + 3 * (q - 1), hdh)) break;
          if (starts_with(a, at + 3 * q, hhh)) return true;
        }
      }
      return false;
    };
  } else if (name == "d2sigma2") {
    g.claim =
        "A = {s : 11 prefix of s, or s = 0}; A^inf = ({0^omega} u union over p of N_{0^p 11}) n "
        "[(2^omega minus P_infinity) u {alpha : infinitely many n with alpha(n) = alpha(n+1) = 1}]";
    // 0 S, 1 "0" (final), 2 "1", 3 inside
    g.dict = gallery_dict(name, [](const Word& s) { return s == Word{0} || starts(s, {1, 1}); },
                          {{1, 2}, {-1, -1}, {-1, 3}, {3, 3}}, {false, true, false, true});
    g.exact_decider = [](const UPWord& a) {
      bool first;
      if (a == UPWord(Alphabet{2}, {}, {0})) {
        first = true;
      } else {
        std::size_t p = 0;
        while (a.at(p) == 0) ++p;
        first = a.at(p + 1) == 1;
      }
      const Word& v = a.period();
      bool pairs = false;
      for (std::size_t i = 0; i < v.size(); ++i) pairs = pairs || (v[i] == 1 && v[(i + 1) % v.size()] == 1);
      return first && (!period_has_one(a) || pairs);
    };
  } else {
    throw UnknownName("gallery entry '" + name + "'");
  }
  return g;
}

}  // namespace omegaforge
