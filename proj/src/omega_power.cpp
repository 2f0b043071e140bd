#include "omegaforge/omega_power.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace omegaforge {

// ---- pairs ----

std::uint64_t m_bound(std::uint64_t j) {
  if (j > 30) throw std::overflow_error("M_j overflows for j = " + std::to_string(j));
  return ((std::uint64_t{1} << (2 * (j + 1))) - 4) / 3;
}

std::optional<std::uint64_t> m_index(std::uint64_t n) {
  for (std::uint64_t j = 0; j <= 30; ++j) {
    std::uint64_t m = m_bound(j);
    if (m == n) return j;
    if (m > n) break;
  }
  return std::nullopt;
}

PairWords q_pair(std::uint64_t n) {
  PairWords q;
  if (n == 0) return q;
  std::uint64_t k = 1;
  while (m_bound(k) < n) ++k;
  std::uint64_t x = n - m_bound(k - 1) - 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    std::uint64_t d = (x >> (2 * (k - 1 - i))) & 3;
    q.t.push_back(d >> 1);
    q.s.push_back(d & 1);
  }
  return q;
}

std::uint64_t q_index(const Word& t, const Word& s) {
  if (t.size() != s.size()) throw LengthMismatch("pair coordinates differ in length");
  if (t.empty()) return 0;
  std::uint64_t x = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 1 || s[i] > 1) throw SpaceMismatch("pair letters must be binary");
    x = 4 * x + 2 * t[i] + s[i];
  }
  return m_bound(t.size() - 1) + 1 + x;
}

// ---- transition trees ----

TransitionTree TransitionTree::custom(std::string label, std::function<bool(const Word&, const Word&)> pred) {
  TransitionTree r(Kind::Custom);
  r.label_ = std::move(label);
  r.pred_ = std::make_shared<const std::function<bool(const Word&, const Word&)>>(std::move(pred));
  return r;
}

TransitionTree TransitionTree::from_pairs(const std::vector<PairWords>& pairs) {
  for (auto& p : pairs)
    if (p.t.size() != p.s.size()) throw LengthMismatch("tree pair coordinates differ in length");
  auto store = std::make_shared<const std::vector<PairWords>>(pairs);
  TransitionTree r = custom("pairs", [store](const Word& t, const Word& s) {
    for (auto& p : *store)
      if (p.t.size() >= t.size() && std::equal(t.begin(), t.end(), p.t.begin()) && std::equal(s.begin(), s.end(), p.s.begin()))
        return true;
    return false;
  });
  r.pairs_ = store;
  return r;
}

TransitionTree TransitionTree::from_json(const json& j) {
  std::string k = j.at("kind").get<std::string>();
  if (k == "full") return full();
  if (k == "diagonal") return diagonal();
  if (k == "empty") return empty();
  if (k == "pairs") {
    std::vector<PairWords> ps;
    for (auto& p : j.at("pairs"))
      ps.push_back({word_from_string(p.at(0).get<std::string>(), Alphabet{2}),
                    word_from_string(p.at(1).get<std::string>(), Alphabet{2})});
    return from_pairs(ps);
  }
  throw ParseError("tree kind '" + k + "' cannot be read back; rebuild it from its construction");
}

bool TransitionTree::contains(const Word& t, const Word& s) const {
  if (t.size() != s.size()) return false;
  switch (kind_) {
    case Kind::Full: return true;
    case Kind::Diagonal: return t == s;
    case Kind::Empty: return t.empty();
    case Kind::Custom: return (*pred_)(t, s);
  }
  return false;
}

bool TransitionTree::contains(std::uint64_t n) const {
  PairWords q = q_pair(n);
  return contains(q.t, q.s);
}

bool TransitionTree::accepting(std::uint64_t n) const {
  PairWords q = q_pair(n);
  return !q.t.empty() && q.t.back() == 1 && contains(q.t, q.s);
}

json TransitionTree::to_json() const {
  switch (kind_) {
    case Kind::Full: return {{"kind", "full"}};
    case Kind::Diagonal: return {{"kind", "diagonal"}};
    case Kind::Empty: return {{"kind", "empty"}};
    case Kind::Custom: break;
  }
  if (pairs_) {
    json ps = json::array();
    for (auto& p : *pairs_) ps.push_back({word_to_string(p.t, Alphabet{2}), word_to_string(p.s, Alphabet{2})});
    return {{"kind", "pairs"}, {"pairs", ps}};
  }
  return {{"kind", "custom"}, {"label", label_}};
}

std::optional<int> TransitionTree::rclass(const Word& t, const Word& s) const {
  if (!contains(t, s)) return std::nullopt;
  if (kind_ == Kind::Custom) throw std::logic_error("custom trees have no finite congruence");
  return 0;
}

std::optional<int> TransitionTree::rstep(int cls, Letter tb, Letter sb) const {
  (void)cls;
  switch (kind_) {
    case Kind::Full: return 0;
    case Kind::Diagonal: return tb == sb ? std::optional<int>(0) : std::nullopt;
    case Kind::Empty: return std::nullopt;
    case Kind::Custom: break;
  }
  throw std::logic_error("custom trees have no finite congruence");
}

// ---- transition system ----

bool ts_edge(std::uint64_t n, Letter m, std::uint64_t p) {
  if (m > 1) return false;
  PairWords a = q_pair(n), b = q_pair(p);
  if (b.t.size() != a.t.size() + 1) return false;
  Word s = a.s;
  s.push_back(m);
  return b.s == s && std::equal(a.t.begin(), a.t.end(), b.t.begin());
}

std::vector<std::uint64_t> ts_step(const TransitionTree& r, std::uint64_t n, Letter m) {
  std::vector<std::uint64_t> out;
  if (m > 1) return out;
  PairWords a = q_pair(n);
  a.s.push_back(m);
  for (Letter tb = 0; tb < 2; ++tb) {
    a.t.push_back(tb);
    if (r.contains(a.t, a.s)) out.push_back(q_index(a.t, a.s));
    a.t.pop_back();
  }
  return out;
}

std::vector<Run> ts_run(const TransitionTree& r, const UPWord& alpha, std::size_t depth) {
  if (depth > 24) throw DepthTooSmall("run forests are limited to depth 24");
  std::vector<Run> out;
  Run cur;
  cur.states.push_back(0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == depth) {
      out.push_back(cur);
      return;
    }
    auto next = ts_step(r, cur.states.back(), alpha.at(i));
    if (next.empty()) {
      out.push_back(cur);
      return;
    }
    for (auto p : next) {
      bool hit = r.accepting(p);
      cur.states.push_back(p);
      cur.hits += hit;
      rec(i + 1);
      cur.hits -= hit;
      cur.states.pop_back();
    }
  };
  rec(0);
  return out;
}

std::string export_dot(const TransitionTree& r, std::size_t depth) {
  if (depth > 8) throw DepthTooSmall("dot export is limited to depth 8");
  std::ostringstream os;
  os << "digraph transitions {\n  rankdir=LR;\n";
  std::set<std::uint64_t> seen{0};
  std::vector<std::uint64_t> layer{0};
  std::vector<std::string> edges;
  auto node = [&](std::uint64_t n) {
    PairWords q = q_pair(n);
    os << "  n" << n << " [label=\"" << n << "\\n(" << word_to_string(q.t, Alphabet{2}) << ","
       << word_to_string(q.s, Alphabet{2}) << ")\"" << (r.accepting(n) ? ", shape=doublecircle" : "") << "];\n";
  };
  node(0);
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<std::uint64_t> next;
    for (auto n : layer)
      for (Letter m = 0; m < 2; ++m)
        for (auto p : ts_step(r, n, m)) {
          edges.push_back("  n" + std::to_string(n) + " -> n" + std::to_string(p) + " [label=\"" + std::to_string(m) + "\"];\n");
          if (seen.insert(p).second) {
            node(p);
            next.push_back(p);
          }
        }
    layer = std::move(next);
  }
  for (auto& e : edges) os << e;
  os << "}\n";
  return os.str();
}

// ---- K ----

bool k_member(std::uint64_t n, std::uint64_t j, const Word& w) {
  std::size_t p = 0;
  auto run = [&](std::uint64_t len, Letter x) {
    for (std::uint64_t k = 0; k < len && p < w.size(); ++k, ++p)
      if (w[p] != x) return false;
    return true;
  };
  if (!run(n, kRun)) return false;
  for (std::uint64_t i = 0; p < w.size(); ++i) {
    if (w[p++] > 1) return false;
    std::uint64_t l = m_bound(j + i + 1);
    if (!run(l, kRun) || !run(1, kMark) || !run(l, kRun)) return false;
  }
  return true;
}

bool k_member(std::uint64_t, std::uint64_t, const UPWord&) { return false; }

ProgramWord k_word(KTail shape) {
  if (alphabet_of(shape.alpha).size != 2) throw SpaceMismatch("K letters must come from 2^omega");
  auto sh = std::make_shared<const KTail>(shape);
  ProgramWord w;
  w.alphabet = Alphabet{4};
  w.gen = [sh](std::uint64_t p) -> Letter {
    if (p < sh->head.size()) return sh->head[p];
    std::uint64_t q = p - sh->head.size();
    for (std::uint64_t i = 0;; ++i) {
      std::uint64_t l = m_bound(sh->j + i + 1), len = 2 * l + 2;
      if (q < len) {
        if (q == 0) return letter_at(sh->alpha, i);
        return q == l + 1 ? kMark : kRun;
      }
      q -= len;
    }
  };
  w.shape = shape;
  return w;
}

ProgramWord phi_inv(std::uint64_t n, std::uint64_t j, const OmegaWord& alpha) {
  if (n > m_bound(j)) throw NotInK("N = " + std::to_string(n) + " exceeds M_" + std::to_string(j));
  return k_word(KTail{Word(n, kRun), j, alpha});
}

Word phi(std::uint64_t n, std::uint64_t j, const OmegaWord& gamma, std::size_t count) {
  std::uint64_t len = n;
  for (std::size_t i = 0; i < count; ++i) len += 2 * m_bound(j + i + 1) + 2;
  Word w = prefix_of(gamma, len);
  if (!k_member(n, j, w)) throw NotInK("word leaves K_{" + std::to_string(n) + "," + std::to_string(j) + "}");
  Word out;
  std::uint64_t p = n;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(w[p]);
    p += 2 * m_bound(j + i + 1) + 2;
  }
  return out;
}

// ---- shapes ----

namespace {

struct Lenient {
  bool ok = true;
  ShapeParse parse;      // complete blocks only
  bool complete = true;  // no trailing partial block
};

// Runs are maximal, so the parse is forced letter by letter.
Lenient parse_lenient(const Word& s) {
  Lenient r;
  std::size_t p = 0;
  auto run = [&] {
    std::uint64_t c = 0;
    while (p < s.size() && s[p] == kRun) ++p, ++c;
    return c;
  };
  r.parse.n = run();
  while (p < s.size()) {
    Block b;
    b.m = s[p++];
    if (b.m > 1) {
      r.ok = false;
      return r;
    }
    b.p = run();
    if (p == s.size()) {
      r.complete = false;
      return r;
    }
    if (s[p++] != kMark) {
      r.ok = false;
      return r;
    }
    b.r = run();
    r.parse.blocks.push_back(b);
  }
  return r;
}

bool p_values_ok(const ShapeParse& sp) {
  for (auto& b : sp.blocks)
    if (!m_index(b.p)) return false;
  return true;
}

// l is a defect: P_l != R_l, or P_{l+1} does not follow P_l.
bool defect(const std::vector<Block>& bs, std::size_t l) {
  if (bs[l].p != bs[l].r) return true;
  auto j = m_index(bs[l].p);
  return !j || bs[l + 1].p != m_bound(*j + 1);
}

}  // namespace

std::optional<ShapeParse> parse_shape(const Word& s) {
  Lenient r = parse_lenient(s);
  if (!r.ok || !r.complete) return std::nullopt;
  return r.parse;
}

Word render_shape(const ShapeParse& sp) {
  Word w(sp.n, kRun);
  for (auto& b : sp.blocks) {
    w.push_back(b.m);
    w.insert(w.end(), b.p, kRun);
    w.push_back(kMark);
    w.insert(w.end(), b.r, kRun);
  }
  return w;
}

MuMembership mu_member(const Word& s) {
  MuMembership r;
  auto sp = parse_shape(s);
  if (!sp || sp->blocks.size() < 2 || !p_values_ok(*sp)) return r;
  const auto& bs = sp->blocks;
  std::size_t l = bs.size() - 2;
  r.mu0 = bs[l].p != bs[l].r;
  r.mu1 = bs[l + 1].p != m_bound(*m_index(bs[l].p) + 1);
  return r;
}

bool pi_member(const Word& s, const TransitionTree& tree) {
  auto sp = parse_shape(s);
  if (!sp || sp->blocks.empty()) return false;
  const auto& bs = sp->blocks;
  auto j1 = m_index(bs[0].p);
  if (!j1 || *j1 == 0) return false;
  std::uint64_t j = *j1 - 1;
  if (j + bs.size() > 30 || sp->n > m_bound(j)) return false;
  std::size_t l = bs.size() - 1;
  for (std::size_t i = 0; i <= l; ++i) {
    std::uint64_t li = m_bound(j + i + 1);
    if (bs[i].p != li) return false;
    if (i < l && bs[i].r != li) return false;
  }
  std::uint64_t last = m_bound(j + l + 1);
  if (bs[l].r > last) return false;
  PairWords q0 = q_pair(sp->n), ql = q_pair(last - bs[l].r);
  if (ql.t.size() != q0.t.size() + l + 1) return false;
  if (!std::equal(q0.t.begin(), q0.t.end(), ql.t.begin())) return false;
  Word s1 = q0.s;
  for (auto& b : bs) s1.push_back(b.m);
  if (ql.s != s1) return false;
  return ql.t.back() == 1 && tree.contains(ql.t, ql.s);
}

bool suitable(const Word& t, std::uint64_t s, std::uint64_t j) {
  if (t.empty()) {
    if (s > m_bound(j)) return false;
  } else {
    if (!mu_member(t).any()) throw NotMuWord("t = " + word_to_string(t, Alphabet{4}));
    if (t.back() != kMark) return false;
  }
  for (Letter m = 0; m < 2; ++m) {
    Word w = t;
    w.insert(w.end(), s, kRun);
    w.push_back(m);
    w.insert(w.end(), m_bound(j + 1), kRun);
    w.push_back(kMark);
    if (mu_member(w).any()) return false;
  }
  return true;
}

std::vector<Word> p_prefixes(const Word& t, std::uint64_t s, std::uint64_t j, std::size_t len) {
  Word head = t;
  head.insert(head.end(), s, kRun);
  std::size_t blocks = 0;
  for (std::size_t covered = head.size(); covered < len; ++blocks) covered += 2 * m_bound(j + blocks + 1) + 2;
  std::set<Word> out;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << blocks); ++bits) {
    Word a(blocks);
    for (std::size_t i = 0; i < blocks; ++i) a[i] = (bits >> i) & 1;
    out.insert(k_word(KTail{head, j, UPWord(Alphabet{2}, a, {0})}).prefix(len));
  }
  if (blocks == 0) out.insert(Word(head.begin(), head.begin() + std::min(len, head.size())));
  return {out.begin(), out.end()};
}

namespace {

Decomposition decompose_blocks(const ShapeParse& sp) {
  if (!p_values_ok(sp)) throw NotInP("a pre-mark run is not of the form M_j");
  const auto& bs = sp.blocks;
  std::optional<std::size_t> last;
  for (std::size_t l = 0; l + 1 < bs.size(); ++l)
    if (defect(bs, l)) last = l;
  Decomposition d;
  if (!last) {
    std::uint64_t j0 = *m_index(bs[0].p);
    if (j0 == 0 || sp.n > m_bound(j0 - 1)) {
      d.kind = Decomposition::Kind::Outside;
      return d;
    }
    d.kind = Decomposition::Kind::Triple;
    d.s = d.n = sp.n;
    d.j_f = j0;
    d.j_p = j0 - 1;
    return d;
  }
  std::size_t l = *last;
  if (l + 2 >= bs.size()) throw std::logic_error("decompose needs two blocks past the last defect");
  ShapeParse head{sp.n, {bs.begin(), bs.begin() + l + 1}};
  d.kind = Decomposition::Kind::Triple;
  d.t = render_shape(head);
  d.t.push_back(bs[l + 1].m);
  d.t.insert(d.t.end(), bs[l + 1].p, kRun);
  d.t.push_back(kMark);
  d.s = bs[l + 1].r;
  d.j_f = *m_index(bs[l + 2].p);
  d.j_p = d.j_f - 1;
  d.n = std::min(d.s, m_bound(d.j_p));
  return d;
}

}  // namespace

Decomposition decompose(const Word& prefix) {
  Lenient r = parse_lenient(prefix);
  if (!r.ok || !p_values_ok(r.parse)) throw NotInP("prefix leaves the block shape");
  return {};
}

Decomposition decompose(const OmegaWord& gamma, const Budget& b) {
  if (auto* u = std::get_if<UPWord>(&gamma)) {
    const Word& v = u->period();
    if (std::find(v.begin(), v.end(), kMark) == v.end()) throw NotInP("only finitely many blocks");
    Lenient r = parse_lenient(u->prefix(u->transient().size() + 4 * v.size() + 2));
    if (!r.ok || !p_values_ok(r.parse)) throw NotInP("word leaves the block shape");
    // Block data repeats with the period, so defects recur forever.
    Decomposition d;
    d.kind = Decomposition::Kind::MuCandidate;
    return d;
  }
  const auto& pw = std::get<ProgramWord>(gamma);
  if (auto* kt = std::any_cast<KTail>(&pw.shape)) {
    Lenient h = parse_lenient(kt->head);
    if (!h.ok) throw NotInP("head leaves the block shape");
    // Head blocks plus three K blocks expose every defect: K blocks have none.
    std::size_t len = kt->head.size();
    for (std::size_t i = 0; i < 3; ++i) len += 2 * m_bound(kt->j + i + 1) + 2;
    Lenient r = parse_lenient(pw.prefix(len));
    if (!r.ok) throw NotInP("word leaves the block shape");
    return decompose_blocks(r.parse);
  }
  Lenient r = parse_lenient(pw.prefix(b.depth));
  if (!r.ok || !p_values_ok(r.parse)) throw NotInP("prefix leaves the block shape");
  return {};
}

// ---- E_N ----

bool en_member(std::uint64_t n, const UPWord& alpha, const BContext& ctx) {
  if (alpha.alphabet().size != 2) throw SpaceMismatch("E_N lives in 2^omega");
  PairWords q = q_pair(n);
  UPWord x = prepend(q.s, alpha);
  if (!ctx.in_b(x)) return false;
  return ctx.preimage_prefix(x, q.s.size()) == q.t;
}

}  // namespace omegaforge
