#include "omegaforge/evaluator.hpp"

#include <algorithm>

namespace omegaforge {

std::string to_string(Truth3 t) {
  switch (t) {
    case Truth3::True: return "true";
    case Truth3::False: return "false";
    case Truth3::Unknown: return "unknown";
  }
  return "?";
}

namespace {

Letter component_letter(const Component& c, std::uint64_t p) {
  if (auto* u = std::get_if<UPWord>(&c)) return u->at(p);
  return std::get<ProgramWord>(c).at(p);
}

// Kleene value of one cylinder template under env; positions at or past
// `depth` are unread (pass ~0 for exact reads).
Truth3 atom_truth(const Atom& a, const SpaceDesc& s, const ProductPoint& x, const Env& env, std::uint64_t depth) {
  Truth3 r = Truth3::True;
  if (a.empty) {
    r = Truth3::False;
  } else {
    std::size_t q = 0, n = 0;
    for (std::size_t k = 0; k < s.factors.size() && r != Truth3::False; ++k) {
      if (s.factors[k].is_seq()) {
        const Pattern& pat = a.pats[q++];
        if (pat.trivial()) continue;
        Word w = pat.instantiate(env);
        for (std::uint64_t p = 0; p < w.size(); ++p) {
          if (w[p] == kAny) continue;
          if (p >= depth) {
            r = Truth3::Unknown;
            continue;
          }
          if (component_letter(x[k], p) != w[p]) {
            r = Truth3::False;
            break;
          }
        }
      } else if (auto& e = a.nats[n++]) {
        if (e->eval(env) != std::get<std::uint64_t>(x[k])) r = Truth3::False;
      }
    }
  }
  return a.negated ? t_not(r) : r;
}

Truth3 leaf_truth(const Leaf& l, const SpaceDesc& s, const ProductPoint& x, const Env& env, std::uint64_t depth) {
  Truth3 r = Truth3::True;
  for (auto& a : l) {
    r = t_and(r, atom_truth(a, s, x, env, depth));
    if (r == Truth3::False) break;
  }
  return r;
}

ProductPoint join(const ProductPoint& a, const ProductPoint& b) {
  ProductPoint r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

// ---- exact path ----

struct Bounds {
  std::uint64_t U = 0, V = 1, nat = 0;
};

void scan_point(const ProductPoint& x, Bounds& b) {
  for (auto& c : x) {
    if (auto* u = std::get_if<UPWord>(&c)) {
      b.U = std::max<std::uint64_t>(b.U, u->transient().size());
      b.V = lcm_u64(b.V, u->period().size());
    } else if (auto* n = std::get_if<std::uint64_t>(&c)) {
      b.nat = std::max(b.nat, *n);
    }
  }
}

void scan_family(const Family& f, Bounds& b);

void scan_code(const Code& c, Bounds& b) {
  if (c.inner) return scan_code(*c.inner, b);
  scan_family(c.family, b);
}

void scan_family(const Family& f, Bounds& b) {
  for (auto& p : f.parts) {
    if (p.kind == Part::Kind::Schema) {
      if (p.bound) b.nat = std::max(b.nat, p.bound->c);
      scan_family(*p.body, b);
    }
    if (p.kind != Part::Kind::Leaf) continue;
    if (p.code) scan_code(*p.code, b);
    for (auto& a : p.leaf) {
      for (auto& n : a.nats)
        if (n) b.nat = std::max(b.nat, n->c);
      for (auto& pat : a.pats)
        for (auto& s : pat.segs) b.nat = std::max<std::uint64_t>(b.nat, s.count.c * s.block.size());
    }
  }
}

class Exact {
 public:
  Exact(const Code& c, const ProductPoint& x) {
    Bounds b;
    scan_point(x, b);
    scan_code(c, b);
    // Membership of an instance is periodic in each schema variable with
    // period V once the variable passes the transient and Nat data.
    std::uint64_t depth = schema_depth(c);
    range_ = std::max(b.U + b.V, b.nat + 1) + (b.V + 2) * (depth + 2);
  }

  bool holds(const Code& c, const ProductPoint& x, Env& env) const {
    switch (c.kind) {
      case Code::Kind::Basic:
        return any(c.family, x, env, [&](const Part& p) { return leaf_truth(p.leaf, c.space, x, env, ~0ULL) == Truth3::True; });
      case Code::Kind::UnionCompl:
        return any(c.family, x, env, [&](const Part& p) { return !holds(*p.code, x, env); });
      case Code::Kind::Mapped: return nested(*c.inner, c.map->apply(x), env);
      case Code::Kind::Fixed: return nested(*c.inner, join(c.fixed, x), env);
    }
    return false;
  }

 private:
  bool nested(const Code& inner, const ProductPoint& y, Env& env) const {
    if (!all_up(y)) throw NotExactlyEvaluable("fixed component is a program word");
    Exact sub(inner, y);
    sub.range_ = std::max(sub.range_, range_);
    return sub.holds(inner, y, env);
  }

  template <class Pred>
  bool any(const Family& f, const ProductPoint& x, Env& env, const Pred& pred) const {
    for (auto& p : f.parts) {
      switch (p.kind) {
        case Part::Kind::Leaf:
          if (pred(p)) return true;
          break;
        case Part::Kind::Special:
          if (p.special->exact_exists(x)) return true;
          break;
        case Part::Kind::Schema: {
          std::uint64_t hi = range_;
          if (p.bound) hi = std::min(hi, p.bound->eval(env));
          for (std::uint64_t v = 0; v < hi; ++v) {
            env.push(p.var, v);
            bool hit = any(*p.body, x, env, pred);
            env.pop();
            if (hit) return true;
          }
          break;
        }
      }
    }
    return false;
  }

  std::uint64_t range_ = 0;
};

// ---- budgeted path ----

Truth3 eval_b(const Code& c, const ProductPoint& x, const Env& env, const Budget& b) {
  switch (c.kind) {
    case Code::Kind::Mapped: return eval_b(*c.inner, c.map->apply(x), env, b);
    case Code::Kind::Fixed: return eval_b(*c.inner, join(c.fixed, x), env, b);
    default: break;
  }
  Enumeration en = enumerate(c.family, env, b.index_bound);
  Truth3 r = Truth3::False;
  for (auto& e : en.items) {
    Env local = env;
    for (auto& [v, val] : e.binds) local.push(v, val);
    const Part& p = e.leaf();
    Truth3 t = c.kind == Code::Kind::Basic ? leaf_truth(p.leaf, c.space, x, local, b.depth)
                                           : t_not(eval_b(*p.code, x, local, b));
    r = t_or(r, t);
    if (r == Truth3::True) return r;
  }
  if (!en.complete) r = t_or(r, Truth3::Unknown);
  return r;
}

}  // namespace

bool eval_exact_up(const Code& c, const ProductPoint& x, const Env& env) {
  check_point(c.space, x);
  if (!all_up(x)) throw NotExactlyEvaluable("point has a program-word component");
  Env e = env;
  return Exact(c, x).holds(c, x, e);
}

bool eval_exact_up(const Code& c, const ProductPoint& x) { return eval_exact_up(c, x, Env{}); }

Truth3 eval_budgeted(const Code& c, const ProductPoint& x, const Budget& b) {
  check_point(c.space, x);
  return eval_b(c, x, Env{}, b);
}

Truth3 eval(const Code& c, const ProductPoint& x, const Budget& b) {
  check_point(c.space, x);
  if (all_up(x)) return truth(eval_exact_up(c, x));
  return eval_b(c, x, Env{}, b);
}

namespace {

std::vector<bool> brute_set(const Code& c, std::size_t d, std::uint64_t k) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < d; ++i) n *= k;
  if (c.kind == Code::Kind::Mapped || c.kind == Code::Kind::Fixed)
    throw NotRepresentable("cylinder oracle does not handle wrapped codes");
  std::vector<bool> out(n, false);
  for (auto& p : c.family.parts) {
    if (p.kind != Part::Kind::Leaf) throw NotRepresentable("cylinder oracle needs finite families");
    std::vector<bool> s;
    if (c.kind == Code::Kind::UnionCompl) {
      s = brute_set(*p.code, d, k);
      s.flip();
    } else {
      s.assign(n, true);
      for (auto& a : p.leaf) {
        if (!a.concrete()) throw NotRepresentable("cylinder oracle needs concrete cylinders");
        Word w = a.pats[0].instantiate(Env{});
        if (w.size() > d) throw DepthTooSmall("cylinder of depth " + std::to_string(w.size()) + " exceeds " + std::to_string(d));
        for (std::size_t idx = 0; idx < n; ++idx) {
          bool in = !a.empty;
          std::size_t rest = idx;
          // most significant digit is position 0
          for (std::size_t pos = d; pos-- > 0 && in;) {
            Letter x = rest % k;
            rest /= k;
            if (pos < w.size() && w[pos] != kAny && w[pos] != x) in = false;
          }
          if (in == a.negated) s[idx] = false;
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      if (s[i]) out[i] = true;
  }
  return out;
}

}  // namespace

std::vector<Word> brute_cylinders(const Code& c, std::size_t d) {
  if (c.space.factors.size() != 1 || c.space.factors[0].kind != FactorKind::Finite)
    throw SpaceMismatch("cylinder oracle needs a single finite-alphabet factor");
  std::uint64_t k = c.space.factors[0].size;
  std::vector<bool> s = brute_set(c, d, k);
  std::vector<Word> all = all_words(Alphabet{k}, d), out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (s[i]) out.push_back(all[i]);
  return out;
}

}  // namespace omegaforge
