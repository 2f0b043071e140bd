#include <algorithm>
#include <deque>
#include <limits>
#include <set>

#include "omegaforge/borel.hpp"

namespace omegaforge {

namespace {

using Renamer = std::function<std::string(const std::string&)>;

Atom rename_atom(const Atom& a, const Renamer& f) {
  Atom r = a;
  for (auto& p : r.pats) p = p.rename(f);
  for (auto& n : r.nats)
    if (n) n = n->rename(f);
  return r;
}

CodePtr rename_code(const CodePtr& c, const Renamer& f);

Family rename_family(const Family& fam, const Renamer& f) {
  Family r;
  for (auto& p : fam.parts) {
    switch (p.kind) {
      case Part::Kind::Leaf:
        if (p.code) {
          r.parts.push_back(Part::of_code(rename_code(p.code, f)));
        } else {
          Leaf l;
          for (auto& a : p.leaf) l.push_back(rename_atom(a, f));
          r.parts.push_back(Part::of_leaf(std::move(l)));
        }
        break;
      case Part::Kind::Schema: {
        std::optional<Affine> b;
        if (p.bound) b = p.bound->rename(f);
        r.parts.push_back(Part::schema(f(p.var), b, rename_family(*p.body, f)));
        break;
      }
      case Part::Kind::Special: r.parts.push_back(p); break;
    }
  }
  return r;
}

CodePtr rename_code(const CodePtr& c, const Renamer& f) {
  switch (c->kind) {
    case Code::Kind::Basic: return make_basic(c->space, rename_family(c->family, f));
    case Code::Kind::UnionCompl: return make_unioncompl(c->space, rename_family(c->family, f));
    case Code::Kind::Mapped: return make_mapped(rename_code(c->inner, f), *c->map);
    case Code::Kind::Fixed: return make_fixed(rename_code(c->inner, f), c->fixed);
  }
  return c;
}

void collect_vars(const Family& fam, std::set<std::string>& out);

void collect_atom_vars(const Atom& a, std::set<std::string>& out) {
  for (auto& p : a.pats)
    for (auto& s : p.segs)
      for (auto& t : s.count.terms) out.insert(t.first);
  for (auto& n : a.nats)
    if (n)
      for (auto& t : n->terms) out.insert(t.first);
}

void collect_code_vars(const Code& c, std::set<std::string>& out) {
  if (c.inner) return collect_code_vars(*c.inner, out);
  collect_vars(c.family, out);
}

void collect_vars(const Family& fam, std::set<std::string>& out) {
  for (auto& p : fam.parts) {
    if (p.kind == Part::Kind::Leaf) {
      if (p.code) collect_code_vars(*p.code, out);
      for (auto& a : p.leaf) collect_atom_vars(a, out);
    } else if (p.kind == Part::Kind::Schema) {
      out.insert(p.var);
      if (p.bound)
        for (auto& t : p.bound->terms) out.insert(t.first);
      collect_vars(*p.body, out);
    }
  }
}

// Suffix of primes that makes every renamed variable avoid `taken`.
Renamer fresh_renamer(const std::set<std::string>& taken) {
  std::size_t k = 1;
  for (auto& v : taken) k = std::max(k, 1 + static_cast<std::size_t>(std::count(v.begin(), v.end(), '\'')));
  std::string suffix(k, '\'');
  return [suffix](const std::string& v) { return v + suffix; };
}

Family map_leaves(const Family& fam, const std::function<std::vector<Part>(const Part&)>& f) {
  Family r;
  for (auto& p : fam.parts) {
    switch (p.kind) {
      case Part::Kind::Leaf:
        for (auto& q : f(p)) r.parts.push_back(std::move(q));
        break;
      case Part::Kind::Schema: r.parts.push_back(Part::schema(p.var, p.bound, map_leaves(*p.body, f))); break;
      case Part::Kind::Special: throw NotRepresentable("cannot rewrite the members of a special family");
    }
  }
  return r;
}

void require_same_space(const std::vector<CodePtr>& cs) {
  for (auto& c : cs)
    if (!(c->space == cs[0]->space))
      throw SpaceMismatch(c->space.to_string() + " vs " + cs[0]->space.to_string());
}

struct SlotSplit {
  std::size_t seq_x = 0, nat_x = 0;
};

SlotSplit split_at(const SpaceDesc& s, std::size_t nx) {
  SlotSplit r;
  for (std::size_t i = 0; i < nx; ++i) (s.factors[i].is_seq() ? r.seq_x : r.nat_x)++;
  return r;
}

std::vector<std::size_t> seq_positions(const SpaceDesc& s) {
  std::vector<std::size_t> idx(s.factors.size());
  std::size_t q = 0, n = 0;
  for (std::size_t i = 0; i < s.factors.size(); ++i) idx[i] = s.factors[i].is_seq() ? q++ : n++;
  return idx;
}

}  // namespace

CodePtr complement_code(const CodePtr& c) { return make_unioncompl(c->space, Family::of_codes({c})); }

CodePtr promote_code(const CodePtr& c) {
  switch (c->kind) {
    case Code::Kind::UnionCompl: return c;
    case Code::Kind::Mapped:
      if (rank(*c) >= 2) return c;
      return make_mapped(promote_code(c->inner), *c->map);
    case Code::Kind::Fixed:
      if (rank(*c) >= 2) return c;
      return make_fixed(promote_code(c->inner), c->fixed);
    case Code::Kind::Basic: break;
  }
  const SpaceDesc& s = c->space;
  Family f = map_leaves(c->family, [&](const Part& p) {
    std::vector<Leaf> negs;
    for (auto& a : p.leaf) negs.push_back({a.negate()});
    return std::vector<Part>{Part::of_code(make_basic(s, Family::of_leaves(std::move(negs))))};
  });
  return make_unioncompl(s, std::move(f));
}

namespace {

using Combine = std::function<Part(const Part&, const Part&)>;

Family product_family(const Family& a, const Family& b, const Combine& comb);

std::vector<Part> product_part(const Part& pa, const Part& pb, const Combine& comb) {
  if (pa.kind == Part::Kind::Special || pb.kind == Part::Kind::Special)
    throw NotRepresentable("cannot intersect special families");
  if (pa.kind == Part::Kind::Schema)
    return {Part::schema(pa.var, pa.bound, product_family(*pa.body, Family{{pb}}, comb))};
  if (pb.kind == Part::Kind::Schema)
    return {Part::schema(pb.var, pb.bound, product_family(Family{{pa}}, *pb.body, comb))};
  return {comb(pa, pb)};
}

Family product_family(const Family& a, const Family& b, const Combine& comb) {
  Family r;
  for (auto& pa : a.parts)
    for (auto& pb : b.parts)
      for (auto& q : product_part(pa, pb, comb)) r.parts.push_back(std::move(q));
  return r;
}

Family concat_parts(const std::vector<CodePtr>& cs) {
  Family r;
  for (auto& c : cs) r.parts.insert(r.parts.end(), c->family.parts.begin(), c->family.parts.end());
  return r;
}

void require_plain(const std::vector<CodePtr>& cs) {
  for (auto& c : cs)
    if (c->kind == Code::Kind::Mapped || c->kind == Code::Kind::Fixed)
      throw NotRepresentable("boolean combination of a wrapped code");
}

}  // namespace

CodePtr bool_code(BoolOp op, const std::vector<CodePtr>& cs) {
  if (cs.empty()) throw Error("bool_code needs at least one code");
  require_same_space(cs);
  if (cs.size() == 1) return cs[0];
  require_plain(cs);
  const SpaceDesc& s = cs[0]->space;
  int top = 1;
  for (auto& c : cs) top = std::max(top, rank(*c));

  if (op == BoolOp::Union) {
    if (top == 1) return make_basic(s, concat_parts(cs));
    std::vector<CodePtr> ps;
    for (auto& c : cs) ps.push_back(promote_code(c));
    return make_unioncompl(s, concat_parts(ps));
  }

  std::vector<CodePtr> ps;
  for (auto& c : cs) ps.push_back(top == 1 ? c : promote_code(c));
  Family acc = ps[0]->family;
  for (std::size_t k = 1; k < ps.size(); ++k) {
    std::set<std::string> taken;
    collect_vars(acc, taken);
    Family other = rename_family(ps[k]->family, fresh_renamer(taken));
    if (top == 1) {
      acc = product_family(acc, other, [](const Part& x, const Part& y) {
        Leaf l = x.leaf;
        l.insert(l.end(), y.leaf.begin(), y.leaf.end());
        return Part::of_leaf(std::move(l));
      });
    } else {
      // (U not A_i) n (U not B_j) = U not (A_i u B_j)
      acc = product_family(acc, other, [](const Part& x, const Part& y) {
        return Part::of_code(bool_code(BoolOp::Union, {x.code, y.code}));
      });
    }
  }
  if (acc.parts.empty()) return empty_of_rank(s, top);
  return top == 1 ? make_basic(s, std::move(acc)) : make_unioncompl(s, std::move(acc));
}

// ---- sections ----

namespace {

bool x_slots_concrete(const Family& fam, const SlotSplit& sp);

bool code_x_concrete(const Code& c, const SlotSplit& sp) {
  if (c.kind == Code::Kind::Mapped || c.kind == Code::Kind::Fixed) return false;
  return x_slots_concrete(c.family, sp);
}

bool x_slots_concrete(const Family& fam, const SlotSplit& sp) {
  for (auto& p : fam.parts) {
    if (p.kind == Part::Kind::Special) return false;
    if (p.kind == Part::Kind::Schema && !x_slots_concrete(*p.body, sp)) return false;
    if (p.kind == Part::Kind::Leaf) {
      if (p.code && !code_x_concrete(*p.code, sp)) return false;
      for (auto& a : p.leaf) {
        for (std::size_t i = 0; i < sp.seq_x; ++i)
          if (!a.pats[i].concrete()) return false;
        for (std::size_t i = 0; i < sp.nat_x; ++i)
          if (a.nats[i] && !a.nats[i]->is_constant()) return false;
      }
    }
  }
  return true;
}

bool x_part_meets(const Atom& a, const ProductPoint& x, const SpaceDesc& s) {
  auto idx = seq_positions(s);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (s.factors[k].is_seq()) {
      Word w = a.pats[idx[k]].instantiate(Env{});
      for (std::size_t p = 0; p < w.size(); ++p) {
        if (w[p] == kAny) continue;
        Letter got = std::holds_alternative<UPWord>(x[k]) ? std::get<UPWord>(x[k]).at(p) : std::get<ProgramWord>(x[k]).at(p);
        if (got != w[p]) return false;
      }
    } else if (auto& n = a.nats[idx[k]]) {
      if (n->c != std::get<std::uint64_t>(x[k])) return false;
    }
  }
  return true;
}

Atom y_part(const Atom& a, const SlotSplit& sp) {
  Atom r;
  r.negated = a.negated;
  r.empty = a.empty;
  r.pats.assign(a.pats.begin() + sp.seq_x, a.pats.end());
  r.nats.assign(a.nats.begin() + sp.nat_x, a.nats.end());
  return r;
}

CodePtr section_rec(const CodePtr& c, const ProductPoint& x, const SpaceDesc& ys, const SlotSplit& sp) {
  if (c->kind == Code::Kind::UnionCompl) {
    Family f = map_leaves(c->family, [&](const Part& p) {
      return std::vector<Part>{Part::of_code(section_rec(p.code, x, ys, sp))};
    });
    return make_unioncompl(ys, std::move(f));
  }
  Family f = map_leaves(c->family, [&](const Part& p) {
    Leaf out;
    for (auto& a : p.leaf) {
      bool meets = a.empty || x_part_meets(a, x, c->space);
      if (a.empty) {
        out.push_back(y_part(a, sp));
      } else if (!a.negated) {
        if (!meets) return std::vector<Part>{};
        out.push_back(y_part(a, sp));
      } else if (meets) {
        out.push_back(y_part(a, sp));
      }
    }
    return std::vector<Part>{Part::of_leaf(std::move(out))};
  });
  return make_basic(ys, std::move(f));
}

}  // namespace

CodePtr section_code(const CodePtr& c, const ProductPoint& x) {
  if (x.empty() || x.size() >= c->space.factors.size())
    throw SpaceMismatch("section point must fix a proper nonempty prefix of the factors of " + c->space.to_string());
  SpaceDesc xs{std::vector<Factor>(c->space.factors.begin(), c->space.factors.begin() + x.size())};
  check_point(xs, x);
  SlotSplit sp = split_at(c->space, x.size());
  if (!code_x_concrete(*c, sp)) return make_fixed(c, x);
  return section_rec(c, x, c->space.drop_front(x.size()), sp);
}

// ---- pullbacks ----

namespace {

struct NeedsWrap {};

Pattern spread(const Pattern& p, std::uint64_t a, std::uint64_t b) {
  Pattern q;
  if (b) q.segs.push_back({Word{kAny}, Affine::constant(b)});
  for (auto& s : p.segs) {
    Word blk;
    for (Letter x : s.block) {
      blk.push_back(x);
      for (std::uint64_t r = 1; r < a; ++r) blk.push_back(kAny);
    }
    q.segs.push_back({blk, s.count});
  }
  q.normalize();
  return q;
}

// Merge two concrete patterns; false on conflict.
bool merge_into(Pattern& dst, const Pattern& src) {
  if (src.trivial()) return true;
  if (dst.trivial()) {
    dst = src;
    return true;
  }
  if (!dst.concrete() || !src.concrete()) throw NeedsWrap{};
  Word a = dst.instantiate(Env{}), b = src.instantiate(Env{});
  if (a.size() < b.size()) a.resize(b.size(), kAny);
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] == kAny) continue;
    if (a[i] != kAny && a[i] != b[i]) return false;
    a[i] = b[i];
  }
  dst = Pattern::literal(a);
  return true;
}

Atom pull_atom(const Atom& a, const LinearMap& f) {
  Atom r = Atom::full(f.from);
  r.negated = a.negated;
  r.empty = a.empty;
  if (a.empty) return r;
  auto from_idx = seq_positions(f.from);
  auto to_idx = seq_positions(f.to);
  for (std::size_t k = 0; k < f.outs.size(); ++k) {
    const auto& o = f.outs[k];
    if (f.to.factors[k].is_seq()) {
      const Pattern& p = a.pats[to_idx[k]];
      if (p.trivial()) continue;
      Pattern q;
      if (o.a == 0) {
        if (!p.concrete()) throw NeedsWrap{};
        Letter want = kAny;
        for (Letter x : p.instantiate(Env{})) {
          if (x == kAny) continue;
          if (want != kAny && want != x) {
            r.empty = true;
            return r;
          }
          want = x;
        }
        Word w(o.b + 1, kAny);
        w[o.b] = want;
        q = Pattern::literal(w);
      } else {
        q = spread(p, o.a, o.b);
      }
      if (!merge_into(r.pats[from_idx[o.src]], q)) {
        r.empty = true;
        return r;
      }
    } else if (a.nats[to_idx[k]]) {
      auto& dst = r.nats[from_idx[o.src]];
      const Affine& want = *a.nats[to_idx[k]];
      if (!dst) {
        dst = want;
      } else if (!(*dst == want)) {
        if (!dst->is_constant() || !want.is_constant()) throw NeedsWrap{};
        r.empty = true;
        return r;
      }
    }
  }
  return r;
}

CodePtr pull_rec(const CodePtr& c, const LinearMap& f) {
  if (c->kind == Code::Kind::UnionCompl) {
    Family fam = map_leaves(c->family, [&](const Part& p) {
      return std::vector<Part>{Part::of_code(pull_rec(p.code, f))};
    });
    return make_unioncompl(f.from, std::move(fam));
  }
  Family fam = map_leaves(c->family, [&](const Part& p) {
    Leaf l;
    for (auto& a : p.leaf) l.push_back(pull_atom(a, f));
    return std::vector<Part>{Part::of_leaf(std::move(l))};
  });
  return make_basic(f.from, std::move(fam));
}

void check_map(const LinearMap& f) {
  if (f.outs.size() != f.to.factors.size()) throw SpaceMismatch("map outputs do not match target space");
  for (std::size_t k = 0; k < f.outs.size(); ++k) {
    const auto& o = f.outs[k];
    if (o.src >= f.from.factors.size()) throw SpaceMismatch("map source factor out of range");
    if (f.to.factors[k].is_seq() != f.from.factors[o.src].is_seq())
      throw SpaceMismatch("map sends a Nat factor to a sequence factor or back");
  }
}

}  // namespace

CodePtr substitute_code(const CodePtr& c, const LinearMap& f) {
  check_map(f);
  if (!(c->space == f.to)) throw SpaceMismatch("code space " + c->space.to_string() + " vs map target " + f.to.to_string());
  if (has_opaque(*c)) return make_mapped(c, f);
  try {
    return pull_rec(c, f);
  } catch (const NeedsWrap&) {
    return make_mapped(c, f);
  }
}

namespace {

// Minimal source words s whose image meets the target pattern w.
std::vector<Word> pull_prefixes(const Word& w, const GeneralMap& g) {
  std::vector<Word> out;
  std::deque<Word> q{Word{}};
  std::uint64_t k = g.from.factors[0].size;
  while (!q.empty()) {
    Word s = std::move(q.front());
    q.pop_front();
    Word y = g.f(s);
    bool dead = false;
    std::size_t n = std::min(y.size(), w.size());
    for (std::size_t i = 0; i < n && !dead; ++i) dead = w[i] != kAny && y[i] != w[i];
    if (dead) continue;
    if (y.size() >= w.size()) {
      out.push_back(s);
      continue;
    }
    if (s.size() >= g.max_depth)
      throw PullbackNotRepresentable("preimage of a cylinder does not close within depth " + std::to_string(g.max_depth));
    for (Letter x = 0; x < k; ++x) {
      Word t = s;
      t.push_back(x);
      q.push_back(std::move(t));
    }
  }
  return out;
}

CodePtr pull_general(const CodePtr& c, const GeneralMap& g) {
  if (c->kind == Code::Kind::UnionCompl) {
    std::vector<CodePtr> kids;
    for (auto& p : c->family.parts) kids.push_back(pull_general(p.code, g));
    return make_unioncompl(g.from, Family::of_codes(std::move(kids)));
  }
  std::vector<Leaf> leaves;
  for (auto& p : c->family.parts) {
    Leaf fixed;
    std::vector<std::vector<Word>> choices;
    bool dead = false;
    for (auto& a : p.leaf) {
      if (a.empty) {
        Atom e = Atom::none(g.from);
        e.negated = a.negated;
        fixed.push_back(e);
        continue;
      }
      auto pre = pull_prefixes(a.pats[0].instantiate(Env{}), g);
      if (a.negated) {
        for (auto& s : pre) fixed.push_back(Atom::prefix(g.from, {s}).negate());
      } else if (pre.empty()) {
        dead = true;
      } else {
        choices.push_back(std::move(pre));
      }
    }
    if (dead) continue;
    std::vector<std::size_t> pick(choices.size(), 0);
    while (true) {
      Leaf l = fixed;
      for (std::size_t i = 0; i < choices.size(); ++i) l.push_back(Atom::prefix(g.from, {choices[i][pick[i]]}));
      leaves.push_back(std::move(l));
      std::size_t i = 0;
      while (i < pick.size() && ++pick[i] == choices[i].size()) pick[i++] = 0;
      if (i == pick.size()) break;
    }
  }
  return make_basic(g.from, Family::of_leaves(std::move(leaves)));
}

bool concrete_tree(const Code& c) {
  if (c.kind == Code::Kind::Mapped || c.kind == Code::Kind::Fixed) return false;
  for (auto& p : c.family.parts) {
    if (p.kind != Part::Kind::Leaf) return false;
    if (p.code && !concrete_tree(*p.code)) return false;
    for (auto& a : p.leaf)
      if (!a.concrete()) return false;
  }
  return true;
}

}  // namespace

CodePtr substitute_code(const CodePtr& c, const GeneralMap& g) {
  if (!(c->space == g.to)) throw SpaceMismatch("code space " + c->space.to_string() + " vs map target " + g.to.to_string());
  if (g.from.factors.size() != 1 || g.to.factors.size() != 1 || g.from.factors[0].kind != FactorKind::Finite ||
      g.to.factors[0].kind != FactorKind::Finite)
    throw PullbackNotRepresentable("general maps are supported between single finite-alphabet factors");
  if (!concrete_tree(*c)) throw PullbackNotRepresentable("general maps need finite families of concrete cylinders");
  return pull_general(c, g);
}

// ---- projection along a Nat factor ----

namespace {

bool nat0_constant(const Family& fam, std::uint64_t& mx);

bool code_nat0_constant(const Code& c, std::uint64_t& mx) {
  if (c.kind == Code::Kind::Mapped || c.kind == Code::Kind::Fixed) return false;
  return nat0_constant(c.family, mx);
}

bool nat0_constant(const Family& fam, std::uint64_t& mx) {
  for (auto& p : fam.parts) {
    if (p.kind == Part::Kind::Special) return false;
    if (p.kind == Part::Kind::Schema && !nat0_constant(*p.body, mx)) return false;
    if (p.kind == Part::Kind::Leaf) {
      if (p.code && !code_nat0_constant(*p.code, mx)) return false;
      for (auto& a : p.leaf) {
        if (a.empty || !a.nats[0]) continue;
        if (!a.nats[0]->is_constant()) return false;
        mx = std::max(mx, a.nats[0]->c);
      }
    }
  }
  return true;
}

Atom drop_nat0(const Atom& a) {
  Atom r = a;
  if (!r.nats.empty()) r.nats.erase(r.nats.begin());
  return r;
}

}  // namespace

CodePtr exists_code(const CodePtr& c) {
  if (c->space.factors.empty() || c->space.factors[0].kind != FactorKind::Nat)
    throw SpaceMismatch("first factor of " + c->space.to_string() + " is not Nat");
  SpaceDesc ys = c->space.drop_front(1);
  if (c->kind == Code::Kind::Basic && !has_opaque(*c)) {
    Family f = map_leaves(c->family, [&](const Part& p) {
      std::optional<Affine> n;
      for (auto& a : p.leaf)
        if (!a.empty && !a.negated && a.nats[0]) {
          n = a.nats[0];
          break;
        }
      Leaf out;
      for (auto& a : p.leaf) {
        if (a.empty || !a.nats[0]) {
          out.push_back(drop_nat0(a));
          continue;
        }
        if (!n) continue;  // some n avoids every excluded value
        const Affine& e = *a.nats[0];
        bool same = e == *n;
        if (!same && !(e.is_constant() && n->is_constant()))
          throw NotRepresentable("cannot compare Nat constraints " + e.to_string() + " and " + n->to_string());
        if (!a.negated) {
          if (!same) return std::vector<Part>{};
          out.push_back(drop_nat0(a));
        } else if (same) {
          out.push_back(drop_nat0(a));
        }
      }
      return std::vector<Part>{Part::of_leaf(std::move(out))};
    });
    return make_basic(ys, std::move(f));
  }
  std::uint64_t mx = 0;
  if (c->kind != Code::Kind::UnionCompl || !code_nat0_constant(*c, mx))
    throw NotRepresentable("projection needs constant Nat constraints below the top level");
  // fibres beyond the largest constant all agree
  Family all;
  for (std::uint64_t n = 0; n <= mx + 1; ++n) {
    CodePtr s = section_code(c, {Component{n}});
    all.parts.insert(all.parts.end(), s->family.parts.begin(), s->family.parts.end());
  }
  return make_unioncompl(ys, std::move(all));
}

// ---- countable unions ----

namespace {

Family flatten(const Family& members, const std::function<CodePtr(const CodePtr&)>& prep) {
  Family r;
  for (auto& p : members.parts) {
    switch (p.kind) {
      case Part::Kind::Leaf: {
        CodePtr c = prep(p.code);
        r.parts.insert(r.parts.end(), c->family.parts.begin(), c->family.parts.end());
        break;
      }
      case Part::Kind::Schema: r.parts.push_back(Part::schema(p.var, p.bound, flatten(*p.body, prep))); break;
      case Part::Kind::Special: throw NotRepresentable("union over a special family");
    }
  }
  return r;
}

void member_ranks(const Family& fam, const SpaceDesc& s, int& top) {
  for (auto& p : fam.parts) {
    if (p.kind == Part::Kind::Schema) member_ranks(*p.body, s, top);
    if (p.kind == Part::Kind::Leaf) {
      if (!p.code) throw Error("union family members must be codes");
      if (!(p.code->space == s)) throw SpaceMismatch(p.code->space.to_string() + " vs " + s.to_string());
      if (p.code->kind == Code::Kind::Mapped || p.code->kind == Code::Kind::Fixed)
        throw NotRepresentable("union over wrapped codes");
      top = std::max(top, rank(*p.code));
    }
  }
}

}  // namespace

CodePtr union_family_code(const SpaceDesc& s, const Family& members) {
  int top = 1;
  member_ranks(members, s, top);
  if (top == 1) return make_basic(s, flatten(members, [](const CodePtr& c) { return c; }));
  return make_unioncompl(s, flatten(members, [](const CodePtr& c) { return promote_code(c); }));
}

// ---- disjoint pieces ----

namespace {

Family disjoint_rank1(const CodePtr& c) {
  const SpaceDesc& s = c->space;
  const Family& fam = c->family;
  auto neg_leaves = [](const Leaf& l) {
    std::vector<Leaf> r;
    for (auto& a : l) r.push_back({a.negate()});
    return r;
  };
  if (fam.all_leaf()) {
    std::vector<CodePtr> pieces;
    for (std::size_t i = 0; i < fam.parts.size(); ++i) {
      std::vector<Leaf> leaves = neg_leaves(fam.parts[i].leaf);
      for (std::size_t l = 0; l < i; ++l) leaves.push_back(fam.parts[l].leaf);
      pieces.push_back(make_basic(s, Family::of_leaves(std::move(leaves))));
    }
    return Family::of_codes(std::move(pieces));
  }
  if (fam.parts.size() == 1 && fam.parts[0].kind == Part::Kind::Schema && fam.parts[0].body->parts.size() == 1 &&
      fam.parts[0].body->parts[0].kind == Part::Kind::Leaf) {
    const Part& sch = fam.parts[0];
    const Leaf& tmpl = sch.body->parts[0].leaf;
    std::set<std::string> taken;
    collect_vars(fam, taken);
    std::string v2 = fresh_renamer(taken)(sch.var);
    Leaf earlier;
    for (auto& a : tmpl) earlier.push_back(rename_atom(a, [&](const std::string& v) { return v == sch.var ? v2 : v; }));
    Family d = Family::of_leaves(neg_leaves(tmpl));
    d.parts.push_back(Part::schema(v2, Affine::var(sch.var), Family::of_leaves({earlier})));
    Family out;
    out.parts.push_back(Part::schema(sch.var, sch.bound, Family::of_codes({make_basic(s, std::move(d))})));
    return out;
  }
  throw NotRepresentable("disjoint pieces need a finite list or a single one-leaf schema");
}

std::vector<CodePtr> finite_codes(const Family& f) {
  if (!f.all_leaf()) throw NotRepresentable("disjoint pieces of a higher-rank code need finite child lists");
  std::vector<CodePtr> r;
  for (auto& p : f.parts) r.push_back(p.code);
  return r;
}

}  // namespace

Family disjointify(const CodePtr& c) {
  if (c->kind == Code::Kind::Mapped || c->kind == Code::Kind::Fixed)
    throw NotRepresentable("disjoint pieces of a wrapped code");
  if (c->kind == Code::Kind::Basic) return disjoint_rank1(c);
  std::vector<CodePtr> kids = finite_codes(c->family);
  std::vector<std::vector<CodePtr>> sub;  // complements are the pieces of rho(kid)
  for (auto& k : kids) sub.push_back(finite_codes(disjointify(k)));
  std::vector<CodePtr> pieces;
  for (std::size_t k = 0; k < kids.size(); ++k) {
    std::vector<std::size_t> pick(k, 0);
    bool any = std::all_of(sub.begin(), sub.begin() + k, [](const auto& v) { return !v.empty(); });
    while (any) {
      std::vector<CodePtr> parts{kids[k]};
      for (std::size_t l = 0; l < k; ++l) parts.push_back(sub[l][pick[l]]);
      pieces.push_back(bool_code(BoolOp::Union, parts));
      std::size_t l = 0;
      while (l < k && ++pick[l] == sub[l].size()) pick[l++] = 0;
      if (l == k) break;
    }
  }
  return Family::of_codes(std::move(pieces));
}

// ---- integer-coded neighbourhoods ----

std::uint64_t nbhd_mu(const BigNat& a, const BigNat& b) {
  if (a == 0) return 0;
  BigNat mu = (b + 1) / a;
  if (mu > 1000000) throw NotRepresentable("neighbourhood length too large");
  return mu.convert_to<std::uint64_t>();
}

NbhdResult basic_nbhd(const SpaceDesc& s, const BigNat& k) { return basic_nbhd_inner(s, seq_decode(k).at(1)); }

NbhdResult basic_nbhd_inner(const SpaceDesc& s, const BigNat& k1) {
  if (s.factors.size() != 1 || !(s.factors[0] == Factor::finite(2) || s.factors[0] == Factor::baire()))
    throw SpaceMismatch("basic neighbourhoods are defined on 2^omega and omega^omega, not " + s.to_string());
  SeqDecoded inner = seq_decode(k1);
  NbhdResult r;
  BigNat a = inner.at(1), b = inner.at(2);
  if (a == 0) {
    r.empty = true;
    return r;
  }
  r.mu = nbhd_mu(a, b);
  SeqDecoded letters = seq_decode(inner.at(0));
  bool cantor = s.factors[0].kind == FactorKind::Finite;
  for (std::uint64_t j = 0; j < r.mu; ++j) {
    BigNat x = letters.at(j);
    if (cantor) {
      r.letters.push_back(x == 0 ? 0 : 1);
    } else {
      if (x > std::numeric_limits<std::uint64_t>::max()) throw NotRepresentable("letter too large");
      r.letters.push_back(x.convert_to<std::uint64_t>());
    }
  }
  return r;
}

BigNat nbhd_inner_index(const std::vector<std::uint64_t>& letters, std::uint64_t a, std::uint64_t b) {
  return seq_encode({seq_encode_small(letters), BigNat(a), BigNat(b)});
}

}  // namespace omegaforge
