#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <set>

#include "omegaforge/borel.hpp"

namespace omegaforge {

std::string Factor::to_string() const {
  switch (kind) {
    case FactorKind::Finite: return std::to_string(size);
    case FactorKind::Baire: return "baire";
    case FactorKind::Nat: return "nat";
  }
  return "?";
}

SpaceDesc SpaceDesc::product(const SpaceDesc& a, const SpaceDesc& b) {
  SpaceDesc s = a;
  s.factors.insert(s.factors.end(), b.factors.begin(), b.factors.end());
  return s;
}

SpaceDesc SpaceDesc::drop_front(std::size_t n) const {
  if (n >= factors.size()) throw SpaceMismatch("cannot drop " + std::to_string(n) + " factors of " + to_string());
  return SpaceDesc{std::vector<Factor>(factors.begin() + n, factors.end())};
}

std::string SpaceDesc::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) out += " x ";
    out += factors[i].to_string();
  }
  return out;
}

namespace {

bool component_fits(const Factor& f, const Component& c) {
  if (f.kind == FactorKind::Nat) return std::holds_alternative<std::uint64_t>(c);
  if (auto* u = std::get_if<UPWord>(&c)) {
    if (f.kind == FactorKind::Baire) return true;
    auto ok = [&](const Word& w) {
      return std::all_of(w.begin(), w.end(), [&](Letter x) { return x < f.size; });
    };
    return ok(u->transient()) && ok(u->period());
  }
  if (auto* p = std::get_if<ProgramWord>(&c))
    return f.kind == FactorKind::Baire || (p->alphabet.bounded() && p->alphabet.size <= f.size);
  return false;
}

}  // namespace

void check_point(const SpaceDesc& s, const ProductPoint& x) {
  if (x.size() != s.factors.size())
    throw SpaceMismatch("point has " + std::to_string(x.size()) + " components, space " + s.to_string());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!component_fits(s.factors[i], x[i]))
      throw SpaceMismatch("component " + std::to_string(i) + " does not inhabit factor " + s.factors[i].to_string());
}

std::optional<std::uint64_t> Env::get(const std::string& v) const {
  for (auto it = vars_.rbegin(); it != vars_.rend(); ++it)
    if (it->first == v) return it->second;
  return std::nullopt;
}

// ---- Affine ----

Affine Affine::var(const std::string& v, std::uint64_t coef) {
  Affine a;
  if (coef) a.terms.emplace_back(v, coef);
  return a;
}

Affine Affine::operator+(const Affine& o) const {
  Affine r;
  r.c = c + o.c;
  std::map<std::string, std::uint64_t> m;
  for (auto& [v, k] : terms) m[v] += k;
  for (auto& [v, k] : o.terms) m[v] += k;
  for (auto& [v, k] : m)
    if (k) r.terms.emplace_back(v, k);
  return r;
}

std::uint64_t Affine::eval(const Env& env) const {
  std::uint64_t r = c;
  for (auto& [v, k] : terms) {
    auto val = env.get(v);
    if (!val) throw Error("unbound variable " + v);
    r += k * *val;
  }
  return r;
}

Affine Affine::substitute(const Env& env) const {
  Affine r = Affine::constant(c);
  for (auto& [v, k] : terms) {
    if (auto val = env.get(v)) {
      r.c += k * *val;
    } else {
      r = r + Affine::var(v, k);
    }
  }
  return r;
}

Affine Affine::rename(const std::function<std::string(const std::string&)>& f) const {
  Affine r = Affine::constant(c);
  for (auto& [v, k] : terms) r = r + Affine::var(f(v), k);
  return r;
}

std::string Affine::to_string() const {
  std::string out;
  for (auto& [v, k] : terms) {
    if (!out.empty()) out += "+";
    if (k != 1) out += std::to_string(k);
    out += v;
  }
  if (c || out.empty()) {
    if (!out.empty()) out += "+";
    out += std::to_string(c);
  }
  return out;
}

Affine Affine::parse(const std::string& text) {
  Affine r;
  std::string t;
  for (char ch : text)
    if (ch != ' ' && ch != '{' && ch != '}') t.push_back(ch);
  if (t.empty()) throw ParseError("empty affine expression");
  std::size_t pos = 0;
  while (pos <= t.size()) {
    std::size_t end = t.find('+', pos);
    if (end == std::string::npos) end = t.size();
    std::string term = t.substr(pos, end - pos);
    if (term.empty()) throw ParseError("bad affine expression \"" + text + "\"");
    std::size_t d = 0;
    while (d < term.size() && std::isdigit(static_cast<unsigned char>(term[d]))) ++d;
    std::uint64_t coef = d ? std::stoull(term.substr(0, d)) : 1;
    std::string var = term.substr(d);
    if (!var.empty() && var[0] == '*') var = var.substr(1);
    if (var.empty()) {
      if (!d) throw ParseError("bad affine term \"" + term + "\"");
      r.c += coef;
    } else {
      if (!std::isalpha(static_cast<unsigned char>(var[0])))
        throw ParseError("bad variable name \"" + var + "\"");
      for (char ch : var)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '\'' && ch != '_')
          throw ParseError("bad variable name \"" + var + "\"");
      r = r + Affine::var(var, coef);
    }
    pos = end + 1;
  }
  return r;
}

// ---- Pattern ----

Pattern Pattern::literal(const Word& w) {
  Pattern p;
  if (!w.empty()) p.segs.push_back({w, Affine::constant(1)});
  p.normalize();
  return p;
}

void Pattern::normalize() {
  std::vector<Segment> out;
  for (auto& s : segs) {
    if (s.block.empty()) continue;
    if (s.count.is_constant()) {
      if (s.count.c == 0) continue;
      Word lit;
      for (std::uint64_t r = 0; r < s.count.c; ++r) lit.insert(lit.end(), s.block.begin(), s.block.end());
      if (!out.empty() && out.back().count == Affine::constant(1)) {
        out.back().block.insert(out.back().block.end(), lit.begin(), lit.end());
      } else {
        out.push_back({std::move(lit), Affine::constant(1)});
      }
    } else {
      out.push_back(s);
    }
  }
  // Trailing wildcards constrain nothing.
  while (!out.empty()) {
    auto& b = out.back();
    if (b.count == Affine::constant(1)) {
      while (!b.block.empty() && b.block.back() == kAny) b.block.pop_back();
      if (b.block.empty()) {
        out.pop_back();
        continue;
      }
      break;
    }
    if (std::all_of(b.block.begin(), b.block.end(), [](Letter x) { return x == kAny; })) {
      out.pop_back();
      continue;
    }
    break;
  }
  segs = std::move(out);
}

bool Pattern::concrete() const {
  return std::all_of(segs.begin(), segs.end(), [](const Segment& s) { return s.count.is_constant(); });
}

bool Pattern::trivial() const {
  for (auto& s : segs)
    for (Letter x : s.block)
      if (x != kAny) return false;
  return true;
}

Word Pattern::instantiate(const Env& env) const {
  Word w;
  for (auto& s : segs) {
    std::uint64_t n = s.count.eval(env);
    for (std::uint64_t r = 0; r < n; ++r) w.insert(w.end(), s.block.begin(), s.block.end());
  }
  return w;
}

Pattern Pattern::substitute(const Env& env) const {
  Pattern p;
  for (auto& s : segs) p.segs.push_back({s.block, s.count.substitute(env)});
  p.normalize();
  return p;
}

Pattern Pattern::rename(const std::function<std::string(const std::string&)>& f) const {
  Pattern p;
  for (auto& s : segs) p.segs.push_back({s.block, s.count.rename(f)});
  return p;
}

namespace {

std::string letter_item(Letter x) {
  if (x == kAny) return "*";
  if (x < 10) return std::string(1, static_cast<char>('0' + x));
  return "[" + std::to_string(x) + "]";
}

Word parse_items(const std::string& t, Alphabet a) {
  Word w;
  for (std::size_t i = 0; i < t.size(); ++i) {
    char ch = t[i];
    if (ch == '*') {
      w.push_back(kAny);
    } else if (ch >= '0' && ch <= '9') {
      w.push_back(static_cast<Letter>(ch - '0'));
    } else if (ch == '[') {
      auto close = t.find(']', i);
      if (close == std::string::npos) throw ParseError("unclosed '[' in pattern");
      w.push_back(std::stoull(t.substr(i + 1, close - i - 1)));
      i = close;
    } else {
      throw ParseError(std::string("bad pattern character '") + ch + "'");
    }
    if (w.back() != kAny && !a.contains(w.back()))
      throw ParseError("letter " + std::to_string(w.back()) + " outside alphabet");
  }
  return w;
}

}  // namespace

std::string Pattern::to_string(Alphabet) const {
  std::string out;
  for (auto& s : segs) {
    if (!out.empty()) out += " ";
    std::string items;
    for (Letter x : s.block) items += letter_item(x);
    if (s.count == Affine::constant(1)) {
      out += items;
    } else {
      bool single = s.block.size() == 1;
      out += single ? items : "(" + items + ")";
      std::string e = s.count.to_string();
      out += "^" + (e.size() == 1 ? e : "{" + e + "}");
    }
  }
  return out;
}

Pattern Pattern::parse(const std::string& text, Alphabet a) {
  Pattern p;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == ' ') {
      ++pos;
      continue;
    }
    std::size_t end = pos;
    int depth = 0;
    while (end < text.size() && (text[end] != ' ' || depth > 0)) {
      if (text[end] == '(' || text[end] == '{') ++depth;
      if (text[end] == ')' || text[end] == '}') --depth;
      ++end;
    }
    std::string tok = text.substr(pos, end - pos);
    pos = end;
    auto caret = tok.find('^');
    if (caret == std::string::npos) {
      p.segs.push_back({parse_items(tok, a), Affine::constant(1)});
      continue;
    }
    std::string base = tok.substr(0, caret);
    if (base.size() >= 2 && base.front() == '(' && base.back() == ')') base = base.substr(1, base.size() - 2);
    Word block = parse_items(base, a);
    if (block.empty()) throw ParseError("empty block in pattern \"" + text + "\"");
    p.segs.push_back({block, Affine::parse(tok.substr(caret + 1))});
  }
  p.normalize();
  return p;
}

// ---- Atom ----

namespace {

std::size_t seq_count(const SpaceDesc& s) {
  return std::count_if(s.factors.begin(), s.factors.end(), [](const Factor& f) { return f.is_seq(); });
}

}  // namespace

Atom Atom::full(const SpaceDesc& s) {
  Atom a;
  a.pats.resize(seq_count(s));
  a.nats.resize(s.factors.size() - seq_count(s));
  return a;
}

Atom Atom::none(const SpaceDesc& s) {
  Atom a = full(s);
  a.empty = true;
  return a;
}

Atom Atom::prefix(const SpaceDesc& s, const std::vector<Word>& words) {
  Atom a = full(s);
  if (words.size() != a.pats.size()) throw SpaceMismatch("prefix count does not match sequence factors");
  for (std::size_t i = 0; i < words.size(); ++i) a.pats[i] = Pattern::literal(words[i]);
  return a;
}

Atom Atom::negate() const {
  Atom a = *this;
  a.negated = !a.negated;
  return a;
}

bool Atom::concrete() const {
  for (auto& p : pats)
    if (!p.concrete()) return false;
  for (auto& n : nats)
    if (n && !n->is_constant()) return false;
  return true;
}

bool Atom::trivial() const {
  if (empty) return false;
  for (auto& p : pats)
    if (!p.trivial()) return false;
  for (auto& n : nats)
    if (n) return false;
  return true;
}

std::uint64_t Atom::depth(const Env& env) const {
  std::uint64_t d = 0;
  for (auto& p : pats) d = std::max<std::uint64_t>(d, p.instantiate(env).size());
  return d;
}

// ---- Parts, families, codes ----

Part Part::of_leaf(Leaf l) {
  Part p;
  p.kind = Kind::Leaf;
  p.leaf = std::move(l);
  return p;
}

Part Part::of_code(CodePtr c) {
  Part p;
  p.kind = Kind::Leaf;
  p.code = std::move(c);
  return p;
}

Part Part::schema(std::string var, std::optional<Affine> bound, Family body) {
  Part p;
  p.kind = Kind::Schema;
  p.var = std::move(var);
  p.bound = std::move(bound);
  p.body = std::make_shared<const Family>(std::move(body));
  return p;
}

Part Part::of_special(std::shared_ptr<const SpecialFamily> s) {
  Part p;
  p.kind = Kind::Special;
  p.special = std::move(s);
  return p;
}

Family Family::of_leaves(std::vector<Leaf> leaves) {
  Family f;
  for (auto& l : leaves) f.parts.push_back(Part::of_leaf(std::move(l)));
  return f;
}

Family Family::of_codes(std::vector<CodePtr> codes) {
  Family f;
  for (auto& c : codes) f.parts.push_back(Part::of_code(std::move(c)));
  return f;
}

bool Family::all_leaf() const {
  return std::all_of(parts.begin(), parts.end(), [](const Part& p) { return p.kind == Part::Kind::Leaf; });
}

namespace {

void check_family_space(const Family& f, const SpaceDesc& s) {
  for (auto& p : f.parts) {
    if (p.kind == Part::Kind::Leaf && p.code && !(p.code->space == s))
      throw SpaceMismatch("child space " + p.code->space.to_string() + " differs from " + s.to_string());
    if (p.kind == Part::Kind::Schema) check_family_space(*p.body, s);
  }
}

}  // namespace

CodePtr make_basic(SpaceDesc s, Family f) {
  if (s.factors.empty()) throw SpaceMismatch("space needs at least one factor");
  auto c = std::make_shared<Code>();
  c->kind = Code::Kind::Basic;
  c->space = std::move(s);
  c->family = std::move(f);
  return c;
}

CodePtr make_unioncompl(SpaceDesc s, Family f) {
  if (s.factors.empty()) throw SpaceMismatch("space needs at least one factor");
  check_family_space(f, s);
  auto c = std::make_shared<Code>();
  c->kind = Code::Kind::UnionCompl;
  c->space = std::move(s);
  c->family = std::move(f);
  return c;
}

CodePtr make_mapped(CodePtr inner, LinearMap m) {
  if (!(inner->space == m.to)) throw SpaceMismatch("map target " + m.to.to_string() + " vs code space " + inner->space.to_string());
  auto c = std::make_shared<Code>();
  c->kind = Code::Kind::Mapped;
  c->space = m.from;
  c->inner = std::move(inner);
  c->map = std::make_shared<const LinearMap>(std::move(m));
  return c;
}

CodePtr make_fixed(CodePtr inner, ProductPoint x) {
  SpaceDesc rest = inner->space.drop_front(x.size());
  check_point(SpaceDesc{std::vector<Factor>(inner->space.factors.begin(), inner->space.factors.begin() + x.size())}, x);
  auto c = std::make_shared<Code>();
  c->kind = Code::Kind::Fixed;
  c->space = std::move(rest);
  c->inner = std::move(inner);
  c->fixed = std::move(x);
  return c;
}

CodePtr empty_code(const SpaceDesc& s) { return make_basic(s, Family{}); }

CodePtr full_code(const SpaceDesc& s) { return make_basic(s, Family::of_leaves({Leaf{}})); }

CodePtr empty_of_rank(const SpaceDesc& s, int r) {
  if (r <= 1) return empty_code(s);
  return make_unioncompl(s, Family::of_codes({full_of_rank(s, r - 1)}));
}

CodePtr full_of_rank(const SpaceDesc& s, int r) {
  if (r <= 1) return full_code(s);
  return make_unioncompl(s, Family::of_codes({empty_of_rank(s, r - 1)}));
}

CodePtr cylinders_code(const SpaceDesc& s, const std::vector<Word>& prefixes) {
  std::vector<Leaf> leaves;
  for (auto& w : prefixes) leaves.push_back({Atom::prefix(s, {w})});
  return make_basic(s, Family::of_leaves(std::move(leaves)));
}

CodePtr p_infinity_code() {
  SpaceDesc s = SpaceDesc::cantor();
  // Basic_i: some 1 at a position >= i.
  Atom a = Atom::full(s);
  a.pats[0].segs = {{{kAny}, Affine::var("i")}, {{0}, Affine::var("j")}, {{1}, Affine::constant(1)}};
  Family inner;
  inner.parts.push_back(Part::schema("j", std::nullopt, Family::of_leaves({{a}})));
  Family outer;
  outer.parts.push_back(Part::schema("i", std::nullopt, Family::of_codes({make_basic(s, inner)})));
  // finitely many 1s, then its complement
  return make_unioncompl(s, Family::of_codes({make_unioncompl(s, outer)}));
}

int max_rank() {
  if (const char* v = std::getenv("OMEGA_FORGE_MAX_RANK")) {
    int r = std::atoi(v);
    if (r >= 1) return r;
  }
  return 4;
}

namespace {

int family_rank(const Family& f) {
  int r = 1;
  for (auto& p : f.parts) {
    switch (p.kind) {
      case Part::Kind::Leaf:
        if (p.code) r = std::max(r, rank(*p.code));
        break;
      case Part::Kind::Schema: r = std::max(r, family_rank(*p.body)); break;
      case Part::Kind::Special: r = std::max(r, p.special->member_rank()); break;
    }
  }
  return r;
}

int family_depth(const Family& f) {
  int d = 0;
  for (auto& p : f.parts) {
    if (p.kind == Part::Kind::Schema) d = std::max(d, 1 + family_depth(*p.body));
    if (p.kind == Part::Kind::Leaf && p.code) d = std::max(d, schema_depth(*p.code));
  }
  return d;
}

bool family_opaque(const Family& f) {
  for (auto& p : f.parts) {
    if (p.kind == Part::Kind::Special) return true;
    if (p.kind == Part::Kind::Schema && family_opaque(*p.body)) return true;
    if (p.kind == Part::Kind::Leaf && p.code && has_opaque(*p.code)) return true;
  }
  return false;
}

}  // namespace

int rank(const Code& c) {
  switch (c.kind) {
    case Code::Kind::Basic: return 1;
    case Code::Kind::UnionCompl: return 1 + family_rank(c.family);
    default: return rank(*c.inner);
  }
}

int schema_depth(const Code& c) {
  if (c.inner) return schema_depth(*c.inner);
  return family_depth(c.family);
}

bool has_opaque(const Code& c) {
  if (c.kind == Code::Kind::Mapped || c.kind == Code::Kind::Fixed) return true;
  return family_opaque(c.family);
}

// ---- Enumeration ----

namespace {

constexpr std::uint64_t kExpandLimit = 1u << 16;

std::optional<std::uint64_t> part_size(const Part& p, Env& env);

std::optional<std::uint64_t> fam_size(const Family& f, Env& env) {
  std::uint64_t n = 0;
  for (auto& p : f.parts) {
    auto s = part_size(p, env);
    if (!s) return std::nullopt;
    n += *s;
  }
  return n;
}

// Body size when it does not depend on the schema variable.
std::optional<std::uint64_t> uniform_size(const Family& body) {
  if (!body.all_leaf()) return std::nullopt;
  return body.parts.size();
}

std::optional<std::uint64_t> part_size(const Part& p, Env& env) {
  switch (p.kind) {
    case Part::Kind::Leaf: return 1;
    case Part::Kind::Special: return std::nullopt;
    case Part::Kind::Schema: {
      if (!p.bound) return std::nullopt;
      std::uint64_t b = p.bound->eval(env);
      if (auto u = uniform_size(*p.body)) return b * *u;
      if (b > kExpandLimit) return std::nullopt;
      std::uint64_t n = 0;
      for (std::uint64_t v = 0; v < b; ++v) {
        env.push(p.var, v);
        auto s = fam_size(*p.body, env);
        env.pop();
        if (!s) return std::nullopt;
        n += *s;
      }
      return n;
    }
  }
  return std::nullopt;
}

bool fam_element(const Family& f, Env& env, std::uint64_t t, Element& out);

bool part_element(const Part& p, Env& env, std::uint64_t e, Element& out) {
  switch (p.kind) {
    case Part::Kind::Leaf:
      if (e != 0) return false;
      out.part = &p;
      out.binds = env.bindings();
      return true;
    case Part::Kind::Special: {
      auto el = p.special->element(e);
      if (!el) return false;
      out.part = &p;
      out.owned = std::move(el);
      out.binds = env.bindings();
      return true;
    }
    case Part::Kind::Schema: {
      std::optional<std::uint64_t> b;
      if (p.bound) b = p.bound->eval(env);
      std::uint64_t v, inner;
      if (auto u = uniform_size(*p.body)) {
        if (*u == 0) return false;
        v = e / *u;
        inner = e % *u;
      } else if (part_size(p, env)) {
        // finite schema with a varying body: walk the values
        std::uint64_t rest = e;
        for (v = 0; v < *b; ++v) {
          env.push(p.var, v);
          std::uint64_t s = *fam_size(*p.body, env);
          bool ok = rest < s && fam_element(*p.body, env, rest, out);
          env.pop();
          if (rest < s) return ok;
          rest -= s;
        }
        return false;
      } else {
        std::tie(v, inner) = pair_decode(e);
      }
      if (b && v >= *b) return false;
      env.push(p.var, v);
      bool ok = fam_element(*p.body, env, inner, out);
      env.pop();
      return ok;
    }
  }
  return false;
}

bool fam_element(const Family& f, Env& env, std::uint64_t t, Element& out) {
  std::vector<const Part*> inf;
  for (auto& p : f.parts) {
    auto s = part_size(p, env);
    if (!s) {
      inf.push_back(&p);
      continue;
    }
    if (t < *s) return part_element(p, env, t, out);
    t -= *s;
  }
  if (inf.empty()) return false;
  return part_element(*inf[t % inf.size()], env, t / inf.size(), out);
}

}  // namespace

std::optional<std::uint64_t> family_size(const Family& f, const Env& env) {
  Env e = env;
  return fam_size(f, e);
}

std::optional<Element> element_at(const Family& f, const Env& env, std::uint64_t i) {
  Env e = env;
  Element out{nullptr, {}, std::nullopt};
  if (!fam_element(f, e, i, out)) return std::nullopt;
  return out;
}

Enumeration enumerate(const Family& f, const Env& env, std::uint64_t attempts) {
  Enumeration r;
  Env e = env;
  auto size = fam_size(f, e);
  std::uint64_t n = size ? std::min(*size, attempts) : attempts;
  for (std::uint64_t t = 0; t < n; ++t) {
    Element out{nullptr, {}, std::nullopt};
    if (fam_element(f, e, t, out)) r.items.push_back(std::move(out));
  }
  r.complete = size && *size <= attempts;
  return r;
}

// ---- Instantiation ----

namespace {

Atom subst_atom(const Atom& a, const Env& env) {
  Atom r = a;
  for (auto& p : r.pats) p = p.substitute(env);
  for (auto& n : r.nats)
    if (n) n = n->substitute(env);
  return r;
}

Family subst_family(const Family& f, const Env& env);

Part subst_part(const Part& p, const Env& env) {
  switch (p.kind) {
    case Part::Kind::Leaf:
      if (p.code) return Part::of_code(instantiate(p.code, env));
      return Part::of_leaf(instantiate(p.leaf, env));
    case Part::Kind::Special: return p;
    case Part::Kind::Schema: {
      // the binder shadows any outer value of the same name
      Env inner;
      for (auto& [v, val] : env.bindings())
        if (v != p.var) inner.push(v, val);
      std::optional<Affine> b;
      if (p.bound) b = p.bound->substitute(env);
      return Part::schema(p.var, b, subst_family(*p.body, inner));
    }
  }
  return p;
}

Family subst_family(const Family& f, const Env& env) {
  Family r;
  for (auto& p : f.parts) r.parts.push_back(subst_part(p, env));
  return r;
}

}  // namespace

Leaf instantiate(const Leaf& l, const Env& env) {
  Leaf r;
  for (auto& a : l) r.push_back(subst_atom(a, env));
  return r;
}

CodePtr instantiate(const CodePtr& c, const Env& env) {
  if (env.empty()) return c;
  switch (c->kind) {
    case Code::Kind::Basic: return make_basic(c->space, subst_family(c->family, env));
    case Code::Kind::UnionCompl: return make_unioncompl(c->space, subst_family(c->family, env));
    case Code::Kind::Mapped: return make_mapped(instantiate(c->inner, env), *c->map);
    case Code::Kind::Fixed: return make_fixed(instantiate(c->inner, env), c->fixed);
  }
  return c;
}

// ---- Linear maps ----

ProductPoint LinearMap::apply(const ProductPoint& x) const {
  check_point(from, x);
  ProductPoint y;
  for (std::size_t k = 0; k < outs.size(); ++k) {
    const auto& o = outs[k];
    const Component& c = x.at(o.src);
    if (to.factors[k].kind == FactorKind::Nat) {
      y.push_back(c);
    } else if (auto* u = std::get_if<UPWord>(&c)) {
      UPWord w = arith_subsequence(*u, o.a, o.b);
      if (to.factors[k].kind == FactorKind::Finite)
        w = UPWord(Alphabet{to.factors[k].size}, w.transient(), w.period());
      y.push_back(w);
    } else {
      ProgramWord p = arith_subsequence(std::get<ProgramWord>(c), o.a, o.b);
      p.alphabet = to.factors[k].alphabet();
      y.push_back(p);
    }
  }
  check_point(to, y);
  return y;
}

namespace {

json space_json(const SpaceDesc& s) {
  json j = json::array();
  for (auto& f : s.factors) j.push_back(f.to_string());
  return j;
}

SpaceDesc space_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("space must be a nonempty array");
  SpaceDesc s;
  for (auto& f : j) {
    std::string t = f.is_string() ? f.get<std::string>() : f.dump();
    if (t == "baire" || t == "omega") {
      s.factors.push_back(Factor::baire());
    } else if (t == "nat") {
      s.factors.push_back(Factor::nat());
    } else {
      std::uint64_t k = 0;
      try {
        k = std::stoull(t);
      } catch (const std::exception&) {
        throw ParseError("bad space factor \"" + t + "\"");
      }
      if (k < 2) throw ParseError("alphabet size must be at least 2");
      s.factors.push_back(Factor::finite(k));
    }
  }
  return s;
}

}  // namespace

json LinearMap::to_json() const {
  json outs_j = json::array();
  for (auto& o : outs) outs_j.push_back({{"src", o.src}, {"a", o.a}, {"b", o.b}});
  return {{"from", space_json(from)}, {"to", space_json(to)}, {"outputs", outs_j}};
}

LinearMap LinearMap::from_json(const json& j) {
  LinearMap m;
  m.from = space_from_json(j.at("from"));
  m.to = space_from_json(j.at("to"));
  for (auto& o : j.at("outputs")) m.outs.push_back({o.at("src").get<std::size_t>(), o.at("a").get<std::uint64_t>(), o.at("b").get<std::uint64_t>()});
  if (m.outs.size() != m.to.factors.size()) throw ParseError("map outputs do not match target space");
  return m;
}

LinearMap LinearMap::identity(const SpaceDesc& s) {
  LinearMap m{s, s, {}};
  for (std::size_t k = 0; k < s.factors.size(); ++k) m.outs.push_back({k, 1, 0});
  return m;
}

// ---- JSON ----

std::shared_ptr<const SpecialFamily> special_from_json(const json& j);  // universal.cpp

namespace {

std::vector<std::size_t> seq_factors(const SpaceDesc& s) {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < s.factors.size(); ++i)
    if (s.factors[i].is_seq()) r.push_back(i);
  return r;
}

json atom_json(const Atom& a, const SpaceDesc& s) {
  json j = json::object();
  if (a.empty) {
    j["empty"] = true;
    if (a.negated) j["negated"] = true;
    return j;
  }
  auto sf = seq_factors(s);
  json pre = json::array();
  for (std::size_t i = 0; i < a.pats.size(); ++i) pre.push_back(a.pats[i].to_string(s.factors[sf[i]].alphabet()));
  j["prefix"] = pre;
  if (!a.nats.empty()) {
    json nat = json::array();
    for (auto& n : a.nats) {
      if (!n) {
        nat.push_back(nullptr);
      } else if (n->is_constant()) {
        nat.push_back(n->c);
      } else {
        nat.push_back(n->to_string());
      }
    }
    j["nat"] = nat;
  }
  if (a.negated) j["negated"] = true;
  return j;
}

Atom atom_from_json(const json& j, const SpaceDesc& s) {
  Atom a = Atom::full(s);
  if (j.value("empty", false)) a.empty = true;
  a.negated = j.value("negated", false);
  if (a.empty) return a;
  auto sf = seq_factors(s);
  if (j.contains("prefix")) {
    const json& pre = j.at("prefix");
    if (!pre.is_array() || pre.size() != sf.size())
      throw ParseError("cylinder needs " + std::to_string(sf.size()) + " prefixes");
    for (std::size_t i = 0; i < sf.size(); ++i)
      a.pats[i] = Pattern::parse(pre[i].get<std::string>(), s.factors[sf[i]].alphabet());
  }
  if (j.contains("nat")) {
    const json& nat = j.at("nat");
    if (!nat.is_array() || nat.size() != a.nats.size())
      throw ParseError("cylinder needs " + std::to_string(a.nats.size()) + " nat slots");
    for (std::size_t i = 0; i < nat.size(); ++i) {
      if (nat[i].is_null()) continue;
      a.nats[i] = nat[i].is_number() ? Affine::constant(nat[i].get<std::uint64_t>()) : Affine::parse(nat[i].get<std::string>());
    }
  }
  return a;
}

json family_json(const Family& f, const SpaceDesc& s, bool basic);

json part_leaf_json(const Part& p, const SpaceDesc& s, bool basic) {
  if (!basic) return to_json(*p.code);
  if (p.leaf.size() == 1) return atom_json(p.leaf[0], s);
  json all = json::array();
  for (auto& a : p.leaf) all.push_back(atom_json(a, s));
  return {{"all", all}};
}

json part_json(const Part& p, const SpaceDesc& s, bool basic) {
  switch (p.kind) {
    case Part::Kind::Leaf: return {{"finite", json::array({part_leaf_json(p, s, basic)})}};
    case Part::Kind::Special: {
      json sp = p.special->params();
      sp["name"] = p.special->name();
      return {{"special", sp}};
    }
    case Part::Kind::Schema: {
      json a = {{"var", p.var}};
      if (p.bound) a["bound"] = p.bound->to_string();
      if (p.body->parts.size() == 1 && p.body->parts[0].kind == Part::Kind::Leaf) {
        a["template"] = part_leaf_json(p.body->parts[0], s, basic);
      } else {
        a["family"] = family_json(*p.body, s, basic);
      }
      return {{"affine", a}};
    }
  }
  return nullptr;
}

json family_json(const Family& f, const SpaceDesc& s, bool basic) {
  if (f.all_leaf()) {
    json fin = json::array();
    for (auto& p : f.parts) fin.push_back(part_leaf_json(p, s, basic));
    return {{"finite", fin}};
  }
  if (f.parts.size() == 1) return part_json(f.parts[0], s, basic);
  json parts = json::array();
  for (auto& p : f.parts) parts.push_back(part_json(p, s, basic));
  return {{"parts", parts}};
}

Part leaf_from_json(const json& j, const SpaceDesc& s, bool basic) {
  if (!basic) {
    CodePtr c = code_from_json(j);
    if (!(c->space == s)) throw SpaceMismatch("child space " + c->space.to_string() + " differs from " + s.to_string());
    return Part::of_code(c);
  }
  Leaf l;
  if (j.contains("all")) {
    for (auto& a : j.at("all")) l.push_back(atom_from_json(a, s));
  } else {
    l.push_back(atom_from_json(j, s));
  }
  return Part::of_leaf(std::move(l));
}

Family family_from_json(const json& j, const SpaceDesc& s, bool basic) {
  Family f;
  if (!j.is_object()) throw ParseError("family must be an object");
  if (j.contains("finite")) {
    for (auto& e : j.at("finite")) f.parts.push_back(leaf_from_json(e, s, basic));
  } else if (j.contains("affine")) {
    const json& a = j.at("affine");
    std::optional<Affine> bound;
    if (a.contains("bound")) bound = a.at("bound").is_number() ? Affine::constant(a.at("bound").get<std::uint64_t>()) : Affine::parse(a.at("bound").get<std::string>());
    Family body;
    if (a.contains("template")) {
      body.parts.push_back(leaf_from_json(a.at("template"), s, basic));
    } else {
      body = family_from_json(a.at("family"), s, basic);
    }
    f.parts.push_back(Part::schema(a.value("var", "i"), bound, std::move(body)));
  } else if (j.contains("special")) {
    f.parts.push_back(Part::of_special(special_from_json(j.at("special"))));
  } else if (j.contains("parts")) {
    for (auto& p : j.at("parts")) {
      Family sub = family_from_json(p, s, basic);
      f.parts.insert(f.parts.end(), sub.parts.begin(), sub.parts.end());
    }
  } else {
    throw ParseError("family needs one of finite, affine, special, parts");
  }
  return f;
}

json component_json(const Component& c) {
  if (auto* n = std::get_if<std::uint64_t>(&c)) return *n;
  if (auto* u = std::get_if<UPWord>(&c)) return u->to_string();
  throw NotRepresentable("program words cannot be serialized");
}

}  // namespace

json to_json(const Code& c) {
  json j;
  j["space"] = space_json(c.space);
  switch (c.kind) {
    case Code::Kind::Basic:
      j["kind"] = "basic";
      j["family"] = family_json(c.family, c.space, true);
      break;
    case Code::Kind::UnionCompl:
      j["kind"] = "unioncompl";
      j["family"] = family_json(c.family, c.space, false);
      break;
    case Code::Kind::Mapped:
      j["kind"] = "pullback";
      j["map"] = c.map->to_json();
      j["code"] = to_json(*c.inner);
      break;
    case Code::Kind::Fixed: {
      j["kind"] = "section";
      json pt = json::array();
      for (auto& x : c.fixed) pt.push_back(component_json(x));
      j["point"] = pt;
      j["code"] = to_json(*c.inner);
      break;
    }
  }
  return j;
}

CodePtr code_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ParseError("code must be an object");
    SpaceDesc s = space_from_json(j.at("space"));
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "basic") return make_basic(s, family_from_json(j.at("family"), s, true));
    if (kind == "unioncompl") return make_unioncompl(s, family_from_json(j.at("family"), s, false));
    if (kind == "pullback") {
      LinearMap m = LinearMap::from_json(j.at("map"));
      if (!(m.from == s)) throw SpaceMismatch("pullback space differs from map source");
      return make_mapped(code_from_json(j.at("code")), m);
    }
    if (kind == "section") {
      CodePtr inner = code_from_json(j.at("code"));
      ProductPoint x;
      const json& pt = j.at("point");
      for (std::size_t i = 0; i < pt.size(); ++i) {
        const Factor& f = inner->space.factors.at(i);
        if (pt[i].is_number()) {
          x.push_back(pt[i].get<std::uint64_t>());
        } else {
          x.push_back(UPWord::parse(pt[i].get<std::string>(), f.alphabet()));
        }
      }
      return make_fixed(inner, x);
    }
    throw ParseError("unknown code kind \"" + kind + "\"");
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

std::string canonical_dump(const Code& c) { return to_json(c).dump(); }

}  // namespace omegaforge
