#include "omegaforge/kuratowski.hpp"

#include <algorithm>

#include "omegaforge/errors.hpp"

namespace omegaforge {

namespace {

const Alphabet kCantor{2};

Env env_of(const Element& e) {
  Env env;
  for (auto& [v, val] : e.binds) env.push(v, val);
  return env;
}

bool in_rho(const Code& c, const UPWord& a) { return eval_exact_up(c, ProductPoint{a}); }

// (delta)_i restricted to the letters a finite delta already fixes.
Word slice_prefix(const Word& w, std::uint64_t i) {
  Word out;
  if (i >= 62 || (std::uint64_t{1} << i) > w.size()) return out;
  for (std::uint64_t k = 0;; ++k) {
    std::uint64_t pos = pair_encode(i, k);
    if (pos >= w.size()) break;
    out.push_back(w[pos]);
  }
  return out;
}

Word tail(const Word& w) { return w.empty() ? w : Word(w.begin() + 1, w.end()); }

// Piece indices beyond this are not looked up; such words are left undecided.
constexpr std::uint64_t kMaxPieceIndex = 1u << 16;
// Extensions enumerated when refuting a cylinder against a clopen set.
constexpr std::size_t kMaxClopenSpan = 12;

}  // namespace

std::optional<std::size_t> clopen_depth(const Code& c) {
  if (c.kind != Code::Kind::Basic) return std::nullopt;
  Enumeration en = enumerate(c.family, Env{}, 4096);
  if (!en.complete) return std::nullopt;
  std::size_t d = 0;
  for (auto& e : en.items) {
    const Part& p = e.leaf();
    if (p.kind != Part::Kind::Leaf) return std::nullopt;
    Leaf l = instantiate(p.leaf, env_of(e));
    for (auto& a : l) {
      if (!a.concrete()) return std::nullopt;
      d = std::max<std::size_t>(d, a.depth(Env{}));
    }
  }
  return d;
}

Presentation::Presentation(CodePtr sigma) : sigma_(std::move(sigma)) {
  if (!(sigma_->space == SpaceDesc::cantor())) throw SpaceMismatch("presentations live on 2^omega, not " + sigma_->space.to_string());
  if (sigma_->kind == Code::Kind::Mapped || sigma_->kind == Code::Kind::Fixed)
    throw NotRepresentable("presentation of a wrapped code");
  base_ = sigma_->kind == Code::Kind::Basic;
  if (base_) clopen_depth_ = clopen_depth(*sigma_);
}

PresentationPtr Presentation::from_sigma(const CodePtr& sigma) {
  return PresentationPtr(new Presentation(sigma));
}

PresentationPtr Presentation::present(const CodePtr& b) {
  if (omegaforge::rank(*b) > max_rank()) throw RankTooLarge("rank " + std::to_string(omegaforge::rank(*b)) + " exceeds " + std::to_string(max_rank()));
  if (b->kind != Code::Kind::UnionCompl) throw NotPiForm("expected the complement of a single code");
  auto n = family_size(b->family, Env{});
  if (!n || *n != 1) throw NotPiForm("expected the complement of a single code");
  auto e = element_at(b->family, Env{}, 0);
  if (!e || !e->leaf().code) throw NotPiForm("expected the complement of a single code");
  return from_sigma(instantiate(e->leaf().code, env_of(*e)));
}

CodePtr Presentation::code() const { return complement_code(sigma_); }

int Presentation::rank() const { return omegaforge::rank(*sigma_) + 1; }

std::optional<std::uint64_t> Presentation::member_count() const {
  if (base_) return 0;
  return family_size(sigma_->family, Env{});
}

CodePtr Presentation::member(std::uint64_t i) const {
  if (base_) throw NotPiForm("the base case has no members");
  std::lock_guard<std::mutex> lock(mu_);
  auto it = members_.find(i);
  if (it != members_.end()) return it->second;
  auto n = family_size(sigma_->family, Env{});
  CodePtr m;
  if (n && *n == 0) {
    m = full_code(sigma_->space);  // empty intersection
  } else {
    std::uint64_t idx = n ? i % *n : i;
    auto e = element_at(sigma_->family, Env{}, idx);
    // A hole in an infinite family stands for the whole space.
    m = e && e->leaf().code ? instantiate(e->leaf().code, env_of(*e)) : full_code(sigma_->space);
  }
  members_.emplace(i, m);
  return m;
}

const Family& Presentation::pieces(std::uint64_t i) const {
  CodePtr m = member(i);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = pieces_.find(i);
  if (it == pieces_.end()) it = pieces_.emplace(i, std::make_shared<const Family>(disjointify(m))).first;
  return *it->second;
}

std::optional<std::uint64_t> Presentation::piece_count(std::uint64_t i) const { return family_size(pieces(i), Env{}); }

std::optional<CodePtr> Presentation::piece(std::uint64_t i, std::uint64_t j) const {
  auto e = element_at(pieces(i), Env{}, j);
  if (!e || !e->leaf().code) return std::nullopt;
  return instantiate(e->leaf().code, env_of(*e));
}

PresentationPtr Presentation::sub(std::uint64_t i, std::uint64_t j) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = subs_.find({i, j});
    if (it != subs_.end()) return it->second;
  }
  auto d = piece(i, j);
  PresentationPtr p = d ? from_sigma(*d) : nullptr;
  std::lock_guard<std::mutex> lock(mu_);
  return subs_.emplace(std::make_pair(i, j), p).first->second;
}

bool Presentation::in_b(const UPWord& a) const { return !in_rho(*sigma_, a); }

bool Presentation::in_piece(std::uint64_t i, std::uint64_t j, const UPWord& a) const {
  auto d = piece(i, j);
  return d && !in_rho(**d, a);
}

std::uint64_t Presentation::h(const UPWord& a, std::uint64_t i, const Budget& b) const {
  auto n = piece_count(i);
  std::uint64_t hi = n ? std::min(*n, b.index_bound) : b.index_bound;
  for (std::uint64_t j = 0; j < hi; ++j)
    if (in_piece(i, j, a)) return j;
  throw NotInB(a.to_string() + " lies in no piece of member " + std::to_string(i) + " below index " + std::to_string(hi));
}

Word Presentation::f_prefix(const Word& w) const {
  if (base_) {
    Word out;
    for (Letter x : w) {
      if (x > 1) break;
      out.push_back(x);
    }
    return out;
  }
  Word w0 = slice_prefix(w, 0);
  if (w0.empty() || w0[0] > kMaxPieceIndex) return {};
  PresentationPtr s = sub(0, w0[0]);
  return s ? s->f_prefix(tail(w0)) : Word{};
}

bool Presentation::refuted(const Word& w, const Budget& b) const {
  if (base_) {
    for (Letter x : w)
      if (x > 1) return true;
    if (!clopen_depth_) return false;
    std::size_t d = std::max(*clopen_depth_, w.size());
    if (d - w.size() > kMaxClopenSpan) return false;
    // B is clopen: w is refuted when every extension to depth d lies in rho(sigma).
    for (auto& ext : all_words(kCantor, d - w.size())) {
      Word full = w;
      full.insert(full.end(), ext.begin(), ext.end());
      if (!in_rho(*sigma_, UPWord(kCantor, full, {0}))) return false;
    }
    return true;
  }
  Word out0;
  for (std::uint64_t i = 0; i < 62 && (std::uint64_t{1} << i) <= w.size(); ++i) {
    Word wi = slice_prefix(w, i);
    if (wi.empty()) continue;
    if (wi[0] > kMaxPieceIndex) continue;
    PresentationPtr s = sub(i, wi[0]);
    if (!s) return true;
    Word rest = tail(wi);
    if (s->refuted(rest, b)) return true;
    Word out = s->f_prefix(rest);
    if (i == 0) {
      out0 = out;
    } else {
      std::size_t n = std::min(out.size(), out0.size());
      if (!std::equal(out.begin(), out.begin() + static_cast<long>(n), out0.begin())) return true;
    }
  }
  return false;
}

Truth3 Presentation::member_c(const Word& w, const Budget& b) const {
  if (refuted(w, b)) return Truth3::False;
  // Look for a in B with g(a) extending w, among small UP extensions of the
  // already determined output.
  Word out = f_prefix(w);
  for (auto& tail_up : enumerate_up(kCantor, 2, 3)) {
    UPWord a = prepend(out, tail_up);
    if (!in_b(a)) continue;
    try {
      bool ok = true;
      for (std::uint64_t n = 0; n < w.size() && ok; ++n) ok = g_letter(a, n, b) == w[n];
      if (ok) return Truth3::True;
    } catch (const NotInB&) {
    }
  }
  return Truth3::Unknown;
}

Word Presentation::f_apply(const OmegaWord& delta, const Budget& b) const {
  Word w = prefix_of(delta, b.depth);
  if (refuted(w, b)) throw NotInC("a prefix of the input leaves C");
  return f_prefix(w);
}

Letter Presentation::g_letter(const UPWord& a, std::uint64_t n, const Budget& b) const {
  if (base_) return a.at(n);
  auto [i, k] = pair_decode(n);
  std::uint64_t j = h(a, i, b);
  if (k == 0) return j;
  return sub(i, j)->g_letter(a, k - 1, b);
}

ProgramWord Presentation::g_apply(const UPWord& a, const Budget& b) const {
  if (!(a.alphabet() == kCantor)) throw SpaceMismatch("g takes points of 2^omega");
  if (!in_b(a)) throw NotInB(a.to_string());
  auto self = shared_from_this();
  // Letters are memoised; h sweeps are the expensive part.
  struct Memo {
    std::mutex mu;
    std::map<std::uint64_t, Letter> letters;
  };
  auto memo = std::make_shared<Memo>();
  ProgramWord w;
  w.alphabet = Alphabet::omega();
  w.gen = [self, a, b, memo](std::uint64_t n) {
    {
      std::lock_guard<std::mutex> lock(memo->mu);
      auto it = memo->letters.find(n);
      if (it != memo->letters.end()) return it->second;
    }
    Letter x = self->g_letter(a, n, b);
    std::lock_guard<std::mutex> lock(memo->mu);
    memo->letters.emplace(n, x);
    return x;
  };
  return w;
}

json Presentation::describe(std::uint64_t max_i, std::uint64_t max_j) const {
  json j{{"rank", rank()}, {"base", base_}, {"code", to_json(*code())}};
  if (base_) {
    if (clopen_depth_) j["clopen_depth"] = *clopen_depth_;
    return j;
  }
  auto n = member_count();
  j["member_count"] = n ? json(*n) : json("infinite");
  json members = json::array();
  std::uint64_t imax = n && *n > 0 ? std::min(*n, max_i) : max_i;
  for (std::uint64_t i = 0; i < imax; ++i) {
    json m{{"i", i}, {"member_rank", omegaforge::rank(*member(i))}};
    auto pc = piece_count(i);
    m["piece_count"] = pc ? json(*pc) : json("infinite");
    json ps = json::array();
    std::uint64_t jmax = pc ? std::min(*pc, max_j) : max_j;
    for (std::uint64_t k = 0; k < jmax; ++k) {
      auto s = sub(i, k);
      json pj{{"j", k}};
      if (!s) {
        pj["empty"] = true;
      } else {
        pj["rank"] = s->rank();
        pj["base"] = s->base();
        if (s->base() && s->refuted({}, Budget{})) pj["empty"] = true;
      }
      ps.push_back(pj);
    }
    m["pieces"] = ps;
    members.push_back(m);
  }
  j["members"] = members;
  return j;
}

std::pair<ClosedRep, BijectionPair> build(const PresentationPtr& p) {
  ClosedRep c;
  c.structure = p;
  c.member = [p](const Word& w, const Budget& b) { return p->member_c(w, b); };
  BijectionPair bp;
  bp.f = [p](const OmegaWord& d, const Budget& b) { return p->f_apply(d, b); };
  bp.g = [p](const UPWord& a, const Budget& b) { return p->g_apply(a, b); };
  return {c, bp};
}

json Certificate::to_json() const {
  return {{"points", points}, {"checks", checks}, {"disjoint", disjoint}, {"exact", exact}};
}

Certificate certify(const Presentation& p, std::uint64_t max_i, std::uint64_t max_j, std::size_t up_len) {
  Certificate c;
  if (p.base()) return c;
  auto corpus = enumerate_up(kCantor, up_len, up_len);
  c.points = corpus.size();
  auto n = p.member_count();
  std::uint64_t imax = n && *n > 0 ? std::min(*n, max_i) : max_i;
  for (std::uint64_t i = 0; i < imax; ++i) {
    auto pc = p.piece_count(i);
    std::uint64_t jmax = pc ? std::min(*pc, max_j) : max_j;
    std::vector<CodePtr> ds;
    for (std::uint64_t j = 0; j < jmax; ++j)
      if (auto d = p.piece(i, j)) ds.push_back(*d);
    const Code& m = *p.member(i);
    for (auto& a : corpus) {
      std::size_t hits = 0;
      for (auto& d : ds) hits += !in_rho(*d, a);
      ++c.checks;
      if (hits > 1) c.disjoint = false;
      // Pieces past the bound may hold the point; only complete families are checked.
      if (pc && *pc <= max_j && (hits == 1) != in_rho(m, a)) c.exact = false;
    }
  }
  return c;
}

bool base_preimage(const UPWord& a, const BigNat& k1) {
  NbhdResult on_cantor = basic_nbhd_inner(SpaceDesc::cantor(), k1);
  if (on_cantor.empty) return false;
  for (std::size_t j = 0; j < on_cantor.mu; ++j)
    if (a.at(j) != on_cantor.letters[j]) return false;
  NbhdResult on_baire = basic_nbhd_inner(SpaceDesc::baire(), k1);
  return std::all_of(on_baire.letters.begin(), on_baire.letters.end(), [](Letter x) { return x < 2; });
}

}  // namespace omegaforge
