#include <doctest.h>

#include <random>

#include "gen.hpp"
#include "omegaforge/errors.hpp"
#include "omegaforge/kuratowski.hpp"

using namespace omegaforge;
using namespace testgen;

namespace {

const Alphabet A2{2};

UPWord up2(const char* s) { return UPWord::parse(s, A2); }

CodePtr cyl(const std::vector<const char*>& ws) {
  std::vector<Word> v;
  for (auto w : ws) v.push_back(word_from_string(w, A2));
  return cylinders_code(SpaceDesc::cantor(), v);
}

// B = intersection of rho(m) over the members.
CodePtr pi_of(const std::vector<CodePtr>& members) {
  return complement_code(make_unioncompl(SpaceDesc::cantor(), Family::of_codes(members)));
}

// Shortest u v^omega consistent with a long prefix.
UPWord reconstruct(const Word& p) {
  for (std::size_t total = 1; total <= p.size() / 3; ++total)
    for (std::size_t v = 1; v <= total; ++v) {
      std::size_t u = total - v;
      bool ok = true;
      for (std::size_t n = u + v; n < p.size() && ok; ++n) ok = p[n] == p[n - v];
      if (ok) return UPWord(A2, Word(p.begin(), p.begin() + static_cast<long>(u)), Word(p.begin() + static_cast<long>(u), p.begin() + static_cast<long>(u + v)));
    }
  throw std::runtime_error("no short period");
}

struct Case {
  std::string name;
  PresentationPtr p;
};

std::vector<Case> cases() {
  std::vector<Case> out;
  out.push_back({"P_infinity", Presentation::present(p_infinity_code())});
  out.push_back({"full rank 2", Presentation::present(complement_code(empty_code(SpaceDesc::cantor())))});
  out.push_back({"full rank 3", Presentation::present(pi_of({full_code(SpaceDesc::cantor())}))});
  out.push_back({"cylinder N_01", Presentation::present(pi_of({cyl({"01"})}))});
  out.push_back({"N_0 or N_11 and not N_010", Presentation::present(pi_of({cyl({"0", "11"}), complement_code(cyl({"010"}))}))});
  Rng rng(4107);
  int made = 0;
  while (made < 6) {
    CodePtr s = random_code(rng, made < 3 ? 2 : 3, 3);
    auto p = Presentation::from_sigma(s);
    bool any = false;
    for (auto& a : enumerate_up(A2, 2, 2)) any = any || p->in_b(a);
    if (!any) continue;
    out.push_back({"random " + std::to_string(made), p});
    ++made;
  }
  return out;
}

std::vector<UPWord> points_in(const Presentation& p, std::size_t lim) {
  std::vector<UPWord> out;
  for (auto& a : enumerate_up(A2, 3, 3)) {
    if (out.size() == lim) break;
    if (p.in_b(a)) out.push_back(a);
  }
  return out;
}

}  // namespace

TEST_CASE("present rejects non-complement forms") {
  CHECK_THROWS_AS(Presentation::present(cyl({"0"})), NotPiForm);
  CHECK_THROWS_AS(Presentation::present(make_unioncompl(SpaceDesc::cantor(), Family::of_codes({cyl({"0"}), cyl({"1"})}))),
                  NotPiForm);
  CodePtr deep = cyl({"0"});
  for (int r = 0; r < max_rank(); ++r) deep = complement_code(deep);
  CHECK_THROWS_AS(Presentation::present(deep), RankTooLarge);
}

TEST_CASE("P_infinity pieces are first-witness cells") {
  auto p = Presentation::present(p_infinity_code());
  CHECK_FALSE(p->base());
  CHECK(p->rank() == 3);
  CHECK_FALSE(p->member_count().has_value());
  for (auto& a : enumerate_up(A2, 3, 3))
    for (std::uint64_t i = 0; i < 5; ++i)
      for (std::uint64_t j = 0; j < 5; ++j) {
        bool want = a.at(i + j) == 1;
        for (std::uint64_t n = i; n < i + j; ++n) want = want && a.at(n) == 0;
        REQUIRE(p->in_piece(i, j, a) == want);
      }
  Budget b;
  UPWord a = up2("|10");
  CHECK(p->h(a, 0, b) == 0);
  CHECK(p->h(a, 1, b) == 1);
  CHECK(p->h(a, 2, b) == 0);
  ProgramWord d = p->g_apply(a, b);
  for (std::uint64_t i = 0; i < 5; ++i) CHECK(d.at(pair_encode(i, 0)) == i % 2);
  Word back = p->f_apply(OmegaWord(d), Budget{80, 64});
  CHECK(back.size() >= 32);
  CHECK(back == a.prefix(back.size()));
  CHECK_THROWS_AS(p->g_apply(up2("1|0"), b), NotInB);
}

TEST_CASE("full space presentations") {
  auto p = Presentation::present(complement_code(empty_code(SpaceDesc::cantor())));
  CHECK(p->base());
  ProgramWord d = p->g_apply(up2("|0"), Budget{});
  CHECK(d.prefix(8) == Word(8, 0));
  CHECK(p->f_apply(OmegaWord(d), Budget{16, 8}) == Word(16, 0));
  Word bad{0, 2, 0};
  CHECK_THROWS_AS(p->f_apply(OmegaWord(UPWord(Alphabet::omega(), bad, {0})), Budget{8, 8}), NotInC);

  // Full space as an intersection of complements of the empty set.
  auto q = Presentation::present(pi_of({full_code(SpaceDesc::cantor())}));
  CHECK_FALSE(q->base());
  CHECK(q->piece_count(0) == 1);
  ProgramWord e = q->g_apply(up2("|0"), Budget{});
  for (std::uint64_t i = 0; i < 5; ++i) {
    CHECK(e.at(pair_encode(i, 0)) == 0);
    CHECK(e.at(pair_encode(i, 3)) == 0);
  }
}

TEST_CASE("clopen presentation pieces match cylinder brute force") {
  auto p = Presentation::present(pi_of({cyl({"01"})}));
  REQUIRE(p->piece_count(0) == 1);
  CHECK(brute_cylinders(*complement_code(*p->piece(0, 0)), 2) == std::vector<Word>{word_from_string("01", A2)});

  auto q = Presentation::present(pi_of({cyl({"0", "00"})}));
  REQUIRE(q->piece_count(0) == 2);
  CHECK(brute_cylinders(*complement_code(*q->piece(0, 1)), 3).empty());
  CHECK(brute_cylinders(*complement_code(*q->piece(0, 0)), 1) == std::vector<Word>{Word{0}});
  // Pointing slice 0 at the empty piece, or past the family, leaves C.
  CHECK_THROWS_AS(q->f_apply(OmegaWord(UPWord(Alphabet::omega(), {1}, {0})), Budget{8, 8}), NotInC);
  CHECK_THROWS_AS(q->f_apply(OmegaWord(UPWord(Alphabet::omega(), {5}, {0})), Budget{8, 8}), NotInC);
  CHECK(q->member_c({1}, Budget{}) == Truth3::False);
  CHECK(q->member_c({0}, Budget{}) == Truth3::True);
}

TEST_CASE("round trips, injectivity and h-uniqueness") {
  Budget b{80, 64};
  for (auto& c : cases()) {
    CAPTURE(c.name);
    auto pts = points_in(*c.p, 200);
    REQUIRE(!pts.empty());
    std::vector<Word> deltas;
    for (auto& a : pts) {
      ProgramWord d = c.p->g_apply(a, b);
      Word dp = d.prefix(b.depth);
      deltas.push_back(dp);
      // f(g(a)) = a on 32 letters
      Word out = c.p->f_apply(OmegaWord(d), b);
      REQUIRE(out.size() >= 32);
      REQUIRE_MESSAGE(out == a.prefix(out.size()), a.to_string());
      // g(f(g(a))) = g(a) on the tested prefix
      UPWord back = reconstruct(out);
      REQUIRE(back == a);
      REQUIRE(c.p->g_apply(back, b).prefix(b.depth) == dp);
      // h-uniqueness
      if (!c.p->base())
        for (std::uint64_t i = 0; i <= 16; ++i) {
          auto pc = c.p->piece_count(i);
          std::uint64_t hi = pc ? std::min<std::uint64_t>(*pc, b.index_bound + 1) : b.index_bound + 1;
          std::size_t hits = 0;
          for (std::uint64_t j = 0; j < hi; ++j) hits += c.p->in_piece(i, j, a);
          REQUIRE_MESSAGE(hits == 1, a.to_string() << " i=" << i);
        }
    }
    for (std::size_t x = 0; x < pts.size(); ++x)
      for (std::size_t y = x + 1; y < pts.size(); ++y) {
        std::size_t dis = 0;
        while (pts[x].at(dis) == pts[y].at(dis)) ++dis;
        std::size_t lim = std::max<std::size_t>(32, dis + 1);
        REQUIRE_MESSAGE(!std::equal(deltas[x].begin(), deltas[x].begin() + static_cast<long>(lim), deltas[y].begin()),
                        pts[x].to_string() << " vs " << pts[y].to_string());
      }
  }
}

TEST_CASE("closed representation is prefix-closed as a three-valued predicate") {
  Rng rng(77);
  Budget b{64, 32};
  for (auto& c : cases()) {
    CAPTURE(c.name);
    auto [rep, pair] = build(c.p);
    // g-images are never refuted on any prefix.
    for (auto& a : points_in(*c.p, 20)) {
      Word d = pair.g(a, b).prefix(24);
      for (std::size_t k = 0; k <= d.size(); ++k) REQUIRE(rep.member(Word(d.begin(), d.begin() + static_cast<long>(k)), b) != Truth3::False);
      CHECK(rep.member(d, b) == Truth3::True);
    }
    // A word judged True never has a prefix judged False.
    for (int t = 0; t < 200; ++t) {
      Word w = random_word(rng, 7, 3);
      if (rep.member(w, b) != Truth3::True) continue;
      for (std::size_t k = 0; k < w.size(); ++k) REQUIRE(rep.member(Word(w.begin(), w.begin() + static_cast<long>(k)), b) != Truth3::False);
    }
  }
}

TEST_CASE("piece certificate") {
  for (auto& c : cases()) {
    if (c.p->base()) continue;
    CAPTURE(c.name);
    Certificate cert = certify(*c.p, 4, 8, 3);
    CHECK(cert.disjoint);
    CHECK(cert.exact);
    CHECK(cert.checks > 0);
  }
}

TEST_CASE("base case preimages match the clopen description") {
  auto p = Presentation::present(complement_code(empty_code(SpaceDesc::cantor())));
  Rng rng(5);
  Budget b;
  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    UPWord a = random_up(rng, 3, 3);
    Word letters = random_word(rng, 3, 3);
    std::uint64_t len = letters.size();
    std::uint64_t na = len == 0 ? 0 : pick(rng, 0, 4) == 0 ? 0 : 1;
    BigNat k1 = nbhd_inner_index(std::vector<std::uint64_t>(letters.begin(), letters.end()), na, len == 0 ? 0 : len - 1);
    NbhdResult nb = basic_nbhd_inner(SpaceDesc::baire(), k1);
    ProgramWord d = p->g_apply(a, b);
    bool in_nbhd = !nb.empty;
    for (std::size_t j = 0; j < nb.mu && in_nbhd; ++j) in_nbhd = d.at(j) == nb.letters[j];
    CHECK(in_nbhd == base_preimage(a, k1));
    agree += in_nbhd;
  }
  CHECK(agree >= 0);
}
