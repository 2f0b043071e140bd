#include "omegaforge/pipeline.hpp"

#include <algorithm>

#include "omegaforge/errors.hpp"

namespace omegaforge {

namespace {

const Alphabet kCantor{2};

bool has_one_in_period(const UPWord& a) {
  return std::count(a.period().begin(), a.period().end(), 1) > 0;
}

std::string kind_name(Decomposition::Kind k) {
  switch (k) {
    case Decomposition::Kind::MuCandidate: return "mu-candidate";
    case Decomposition::Kind::Triple: return "triple";
    case Decomposition::Kind::Outside: return "outside";
    case Decomposition::Kind::Unknown: return "unknown";
  }
  return "unknown";
}

}  // namespace

Word run_length(const std::function<Letter(std::uint64_t)>& delta, std::size_t n) {
  Word out;
  for (std::uint64_t k = 0; out.size() < n; ++k) {
    Letter d = delta(k);
    for (Letter z = 0; z < d && out.size() < n; ++z) out.push_back(0);
    if (out.size() < n) out.push_back(1);
  }
  return out;
}

std::pair<Word, std::uint64_t> run_length_decode(const Word& t) {
  Word letters;
  std::uint64_t zeros = 0;
  for (Letter x : t) {
    if (x == 0) {
      ++zeros;
    } else {
      letters.push_back(zeros);
      zeros = 0;
    }
  }
  return {letters, zeros};
}

TransitionTree derive_rtree(const PresentationPtr& p) {
  Budget b;
  if (p->refuted({}, b)) return TransitionTree::empty();
  if (p->base()) {
    // f is the identity on B, so t is forced by s.
    return TransitionTree::custom("base-embedding", [p, b](const Word& t, const Word& s) {
      if (t != run_length([&](std::uint64_t k) { return k < s.size() ? s[k] : 0; }, s.size())) return false;
      return !p->refuted(s, b);
    });
  }
  // Over-approximates the closure of the graph: letters of s beyond what the
  // complete runs of t determine are not checked.
  return TransitionTree::custom("graph-closure", [p, b](const Word& t, const Word& s) {
    auto [w, pending] = run_length_decode(t);
    (void)pending;
    if (p->refuted(w, b)) return false;
    Word out = p->f_prefix(w);
    std::size_t n = std::min(out.size(), s.size());
    return std::equal(out.begin(), out.begin() + static_cast<long>(n), s.begin());
  });
}

std::string Construction::intended_class() const {
  int r = presentation->rank() - 1;  // B is Pi^0_r
  if (target == "pi") return "Pi^0_" + std::to_string(r);
  return "Sigma^0_" + std::to_string(std::max(1, r - 1));
}

json Construction::to_json() const {
  return {{"source", omegaforge::to_json(*source)},
          {"target", target},
          {"intended_class", intended_class()},
          {"ambient", ambient == Ambient::Identity ? "P_infinity identity" : "omega^omega via run lengths"},
          {"presentation", presentation->describe(4, 4)},
          {"rtree", rtree->to_json()},
          {"dictionary", {{"name", dict.name}, {"alphabet", dict.alphabet}}},
          {"budget", {{"depth", budget.depth}, {"index_bound", budget.index_bound}}},
          {"partition",
           "A^inf = (mu^inf minus the union of P_{t,S,j}) union the union of (A_{t,S,j} meet P_{t,S,j}); "
           "on K_{N,j} membership reduces to E_N"}};
}

Construction construct(const CodePtr& b, const std::string& target, const Budget& budget) {
  if (target != "sigma" && target != "pi") throw ParseError("target must be sigma or pi, not '" + target + "'");
  Construction c;
  c.source = b;
  c.target = target;
  c.budget = budget;
  c.presentation = Presentation::present(b);
  c.pair = build(c.presentation).second;
  if (canonical_dump(*b) == canonical_dump(*p_infinity_code())) {
    c.ambient = Ambient::Identity;
    c.rtree = std::make_shared<const TransitionTree>(TransitionTree::diagonal());
    c.bctx = {has_one_in_period, [](const UPWord& a, std::size_t n) { return a.prefix(n); }};
  } else {
    c.rtree = std::make_shared<const TransitionTree>(derive_rtree(c.presentation));
    PresentationPtr p = c.presentation;
    c.bctx = {[p](const UPWord& a) { return p->in_b(a); },
              [p, budget](const UPWord& a, std::size_t n) {
                ProgramWord d = p->g_apply(a, budget);
                return run_length(d.gen, n);
              }};
  }
  c.dict = build_dictionary(*c.rtree);
  return c;
}

Construction construction_from_json(const json& j) {
  Budget b;
  if (j.contains("budget")) {
    b.depth = j["budget"].value("depth", b.depth);
    b.index_bound = j["budget"].value("index_bound", b.index_bound);
  }
  return construct(code_from_json(j.at("source")), j.at("target").get<std::string>(), b);
}

json PartitionReport::to_json() const {
  json d{{"kind", kind_name(decomposition.kind)}};
  if (decomposition.kind == Decomposition::Kind::Triple) {
    d["t"] = word_to_string(decomposition.t, Alphabet{4});
    d["S"] = decomposition.s;
    d["j"] = decomposition.j_p;
    d["N"] = decomposition.n;
  }
  if (shape_violation) d = {{"kind", "not-in-P"}};
  return {{"gamma", gamma},
          {"kind", kind},
          {"lhs", omegaforge::to_string(lhs)},
          {"rhs", omegaforge::to_string(rhs)},
          {"decomposition", d},
          {"contradiction", contradiction()}};
}

PartitionReport partition_check(const Construction& c, const UPWord& gamma, const Budget& b) {
  PartitionReport r;
  r.gamma = gamma.to_string();
  r.kind = "up";
  try {
    r.decomposition = decompose(OmegaWord(gamma), b);
  } catch (const NotInP&) {
    r.shape_violation = true;
  }
  // No P_{t,S,j} holds an ultimately periodic word, so the right side is mu^infty.
  r.lhs = omega_power_member(c.dict, OmegaWord(gamma), b);
  r.rhs = omega_power_member(mu_dict(), OmegaWord(gamma), b);
  return r;
}

PartitionReport partition_check_k(const Construction& c, std::uint64_t n, const UPWord& alpha, const Budget& b) {
  std::uint64_t j = 0;
  while (m_bound(j) < n) ++j;
  ProgramWord gamma = phi_inv(n, j, OmegaWord(alpha));
  PartitionReport r;
  r.gamma = "phi_inv(" + std::to_string(n) + "," + std::to_string(j) + "," + alpha.to_string() + ")";
  r.kind = "k-tail";
  r.decomposition = decompose(OmegaWord(gamma), b);
  r.lhs = omega_power_member(c.dict, OmegaWord(gamma), b);
  r.rhs = truth(en_member(n, alpha, c.bctx));
  return r;
}

}  // namespace omegaforge
