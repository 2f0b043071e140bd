#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "omegaforge/borel.hpp"
#include "omegaforge/evaluator.hpp"

namespace omegaforge {

class Presentation;
using PresentationPtr = std::shared_ptr<const Presentation>;

// B = complement of rho(sigma) on 2^omega. When sigma is open (rank 1) this is
// the closed base case C = B with f, g the identity. Otherwise sigma is a union
// of complements of members M_i, so B is the intersection of the rho(M_i), and
// each rho(M_i) is cut into disjoint pieces B_{i,j} = complement of rho(D_{i,j}).
// Points of C interleave, in slice i, the piece index j followed by a point of
// the sub-presentation for B_{i,j}.
class Presentation : public std::enable_shared_from_this<Presentation> {
 public:
  // b must be the complement of a single code.
  static PresentationPtr present(const CodePtr& b);
  static PresentationPtr from_sigma(const CodePtr& sigma);

  const CodePtr& sigma() const { return sigma_; }
  CodePtr code() const;  // the complement form of B
  int rank() const;      // rank of the complement form
  bool base() const { return base_; }

  // Members are repeated cyclically when the family is finite.
  std::optional<std::uint64_t> member_count() const;
  CodePtr member(std::uint64_t i) const;
  std::optional<std::uint64_t> piece_count(std::uint64_t i) const;
  // nullopt past the end of the piece family: that piece is empty.
  std::optional<CodePtr> piece(std::uint64_t i, std::uint64_t j) const;
  PresentationPtr sub(std::uint64_t i, std::uint64_t j) const;

  bool in_b(const UPWord& a) const;
  bool in_piece(std::uint64_t i, std::uint64_t j, const UPWord& a) const;
  // The unique j with a in B_{i,j}; NotInB when none is found below the bound.
  std::uint64_t h(const UPWord& a, std::uint64_t i, const Budget& b) const;

  // ---- C, f and g on finite and infinite words of omega^omega ----

  // Letters of f already determined by a finite input.
  Word f_prefix(const Word& w) const;
  // Sound refutation: no point of C extends w.
  bool refuted(const Word& w, const Budget& b) const;
  // True with a witness in C extending w, False when refuted, else Unknown.
  Truth3 member_c(const Word& w, const Budget& b) const;
  Word f_apply(const OmegaWord& delta, const Budget& b) const;
  ProgramWord g_apply(const UPWord& a, const Budget& b) const;
  Letter g_letter(const UPWord& a, std::uint64_t n, const Budget& b) const;

  json describe(std::uint64_t max_i, std::uint64_t max_j) const;

 private:
  explicit Presentation(CodePtr sigma);
  const Family& pieces(std::uint64_t i) const;

  CodePtr sigma_;
  bool base_ = false;
  std::optional<std::size_t> clopen_depth_;
  mutable std::mutex mu_;
  mutable std::map<std::uint64_t, CodePtr> members_;
  mutable std::map<std::uint64_t, std::shared_ptr<const Family>> pieces_;
  mutable std::map<std::pair<std::uint64_t, std::uint64_t>, PresentationPtr> subs_;
};

// Depth of a clopen rank-1 code with finitely many concrete cylinders.
std::optional<std::size_t> clopen_depth(const Code& c);

struct ClosedRep {
  std::function<Truth3(const Word&, const Budget&)> member;
  PresentationPtr structure;
};

struct BijectionPair {
  std::function<Word(const OmegaWord&, const Budget&)> f;
  std::function<ProgramWord(const UPWord&, const Budget&)> g;
};

std::pair<ClosedRep, BijectionPair> build(const PresentationPtr& p);

// Disjointness evidence for the pieces over a corpus of UP points.
struct Certificate {
  std::uint64_t points = 0;
  std::uint64_t checks = 0;
  bool disjoint = true;  // no point lies in two pieces of one member
  bool exact = true;     // a point of rho(M_i) lies in some piece below the bound
  json to_json() const;
};
Certificate certify(const Presentation& p, std::uint64_t max_i, std::uint64_t max_j, std::size_t up_len);

// Base case: g(a) in N(omega^omega, k) iff a in N(2^omega, k) and every fixed
// letter of that neighbourhood is below 2. Takes (k)_1.
bool base_preimage(const UPWord& a, const BigNat& k1);

}  // namespace omegaforge
