#pragma once

#include <memory>
#include <string>

#include "omegaforge/kuratowski.hpp"
#include "omegaforge/omega_power.hpp"

namespace omegaforge {

// Where the closed set C sits before the run-length coding into P_infinity.
// Identity: B = P_infinity itself with f the identity, so R is the diagonal.
enum class Ambient { Baire, Identity };

// beta = 0^{d(0)} 1 0^{d(1)} 1 ... truncated to n letters.
Word run_length(const std::function<Letter(std::uint64_t)>& delta, std::size_t n);
// Complete letters of t plus the trailing run of zeros.
std::pair<Word, std::uint64_t> run_length_decode(const Word& t);

TransitionTree derive_rtree(const PresentationPtr& p);

struct Construction {
  CodePtr source;
  std::string target;  // "sigma" or "pi"
  Ambient ambient = Ambient::Baire;
  PresentationPtr presentation;
  BijectionPair pair;
  std::shared_ptr<const TransitionTree> rtree;
  Dict dict;
  BContext bctx;
  Budget budget;

  std::string intended_class() const;
  json to_json() const;
};

Construction construct(const CodePtr& b, const std::string& target, const Budget& budget = Budget{});
// Rebuilds from the stored source code and target.
Construction construction_from_json(const json& j);

struct PartitionReport {
  std::string gamma;
  std::string kind;  // "up" or "k-tail"
  Truth3 lhs = Truth3::Unknown;  // A^infty
  Truth3 rhs = Truth3::Unknown;  // mu side, or the E_N side on a K set
  Decomposition decomposition;
  bool shape_violation = false;
  bool contradiction() const {
    return lhs != Truth3::Unknown && rhs != Truth3::Unknown && lhs != rhs;
  }
  json to_json() const;
};

PartitionReport partition_check(const Construction& c, const UPWord& gamma, const Budget& b);
// gamma = phi_inv(n, j, alpha) with the least j such that n <= M_j.
PartitionReport partition_check_k(const Construction& c, std::uint64_t n, const UPWord& alpha, const Budget& b);

}  // namespace omegaforge
