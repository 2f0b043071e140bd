#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "omegaforge/borel.hpp"

namespace omegaforge {

enum class Truth3 { False, True, Unknown };

inline Truth3 t_not(Truth3 a) {
  if (a == Truth3::Unknown) return a;
  return a == Truth3::True ? Truth3::False : Truth3::True;
}
inline Truth3 t_and(Truth3 a, Truth3 b) {
  if (a == Truth3::False || b == Truth3::False) return Truth3::False;
  if (a == Truth3::Unknown || b == Truth3::Unknown) return Truth3::Unknown;
  return Truth3::True;
}
inline Truth3 t_or(Truth3 a, Truth3 b) { return t_not(t_and(t_not(a), t_not(b))); }
inline Truth3 truth(bool b) { return b ? Truth3::True : Truth3::False; }
std::string to_string(Truth3 t);

struct Budget {
  std::uint64_t depth = 64;        // prefix letters inspected
  std::uint64_t index_bound = 64;  // family indices explored
};

// Exact for all-UP points, budgeted (Kleene connectives) otherwise.
Truth3 eval(const Code& c, const ProductPoint& x, const Budget& b);
// Never takes the exact path; used to cross-check it.
Truth3 eval_budgeted(const Code& c, const ProductPoint& x, const Budget& b);
// Membership of a point whose sequence components are all UP words.
bool eval_exact_up(const Code& c, const ProductPoint& x);
// Under free-variable bindings, for template codes.
bool eval_exact_up(const Code& c, const ProductPoint& x, const Env& env);

// {w : |w| = d, [w] inside rho(c)}, in lex order.
std::vector<Word> brute_cylinders(const Code& c, std::size_t d);

}  // namespace omegaforge
