#pragma once

#include <functional>
#include <string>
#include <vector>

#include "omegaforge/omega_power.hpp"
#include "omegaforge/words.hpp"

namespace omegaforge {

// ---- the erasing map on 3^{<omega} ----

bool t_member(const Word& s);
bool t_member(const UPWord& a);

struct EraseState {
  Word output;
  std::vector<std::size_t> ones;  // positions in output of surviving 1s
  std::size_t surplus() const { return ones.size(); }
  // Returns false when the letter leaves T.
  bool feed(Letter x);
};

Word erase(const Word& s);
UPWord erase_limit(const UPWord& a);
// n0 such that erase(a|n) agrees with erase_limit(a) on k letters for all n >= n0.
std::size_t erase_stabilization(const UPWord& a, std::size_t k);

bool e_member(const Word& s);           // via the erased prefix
bool e_member_counting(const Word& s);  // via strict prefix counts
bool a2_member(const Word& s);
bool a2_omega_member(const UPWord& a);

// ---- one-counter machines ----

struct CounterTransition {
  enum class Test { Zero, Positive };
  int from = 0;
  Letter letter = 0;
  Test test = Test::Zero;
  int action = 0;  // -1, 0, +1
  int to = 0;
};

// Accepts with an accepting state and counter zero.
struct OneCounterAutomaton {
  std::string name;
  std::vector<std::string> states;
  int start = 0;
  std::vector<bool> accepting;
  std::vector<CounterTransition> transitions;

  bool accepts(const Word& s) const;
  json to_json() const;
};

OneCounterAutomaton counter_e();
OneCounterAutomaton counter_a();

// Prefix automaton over configurations of a one-counter machine.
std::shared_ptr<const PrefixAutomaton> counter_prefix_automaton(OneCounterAutomaton m);
Dict a2_dict();

// ---- gallery ----

struct GalleryEntry {
  std::string name;
  std::string claim;
  Dict dict;
  std::function<bool(const UPWord&)> exact_decider;
};

std::vector<std::string> gallery_names();
GalleryEntry gallery(const std::string& name);

}  // namespace omegaforge
