#pragma once

#include <string>
#include <vector>

#include "rotor/chain.hpp"

namespace fx {

using rotor::ChainSpec;
using rotor::MarkovChain;

inline MarkovChain two_cycle() {
  return rotor::build_chain({{"a", "b"}, {{"a", "b", 1, 1}, {"b", "a", 1, 1}}, {}});
}

// 0-1-2-3 with reflecting ends.
inline MarkovChain path4() {
  return rotor::build_chain({{"0", "1", "2", "3"},
                             {{"0", "1", 1, 1},
                              {"1", "0", 1, 2},
                              {"1", "2", 1, 2},
                              {"2", "1", 1, 2},
                              {"2", "3", 1, 2},
                              {"3", "2", 1, 1}},
                             {}});
}

inline MarkovChain triangle() {
  return rotor::build_chain({{"b", "c", "x"},
                             {{"b", "c", 1, 2},
                              {"b", "x", 1, 2},
                              {"c", "b", 1, 2},
                              {"c", "x", 1, 2},
                              {"x", "b", 1, 2},
                              {"x", "c", 1, 2}},
                             {}});
}

inline MarkovChain lazy_pair() {
  return rotor::build_chain(
      {{"a", "b"}, {{"a", "b", 1, 1}, {"b", "a", 1, 2}, {"b", "b", 1, 2}}, {}});
}

}  // namespace fx
