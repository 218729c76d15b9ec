#pragma once

#include <array>
#include <initializer_list>
#include <vector>

#include "labyrinth/labyrinth.hpp"
#include "visibility_oracle.hpp"

namespace testing {

inline lab::Vec vec(std::initializer_list<double> xs) {
  lab::Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Planar components as closed segments for the oracles.
inline std::vector<std::array<oracle::P, 2>> segments_of(const lab::Labyrinth& lab) {
  std::vector<std::array<oracle::P, 2>> out;
  for (const auto& c : lab.components) {
    const lab::geom::Disc d = c.disc();
    const lab::Vec a = d.center() + d.basis().col(0);
    const lab::Vec b = d.center() - d.basis().col(0);
    out.push_back({oracle::P{a(0), a(1)}, oracle::P{b(0), b(1)}});
  }
  return out;
}

}  // namespace testing
