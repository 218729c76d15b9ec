#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "labyrinth/geometry.hpp"
#include "labyrinth/labyrinth.hpp"

namespace lab::audit {

struct Check {
  std::string name;
  bool pass = true;
  double measured = 0.0;   // worst observed value of the checked quantity
  double threshold = 0.0;  // the bound it is compared with
  std::string detail;      // witness or first failing component
};

struct AuditOptions {
  int rim_samples_per_dim = 64;        // rim samples per component: this times d
  std::size_t covering_samples = 20000;  // per shell
  double separation_margin = 1e-6;
  bool lp_only = false;  // skip the tangent-plane fast path for separation witnesses
  bool separation = true;
  int divergence_horizon = 10000;
};

struct AuditReport {
  bool pass = true;
  bool empty = false;
  std::vector<Check> checks;

  const Check* find(const std::string& name) const;
};

struct Witness {
  std::size_t component = 0;  // index into the lexicographically sorted order
  geom::Hyperplane plane;
  double margin = 0.0;
  bool from_lp = false;
};

/// Indices of the components sorted by level tag (untagged last, stable).
std::vector<std::size_t> lexicographic_order(const Labyrinth& lab);

/// For every component, a hyperplane with margin >= `margin` between it and
/// the union of all earlier components. Missing entries mean no witness.
std::vector<std::optional<Witness>> lexicographic_witnesses(const Labyrinth& lab, double margin,
                                                            bool lp_only, int rim_samples_per_dim);

AuditReport audit_labyrinth(const Labyrinth& lab, const AuditOptions& options = {});

}  // namespace lab::audit
