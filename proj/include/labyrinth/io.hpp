#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "labyrinth/audit.hpp"
#include "labyrinth/escape.hpp"
#include "labyrinth/labyrinth.hpp"

namespace lab::io {

inline constexpr int kFormatVersion = 1;

/// Decimal with 17 significant digits; -0 keeps its sign.
std::string format_number(double x);

/// Labyrinth file text. load(save(x)) == x exactly and save(load(s)) == s for
/// any s produced by save.
std::string save_labyrinth(const Labyrinth& lab);
/// Throws malformed-file naming the first offending field, e.g. "components[3].radius".
Labyrinth load_labyrinth(const std::string& text);

void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

struct VerifyOutcome {
  double M = 0.0;
  std::optional<escape::EscapeReport> escape;
  bool length_pass = true;
};

std::string report_json(const audit::AuditReport& audit, const std::optional<VerifyOutcome>& verify);

/// Best escape polyline stored in a report written by report_json, if any.
std::optional<std::vector<Vec>> load_report_path(const std::string& text);

struct SvgOptions {
  std::optional<std::pair<int, int>> axes;  // required for d >= 3
  std::optional<std::vector<Vec>> path;  // escape path overlay
};

/// 1000 x 1000 view of the domain (scaled so the outer body just fits),
/// shells as faint curves, one stroke with class "component" per component.
std::string export_svg(const Labyrinth& lab, const SvgOptions& options = {});

/// Header plus one row per component.
std::string export_csv(const Labyrinth& lab);

}  // namespace lab::io
