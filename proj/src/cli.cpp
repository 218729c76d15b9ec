#include "labyrinth/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "labyrinth/audit.hpp"
#include "labyrinth/ball_labyrinth.hpp"
#include "labyrinth/convex_adapter.hpp"
#include "labyrinth/error.hpp"
#include "labyrinth/escape.hpp"
#include "labyrinth/io.hpp"

namespace lab::cli {
namespace {

struct GenerateConfig {
  int dim = 2;
  std::string domain = "ball";
  std::vector<double> axes;  // ellipsoid semi-axes
  std::string preset = "ellipse";
  double s0 = 0.5;
  int J = 3;
  int m = 0;
  double t = 1.05;
  double c = 0.45;
  double M = 0.0;
  std::vector<double> rho;
  std::vector<double> budgets;
  int shell_cap = 64;
  double patch_radius = 1.0;
  double eta = 0.05;
  std::uint64_t seed = 1;
  std::string out = "labyrinth.json";
  std::string report;
};

struct EffortConfig {
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> nodes;
  int shortcut_rounds = 400;
  double clearance = 0.0;

  escape::Effort effort(int dim) const {
    escape::Effort e = escape::Effort::standard(dim);
    if (!seeds.empty()) e.seeds = seeds;
    if (!nodes.empty()) e.budgets = nodes;
    e.shortcut_rounds = shortcut_rounds;
    e.clearance = clearance;
    return e;
  }
};

struct VerifyConfig {
  std::string file;
  double M = 0.0;
  EffortConfig effort;
  std::string report;
};

struct ExportConfig {
  std::string file;
  std::string svg;
  std::string csv;
  std::vector<int> axes;
  std::string path;  // report whose best path is overlaid
};

struct ReportConfig {
  std::string file;
  std::string out;
};

void check(bool ok, const std::string& what) { require(ok, ErrorKind::kInvalidInput, what); }

std::string sibling(const std::string& file, const std::string& suffix) {
  std::filesystem::path p(file);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

// Config-file keys become flags unless the same flag was given explicitly.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  const auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  check(it + 1 != args.end(), "--config: missing file name");
  const std::string path = *(it + 1);
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kInvalidInput, "--config: " + path + " is not valid JSON: " + e.what());
  }
  check(config.is_object(), "--config: expected a JSON object of option values");

  std::vector<std::string> merged(args.begin(), it);
  merged.insert(merged.end(), it + 2, args.end());
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  auto scalar = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, value] : config.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) merged.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& e : value) joined += (joined.empty() ? "" : ",") + scalar(e);
      merged.push_back(flag);
      merged.push_back(joined);
    } else {
      merged.push_back(flag);
      merged.push_back(scalar(value));
    }
  }
  return merged;
}

std::string show(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

void validate(const GenerateConfig& g) {
  check(g.dim >= 2 && g.dim <= kMaxDim, "--dim: need 2 <= dim <= " + std::to_string(kMaxDim));
  check(g.s0 > 0.0 && g.s0 < 1.0, "--s0: need 0 < s0 < 1");
  check(g.J >= 1, "--J: need J >= 1");
  check(g.m >= 0, "--m: need m >= 0 (0 picks the class capacity)");
  check(g.t > 1.0, "--t: need t > 1");
  check(g.c > 0.0 && g.c < 0.5, "--c: need 0 < c < 1/2");
  check(g.t * g.c < 0.5, "--t/--c: need t*c < 1/2 (got t*c = " + show(g.t * g.c) + ")");
  check(g.M >= 0.0 && std::isfinite(g.M), "--M: need a finite M >= 0");
  if (g.domain == "ellipsoid") {
    check(static_cast<int>(g.axes.size()) == g.dim, "--axes: need one semi-axis per dimension");
    for (double a : g.axes) check(a > 0.0 && std::isfinite(a), "--axes: semi-axes must be positive (SPD shape)");
  }
  if (g.domain == "preset") check(g.dim == 2, "--preset: smooth presets are planar (need --dim 2)");
  if (!g.rho.empty()) {
    check(g.domain == "ball", "--rho: exhaustions are built in the ball");
    check(g.budgets.size() + 1 == g.rho.size(), "--budgets: need one budget per annulus (rho count - 1)");
  }
}

void print_audit(const audit::AuditReport& report, std::ostream& out) {
  for (const auto& c : report.checks) {
    out << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << "  measured " << show(c.measured)
        << "  threshold " << show(c.threshold);
    if (!c.detail.empty()) out << "  (" << c.detail << ")";
    out << '\n';
  }
  out << "audit: " << (report.pass ? "pass" : "FAIL") << '\n';
}

bool save_and_audit(const Labyrinth& lab, const std::string& path, const std::string& report_path,
                    std::ostream& out) {
  io::write_file(path, io::save_labyrinth(lab));
  const audit::AuditReport report = audit::audit_labyrinth(lab);
  io::write_file(report_path, io::report_json(report, std::nullopt));
  out << path << ": " << lab.components.size() << " components\n";
  print_audit(report, out);
  return report.pass;
}

int cmd_generate(const GenerateConfig& g, bool c_given, std::ostream& out) {
  validate(g);
  const std::string report = g.report.empty() ? sibling(g.out, ".audit.json") : g.report;

  if (!g.rho.empty()) {
    shell::ExhaustionParams params;
    params.dim = g.dim;
    params.t = g.t;
    if (c_given) params.c = g.c;
    params.shell_cap = g.shell_cap;
    params.seed = g.seed;
    const auto layers = shell::exhaustion_labyrinth({g.rho, g.budgets}, params);
    bool pass = true;
    for (std::size_t n = 0; n < layers.size(); ++n) {
      const std::string tag = ".layer" + std::to_string(n + 1);
      const std::string file = sibling(g.out, tag + ".json");
      out << "layer " << n + 1 << ": J = " << layers[n].shells << ", loop best "
          << show(layers[n].best) << " vs M = " << show(g.budgets[n]) << '\n';
      pass = save_and_audit(layers[n].labyrinth, file, sibling(g.out, tag + ".audit.json"), out) && pass;
    }
    return pass ? kExitPass : kExitFailure;
  }

  Labyrinth lab;
  if (g.domain == "preset") {
    DomainDescriptor desc;
    desc.type = DomainType::kPreset;
    desc.dim = g.dim;
    desc.preset = g.preset;
    const convex::ConvexDomain body = desc.body();
    const convex::PatchCover cover = convex::patch_cover(body, g.patch_radius, g.eta);
    convex::PatchParams params;
    params.t = g.t;
    params.c = g.c;
    params.m = g.m;
    params.seed = g.seed;
    lab = convex::assemble_patch_labyrinth(desc, cover, g.M, params);
  } else {
    const int m = g.m > 0 ? g.m : shell::default_class_count(g.dim, g.c);
    const ShellSchedule sch = shell::make_schedule(g.s0, g.J, m, g.t, g.c);
    lab = shell::build_labyrinth(sch, g.dim, g.seed);
    if (g.domain == "ellipsoid") {
      Mat shape = Mat::Zero(g.dim, g.dim);
      for (int i = 0; i < g.dim; ++i) shape(i, i) = 1.0 / (g.axes[i] * g.axes[i]);
      lab = convex::pullback_labyrinth(lab, shape);
    }
    lab.budget = g.M;
  }
  return save_and_audit(lab, g.out, report, out) ? kExitPass : kExitFailure;
}

int cmd_verify(const VerifyConfig& v, bool M_given, std::ostream& out) {
  const Labyrinth lab = io::load_labyrinth(io::read_file(v.file));
  check(M_given || lab.budget.has_value(), "--M: not given and the file records no budget");
  io::VerifyOutcome outcome;
  outcome.M = M_given ? v.M : *lab.budget;
  check(outcome.M >= 0.0 && std::isfinite(outcome.M), "--M: need a finite M >= 0");
  const escape::Effort effort = v.effort.effort(lab.dim);
  outcome.escape = escape::min_escape_length(lab, effort);
  const double best =
      outcome.escape->best ? outcome.escape->best->length : std::numeric_limits<double>::infinity();
  outcome.length_pass = best > outcome.M;
  const audit::AuditReport report = audit::audit_labyrinth(lab);
  const std::string path = v.report.empty() ? sibling(v.file, ".report.json") : v.report;
  io::write_file(path, io::report_json(report, outcome));

  print_audit(report, out);
  out << "best escape found: " << (outcome.escape->best ? show(best) : std::string("none"))
      << "  M = " << show(outcome.M) << "  " << (outcome.length_pass ? "pass" : "FAIL") << '\n';
  out << outcome.escape->note << '\n';
  out << "report: " << path << '\n';
  return outcome.length_pass && report.pass ? kExitPass : kExitFailure;
}

int cmd_export(const ExportConfig& e, std::ostream& out) {
  check(!e.svg.empty() || !e.csv.empty(), "export: give --svg and/or --csv");
  check(e.axes.empty() || e.axes.size() == 2, "--axes: need exactly two coordinate indices");
  const Labyrinth lab = io::load_labyrinth(io::read_file(e.file));
  if (!e.svg.empty()) {
    io::SvgOptions options;
    if (!e.axes.empty()) options.axes = std::pair{e.axes[0], e.axes[1]};
    if (!e.path.empty()) options.path = io::load_report_path(io::read_file(e.path));
    io::write_file(e.svg, io::export_svg(lab, options));
    out << "wrote " << e.svg << '\n';
  }
  if (!e.csv.empty()) {
    io::write_file(e.csv, io::export_csv(lab));
    out << "wrote " << e.csv << '\n';
  }
  return kExitPass;
}

int cmd_report(const ReportConfig& r, std::ostream& out) {
  const Labyrinth lab = io::load_labyrinth(io::read_file(r.file));
  const audit::AuditReport report = audit::audit_labyrinth(lab);
  out << r.file << ": dim " << lab.dim << ", " << to_string(lab.domain.type) << ", " << lab.components.size()
      << " components";
  if (lab.schedule) out << ", J = " << lab.schedule->J << ", m = " << lab.schedule->m;
  if (lab.budget) out << ", budget M = " << show(*lab.budget);
  out << '\n';
  print_audit(report, out);
  if (!r.out.empty()) io::write_file(r.out, io::report_json(report, std::nullopt));
  return report.pass ? kExitPass : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Labyrinths of flat balls: build, verify, export."};
  app.name("labyrinth");
  app.require_subcommand(1);

  GenerateConfig g;
  auto* gen = app.add_subcommand("generate", "Build a labyrinth, audit it, write it out");
  gen->add_option("--config", "JSON file of option values (flags win)");
  gen->add_option("--dim", g.dim, "Ambient dimension")->capture_default_str();
  gen->add_option("--domain", g.domain, "ball, ellipsoid or preset")
      ->check(CLI::IsMember({"ball", "ellipsoid", "preset"}))
      ->capture_default_str();
  gen->add_option("--axes", g.axes, "Ellipsoid semi-axes")->delimiter(',');
  gen->add_option("--preset", g.preset, "Smooth planar preset")
      ->check(CLI::IsMember({"ellipse", "superellipse"}))
      ->capture_default_str();
  gen->add_option("--s0", g.s0, "Inner radius of the shells")->capture_default_str();
  gen->add_option("--J", g.J, "Number of shells")->capture_default_str();
  gen->add_option("--m", g.m, "Sublevels per shell (0: class capacity)")->capture_default_str();
  gen->add_option("--t", g.t, "Tangent radius slack, t > 1")->capture_default_str();
  auto* c_opt = gen->add_option("--c", g.c, "Net covering ratio, 0 < c < 1/2")->capture_default_str();
  gen->add_option("--M", g.M, "Escape length budget recorded in the file")->capture_default_str();
  gen->add_option("--rho", g.rho, "Exhaustion radii rho_1 < ... < 1")->delimiter(',');
  gen->add_option("--budgets", g.budgets, "Budget M_n per exhaustion annulus")->delimiter(',');
  gen->add_option("--shell-cap", g.shell_cap, "Largest J tried per annulus")->capture_default_str();
  gen->add_option("--patch-radius", g.patch_radius, "Patch ball radius (preset domains)")->capture_default_str();
  gen->add_option("--eta", g.eta, "Initial collar width (preset domains)")->capture_default_str();
  gen->add_option("--seed", g.seed, "Net seed")->capture_default_str();
  gen->add_option("--out", g.out, "Labyrinth file")->capture_default_str();
  gen->add_option("--report", g.report, "Audit report (default: <out>.audit.json)");

  VerifyConfig v;
  auto* ver = app.add_subcommand("verify", "Search for short escapes and audit a labyrinth file");
  ver->add_option("--config", "JSON file of option values (flags win)");
  ver->add_option("file", v.file, "Labyrinth file")->required();
  auto* M_opt = ver->add_option("--M", v.M, "Escape length to beat (default: the file's budget)");
  ver->add_option("--seeds", v.effort.seeds, "Roadmap seeds")->delimiter(',');
  ver->add_option("--nodes", v.effort.nodes, "Roadmap node budgets")->delimiter(',');
  ver->add_option("--shortcut-rounds", v.effort.shortcut_rounds, "Path shortcutting rounds")->capture_default_str();
  ver->add_option("--clearance", v.effort.clearance, "Path clearance (0: automatic)")->capture_default_str();
  ver->add_option("--report", v.report, "Report file (default: <file>.report.json)");

  ExportConfig e;
  auto* exp = app.add_subcommand("export", "Write an SVG figure or a CSV table");
  exp->add_option("--config", "JSON file of option values (flags win)");
  exp->add_option("file", e.file, "Labyrinth file")->required();
  exp->add_option("--svg", e.svg, "SVG output");
  exp->add_option("--csv", e.csv, "CSV output");
  exp->add_option("--axes", e.axes, "Projection axes i,j (required for d >= 3)")->delimiter(',');
  exp->add_option("--path", e.path, "Report whose best escape path is drawn");

  ReportConfig r;
  auto* rep = app.add_subcommand("report", "Audit a labyrinth file and summarize it");
  rep->add_option("--config", "JSON file of option values (flags win)");
  rep->add_option("file", r.file, "Labyrinth file")->required();
  rep->add_option("--out", r.out, "Also write the audit as JSON");

  try {
    std::vector<std::string> tokens = merge_config(args);
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitPass : kExitInput;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInput;
  }

  try {
    if (*gen) return cmd_generate(g, c_opt->count() > 0, out);
    if (*ver) return cmd_verify(v, M_opt->count() > 0, out);
    if (*exp) return cmd_export(e, out);
    return cmd_report(r, out);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    // A construction that ran but could not reach its budget is a verification
    // failure; everything else is bad input.
    const bool failure = ex.kind() == ErrorKind::kBudgetExhausted || ex.kind() == ErrorKind::kIntegrity;
    return failure ? kExitFailure : kExitInput;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace lab::cli
