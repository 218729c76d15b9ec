#include "labyrinth/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "json.hpp"
#include "labyrinth/error.hpp"

namespace lab::io {

using json = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ----------------------------------------------------------------- writer

bool is_scalar(const json& j) { return !j.is_object() && !j.is_array(); }

bool flat(const json& j) {
  if (!j.is_array()) return false;
  for (const auto& e : j) {
    if (!is_scalar(e) && !(e.is_array() && std::all_of(e.begin(), e.end(), is_scalar))) return false;
  }
  return true;
}

void write_scalar(const json& j, std::string& out) {
  if (j.is_number_float()) {
    out += format_number(j.get<double>());
  } else {
    out += j.dump();
  }
}

void write_inline(const json& j, std::string& out) {
  if (!j.is_array()) {
    write_scalar(j, out);
    return;
  }
  out += '[';
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (i) out += ", ";
    write_inline(j[i], out);
  }
  out += ']';
}

// Pretty printer whose only departure from json::dump is the float format.
void write(const json& j, std::string& out, int level) {
  const std::string pad(2 * (level + 1), ' ');
  const std::string close(2 * level, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
      out += pad + json(it.key()).dump() + ": ";
      write(it.value(), out, level + 1);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += close + "}";
  } else if (j.is_array()) {
    if (j.empty() || flat(j)) {
      write_inline(j, out);
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out += pad;
      write(j[i], out, level + 1);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += close + "]";
  } else {
    write_scalar(j, out);
  }
}

std::string dump(const json& j) {
  std::string out;
  write(j, out, 0);
  out += '\n';
  return out;
}

json number(double x) {
  require(std::isfinite(x), ErrorKind::kInvalidInput, "serialization: non-finite number");
  return json(x);
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

json doubles_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

// ----------------------------------------------------------------- reader

class Field {
 public:
  Field(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  [[noreturn]] void bad(const std::string& what) const {
    fail(ErrorKind::kMalformedFile, (path_.empty() ? std::string("file") : path_) + ": " + what);
  }

  const std::string& path() const { return path_; }
  bool is_null() const { return node_.is_null(); }

  Field at(const std::string& key) const {
    if (!node_.is_object()) bad("expected an object");
    const auto it = node_.find(key);
    if (it == node_.end()) Field(node_, join(key)).bad("missing field");
    return Field(*it, join(key));
  }

  std::optional<Field> find(const std::string& key) const {
    if (!node_.is_object()) bad("expected an object");
    const auto it = node_.find(key);
    if (it == node_.end() || it->is_null()) return std::nullopt;
    return Field(*it, join(key));
  }

  std::size_t size() const {
    if (!node_.is_array()) bad("expected an array");
    return node_.size();
  }

  Field operator[](std::size_t i) const { return Field(node_[i], path_ + "[" + std::to_string(i) + "]"); }

  double real() const {
    if (!node_.is_number()) bad("expected a number");
    const double x = node_.get<double>();
    if (!std::isfinite(x)) bad("expected a finite number");
    return x;
  }

  long long integer() const {
    if (!node_.is_number_integer()) bad("expected an integer");
    return node_.get<long long>();
  }

  std::uint64_t unsigned_integer() const {
    if (!node_.is_number_unsigned()) bad("expected a nonnegative integer");
    return node_.get<std::uint64_t>();
  }

  std::string text() const {
    if (!node_.is_string()) bad("expected a string");
    return node_.get<std::string>();
  }

  bool boolean() const {
    if (!node_.is_boolean()) bad("expected true or false");
    return node_.get<bool>();
  }

  Vec vec(int dim) const {
    if (size() != static_cast<std::size_t>(dim)) bad("expected " + std::to_string(dim) + " coordinates");
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = (*this)[i].real();
    return v;
  }

  Mat mat(int dim) const {
    if (size() != static_cast<std::size_t>(dim)) bad("expected " + std::to_string(dim) + " rows");
    Mat m(dim, dim);
    for (int r = 0; r < dim; ++r) m.row(r) = (*this)[r].vec(dim).transpose();
    return m;
  }

  std::vector<double> reals() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].real());
    return out;
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& node_;
  std::string path_;
};

int checked_int(const Field& f, long long lo, long long hi) {
  const long long v = f.integer();
  if (v < lo || v > hi) f.bad("expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double positive(const Field& f) {
  const double x = f.real();
  if (!(x > 0.0)) f.bad("must be positive");
  return x;
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) return std::signbit(x) ? "-0.0" : "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ------------------------------------------------------------ labyrinths

std::string save_labyrinth(const Labyrinth& lab) {
  json j;
  j["version"] = kFormatVersion;
  j["dim"] = lab.dim;
  json dom;
  dom["type"] = to_string(lab.domain.type);
  dom["inner"] = number(lab.domain.inner);
  dom["outer"] = number(lab.domain.outer);
  if (lab.domain.type == DomainType::kEllipsoid) dom["shape"] = mat_json(lab.domain.shape);
  if (lab.domain.type == DomainType::kPreset) dom["preset"] = lab.domain.preset;
  j["domain"] = dom;
  if (lab.schedule) {
    const ShellSchedule& s = *lab.schedule;
    json sj;
    sj["s0"] = number(s.s0);
    sj["J"] = s.J;
    sj["m"] = s.m;
    sj["t"] = number(s.t);
    sj["c"] = number(s.c);
    sj["a"] = number(s.a);
    sj["scale"] = number(s.scale);
    sj["s"] = doubles_json(s.s);
    j["schedule"] = sj;
  } else {
    j["schedule"] = nullptr;
  }
  json nets = json::array();
  for (const auto& n : lab.nets) {
    json nj;
    nj["j"] = n.j;
    nj["r"] = number(n.r);
    nj["c"] = number(n.c);
    nj["m"] = n.m;
    nj["seed"] = n.seed;
    nj["class_sizes"] = n.class_sizes;
    nets.push_back(nj);
  }
  j["nets"] = nets;
  if (lab.patches) {
    const PatchRecord& p = *lab.patches;
    json pj;
    json centers = json::array();
    for (const Vec& c : p.centers) centers.push_back(vec_json(c));
    pj["centers"] = centers;
    pj["radii"] = doubles_json(p.radii);
    pj["delta"] = number(p.delta);
    pj["eta"] = number(p.eta);
    pj["budget"] = number(p.budget);
    pj["rounds"] = p.rounds;
    pj["final_eta"] = number(p.final_eta);
    json steps = json::array();
    for (const auto& s : p.steps) {
      json st;
      st["patch"] = s.patch;
      st["eta"] = number(s.eta);
      st["depths"] = doubles_json(s.depths);
      steps.push_back(st);
    }
    pj["steps"] = steps;
    j["patches"] = pj;
  }
  j["budget"] = lab.budget ? number(*lab.budget) : json(nullptr);
  json comps = json::array();
  for (const auto& c : lab.components) {
    json cj;
    cj["center"] = vec_json(c.ball.center);
    cj["normal"] = vec_json(c.ball.normal);
    cj["radius"] = number(c.ball.radius);
    if (c.ball.level) {
      cj["level"] = json{{"j", c.ball.level->j}, {"k", c.ball.level->k}, {"p", c.ball.level->p}};
    } else {
      cj["level"] = nullptr;
    }
    if (c.map) cj["map"] = mat_json(*c.map);
    comps.push_back(cj);
  }
  j["components"] = comps;
  j["seed"] = lab.seed;
  return dump(j);
}

Labyrinth load_labyrinth(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kMalformedFile, std::string("not valid JSON: ") + e.what());
  }
  const Field root(j, "");
  Labyrinth lab;
  const Field version = root.at("version");
  if (version.integer() != kFormatVersion) version.bad("unsupported format version");
  lab.dim = checked_int(root.at("dim"), 2, kMaxDim);
  const int d = lab.dim;

  const Field dom = root.at("domain");
  const Field type = dom.at("type");
  try {
    lab.domain.type = domain_type_from_string(type.text());
  } catch (const Error&) {
    type.bad("unknown domain type");
  }
  lab.domain.dim = d;
  lab.domain.inner = dom.at("inner").real();
  lab.domain.outer = positive(dom.at("outer"));
  if (!(lab.domain.inner >= 0.0 && lab.domain.inner < lab.domain.outer)) {
    dom.at("inner").bad("need 0 <= inner < outer");
  }
  if (lab.domain.type == DomainType::kEllipsoid) {
    const Field shape = dom.at("shape");
    lab.domain.shape = shape.mat(d);
    try {
      (void)lab.domain.body();
    } catch (const Error& e) {
      shape.bad(e.what());
    }
  }
  if (lab.domain.type == DomainType::kPreset) {
    const Field preset = dom.at("preset");
    lab.domain.preset = preset.text();
    try {
      (void)lab.domain.body();
    } catch (const Error& e) {
      preset.bad(e.what());
    }
  }

  if (auto sf = root.find("schedule")) {
    ShellSchedule s;
    s.s0 = sf->at("s0").real();
    s.J = checked_int(sf->at("J"), 0, 1 << 20);
    s.m = checked_int(sf->at("m"), 1, 1 << 20);
    s.t = sf->at("t").real();
    s.c = sf->at("c").real();
    s.a = sf->at("a").real();
    s.scale = positive(sf->at("scale"));
    const Field sv = sf->at("s");
    s.s = sv.reals();
    if (s.s.size() != static_cast<std::size_t>(s.J) + 1) sv.bad("expected J + 1 radii");
    for (std::size_t i = 1; i < s.s.size(); ++i) {
      if (!(s.s[i] > s.s[i - 1])) sv[i].bad("radii must increase");
    }
    lab.schedule = s;
  }
  const Field nets = root.at("nets");
  for (std::size_t i = 0; i < nets.size(); ++i) {
    const Field nf = nets[i];
    NetRecord n;
    n.j = checked_int(nf.at("j"), 1, 1 << 20);
    n.r = positive(nf.at("r"));
    n.c = positive(nf.at("c"));
    n.m = checked_int(nf.at("m"), 1, 1 << 20);
    n.seed = nf.at("seed").unsigned_integer();
    const Field sizes = nf.at("class_sizes");
    for (std::size_t q = 0; q < sizes.size(); ++q) n.class_sizes.push_back(checked_int(sizes[q], 0, 1 << 30));
    lab.nets.push_back(std::move(n));
  }
  if (auto pf = root.find("patches")) {
    PatchRecord p;
    const Field centers = pf->at("centers");
    for (std::size_t i = 0; i < centers.size(); ++i) p.centers.push_back(centers[i].vec(d));
    const Field radii = pf->at("radii");
    p.radii = radii.reals();
    if (p.radii.size() != p.centers.size()) radii.bad("expected one radius per center");
    p.delta = pf->at("delta").real();
    p.eta = pf->at("eta").real();
    p.budget = pf->at("budget").real();
    p.rounds = checked_int(pf->at("rounds"), 0, 1 << 30);
    p.final_eta = pf->at("final_eta").real();
    const Field steps = pf->at("steps");
    for (std::size_t i = 0; i < steps.size(); ++i) {
      PatchStep s;
      const Field patch = steps[i].at("patch");
      s.patch = checked_int(patch, 0, static_cast<long long>(p.centers.size()) - 1);
      s.eta = steps[i].at("eta").real();
      s.depths = steps[i].at("depths").reals();
      p.steps.push_back(std::move(s));
    }
    lab.patches = std::move(p);
  }
  if (auto bf = root.find("budget")) lab.budget = bf->real();

  const Field comps = root.at("components");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const Field cf = comps[i];
    Component c;
    c.ball.center = cf.at("center").vec(d);
    const Field normal = cf.at("normal");
    c.ball.normal = normal.vec(d);
    if (std::abs(c.ball.normal.norm() - 1.0) > 1e-9) normal.bad("must have unit length");
    c.ball.radius = positive(cf.at("radius"));
    if (auto lf = cf.find("level")) {
      c.ball.level = geom::LevelTag{checked_int(lf->at("j"), 0, 1 << 30), checked_int(lf->at("k"), 0, 1 << 30),
                                    checked_int(lf->at("p"), 0, 1 << 30)};
    }
    if (auto mf = cf.find("map")) {
      c.map = mf->mat(d);
      if (!(std::abs(c.map->determinant()) > 1e-14)) mf->bad("map must be invertible");
    }
    lab.components.push_back(std::move(c));
  }
  lab.seed = root.at("seed").unsigned_integer();
  return lab;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kInvalidInput, "cannot open '" + path + "' for writing");
  out << text;
  require(static_cast<bool>(out), ErrorKind::kInvalidInput, "failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kMalformedFile, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------- reports

std::string report_json(const audit::AuditReport& audit, const std::optional<VerifyOutcome>& verify) {
  auto finite_or_null = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json j;
  json aj;
  aj["pass"] = audit.pass;
  aj["empty"] = audit.empty;
  json checks = json::array();
  for (const auto& c : audit.checks) {
    checks.push_back(json{{"name", c.name},
                          {"pass", c.pass},
                          {"measured", finite_or_null(c.measured)},
                          {"threshold", finite_or_null(c.threshold)},
                          {"detail", c.detail}});
  }
  aj["checks"] = checks;
  j["audit"] = aj;
  if (verify) {
    json vj;
    vj["M"] = verify->M;
    vj["pass"] = verify->length_pass;
    if (verify->escape) {
      const auto& rep = *verify->escape;
      vj["note"] = rep.note;
      vj["best_length"] = rep.best ? json(rep.best->length) : json(nullptr);
      json attempts = json::array();
      for (const auto& a : rep.attempts) {
        attempts.push_back(json{{"seed", a.seed},
                                {"budget", a.budget},
                                {"nodes", a.nodes},
                                {"edges", a.edges},
                                {"length", a.length ? json(*a.length) : json(nullptr)}});
      }
      vj["attempts"] = attempts;
      json poly = json::array();
      if (rep.best) {
        for (const Vec& p : rep.best->polyline) poly.push_back(vec_json(p));
      }
      vj["best_path"] = poly;
    }
    j["verify"] = vj;
  }
  return dump(j);
}

std::optional<std::vector<Vec>> load_report_path(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kMalformedFile, std::string("report is not valid JSON: ") + e.what());
  }
  const Field root(j, "");
  const auto verify = root.find("verify");
  if (!verify) return std::nullopt;
  const auto path = verify->find("best_path");
  if (!path || path->size() == 0) return std::nullopt;
  std::vector<Vec> out;
  const int d = static_cast<int>((*path)[0].size());
  for (std::size_t i = 0; i < path->size(); ++i) out.push_back((*path)[i].vec(d));
  return out;
}

// ---------------------------------------------------------------- figures

namespace {

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  std::string s = buf;
  return s == "-0.000" ? "0.000" : s;
}

}  // namespace

std::string export_svg(const Labyrinth& lab, const SvgOptions& options) {
  require(lab.dim == 2 || options.axes.has_value(), ErrorKind::kInvalidInput,
          "export: SVG of a " + std::to_string(lab.dim) + "-dimensional labyrinth needs projection axes");
  const auto [ax, ay] = options.axes.value_or(std::pair{0, 1});
  require(ax >= 0 && ay >= 0 && ax < lab.dim && ay < lab.dim && ax != ay, ErrorKind::kInvalidInput,
          "export: projection axes must be two distinct coordinates");
  const convex::ConvexDomain body = lab.domain.body();
  const double extent = lab.domain.outer * body.circumradius();
  const double scale = 500.0 / extent;
  auto px = [&](const Vec& x) { return fixed(scale * x(ax)) + "," + fixed(-scale * x(ay)); };

  // Level curves of the gauge, traced in the projection plane.
  auto level_curve = [&](double level, const std::string& cls) {
    std::string pts;
    constexpr int kSteps = 720;
    for (int i = 0; i < kSteps; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / kSteps;
      Vec u = Vec::Zero(lab.dim);
      u(ax) = std::cos(angle);
      u(ay) = std::sin(angle);
      if (i) pts += ' ';
      pts += px(level * u / body.gauge(u));
    }
    return "<polygon class=\"" + cls + "\" points=\"" + pts + "\"/>\n";
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-500 -500 1000 1000\" width=\"1000\" height=\"1000\">\n";
  out += "<style>.domain{fill:none;stroke:#000;stroke-width:1.5}.shell{fill:none;stroke:#bbb;stroke-width:0.4}"
         ".component{fill:none;stroke:#c0392b;stroke-width:0.8}.escape{fill:none;stroke:#2471a3;stroke-width:1.2}"
         "</style>\n";
  out += level_curve(lab.domain.outer, "domain");
  if (lab.domain.inner > 0.0) out += level_curve(lab.domain.inner, "domain");
  if (lab.schedule) {
    for (int j = 1; j < lab.schedule->J; ++j) out += level_curve(lab.schedule->scale * lab.schedule->s[j], "shell");
  }
  for (const auto& c : lab.components) {
    const geom::Disc disc = c.disc();
    if (lab.dim == 2) {
      const auto rim = disc.rim_samples(2);
      out += "<line class=\"component\" x1=\"" + fixed(scale * rim[0](ax)) + "\" y1=\"" + fixed(-scale * rim[0](ay)) +
             "\" x2=\"" + fixed(scale * rim[1](ax)) + "\" y2=\"" + fixed(-scale * rim[1](ay)) + "\"/>\n";
    } else {
      // Projected rim: an ellipse traced as a closed polygon.
      std::string pts;
      constexpr int kRim = 48;
      for (int i = 0; i < kRim; ++i) {
        const double angle = 2.0 * std::numbers::pi * i / kRim;
        const Vec y = disc.center() + disc.basis() * (std::cos(angle) * unit(lab.dim - 1, 0) +
                                                      std::sin(angle) * unit(lab.dim - 1, 1));
        if (i) pts += ' ';
        pts += px(y);
      }
      out += "<polygon class=\"component\" points=\"" + pts + "\"/>\n";
    }
  }
  if (options.path) {
    std::string pts;
    for (std::size_t i = 0; i < options.path->size(); ++i) {
      if (i) pts += ' ';
      pts += px((*options.path)[i]);
    }
    out += "<polyline class=\"escape\" points=\"" + pts + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string export_csv(const Labyrinth& lab) {
  std::string out = "index,j,k,p,radius";
  for (int a = 0; a < lab.dim; ++a) out += ",center_" + std::to_string(a);
  for (int a = 0; a < lab.dim; ++a) out += ",normal_" + std::to_string(a);
  out += ",mapped\n";
  for (std::size_t i = 0; i < lab.components.size(); ++i) {
    const auto& c = lab.components[i];
    const geom::Disc disc = c.disc();
    out += std::to_string(i);
    if (c.ball.level) {
      out += "," + std::to_string(c.ball.level->j) + "," + std::to_string(c.ball.level->k) + "," +
             std::to_string(c.ball.level->p);
    } else {
      out += ",,,";
    }
    out += "," + format_number(disc.bounding_radius());
    for (int a = 0; a < lab.dim; ++a) out += "," + format_number(disc.center()(a));
    for (int a = 0; a < lab.dim; ++a) out += "," + format_number(disc.normal()(a));
    out += c.map ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace lab::io
