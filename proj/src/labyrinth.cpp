#include "labyrinth/labyrinth.hpp"

#include <cmath>

#include "labyrinth/error.hpp"

namespace lab {

double ShellSchedule::tangent_radius(int j) const { return a * std::sqrt(delta(j)); }

convex::ConvexDomain DomainDescriptor::body() const {
  switch (type) {
    case DomainType::kBall:
    case DomainType::kAnnulus: return convex::ConvexDomain::ball(dim);
    case DomainType::kEllipsoid: return convex::ConvexDomain::ellipsoid(shape);
    case DomainType::kPreset: return convex::ConvexDomain::preset(preset, dim);
  }
  fail(ErrorKind::kInvalidInput, "domain: unknown type");
}

std::string to_string(DomainType type) {
  switch (type) {
    case DomainType::kBall: return "ball";
    case DomainType::kAnnulus: return "annulus";
    case DomainType::kEllipsoid: return "ellipsoid";
    case DomainType::kPreset: return "preset";
  }
  return "unknown";
}

DomainType domain_type_from_string(const std::string& name) {
  if (name == "ball") return DomainType::kBall;
  if (name == "annulus") return DomainType::kAnnulus;
  if (name == "ellipsoid") return DomainType::kEllipsoid;
  if (name == "preset") return DomainType::kPreset;
  fail(ErrorKind::kInvalidInput, "unknown domain kind '" + name + "'");
}

}  // namespace lab
