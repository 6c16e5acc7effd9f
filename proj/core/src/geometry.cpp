#include "infground/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "infground/error.hpp"

namespace infground {

namespace {

bool primitive_contains(const Primitive& prim, Point p) {
  return std::visit(
      [p](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          const double dx = p.x - s.center.x;
          const double dy = p.y - s.center.y;
          return dx * dx + dy * dy < s.radius * s.radius;
        } else {
          return p.x > s.xmin && p.x < s.xmax && p.y > s.ymin && p.y < s.ymax;
        }
      },
      prim);
}

double primitive_signed_distance(const Primitive& prim, Point p) {
  return std::visit(
      [p](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return std::hypot(p.x - s.center.x, p.y - s.center.y) - s.radius;
        } else {
          const double cx = 0.5 * (s.xmin + s.xmax);
          const double cy = 0.5 * (s.ymin + s.ymax);
          const double qx = std::abs(p.x - cx) - 0.5 * (s.xmax - s.xmin);
          const double qy = std::abs(p.y - cy) - 0.5 * (s.ymax - s.ymin);
          const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
          return outside + std::min(std::max(qx, qy), 0.0);
        }
      },
      prim);
}

void validate(const Primitive& prim) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          if (!(s.radius > 0.0) || !std::isfinite(s.radius) ||
              !std::isfinite(s.center.x) || !std::isfinite(s.center.y)) {
            std::ostringstream msg;
            msg << "ball radius must be positive and finite, got " << s.radius;
            throw InvalidParameter(msg.str());
          }
        } else {
          if (!(s.xmin < s.xmax) || !(s.ymin < s.ymax) || !std::isfinite(s.xmin) ||
              !std::isfinite(s.xmax) || !std::isfinite(s.ymin) || !std::isfinite(s.ymax)) {
            throw InvalidParameter("rectangle needs xmin < xmax and ymin < ymax");
          }
        }
      },
      prim);
}

}  // namespace

DomainSpec::DomainSpec(std::string name, std::vector<Primitive> primitives)
    : name_(std::move(name)), primitives_(std::move(primitives)) {
  if (primitives_.empty()) {
    throw InvalidParameter("domain '" + name_ + "' has no primitives");
  }
  for (const auto& prim : primitives_) validate(prim);
}

bool DomainSpec::contains(Point p) const {
  return std::any_of(primitives_.begin(), primitives_.end(),
                     [p](const Primitive& prim) { return primitive_contains(prim, p); });
}

double DomainSpec::signed_distance(Point p) const {
  double phi = std::numeric_limits<double>::infinity();
  for (const auto& prim : primitives_) phi = std::min(phi, primitive_signed_distance(prim, p));
  return phi;
}

BoundingBox DomainSpec::bounds() const {
  BoundingBox box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& prim : primitives_) {
    std::visit(
        [&box](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Ball>) {
            box.xmin = std::min(box.xmin, s.center.x - s.radius);
            box.xmax = std::max(box.xmax, s.center.x + s.radius);
            box.ymin = std::min(box.ymin, s.center.y - s.radius);
            box.ymax = std::max(box.ymax, s.center.y + s.radius);
          } else {
            box.xmin = std::min(box.xmin, s.xmin);
            box.xmax = std::max(box.xmax, s.xmax);
            box.ymin = std::min(box.ymin, s.ymin);
            box.ymax = std::max(box.ymax, s.ymax);
          }
        },
        prim);
  }
  return box;
}

Primitive make_ball(Point center, double radius) {
  Primitive prim = Ball{center, radius};
  validate(prim);
  return prim;
}

Primitive make_rect(double xmin, double xmax, double ymin, double ymax) {
  Primitive prim = Rect{xmin, xmax, ymin, ymax};
  validate(prim);
  return prim;
}

bool contains(const DomainSpec& spec, Point p) { return spec.contains(p); }

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    std::ostringstream msg;
    msg << "delta must lie in (0,1), got " << delta;
    throw InvalidParameter(msg.str());
  }
}

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    std::ostringstream msg;
    msg << "epsilon must lie in [0,1), got " << epsilon;
    throw InvalidParameter(msg.str());
  }
}

}  // namespace

DomainSpec make_dumbbell(double delta, double epsilon) {
  check_delta(delta);
  check_epsilon(epsilon);
  std::ostringstream name;
  name << (epsilon == 0.0 ? "dumbbell" : "dumbbell-asym") << "(delta=" << delta
       << ",epsilon=" << epsilon << ")";
  return DomainSpec(name.str(), {make_ball({-5.0, 0.0}, 1.0 - epsilon),
                                 make_rect(-5.0, 5.0, -delta, delta),
                                 make_ball({5.0, 0.0}, 1.0)});
}

DomainSpec make_half_dumbbell(double delta, double epsilon) {
  check_delta(delta);
  check_epsilon(epsilon);
  std::ostringstream name;
  name << "half-dumbbell(delta=" << delta << ",epsilon=" << epsilon << ")";
  return DomainSpec(name.str(),
                    {make_ball({-5.0, 0.0}, 1.0 - epsilon), make_rect(-5.0, 4.0, -delta, delta)});
}

DomainSpec make_disjoint_balls(double epsilon) {
  check_epsilon(epsilon);
  std::ostringstream name;
  name << "disjoint-balls(epsilon=" << epsilon << ")";
  return DomainSpec(name.str(), {make_ball({5.0, 0.0}, 1.0), make_ball({-5.0, 0.0}, 1.0 - epsilon)});
}

DomainSpec make_stadium() {
  return DomainSpec("stadium", {make_ball({-1.0, 0.0}, 1.0), make_rect(-1.0, 1.0, -1.0, 1.0),
                                make_ball({1.0, 0.0}, 1.0)});
}

DomainSpec make_ball_domain(Point center, double radius) {
  std::ostringstream name;
  name << "ball(r=" << radius << ")";
  return DomainSpec(name.str(), {make_ball(center, radius)});
}

}  // namespace infground
