#pragma once

#include <string>
#include <variant>
#include <vector>

namespace infground {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Open disk.
struct Ball {
  Point center;
  double radius = 1.0;
};

/// Open axis-aligned rectangle (xmin, xmax) x (ymin, ymax).
struct Rect {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;
};

using Primitive = std::variant<Ball, Rect>;

struct BoundingBox {
  double xmin, xmax, ymin, ymax;
};

/// Union of open primitives.
///
/// Membership is exact (strict inequalities against each primitive). The
/// CSG signed distance `signed_distance` is the minimum of the primitive
/// signed distances; it has the right sign but only bounds the true
/// boundary distance from below inside the union, so the grid distance field
/// never uses it.
class DomainSpec {
 public:
  DomainSpec(std::string name, std::vector<Primitive> primitives);

  const std::string& name() const { return name_; }
  const std::vector<Primitive>& primitives() const { return primitives_; }

  bool contains(Point p) const;
  double signed_distance(Point p) const;
  BoundingBox bounds() const;

 private:
  std::string name_;
  std::vector<Primitive> primitives_;
};

Primitive make_ball(Point center, double radius);
Primitive make_rect(double xmin, double xmax, double ymin, double ymax);

bool contains(const DomainSpec& spec, Point p);

/// B_{1-eps}((-5,0)) u (-5,5)x(-delta,delta) u B_1((5,0)). eps = 0 is the
/// symmetric dumbbell.
DomainSpec make_dumbbell(double delta, double epsilon);

/// Left bulb of the asymmetric dumbbell plus the tube cut at x = 4:
/// B_{1-eps}((-5,0)) u (-5,4)x(-delta,delta).
DomainSpec make_half_dumbbell(double delta, double epsilon);

/// B_1((5,0)) u B_{1-eps}((-5,0)).
DomainSpec make_disjoint_balls(double epsilon);

/// B_1((-1,0)) u (-1,1)x(-1,1) u B_1((1,0)).
DomainSpec make_stadium();

DomainSpec make_ball_domain(Point center, double radius);

}  // namespace infground
