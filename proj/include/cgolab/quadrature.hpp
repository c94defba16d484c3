#pragma once

#include <string>
#include <vector>

#include "cgolab/vec3.hpp"

namespace cgolab {

struct RadialRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum = b - a
};

// Gauss-Legendre rule with `count` nodes on [a, b].
RadialRule gauss_legendre(int count, double a, double b);

struct SphereDesign {
  std::string name;
  std::vector<Vec3> directions;
  std::vector<double> weights;  // sum = 4 pi
  int exact_degree = 0;         // integrates polynomials up to this degree
};

// "octahedral" (6 points), "lebedev14", "lebedev26", "lebedev50", or
// "product:<n_theta>x<n_phi>" (Gauss-Legendre in cos(theta) times uniform phi).
SphereDesign make_sphere_design(const std::string& name);

}  // namespace cgolab
