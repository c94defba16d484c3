#include "cgolab/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <regex>

#include "cgolab/errors.hpp"

namespace cgolab {

RadialRule gauss_legendre(int count, double a, double b) {
  if (count < 1) throw ConfigError("Gauss-Legendre rule needs at least one node");
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(count)), &gsl_integration_glfixed_table_free);
  if (!table) throw ConfigError("could not build Gauss-Legendre table");
  RadialRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  for (int i = 0; i < count; ++i) {
    gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &rule.nodes[i], &rule.weights[i], table.get());
  }
  return rule;
}

namespace {

void add_orbit(SphereDesign& d, const std::vector<Vec3>& points, double weight) {
  for (const Vec3& p : points) {
    d.directions.push_back(normalized(p));
    d.weights.push_back(weight);
  }
}

std::vector<Vec3> axes() { return {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}; }

std::vector<Vec3> edges() {
  std::vector<Vec3> out;
  for (double s : {1.0, -1.0})
    for (double t : {1.0, -1.0}) {
      out.push_back({s, t, 0});
      out.push_back({s, 0, t});
      out.push_back({0, s, t});
    }
  return out;
}

std::vector<Vec3> corners() {
  std::vector<Vec3> out;
  for (double s : {1.0, -1.0})
    for (double t : {1.0, -1.0})
      for (double u : {1.0, -1.0}) out.push_back({s, t, u});
  return out;
}

// (l, l, m) and permutations with all sign choices.
std::vector<Vec3> llm_orbit(double l, double m) {
  std::vector<Vec3> out;
  for (double s : {1.0, -1.0})
    for (double t : {1.0, -1.0})
      for (double u : {1.0, -1.0}) {
        out.push_back({s * l, t * l, u * m});
        out.push_back({s * l, u * m, t * l});
        out.push_back({u * m, s * l, t * l});
      }
  return out;
}

void scale_to_sphere(SphereDesign& d) {
  double total = 0.0;
  for (double w : d.weights) total += w;
  for (double& w : d.weights) w *= 4.0 * std::numbers::pi / total;
}

}  // namespace

SphereDesign make_sphere_design(const std::string& name) {
  SphereDesign d;
  d.name = name;
  if (name == "octahedral" || name == "lebedev6") {
    add_orbit(d, axes(), 1.0 / 6.0);
    d.exact_degree = 3;
  } else if (name == "lebedev14") {
    add_orbit(d, axes(), 1.0 / 15.0);
    add_orbit(d, corners(), 3.0 / 40.0);
    d.exact_degree = 5;
  } else if (name == "lebedev26") {
    add_orbit(d, axes(), 1.0 / 21.0);
    add_orbit(d, edges(), 4.0 / 105.0);
    add_orbit(d, corners(), 9.0 / 280.0);
    d.exact_degree = 7;
  } else if (name == "lebedev50") {
    add_orbit(d, axes(), 4.0 / 315.0);
    add_orbit(d, edges(), 64.0 / 2835.0);
    add_orbit(d, corners(), 27.0 / 1280.0);
    add_orbit(d, llm_orbit(1.0 / std::sqrt(11.0), 3.0 / std::sqrt(11.0)), 14641.0 / 725760.0);
    d.exact_degree = 11;
  } else {
    static const std::regex product(R"(product:(\d+)x(\d+))");
    std::smatch match;
    if (!std::regex_match(name, match, product)) throw ConfigError("unknown sphere design '" + name + "'");
    const int nt = std::stoi(match[1]);
    const int np = std::stoi(match[2]);
    if (nt < 1 || np < 1) throw ConfigError("product sphere design needs positive counts");
    const RadialRule polar = gauss_legendre(nt, -1.0, 1.0);
    for (int i = 0; i < nt; ++i) {
      const double c = polar.nodes[i];
      const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
      for (int j = 0; j < np; ++j) {
        const double phi = 2.0 * std::numbers::pi * (j + 0.5) / np;
        d.directions.push_back({s * std::cos(phi), s * std::sin(phi), c});
        d.weights.push_back(polar.weights[i] / np);
      }
    }
    d.exact_degree = std::min(2 * nt - 1, np - 1);
  }
  scale_to_sphere(d);
  return d;
}

}  // namespace cgolab
