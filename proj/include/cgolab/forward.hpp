#pragma once

// Dirichlet problem for (Delta + k^2 + q) u = 0 on the cell-centred grid,
// Cauchy data, Dirichlet-to-Neumann matrices over a cosine boundary basis,
// measurement noise and the weighted DtN distance proxy.
//
// The discrete Laplacian is the 7-point stencil with the Dirichlet value
// imposed at the face through the ghost value 2 f - u_0. The Neumann data of
// a discrete solution is the matching one-sided flux 2 (f - u_0) / h, which
// makes the discrete Green identity exact.
//
// ForwardOptions::scheme = fourth switches to the 13-point fourth-order
// Laplacian. Its ghosts keep the odd-reflection structure, corrected by the
// boundary value of u_nn computed from the data (q must vanish next to the
// boundary), and its flux is again the one that keeps the Green identity exact.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cgolab/grid.hpp"

namespace cgolab {

struct ForwardOptions {
  double tol = 1e-10;          // relative GMRES tolerance
  int max_iter = 400;
  int restart = 60;
  double resonance_margin = 1e-3;  // relative gap |k^2 - lambda| / k^2
  int workers = 1;             // used by dtn_matrix
  StencilOrder scheme = StencilOrder::second;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // ||(Delta_h + k^2 + q) u - b|| / ||b||
};

// Throws ResonantFrequency if k^2 sits within the margin of a discrete
// Dirichlet eigenvalue of -Delta_h (q = 0) or GMRES stagnates.
ScalarField solve_dirichlet(const Potential& q, double k, const BoundaryField& f,
                            const ForwardOptions& options = {}, SolveReport* report = nullptr);

// Applies Delta_h + k^2 + q with Dirichlet data f (the residual operator).
ScalarField apply_helmholtz(const Potential& q, double k, const ScalarField& u, const BoundaryField& f,
                            StencilOrder scheme = StencilOrder::second);

// Sorted distinct eigenvalues -lambda of -Delta_h with homogeneous Dirichlet
// data, restricted to [lo, hi].
std::vector<double> dirichlet_eigenvalues(const Grid& grid, double lo, double hi,
                                         StencilOrder scheme = StencilOrder::second);

// Outward flux of the scheme at every face sample; 2 (f - u_0) / h for the
// second-order scheme.
BoundaryField discrete_flux(const ScalarField& u, const BoundaryField& f, double k = 1.0,
                            StencilOrder scheme = StencilOrder::second);

struct CauchyPair {
  BoundaryField f;
  BoundaryField g;
  double k = 1.0;
  double norm_cache = 0.0;
};

// Traces by the domain-grid extrapolation and fourth-order normal derivative.
CauchyPair cauchy_data(const ScalarField& u, double k, StencilOrder order = StencilOrder::fourth);
// Dirichlet data f with the discrete flux of the solver.
CauchyPair cauchy_data(const ScalarField& u, const BoundaryField& f, double k,
                       StencilOrder scheme = StencilOrder::second);
double cauchy_norm(const BoundaryField& f, const BoundaryField& g);

struct BasisMode {
  Face face = Face::xmin;
  int m = 0;
  int n = 0;
  double kappa = 0.0;
};

// Per-face orthonormal cosine modes (m, n) with 0 <= m, n <= degree_cap,
// ordered face by face, then n, then m.
class BoundaryBasis {
 public:
  BoundaryBasis(const Grid& grid, int degree_cap);

  const Grid& grid() const { return grid_; }
  int degree_cap() const { return degree_cap_; }
  std::size_t size() const { return modes_.size(); }
  const std::vector<BasisMode>& modes() const { return modes_; }

  BoundaryField element(std::size_t i) const;
  Eigen::VectorXcd project(const BoundaryField& field) const;
  BoundaryField synthesize(const Eigen::VectorXcd& coeffs) const;
  // diag (1 + kappa^2)^{order/2}
  Eigen::VectorXd weights(double order) const;

 private:
  Grid grid_;
  int degree_cap_;
  std::vector<BasisMode> modes_;
};

struct DtNMatrix {
  std::vector<BasisMode> basis;
  Eigen::MatrixXcd entries;
  double k = 1.0;
  int degree_cap = 0;
  std::string q_id;

  std::size_t dimension() const { return static_cast<std::size_t>(entries.rows()); }
  // W- entries W- with W- = diag (1 + kappa^2)^{-1/4}.
  Eigen::MatrixXcd weighted() const;
  double weighted_norm() const;
};

DtNMatrix dtn_matrix(const Potential& q, double k, int degree_cap, const ForwardOptions& options = {});

// Largest singular value.
double spectral_norm(const Eigen::MatrixXcd& m);

enum class NoiseModel { dense, relative };

struct NoiseSpec {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  NoiseModel model = NoiseModel::dense;
};

// Adds E = W+ E_w W+ where E_w is a seeded complex gaussian matrix (dense) or
// a gaussian multiple of each weighted entry (relative), rescaled so that
// ||E_w|| = epsilon ||m.weighted()||.
DtNMatrix add_noise(const DtNMatrix& m, double epsilon, std::uint64_t seed, NoiseModel model = NoiseModel::dense);

// ||W- (L1 - L2) W-|| / ||W- L0 W-|| where L0 is the free (q = 0) DtN matrix.
double dtn_distance(const DtNMatrix& l1, const DtNMatrix& l2, const DtNMatrix& free_dtn);

// dist_proxy between the Cauchy data of q1 and q2; noise, if given, perturbs
// the matrix of q2 first.
double cauchy_dist(const Potential& q1, const Potential& q2, double k, int degree_cap,
                   const std::optional<NoiseSpec>& noise = std::nullopt, const ForwardOptions& options = {});

// "CGODTN01", dimension (i32), k (f64), degree cap (i32), then row-major
// complex entries.
void write_dtn(std::ostream& out, const DtNMatrix& m);
DtNMatrix read_dtn(std::istream& in, const Grid& grid);

}  // namespace cgolab
