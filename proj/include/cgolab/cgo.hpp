#pragma once

// Complex geometrical optics solutions u = e^{i zeta.x} (1 + psi) of
// (Delta + k^2 + q) u = 0, built on the torus of period 2L by inverting the
// conjugated Laplacian Delta + 2i zeta.grad on a half-step shifted lattice.

#include <iosfwd>
#include <optional>

#include "cgolab/grid.hpp"

namespace cgolab {

// zeta = eta + i xi with |eta|^2 = k^2 + |xi|^2 and eta.xi = 0.
struct ZetaVector {
  Vec3 eta{0.0, 0.0, 0.0};
  Vec3 xi{0.0, 0.0, 0.0};
  double k = 1.0;

  // zeta.zeta as a complex number (equals k^2 for a valid vector).
  cplx self_dot() const;
  // zeta.x
  cplx dot(const Vec3& x) const;
};

struct ZetaPair {
  ZetaVector zeta1;
  ZetaVector zeta2;
  Vec3 omega{1.0, 0.0, 0.0};
  std::array<Vec3, 2> frame{};  // (omega_perp, omega_perp_tilde)
  double r = 0.0;
  double a = 1.0;
};

// Orthonormal (omega_perp, omega x omega_perp). Without a seed the least
// aligned coordinate axis (lowest index on ties) is orthogonalised against
// omega; a seed parallel to omega falls back to the same rule.
std::array<Vec3, 2> orthonormal_frame(const Vec3& omega, std::optional<Vec3> seed = std::nullopt);

// Throws InvalidFrequencyRange if k^2 + a^2 <= r^2/4, ConfigError if omega is
// not unit length, k < 1, r < 0 or a <= 0.
ZetaPair make_zeta_pair(double k, double r, const Vec3& omega, double a,
                        std::optional<Vec3> frame_seed = std::nullopt);

// Axis j of the half-step lattice shift (pi/2L) e_j for a given xi. When the
// direction of xi is a small integer vector v, j is the axis with the largest
// odd |v_j|, which keeps xi.mu away from zero on the whole shifted lattice.
// Otherwise j is the axis most aligned with xi.
int faddeev_shift_axis(const Vec3& xi);

// Shift vector (pi/2L) e_j used for zeta.
Vec3 faddeev_shift(const ZetaVector& zeta, const Grid& grid);

// Solves (Delta + 2i zeta.grad) w = rhs in the shifted Fourier basis.
// Throws DegenerateSymbol if the symbol comes within 1e-12 (1 + |xi|) of 0.
ScalarField faddeev_invert(const ZetaVector& zeta, const ScalarField& rhs);
// Spectral application of Delta + 2i zeta.grad in the same basis.
ScalarField faddeev_apply(const ZetaVector& zeta, const ScalarField& w);

// Sobolev norm of a field that is periodic up to the phase e^{i shift.x}.
double shifted_sobolev_norm(const ScalarField& field, const Vec3& shift, double s);

struct CGOSolution {
  ZetaVector zeta;
  ScalarField psi;
  double residual = 0.0;
  int iterations = 0;
  double psi_h_s_norm = 0.0;
  Vec3 lattice_shift{0.0, 0.0, 0.0};
  // False if the step ratio went above 1 after first dropping below 0.9.
  bool monotone = true;
};

// Fixed point psi = -G_zeta(q (1 + psi)) from psi = 0, stopping once
// ||psi_{n+1} - psi_n||_{L2} <= tol. Throws NoContraction after 5 straight
// step ratios above 0.9 or when max_iter is exhausted.
CGOSolution build_cgo(const Potential& q, const ZetaVector& zeta, double tol = 1e-10, int max_iter = 200);

// Grid samples of e^{i zeta.x} (1 + psi).
ScalarField cgo_field(const CGOSolution& sol, const Grid& grid);

// Face samples of e^{i zeta.x} (1 + psi): the correction is extrapolated to
// the faces, the exponential is evaluated exactly.
BoundaryField cgo_trace(const CGOSolution& sol);

struct CstarOptions {
  double a_min = 0.05;
  double a_max = 512.0;
  int bisection_steps = 24;
  double tol = 1e-8;
  int max_iter = 400;
};

// Smallest contracting a (omega = e1, r = 0) divided by ||q||_{H^s}.
// Returns 0 for q = 0 and +infinity when a_max does not contract.
double estimate_cstar(const Potential& q, double k, const CstarOptions& options = {});

// Header "CGOSOL01", eta, xi, k, residual, iterations (all f64), then the
// psi field block.
void write_cgo_solution(std::ostream& out, const CGOSolution& sol);
CGOSolution read_cgo_solution(std::istream& in, double s);

}  // namespace cgolab
