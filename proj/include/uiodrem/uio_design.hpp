#pragma once

#include <string>

#include "uiodrem/numerics/pole_place.hpp"
#include "uiodrem/numerics/types.hpp"

namespace uiodrem {

/// Smallest r with C A^{r-1} B != 0. Throws DesignError when no r <= n exists.
int relative_degree(const Matrix& A, const Matrix& B, const Matrix& C, double tol = 1e-12);

/// Gains of the unknown input observer
///   xhat' = F xhat + L y + G y^(r),
/// with B = G C A^{r-1} B, M = A - G C A^r and F = M - L C.
struct UioGains {
  Vector G;
  Matrix M;
  Vector L;
  Matrix F;
  int r = 1;
  /// L + F^r G = 0 holds (to 1e-8).
  bool star = false;
};

struct GainResiduals {
  double decoupling = 0.0;   // ||B - G C A^{r-1} B||
  double reduced = 0.0;      // ||M - A + G C A^r||
  double closed_loop = 0.0;  // ||F - M + L C||
  double star = 0.0;         // ||L + F^r G||
  double max_structural() const;
};

GainResiduals gain_residuals(const Matrix& A, const Vector& B, const RowVector& C, const UioGains& gains);

struct GainSpec {
  enum class Mode { poles, star, explicit_gain };
  Mode mode = Mode::poles;
  /// Desired spectrum of F (poles mode; seeds the iteration in star mode).
  PoleSet poles;
  /// Used in explicit_gain mode.
  Vector L;
};

/// Synthesizes (G, M, L, F). Throws DesignError when the rank condition
/// fails, (C, M) is not detectable, or F is not Hurwitz.
UioGains design_gains(const Matrix& A, const Vector& B, const RowVector& C, int r, const GainSpec& spec);
UioGains design_gains(const Matrix& A, const Vector& B, const RowVector& C, int r, const PoleSet& poles);

/// PBH test at every eigenvalue of M with non-negative real part.
bool is_detectable(const Matrix& M, const RowVector& C, double tol = 1e-9);

/// Observer gain placing the observable part of (M, C) at the leading
/// entries of `poles`. The unobservable part keeps its own (required stable)
/// spectrum.
Vector place_detectable(const Matrix& M, const RowVector& C, const PoleSet& poles);

struct StarSolution {
  Vector L;
  Matrix F;
  double residual = 0.0;
  int iterations = 0;
  std::string method;
};

/// Finds L with L + (M - L C)^r G = 0 and M - L C Hurwitz, starting from
/// `seed`. Damped fixed-point iteration first, Newton on the polynomial
/// system as fallback; r = 1 is solved in closed form.
StarSolution solve_star_condition(const Matrix& M, const Vector& G, const RowVector& C, int r, const Vector& seed,
                                  double tol = 1e-10);

}  // namespace uiodrem
