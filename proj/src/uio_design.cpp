#include "uiodrem/uio_design.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "uiodrem/numerics/linalg.hpp"

namespace uiodrem {

namespace {

Matrix matrix_power(const Matrix& a, int k) {
  Matrix out = Matrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

double star_residual(const Matrix& M, const Vector& G, const RowVector& C, int r, const Vector& L) {
  const Matrix F = M - L * C;
  return (L + matrix_power(F, r) * G).norm();
}

}  // namespace

int relative_degree(const Matrix& A, const Matrix& B, const Matrix& C, double tol) {
  require_square(A, "relative_degree");
  const Eigen::Index n = A.rows();
  if (n < 1) throw DesignError("relative_degree: empty system");
  if (B.rows() != n || C.cols() != n) throw ShapeError("relative_degree: inconsistent dimensions");
  Matrix ak_b = B;
  const double scale = std::max(1.0, C.norm() * B.norm());
  for (int r = 1; r <= n; ++r) {
    const double markov = (C * ak_b).norm();
    if (markov > tol * scale) return r;
    ak_b = A * ak_b;
  }
  throw DesignError("relative_degree: C A^k B vanishes for all k < n, no finite relative degree");
}

double GainResiduals::max_structural() const { return std::max({decoupling, reduced, closed_loop}); }

GainResiduals gain_residuals(const Matrix& A, const Vector& B, const RowVector& C, const UioGains& g) {
  GainResiduals res;
  const Matrix ca_r1 = C * matrix_power(A, g.r - 1);
  const Matrix ca_r = ca_r1 * A;
  res.decoupling = (B - g.G * (ca_r1 * B)).norm();
  res.reduced = (g.M - A + g.G * ca_r).norm();
  res.closed_loop = (g.F - g.M + g.L * C).norm();
  res.star = (g.L + matrix_power(g.F, g.r) * g.G).norm();
  return res;
}

bool is_detectable(const Matrix& M, const RowVector& C, double tol) {
  const Eigen::Index n = M.rows();
  using Complex = std::complex<double>;
  const Eigen::MatrixXcd Mc = M.cast<Complex>();
  const Eigen::MatrixXcd Cc = Matrix(C).cast<Complex>();
  for (const auto& ev : eigenvalues(M)) {
    if (ev.real() < -tol) continue;
    Eigen::MatrixXcd pbh(n + 1, n);
    pbh.topRows(n) = ev * Eigen::MatrixXcd::Identity(n, n) - Mc;
    pbh.bottomRows(1) = Cc;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const auto& s = svd.singularValues();
    const double scale = std::max(1.0, s(0));
    if (s(n - 1) <= tol * scale) return false;
  }
  return true;
}

Vector place_detectable(const Matrix& M, const RowVector& C, const PoleSet& poles) {
  const Eigen::Index n = M.rows();
  const Matrix obs = observability_matrix<double>(M, Matrix(C));
  const Eigen::Index n_obs = numerical_rank(obs, 1e-10);
  if (n_obs == n) {
    PoleSet chosen(poles.begin(), poles.begin() + std::min<std::size_t>(poles.size(), static_cast<std::size_t>(n)));
    return place_observer<double>(M, Matrix(C), chosen);
  }
  if (n_obs == 0) throw DesignError("place_detectable: C sees no mode of M");
  if (static_cast<Eigen::Index>(poles.size()) < n_obs) {
    throw DesignError("place_detectable: need at least " + std::to_string(n_obs) + " poles");
  }
  // Right singular vectors split the state into the observable subspace
  // (row space of the observability matrix) and its complement, which is
  // M-invariant and invisible to C.
  Eigen::JacobiSVD<Matrix> svd(obs, Eigen::ComputeFullV);
  const Matrix V = svd.matrixV();
  const Matrix V1 = V.leftCols(n_obs);
  const Matrix Mt = V.transpose() * M * V;
  const Matrix M22 = Mt.bottomRightCorner(n - n_obs, n - n_obs);
  if (!is_hurwitz(M22)) throw DesignError("place_detectable: (C, M) is not detectable");
  const Matrix M11 = Mt.topLeftCorner(n_obs, n_obs);
  const Matrix C1 = C * V1;
  const PoleSet chosen(poles.begin(), poles.begin() + n_obs);
  const Vector L1 = place_observer<double>(M11, C1, chosen);
  return V1 * L1;
}

StarSolution solve_star_condition(const Matrix& M, const Vector& G, const RowVector& C, int r, const Vector& seed,
                                  double tol) {
  const Eigen::Index n = M.rows();
  if (seed.size() != n || G.size() != n || C.size() != n) throw ShapeError("solve_star_condition: dimension mismatch");
  StarSolution sol;

  auto finish = [&](Vector L, int iterations, std::string method) {
    sol.L = std::move(L);
    sol.F = M - sol.L * C;
    sol.residual = star_residual(M, G, C, r, sol.L);
    sol.iterations = iterations;
    sol.method = std::move(method);
    if (!is_hurwitz(sol.F)) throw DesignError("solve_star_condition: star-satisfying F is not Hurwitz");
    return sol;
  };

  if (star_residual(M, G, C, r, seed) <= tol) return finish(seed, 0, "seed");

  if (r == 1) {
    // L + (M - L C) G = (1 - C G) L + M G
    const double cg = C.dot(G);
    const Vector mg = M * G;
    if (std::abs(1.0 - cg) > 1e-12) return finish(Vector(-mg / (1.0 - cg)), 1, "closed_form");
    if (mg.norm() <= tol) return finish(seed, 0, "closed_form");
    throw DesignError("solve_star_condition: infeasible for r = 1 since C G = 1 and M G != 0");
  }

  // Damped fixed point L <- (1 - beta) L - beta (M - L C)^r G.
  {
    constexpr double kDamping = 0.5;
    constexpr int kMaxIterations = 500;
    Vector L = seed;
    for (int it = 1; it <= kMaxIterations; ++it) {
      const Matrix F = M - L * C;
      const Vector target = -matrix_power(F, r) * G;
      L = (1.0 - kDamping) * L + kDamping * target;
      if (!L.allFinite()) break;
      if (star_residual(M, G, C, r, L) <= tol && is_hurwitz(Matrix(M - L * C))) {
        return finish(L, it, "fixed_point");
      }
    }
  }

  // Newton on R(L) = L + (M - L C)^r G with dR = (I - sum_j c_j F^j) dL,
  // c_j = C F^{r-1-j} G.
  {
    constexpr int kMaxIterations = 100;
    Vector L = seed;
    double res = star_residual(M, G, C, r, L);
    for (int it = 1; it <= kMaxIterations; ++it) {
      const Matrix F = M - L * C;
      std::vector<Matrix> powers(static_cast<std::size_t>(r + 1));
      powers[0] = Matrix::Identity(n, n);
      for (int j = 1; j <= r; ++j) powers[static_cast<std::size_t>(j)] = powers[static_cast<std::size_t>(j - 1)] * F;
      const Vector R = L + powers[static_cast<std::size_t>(r)] * G;
      Matrix J = Matrix::Identity(n, n);
      for (int j = 0; j < r; ++j) {
        const double c = C.dot(powers[static_cast<std::size_t>(r - 1 - j)] * G);
        J -= c * powers[static_cast<std::size_t>(j)];
      }
      Eigen::FullPivLU<Matrix> lu(J);
      if (!lu.isInvertible()) break;
      const Vector delta = lu.solve(-R);
      double step = 1.0;
      Vector candidate = L + delta;
      double cand_res = star_residual(M, G, C, r, candidate);
      while (cand_res > res && step > 1e-6) {
        step *= 0.5;
        candidate = L + step * delta;
        cand_res = star_residual(M, G, C, r, candidate);
      }
      L = candidate;
      res = cand_res;
      if (res <= tol) return finish(L, it, "newton");
    }
  }
  throw DesignError("solve_star_condition: iteration did not converge to L + F^r G = 0");
}

UioGains design_gains(const Matrix& A, const Vector& B, const RowVector& C, int r, const GainSpec& spec) {
  require_square(A, "design_gains");
  const Eigen::Index n = A.rows();
  if (B.size() != n || C.size() != n) throw ShapeError("design_gains: inconsistent dimensions");
  if (r < 1 || r > n) throw DesignError("design_gains: relative degree out of range");

  const Matrix ca_r1 = C * matrix_power(A, r - 1);
  const Matrix cab = ca_r1 * B;  // 1 x 1
  if (numerical_rank(cab, 1e-12) != numerical_rank(Matrix(B), 1e-12) || std::abs(cab(0, 0)) <= 1e-12 * A.norm()) {
    throw DesignError("design_gains: rank(C A^{r-1} B) != rank(B), decoupling is not solvable");
  }

  UioGains g;
  g.r = r;
  // G = B [(C A^{r-1} B)^T C A^{r-1} B]^{-1} (C A^{r-1} B)^T
  const Matrix ctc = cab.transpose() * cab;
  g.G = B * ctc.inverse() * cab.transpose();
  g.M = A - g.G * (ca_r1 * A);
  if (!is_detectable(g.M, C)) throw DesignError("design_gains: (C, M) is not detectable");

  switch (spec.mode) {
    case GainSpec::Mode::explicit_gain:
      if (spec.L.size() != n) throw ShapeError("design_gains: explicit L must have n entries");
      g.L = spec.L;
      break;
    case GainSpec::Mode::poles:
    case GainSpec::Mode::star:
      g.L = place_detectable(g.M, C, spec.poles);
      break;
  }
  if (spec.mode == GainSpec::Mode::star) {
    const StarSolution star = solve_star_condition(g.M, g.G, C, r, g.L);
    g.L = star.L;
  }
  g.F = g.M - g.L * C;
  if (!is_hurwitz(g.F)) throw DesignError("design_gains: F = M - L C is not Hurwitz");

  const GainResiduals res = gain_residuals(A, B, C, g);
  const double scale = std::max(1.0, A.norm() + g.L.norm() * C.norm());
  if (res.max_structural() > 1e-10 * scale) throw DesignError("design_gains: gain residuals exceed tolerance");
  g.star = res.star <= 1e-8 * std::max(1.0, g.L.norm());
  return g;
}

UioGains design_gains(const Matrix& A, const Vector& B, const RowVector& C, int r, const PoleSet& poles) {
  GainSpec spec;
  spec.poles = poles;
  return design_gains(A, B, C, r, spec);
}

}  // namespace uiodrem
