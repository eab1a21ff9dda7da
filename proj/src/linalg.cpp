#include "roughlab/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roughlab {

bool is_psd(const Matrix& sigma, double rel_tol) {
  if (sigma.rows() != sigma.cols()) return false;
  if (sigma.size() == 0) return true;
  if (!sigma.allFinite()) return false;
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > rel_tol * scale) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sigma + sigma.transpose()));
  return eig.eigenvalues().minCoeff() >= -rel_tol * scale;
}

Matrix psd_sqrt(const Matrix& sigma) {
  if (!is_psd(sigma)) {
    throw std::invalid_argument("covariance matrix is not symmetric positive semidefinite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sigma + sigma.transpose()));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  const Eigen::Index m = a.rows();
  if (a.cols() != m || q.rows() != m || q.cols() != m) {
    throw std::invalid_argument("solve_lyapunov: shape mismatch");
  }
  // vec(A P + P A^T) = (I (x) A + A (x) I) vec(P), column-major vec.
  const Matrix id = Matrix::Identity(m, m);
  Matrix kron(m * m, m * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      kron.block(i * m, j * m, m, m) = id(i, j) * a + a(i, j) * id;
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(q.data(), m * m);
  const Vector sol = kron.fullPivLu().solve(rhs);
  return Eigen::Map<const Matrix>(sol.data(), m, m);
}

double min_real_eigenvalue(const Matrix& a) {
  Eigen::EigenSolver<Matrix> eig(a, false);
  return eig.eigenvalues().real().minCoeff();
}

double spectral_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> eig(a, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix antisym(const Matrix& x) { return 0.5 * (x - x.transpose()); }
Matrix sym(const Matrix& x) { return 0.5 * (x + x.transpose()); }

}  // namespace roughlab
