#pragma once

#include "roughlab/rough_core.hpp"

namespace roughlab {

/// Symmetric square root S with S S^T = sigma. Throws std::invalid_argument
/// if sigma is not symmetric positive semidefinite (relative tolerance 1e-10).
Matrix psd_sqrt(const Matrix& sigma);

bool is_psd(const Matrix& sigma, double rel_tol = 1e-10);

/// Solves A P + P A^T = Q for P (small dense A, Kronecker form).
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// Minimum real part of the spectrum and maximum eigenvalue modulus.
double min_real_eigenvalue(const Matrix& a);
double spectral_radius(const Matrix& a);

Matrix antisym(const Matrix& x);
Matrix sym(const Matrix& x);

}  // namespace roughlab
