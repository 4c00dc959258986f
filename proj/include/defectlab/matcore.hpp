// matcore.hpp — Dense complex/Hermitian linear algebra with tolerance-aware
// rank, support projections, PSD ordering and Kronecker products.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace defectlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Numerical tolerances used across the library. Zero tests follow the
// convention  ||X||_F <= zero * (1 + scale)  with scale the Frobenius norm
// of the map's defect.
struct Tolerances {
    double zero = 1e-9;
    double rank = 1e-9;
    double psd = 1e-9;
    double herm = 1e-10;
    double proj = 1e-8;
};

class DimMismatch : public std::invalid_argument {
public:
    explicit DimMismatch(const std::string& what) : std::invalid_argument(what) {}
};

class NonHermitianInput : public std::invalid_argument {
public:
    explicit NonHermitianInput(const std::string& what) : std::invalid_argument(what) {}
};

class NotPsd : public std::invalid_argument {
public:
    explicit NotPsd(const std::string& what) : std::invalid_argument(what) {}
};

double fro_norm(const Matrix& a);

// (A + A†)/2
Matrix hermitize(const Matrix& a);

// ||A - A†||_F <= tol * (1 + ||A||_F)
bool is_hermitian(const Matrix& a, double herm_tol = Tolerances{}.herm);

// Eigendecomposition of a Hermitian matrix. Eigenvalues descending,
// eigenvector columns orthonormal. Each column is phase-normalized so its
// first entry of significant modulus is real positive; the decomposition is
// deterministic up to degenerate subspaces.
struct EigH {
    RVector values;
    Matrix vectors;
};
EigH eig_hermitian(const Matrix& a, double herm_tol = Tolerances{}.herm);

double min_eigenvalue(const Matrix& hermitian);
double max_eigenvalue(const Matrix& hermitian);

// A <= B in the PSD order: min eig(B - A) >= -tol.
bool psd_leq(const Matrix& a, const Matrix& b, double tol);

// Projection onto the span of eigenvectors of a PSD matrix with eigenvalue
// above rank_tol * max(lambda_max, 1). Throws NotPsd below -psd_tol.
Matrix support_projection(const Matrix& a, double rank_tol, double psd_tol = Tolerances{}.psd);

// Count of eigenvalues with |lambda| > rank_tol * max(|lambda|_max, 1).
int tolerant_rank(const Matrix& hermitian, double rank_tol);

// Rank of a general rectangular matrix by singular values, same relative
// threshold convention.
int tolerant_rank_general(const Matrix& a, double rank_tol);

// Kronecker product.
Matrix tensor(const Matrix& a, const Matrix& b);

// P ∨ Q computed as support of the sum.
Matrix projection_join(const Matrix& p, const Matrix& q, double rank_tol);

// ||P² - P||_F <= proj_tol and eigenvalues near {0,1}.
bool is_projection(const Matrix& p, double proj_tol = Tolerances{}.proj);

// Orthonormal basis of the column span, relative threshold on singular values.
// Returns a matrix with orthonormal columns (possibly zero columns -> empty).
Matrix orthonormal_span(const Matrix& columns, double rank_tol);

// Orthonormal basis of the null space of a rectangular matrix.
Matrix null_space(const Matrix& a, double rank_tol);

// Spectral square root of a PSD matrix; eigenvalues in (-psd_tol, 0) clamp to 0.
Matrix hermitian_sqrt(const Matrix& a, double psd_tol = Tolerances{}.psd);

// Sum of |eigenvalues| of a Hermitian matrix.
double trace_norm(const Matrix& hermitian);

// Column-major vectorization and its inverse.
CVector vec(const Matrix& a);
Matrix unvec(const CVector& v, int dim);

}  // namespace defectlab
