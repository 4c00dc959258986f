#include "defectlab/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace defectlab {

double fro_norm(const Matrix& a) { return a.norm(); }

Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

bool is_hermitian(const Matrix& a, double herm_tol) {
    if (a.rows() != a.cols()) return false;
    return (a - a.adjoint()).norm() <= herm_tol * (1.0 + a.norm());
}

EigH eig_hermitian(const Matrix& a, double herm_tol) {
    if (a.rows() != a.cols()) throw DimMismatch("eig_hermitian: matrix not square");
    if (!is_hermitian(a, herm_tol))
        throw NonHermitianInput("eig_hermitian: input exceeds hermiticity tolerance");

    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(a));
    const int n = static_cast<int>(a.rows());

    EigH out;
    out.values = RVector(n);
    out.vectors = Matrix(n, n);
    // Eigen returns ascending order; flip to descending.
    for (int k = 0; k < n; ++k) {
        out.values(k) = solver.eigenvalues()(n - 1 - k);
        out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
    }
    // Phase convention: first entry of significant modulus made real positive.
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            const Complex z = out.vectors(i, k);
            if (std::abs(z) > 1e-12) {
                out.vectors.col(k) *= std::conj(z) / std::abs(z);
                break;
            }
        }
    }
    return out;
}

double min_eigenvalue(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(hermitian));
    return solver.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(hermitian));
    return solver.eigenvalues().maxCoeff();
}

bool psd_leq(const Matrix& a, const Matrix& b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimMismatch("psd_leq: dimension mismatch");
    return min_eigenvalue(b - a) >= -tol;
}

Matrix support_projection(const Matrix& a, double rank_tol, double psd_tol) {
    const EigH eig = eig_hermitian(a);
    if (!eig.values.size()) return a;
    if (eig.values.minCoeff() < -psd_tol)
        throw NotPsd("support_projection: min eigenvalue below -psd_tol");

    const double cutoff = rank_tol * std::max(eig.values.maxCoeff(), 1.0);
    Matrix p = Matrix::Zero(a.rows(), a.cols());
    for (int k = 0; k < eig.values.size(); ++k) {
        if (eig.values(k) > cutoff)
            p += eig.vectors.col(k) * eig.vectors.col(k).adjoint();
    }
    return hermitize(p);
}

int tolerant_rank(const Matrix& hermitian, double rank_tol) {
    const EigH eig = eig_hermitian(hermitian);
    if (!eig.values.size()) return 0;
    const double top = eig.values.cwiseAbs().maxCoeff();
    const double cutoff = rank_tol * std::max(top, 1.0);
    int r = 0;
    for (int k = 0; k < eig.values.size(); ++k)
        if (std::abs(eig.values(k)) > cutoff) ++r;
    return r;
}

int tolerant_rank_general(const Matrix& a, double rank_tol) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    const double cutoff = rank_tol * std::max(sv.maxCoeff(), 1.0);
    int r = 0;
    for (int k = 0; k < sv.size(); ++k)
        if (sv(k) > cutoff) ++r;
    return r;
}

Matrix tensor(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix projection_join(const Matrix& p, const Matrix& q, double rank_tol) {
    return support_projection(p + q, rank_tol);
}

bool is_projection(const Matrix& p, double proj_tol) {
    if (p.rows() != p.cols()) return false;
    if (!is_hermitian(p, proj_tol)) return false;
    if ((p * p - p).norm() > proj_tol) return false;
    const EigH eig = eig_hermitian(p);
    for (int k = 0; k < eig.values.size(); ++k) {
        const double l = eig.values(k);
        if (std::min(std::abs(l), std::abs(l - 1.0)) > 100 * proj_tol) return false;
    }
    return true;
}

Matrix orthonormal_span(const Matrix& columns, double rank_tol) {
    if (columns.cols() == 0) return Matrix(columns.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cutoff = rank_tol * std::max(sv.size() ? sv.maxCoeff() : 0.0, 1.0);
    int r = 0;
    for (int k = 0; k < sv.size(); ++k)
        if (sv(k) > cutoff) ++r;
    return svd.matrixU().leftCols(r);
}

Matrix null_space(const Matrix& a, double rank_tol) {
    if (a.cols() == 0) return Matrix(0, 0);
    if (a.rows() == 0) return Matrix::Identity(a.cols(), a.cols());
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = rank_tol * std::max(sv.size() ? sv.maxCoeff() : 0.0, 1.0);
    int r = 0;
    for (int k = 0; k < sv.size(); ++k)
        if (sv(k) > cutoff) ++r;
    return svd.matrixV().rightCols(a.cols() - r);
}

Matrix hermitian_sqrt(const Matrix& a, double psd_tol) {
    const EigH eig = eig_hermitian(a);
    if (eig.values.size() && eig.values.minCoeff() < -psd_tol)
        throw NotPsd("hermitian_sqrt: min eigenvalue below -psd_tol");
    Matrix out = Matrix::Zero(a.rows(), a.cols());
    for (int k = 0; k < eig.values.size(); ++k) {
        const double l = std::max(eig.values(k), 0.0);
        out += std::sqrt(l) * eig.vectors.col(k) * eig.vectors.col(k).adjoint();
    }
    return hermitize(out);
}

double trace_norm(const Matrix& hermitian) {
    const EigH eig = eig_hermitian(hermitian);
    return eig.values.cwiseAbs().sum();
}

CVector vec(const Matrix& a) {
    CVector v(a.size());
    int idx = 0;
    for (int j = 0; j < a.cols(); ++j)
        for (int i = 0; i < a.rows(); ++i) v(idx++) = a(i, j);
    return v;
}

Matrix unvec(const CVector& v, int dim) {
    Matrix a(dim, dim);
    int idx = 0;
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) a(i, j) = v(idx++);
    return a;
}

}  // namespace defectlab
