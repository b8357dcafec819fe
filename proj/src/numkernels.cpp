#include "cansys/numkernels.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace cansys {

SqrtBranch upper_half_branch() {
    return [](Complex z) {
        Complex r = std::sqrt(z); // principal: Re r >= 0
        if (z.imag() == 0.0 && z.real() > 0.0)
            return Complex(std::sqrt(z.real()), 0.0);
        if (r.imag() < 0.0 || (r.imag() == 0.0 && r.real() < 0.0))
            r = -r;
        return r;
    };
}

SqrtBranch nonnegative_branch() {
    return [](Complex z) {
        Complex r = std::sqrt(z);
        if (r.real() < 0.0)
            r = -r;
        return r;
    };
}

Matrix matrix_exp(const Matrix& M) {
    if (M.rows() != M.cols())
        throw std::invalid_argument("matrix_exp: non-square input");
    return M.exp(); // Pade scaling-and-squaring
}

Matrix matrix_sqrt_primary(const Matrix& M, const SqrtBranch& branch) {
    if (M.rows() != M.cols())
        throw std::invalid_argument("matrix_sqrt_primary: non-square input");
    const Eigen::Index n = M.rows();
    Eigen::ComplexSchur<Matrix> schur(M);
    const Matrix& T = schur.matrixT();
    const Matrix& U = schur.matrixU();

    const double scale = std::max(1.0, max_abs(M));
    Matrix R = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(T(i, i)) < 1e-14 * scale)
            throw std::runtime_error("square-root branch undefined at zero eigenvalue");
        R(i, i) = branch(T(i, i));
    }
    // Upper-triangular recurrence: R(i,j) (R(i,i)+R(j,j)) = T(i,j) - sum_k R(i,k) R(k,j).
    for (Eigen::Index d = 1; d < n; ++d) {
        for (Eigen::Index i = 0; i + d < n; ++i) {
            const Eigen::Index j = i + d;
            Complex s = T(i, j);
            for (Eigen::Index k = i + 1; k < j; ++k)
                s -= R(i, k) * R(k, j);
            const Complex denom = R(i, i) + R(j, j);
            if (std::abs(denom) < 1e-14 * scale)
                throw std::runtime_error(
                    "matrix_sqrt_primary: branch choice makes the recurrence singular");
            R(i, j) = s / denom;
        }
    }
    return U * R * U.adjoint();
}

Matrix solve_sylvester(const Matrix& A, const Matrix& C) {
    if (A.rows() != A.cols() || C.rows() != C.cols() || A.rows() != C.rows())
        throw std::invalid_argument("solve_sylvester: dimension mismatch");
    const Eigen::Index n = A.rows();

    // Schur reduce: A = U T U*. With Y = U* S U, D = U* C U the equation
    // becomes T Y - Y T* = D, solved column by column (T* is lower triangular).
    Eigen::ComplexSchur<Matrix> schur(A);
    const Matrix& T = schur.matrixT();
    const Matrix& U = schur.matrixU();

    double scale = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        scale = std::max(scale, std::abs(T(i, i)));
    scale = std::max(scale, 1e-300);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k)
            if (std::abs(T(i, i) - std::conj(T(k, k))) < 1e-8 * scale)
                throw std::runtime_error(
                    "Sylvester equation singular; use quadrature route for S(x)");

    const Matrix D = U.adjoint() * C * U;
    Matrix Y = Matrix::Zero(n, n);
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        Vector rhs = D.col(k);
        for (Eigen::Index j = k + 1; j < n; ++j)
            rhs += Y.col(j) * std::conj(T(k, j));
        // (T - conj(T(k,k)) I) y = rhs, back substitution on the upper triangle.
        Vector y = Vector::Zero(n);
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            Complex s = rhs(i);
            for (Eigen::Index j = i + 1; j < n; ++j)
                s -= T(i, j) * y(j);
            y(i) = s / (T(i, i) - std::conj(T(k, k)));
        }
        Y.col(k) = y;
    }
    return U * Y * U.adjoint();
}

SampledMatrixFunction integrate_ode(const OdeRhs& rhs, const Matrix& initial, const Grid& grid) {
    SampledMatrixFunction out(grid);
    const double h = grid.spacing();
    Matrix y = initial;
    out[0] = y;
    for (int i = 0; i + 1 < grid.nodes; ++i) {
        const double x = grid.node(i);
        const Matrix k1 = rhs(x, y);
        const Matrix k2 = rhs(x + 0.5 * h, y + 0.5 * h * k1);
        const Matrix k3 = rhs(x + 0.5 * h, y + 0.5 * h * k2);
        const Matrix k4 = rhs(x + h, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out[i + 1] = y;
    }
    return out;
}

SampledMatrixFunction quadrature_cumulative(const SampledMatrixFunction& f) {
    const int n = f.size();
    if (n < 2)
        throw std::invalid_argument("quadrature_cumulative: need at least 2 nodes");
    const double h = f.grid.spacing();
    SampledMatrixFunction F(f.grid);
    F[0] = Matrix::Zero(f[0].rows(), f[0].cols());
    if (n == 2) {
        F[1] = 0.5 * h * (f[0] + f[1]);
        return F;
    }
    F[1] = (h / 12.0) * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    for (int i = 2; i < n; ++i)
        F[i] = F[i - 2] + (h / 3.0) * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
    return F;
}

namespace {

struct HermitianFactor {
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    explicit HermitianFactor(const Matrix& S) : es(Matrix(0.5 * (S + S.adjoint()))) {
        if (es.info() != Eigen::Success)
            throw std::runtime_error("hermitian factorization failed");
        const auto& ev = es.eigenvalues();
        const double lo = ev.cwiseAbs().minCoeff();
        const double hi = ev.cwiseAbs().maxCoeff();
        if (lo == 0.0 || hi / lo > 1e12)
            throw std::runtime_error("Hermitian solve: condition number exceeds 1e12");
    }
};

} // namespace

Matrix hermitian_solve(const Matrix& S, const Matrix& B) {
    HermitianFactor f(S);
    const Matrix Qh = f.es.eigenvectors().adjoint();
    return f.es.eigenvectors() *
           f.es.eigenvalues().cwiseInverse().asDiagonal().toDenseMatrix().cast<Complex>() *
           (Qh * B);
}

Matrix hermitian_inverse(const Matrix& S) {
    return hermitian_solve(S, Matrix::Identity(S.rows(), S.cols()));
}

double hermitian_condition(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (S + S.adjoint())));
    const auto& ev = es.eigenvalues();
    const double lo = ev.cwiseAbs().minCoeff();
    if (lo == 0.0)
        return std::numeric_limits<double>::infinity();
    return ev.cwiseAbs().maxCoeff() / lo;
}

double min_hermitian_eigenvalue(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (M + M.adjoint())),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Matrix adjugate(const Matrix& M) {
    const Eigen::Index n = M.rows();
    if (n != M.cols())
        throw std::invalid_argument("adjugate: non-square input");
    if (n == 1)
        return Matrix::Identity(1, 1);
    Matrix adj(n, n);
    Matrix minor(n - 1, n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
                if (r == i) continue;
                for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor(rr, cc) = M(r, c);
                    ++cc;
                }
                ++rr;
            }
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            adj(j, i) = sign * minor.determinant(); // transposed cofactor
        }
    }
    return adj;
}

} // namespace cansys
