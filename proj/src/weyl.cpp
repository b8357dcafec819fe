#include "cansys/weyl.hpp"

#include "cansys/explicit_initial.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace cansys {

namespace {

// Hermitian square root with a PSD input; slightly negative eigenvalues from
// roundoff are clamped, genuinely negative ones are an inconsistency.
Matrix psd_sqrt(const Matrix& M, const char* what) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.adjoint()));
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::VectorXd vals = es.eigenvalues();
    for (int i = 0; i < vals.size(); ++i) {
        if (vals(i) < -1e-10 * (1.0 + scale))
            throw std::runtime_error(std::string(what) + ": matrix is not positive semidefinite");
        vals(i) = std::sqrt(std::max(vals(i), 0.0));
    }
    return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace

WeylDisk weyl_disk(const Matrix& W_at_r, double r, Complex lambda, const SignatureConfig& sig) {
    if (!(lambda.imag() > 0.0))
        throw std::invalid_argument("weyl_disk: Im lambda must be positive");
    if (sig.m1 != sig.m2)
        throw std::invalid_argument("weyl_disk: needs m1 == m2");
    const int p = sig.m1;

    WeylDisk disk;
    disk.r = r;
    disk.lambda = lambda;
    disk.form = W_at_r.adjoint() * sig.j() * W_at_r;

    const Matrix A11 = disk.form.topLeftCorner(p, p);
    const Matrix A12 = disk.form.topRightCorner(p, p);
    const Matrix A21 = disk.form.bottomLeftCorner(p, p);
    const Matrix A22 = disk.form.bottomRightCorner(p, p);

    if (min_hermitian_eigenvalue(Matrix(-A22)) <= 0.0)
        throw std::runtime_error("weyl_disk: -form_22 not positive definite (internal inconsistency)");

    const Matrix negA22sqrt = psd_sqrt(Matrix(-A22), "weyl_disk semi-radius");
    disk.rhoL = negA22sqrt.inverse();
    disk.center = -hermitian_solve(A22, A21);
    disk.rhoR = psd_sqrt(Matrix(A11 - A12 * hermitian_solve(A22, A21)), "weyl_disk semi-radius");
    return disk;
}

WeylDisk weyl_disk(const CanonicalSystemSpec& spec, Complex lambda, double r, int nodes) {
    const SampledMatrixFunction W = fundamental_solution_oracle(spec, lambda, Grid(0.0, r, nodes));
    return weyl_disk(W.values.back(), r, lambda, spec.signature);
}

double disk_membership(const WeylDisk& disk, const Matrix& phi) {
    const int p = static_cast<int>(phi.rows());
    Matrix col(2 * p, p);
    col.topRows(p) = Matrix::Identity(p, p);
    col.bottomRows(p) = phi;
    return min_hermitian_eigenvalue(Matrix(col.adjoint() * disk.form * col));
}

Matrix disk_point(const WeylDisk& disk, const Matrix& omega) {
    const int p = static_cast<int>(omega.rows());
    const double excess =
        -min_hermitian_eigenvalue(Matrix(Matrix::Identity(p, p) - omega.adjoint() * omega));
    if (excess > 1e-12)
        throw std::invalid_argument("disk_point: omega must be a contraction");
    return disk.rhoL * omega * disk.rhoR + disk.center;
}

Matrix weyl_function_explicit(const GBDTTransform& t, Complex lambda) {
    const GBDTSeed& s = t.seed();
    if (s.c == 0.0)
        throw std::runtime_error("explicit Weyl function requires c != 0");
    if (!s.s0_positive)
        throw std::runtime_error("S(0) not positive");

    const int n = s.n;
    const int p = s.m1;
    const Matrix E1 = make_initial_params(p, s.c, s.alpha, lambda).E1();
    const Matrix Alam = s.A - lambda * Matrix::Identity(n, n);

    // M = v(0,lambda) E1 scaled by det(A - lambda I); the ratio below is
    // unchanged and the expression stays finite across spec(A).
    const Matrix t1 = adjugate(Alam) * (s.Lambda0 * E1);
    const Matrix t2 = s.A.adjoint().partialPivLu().solve(hermitian_solve(s.S0, t1));
    const Matrix M = Alam.determinant() * E1 -
                     I1 * lambda * s.signature().j() * s.Lambda0.adjoint() * t2;

    Eigen::FullPivLU<Matrix> lu(Matrix(M.topRows(p)));
    if (!lu.isInvertible())
        throw std::runtime_error("Weyl evaluation degenerates at this isolated lambda");
    return M.bottomRows(p) * lu.inverse();
}

Matrix l2_integral(const GBDTTransform& t, const Matrix& phi, Complex lambda, double L,
                   int nodes) {
    const int p = t.seed().m1;
    Matrix col0(2 * p, p);
    col0.topRows(p) = Matrix::Identity(p, p);
    col0.bottomRows(p) = phi;

    const Grid grid(0.0, L, nodes);
    SampledMatrixFunction f(grid);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nodes; ++i) {
        const double x = grid.node(i);
        const Matrix col = t.W_tilde(x, lambda) * col0;
        f[i] = col.adjoint() * t.H_tilde(x) * col;
    }
    const Matrix out = quadrature_cumulative(f).values.back();
    return 0.5 * (out + out.adjoint());
}

} // namespace cansys
