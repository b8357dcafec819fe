#include "cansys/dynamical.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace cansys {

DynamicalSolution::DynamicalSolution(GBDTTransform transform)
    : transform_(std::move(transform)) {
    const Matrix& A = transform_.seed().A;
    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible())
        throw std::invalid_argument("dynamical_solution: A is singular");
    Ainv_ = lu.inverse();
    triangular_exp_ = A.rows() == 2 && A(1, 0) == Complex(0.0) && A(0, 0) == A(1, 1);
}

Matrix DynamicalSolution::exp_itA(double t) const {
    const Matrix& A = transform_.seed().A;
    if (triangular_exp_) {
        Matrix N = Matrix::Zero(2, 2);
        N(0, 1) = 1.0;
        const Complex scale = std::exp(I1 * t * A(0, 0));
        return scale * (Matrix::Identity(2, 2) + I1 * t * A(0, 1) * N);
    }
    return matrix_exp(I1 * t * A);
}

Matrix DynamicalSolution::Y(double x, double t) const {
    const GBDTSeed& seed = transform_.seed();
    const Matrix jm = seed.signature().j();
    const Matrix L = transform_.Lambda(x);
    const Matrix S = transform_.S(x);
    const Matrix core = seed.A.adjoint().partialPivLu().solve(hermitian_solve(S, exp_itA(t)));
    return jm * L.adjoint() * core * Ainv_;
}

DynamicalSolution dynamical_solution(const GBDTTransform& transform) {
    return DynamicalSolution(transform);
}

double simplification_identity_residual(const GBDTTransform& transform) {
    const GBDTSeed& seed = transform.seed();
    double worst = 0.0;
    for (double x : {0.3, 0.9, 1.6}) {
        const Matrix L = transform.Lambda(x);
        const Matrix S = transform.S(x);
        const Matrix lhs =
            transform.wA(x, Complex(0.0)).adjoint() * hermitian_solve(S, L).adjoint();
        // Lambda* (A*)^{-1} S^{-1} = (S^{-1} A^{-1} Lambda)* since S = S*
        const Matrix rhs =
            hermitian_solve(S, Matrix(seed.A.partialPivLu().solve(L))).adjoint() * seed.A;
        worst = std::max(worst, max_abs(Matrix(lhs - rhs)));
    }
    return worst;
}

namespace {

Matrix lambda_star_sinv(const GBDTTransform& transform, double x) {
    const Matrix L = transform.Lambda(x);
    const Matrix S = transform.S(x);
    return hermitian_solve(S, L).adjoint();
}

Matrix q0_tilde(const GBDTTransform& transform, double x) {
    const Matrix jm = transform.seed().signature().j();
    const Matrix L = transform.Lambda(x);
    const Matrix H = transform.H(x);
    const Matrix P = lambda_star_sinv(transform, x); // Lambda* S^{-1}
    return jm * P * L * jm * H - jm * H * jm * P * L;
}

} // namespace

double transport_identity_residual(const GBDTTransform& transform, double step) {
    const GBDTSeed& seed = transform.seed();
    const Matrix jm = seed.signature().j();
    double worst = 0.0;
    for (double x : {0.5, 1.0, 1.7}) {
        const Matrix d =
            (lambda_star_sinv(transform, x + step) - lambda_star_sinv(transform, x - step)) /
            (2.0 * step);
        const Matrix P = lambda_star_sinv(transform, x);
        const Matrix rhs = I1 * transform.H(x) * jm * P * seed.A +
                           q0_tilde(transform, x).adjoint() * P;
        worst = std::max(worst, max_abs(Matrix(d - rhs)));
    }
    return worst;
}

namespace {

double pde_residual(const DynamicalSolution& sol, const std::vector<double>& xs,
                    const std::vector<double>& ts, double h) {
    const Matrix jm = sol.transform().seed().signature().j();
    double worst = 0.0;
    for (double x : xs) {
        for (double t : ts) {
            const Matrix dYt = (sol.Y(x, t + h) - sol.Y(x, t - h)) / (2.0 * h);
            const Matrix dYx = (sol.Y(x + h, t) - sol.Y(x - h, t)) / (2.0 * h);
            const Matrix r = sol.transform().H_tilde(x) * dYt - jm * dYx;
            worst = std::max(worst, max_abs(r));
        }
    }
    return worst;
}

} // namespace

PdeResidualReport verify_dynamical_pde(const DynamicalSolution& solution,
                                       const std::vector<double>& xs,
                                       const std::vector<double>& ts,
                                       double coarse_step) {
    PdeResidualReport report;
    report.residual_coarse = pde_residual(solution, xs, ts, coarse_step);
    report.residual_fine = pde_residual(solution, xs, ts, coarse_step / 2.0);
    if (report.residual_fine > 0.0)
        report.order = std::log2(report.residual_coarse / report.residual_fine);
    return report;
}

} // namespace cansys
