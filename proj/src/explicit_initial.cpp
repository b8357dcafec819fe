#include "cansys/explicit_initial.hpp"

#include <cmath>

namespace cansys {

Matrix InitialSolutionParams::K() const {
    Matrix beta0(p, 2 * p);
    beta0.leftCols(p) = Matrix::Identity(p, p);
    beta0.rightCols(p) = alpha;
    return beta0.adjoint() * beta0;
}

Matrix InitialSolutionParams::E() const {
    Matrix out(2 * p, 2 * p);
    out.topLeftCorner(p, p) = -alpha;
    out.topRightCorner(p, p) = -alpha;
    out.bottomLeftCorner(p, p) = ((lambda + c - z1) / lambda) * Matrix::Identity(p, p);
    out.bottomRightCorner(p, p) = ((lambda + c - z2) / lambda) * Matrix::Identity(p, p);
    return out;
}

Matrix InitialSolutionParams::E1() const {
    Matrix out(2 * p, p);
    out.topRows(p) = -alpha;
    out.bottomRows(p) = ((lambda + c - z1) / lambda) * Matrix::Identity(p, p);
    return out;
}

InitialSolutionParams make_initial_params(int p, double c, const Matrix& alpha, Complex lambda) {
    if (c == 0.0)
        throw std::invalid_argument("make_initial_params: c = 0 has no E-matrix form");
    if (lambda == Complex(0.0, 0.0))
        throw std::invalid_argument(
            "initial_W undefined at lambda = 0 with c != 0; use the ODE oracle");
    if (lambda.imag() == 0.0)
        throw std::invalid_argument("make_initial_params: lambda must be off the real axis");
    if (alpha.rows() != p || alpha.cols() != p)
        throw std::invalid_argument("make_initial_params: alpha must be p x p here");
    InitialSolutionParams params;
    params.p = p;
    params.c = c;
    params.alpha = alpha;
    params.lambda = lambda;
    params.z1 = upper_half_branch()(c * (2.0 * lambda + c));
    params.z2 = -params.z1;
    return params;
}

Matrix initial_W(const InitialSolutionParams& params, double x) {
    const int p = params.p;
    Matrix mid = Matrix::Zero(2 * p, 2 * p);
    mid.topLeftCorner(p, p) =
        std::exp(I1 * params.z1 * x) * Matrix::Identity(p, p);
    mid.bottomRightCorner(p, p) =
        std::exp(I1 * params.z2 * x) * Matrix::Identity(p, p);
    const Matrix E = params.E();
    Matrix W = E * mid * E.inverse();
    // e^{-icxj} is diagonal in the same block structure.
    Matrix phase = Matrix::Zero(2 * p, 2 * p);
    phase.topLeftCorner(p, p) = std::exp(-I1 * params.c * x) * Matrix::Identity(p, p);
    phase.bottomRightCorner(p, p) = std::exp(I1 * params.c * x) * Matrix::Identity(p, p);
    return phase * W;
}

Matrix initial_W(int p, double c, const Matrix& alpha, Complex lambda, double x) {
    if (c == 0.0) {
        // (j K)^2 = 0, the exponential truncates after the linear term.
        Matrix beta0(p, 2 * p);
        beta0.leftCols(p) = Matrix::Identity(p, p);
        beta0.rightCols(p) = alpha;
        const Matrix K = beta0.adjoint() * beta0;
        const Matrix jm = SignatureConfig(p, p).j();
        return Matrix::Identity(2 * p, 2 * p) + I1 * lambda * x * jm * K;
    }
    return initial_W(make_initial_params(p, c, alpha, lambda), x);
}

double verify_eigenrelation(const InitialSolutionParams& params) {
    const int p = params.p;
    Matrix Z = Matrix::Zero(2 * p, 2 * p);
    Z.topLeftCorner(p, p) = params.z1 * Matrix::Identity(p, p);
    Z.bottomRightCorner(p, p) = params.z2 * Matrix::Identity(p, p);
    const Matrix E = params.E();
    const Matrix jm = SignatureConfig(p, p).j();
    const Matrix lhs = E * Z * E.inverse();
    const Matrix rhs = params.lambda * jm * params.K() + params.c * jm;
    return frob(lhs - rhs);
}

} // namespace cansys
