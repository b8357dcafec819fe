#include "cansys/canonical.hpp"

#include <cmath>

namespace cansys {

Matrix SignatureConfig::j() const {
    Matrix out = Matrix::Zero(m(), m());
    out.topLeftCorner(m1, m1) = Matrix::Identity(m1, m1);
    out.bottomRightCorner(m2, m2) = -Matrix::Identity(m2, m2);
    return out;
}

Matrix SignatureConfig::Theta() const {
    if (m1 != m2)
        throw std::invalid_argument("Theta requires m1 == m2");
    const int p = m1;
    const double s = 1.0 / std::sqrt(2.0);
    Matrix out(2 * p, 2 * p);
    out.topLeftCorner(p, p) = s * Matrix::Identity(p, p);
    out.topRightCorner(p, p) = -s * Matrix::Identity(p, p);
    out.bottomLeftCorner(p, p) = s * Matrix::Identity(p, p);
    out.bottomRightCorner(p, p) = s * Matrix::Identity(p, p);
    return out;
}

Matrix SignatureConfig::J() const {
    const Matrix Th = Theta();
    return Th * j() * Th.adjoint();
}

CanonicalSystemSpec make_beta_exponential(double c, double d, const Matrix& alpha) {
    const int m1 = static_cast<int>(alpha.rows());
    const int m2 = static_cast<int>(alpha.cols());
    if (m2 < m1)
        throw std::invalid_argument("make_beta_exponential: alpha must be m1 x m2 with m2 >= m1");
    const Matrix gram = alpha * alpha.adjoint();
    if (max_abs(gram - Matrix::Identity(m1, m1)) > 1e-12)
        throw std::invalid_argument("make_beta_exponential: alpha is not coisometric");

    CanonicalSystemSpec spec;
    spec.signature = SignatureConfig(m1, m2);
    spec.d = d;
    spec.kind = (d == 0.0) ? SystemKind::canonical : SystemKind::generalized;
    const Matrix jmat = spec.signature.j();
    spec.system_matrix = jmat;

    Matrix alpha_copy = alpha;
    spec.beta = [c, m1, m2, alpha_copy](double x) {
        Matrix b(m1, m1 + m2);
        b.leftCols(m1) = std::exp(I1 * c * x) * Matrix::Identity(m1, m1);
        b.rightCols(m2) = std::exp(-I1 * c * x) * alpha_copy;
        return b;
    };
    auto beta = spec.beta;
    spec.hamiltonian = [d, jmat, beta](double x) {
        const Matrix b = beta(x);
        return Matrix(d * jmat + b.adjoint() * b);
    };
    return spec;
}

SampledMatrixFunction fundamental_solution_oracle(const CanonicalSystemSpec& spec,
                                                  Complex lambda, const Grid& grid) {
    const Matrix sysm = spec.system_matrix.size() ? spec.system_matrix : spec.signature.j();
    const int m = static_cast<int>(sysm.rows());
    auto rhs = [&](double x, const Matrix& W) {
        return Matrix(I1 * lambda * sysm * spec.H(x) * W);
    };
    return integrate_ode(rhs, Matrix::Identity(m, m), grid);
}

MonotonicityReport check_j_monotonicity(const SampledMatrixFunction& W, Complex lambda,
                                        const SignatureConfig& sig, double tol) {
    if (lambda.imag() == 0.0)
        throw std::invalid_argument("check_j_monotonicity: lambda must be off the real axis");
    const double orient = (lambda.imag() > 0.0) ? 1.0 : -1.0;
    const Matrix jm = sig.j();

    MonotonicityReport rep;
    double worst = 0.0;
    Matrix prev = jm; // r = 0 value: W(0) = I gives exactly j
    for (int i = 0; i < W.size(); ++i) {
        const Matrix cur = W[i].adjoint() * jm * W[i];
        // Im lambda > 0: prev - cur must be PSD.
        const double e = min_hermitian_eigenvalue(orient * (prev - cur));
        worst = std::min(worst, e);
        prev = cur;
    }
    rep.worst_violation = -worst;
    rep.pass = rep.worst_violation <= tol;
    return rep;
}

} // namespace cansys
