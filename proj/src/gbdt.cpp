#include "cansys/gbdt.hpp"

#include "cansys/explicit_initial.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <memory>

namespace cansys {

CanonicalSystemSpec GBDTSeed::system() const { return make_beta_exponential(c, d, alpha); }

namespace {

Matrix scalar1(Complex v) { return Matrix::Constant(1, 1, v); }

Matrix lambda_at(const GBDTSeed& s, double x) {
    const int n = s.n;
    const Matrix In = Matrix::Identity(n, n);
    const Matrix eP = matrix_exp(Matrix(I1 * x * s.Q));
    const Matrix eM = matrix_exp(Matrix(-I1 * x * s.Q));
    const Matrix Ainv = s.A.inverse();
    Matrix out(n, s.m1 + s.m2);
    out.leftCols(s.m1) = std::exp(I1 * s.c * x) * (eP * s.f1 + eM * s.f2);
    out.rightCols(s.m2) = std::exp(-I1 * s.c * x) *
        ((eP * (s.A + s.c * In + s.Q) * Ainv * s.f1 +
          eM * (s.A + s.c * In - s.Q) * Ainv * s.f2) * s.alpha);
    return out;
}

} // namespace

GBDTSeed build_seed_scalar(Complex a, double c, Complex alpha, Complex f1, Complex f2) {
    if (a.imag() == 0.0)
        throw std::invalid_argument("scalar seed requires a with nonzero imaginary part");
    if (c == 0.0)
        throw std::invalid_argument("scalar seed requires c != 0");
    if (std::abs(std::abs(alpha) - 1.0) > 1e-12)
        throw std::invalid_argument("scalar seed requires |alpha| = 1");

    const Complex Qv = upper_half_branch()(c * (2.0 * a + c));
    if (!(Qv.imag() > 0.0))
        throw std::runtime_error("branch of Q has no positive imaginary part");

    GBDTSeed s;
    s.n = 1;
    s.m1 = s.m2 = 1;
    s.c = c;
    s.d = 0.0;
    s.A = scalar1(a);
    s.Q = scalar1(Qv);
    s.alpha = scalar1(alpha);
    s.f1 = scalar1(f1);
    s.f2 = scalar1(f2);
    s.Lambda0 = lambda_at(s, 0.0);

    const Matrix jm = s.signature().j();
    s.S0 = solve_sylvester(s.A, Matrix(I1 * s.Lambda0 * jm * s.Lambda0.adjoint()));
    s.s0_positive = min_hermitian_eigenvalue(s.S0) > 0.0;
    validate_seed(s);
    return s;
}

GBDTSeed build_seed_triangular(double xi, Complex q, Complex f, Complex g, Complex alpha) {
    if (xi == 0.0)
        throw std::invalid_argument("triangular seed requires xi != 0");
    if (f == Complex(0.0) || g == Complex(0.0))
        throw std::invalid_argument("triangular seed requires f != 0 and g != 0");
    if (q == Complex(0.0))
        throw std::invalid_argument("triangular seed requires q != 0");
    if (std::abs(std::abs(alpha) - 1.0) > 1e-12)
        throw std::invalid_argument("triangular seed requires |alpha| = 1");
    const Complex pinned = f + g * q / xi;
    if (std::abs(pinned) <= 1e-12 * (std::abs(f) + std::abs(g * q / xi)))
        throw std::invalid_argument(
            "unsatisfiable seed relation: f + g q / xi must be nonzero");

    // Lambda(0) does not involve the off-diagonal entry of A, so the seed
    // identity can be solved for it afterwards.
    Matrix L0(2, 2);
    L0(0, 0) = f;
    L0(0, 1) = alpha * (f - q * g / xi);
    L0(1, 0) = g;
    L0(1, 1) = alpha * g;

    const Matrix jm = SignatureConfig(1, 1).j();
    const Matrix P = L0 * jm * L0.adjoint();
    const Complex w = (I1 * P)(0, 1);
    const double S22 = std::abs(w);
    const Complex a = w / S22;
    const double P11 = P(0, 0).real();
    const Complex S12 = -I1 * P11 * a / (2.0 * std::norm(a));
    const double S11 = std::norm(S12) / S22 + 1.0;

    GBDTSeed s;
    s.n = 2;
    s.m1 = s.m2 = 1;
    s.c = 0.0;
    s.d = 0.0;
    s.A = Matrix::Zero(2, 2);
    s.A(0, 0) = s.A(1, 1) = xi;
    s.A(0, 1) = a;
    s.Q = Matrix::Zero(2, 2);
    s.Q(0, 1) = q;
    s.alpha = scalar1(alpha);
    s.f1 = Matrix::Zero(2, 1);
    s.f1(0, 0) = f;
    s.f2 = Matrix::Zero(2, 1);
    s.f2(1, 0) = g;
    s.Lambda0 = L0;
    s.S0 = Matrix::Zero(2, 2);
    s.S0(0, 0) = S11;
    s.S0(0, 1) = S12;
    s.S0(1, 0) = std::conj(S12);
    s.S0(1, 1) = S22;
    s.s0_positive = min_hermitian_eigenvalue(s.S0) > 0.0;
    validate_seed(s);
    return s;
}

void validate_seed(const GBDTSeed& seed) {
    if (seed.A.rows() != seed.n || seed.A.cols() != seed.n)
        throw std::invalid_argument("seed: A must be n x n");
    if (max_abs(Matrix(seed.S0 - seed.S0.adjoint())) > 1e-12)
        throw std::runtime_error("seed: S0 is not Hermitian");

    const Matrix jm = seed.signature().j();
    const Matrix resid = seed.A * seed.S0 - seed.S0 * seed.A.adjoint() -
                         I1 * seed.Lambda0 * jm * seed.Lambda0.adjoint();
    if (frob(resid) > 1e-10 * (1.0 + frob(seed.S0)))
        throw std::runtime_error("seed identity violated: A S0 - S0 A* != i Lambda0 j Lambda0*");
    if (std::abs(seed.A.determinant()) < 1e-12)
        throw std::runtime_error("seed: A must be invertible");

    const Matrix In = Matrix::Identity(seed.n, seed.n);
    if (frob(Matrix(seed.A * seed.Q - seed.Q * seed.A)) > 1e-9 ||
        frob(Matrix(seed.Q * seed.Q - seed.c * (2.0 * seed.A + seed.c * In))) > 1e-9)
        throw std::runtime_error("seed: Q must commute with A and satisfy Q^2 = c(2A + cI)");
    if (frob(Matrix(lambda_at(seed, 0.0) - seed.Lambda0)) > 1e-9 * (1.0 + frob(seed.Lambda0)))
        throw std::runtime_error("seed: Lambda0 inconsistent with the weights f1, f2");
    (void)seed.system(); // validates alpha
}

GBDTTransform::GBDTTransform(GBDTSeed seed) : seed_(std::move(seed)) {
    validate_seed(seed_);
    sys_ = seed_.system();
    jm_ = seed_.signature().j();

    Eigen::ComplexEigenSolver<Matrix> es(seed_.A);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation for A failed");
    eigsA_ = es.eigenvalues();

    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < seed_.n; ++i)
        for (int k = 0; k < seed_.n; ++k)
            gap = std::min(gap, std::abs(eigsA_(i) - std::conj(eigsA_(k))));
    const double scale = eigsA_.cwiseAbs().maxCoeff();
    if (gap > 1e-8 * (1.0 + scale)) {
        route_ = SRoute::sylvester;
        return;
    }

    // Fall back to S(x) = S0 + x C C*, valid when C = Lambda j beta* does not
    // depend on x (the c = 0 nilpotent family has this property).
    if (seed_.d != 0.0)
        throw std::runtime_error("no closed-form S route for this seed; use the sampled state");
    const auto C_of = [&](double x) {
        return Matrix(lambda_at(seed_, x) * jm_ * sys_.beta(x).adjoint());
    };
    C_ = C_of(0.0);
    const double c_scale = 1.0 + frob(C_);
    for (double x : {1.0 / 3.0, 1.0, 1.7}) {
        if (frob(Matrix(C_of(x) - C_)) > 1e-10 * c_scale)
            throw std::runtime_error("no closed-form S route for this seed; use the sampled state");
    }
    route_ = SRoute::affine;
}

Matrix GBDTTransform::Lambda(double x) const { return lambda_at(seed_, x); }

Matrix GBDTTransform::S(double x) const {
    if (route_ == SRoute::sylvester) {
        const Matrix L = Lambda(x);
        return solve_sylvester(seed_.A, Matrix(I1 * L * jm_ * L.adjoint()));
    }
    return seed_.S0 + x * C_ * C_.adjoint();
}

Matrix GBDTTransform::beta(double x) const { return sys_.beta(x); }

Matrix GBDTTransform::H(double x) const { return sys_.H(x); }

Matrix GBDTTransform::wA(double x, Complex lambda) const {
    const double scale = 1.0 + eigsA_.cwiseAbs().maxCoeff() + std::abs(lambda);
    for (int i = 0; i < seed_.n; ++i)
        if (std::abs(eigsA_(i) - lambda) <= 1e-12 * scale)
            throw std::invalid_argument("spectral parameter collides with eigenvalue of A");

    const int n = seed_.n, m = seed_.m();
    const Matrix L = Lambda(x);
    const Matrix R = (seed_.A - lambda * Matrix::Identity(n, n)).partialPivLu().solve(L);
    return Matrix::Identity(m, m) - I1 * jm_ * L.adjoint() * hermitian_solve(S(x), R);
}

Matrix GBDTTransform::v(double x, Complex lambda) const {
    const double scale = 1.0 + eigsA_.cwiseAbs().maxCoeff() + std::abs(lambda);
    for (int i = 0; i < seed_.n; ++i)
        if (std::abs(eigsA_(i) - lambda) <= 1e-12 * scale)
            throw std::invalid_argument("spectral parameter collides with eigenvalue of A");

    const int n = seed_.n, m = seed_.m();
    const Matrix L = Lambda(x);
    const Matrix R = (seed_.A - lambda * Matrix::Identity(n, n)).partialPivLu().solve(L);
    const Matrix T = seed_.A.adjoint().partialPivLu().solve(hermitian_solve(S(x), R));
    return Matrix::Identity(m, m) - I1 * lambda * jm_ * L.adjoint() * T;
}

Matrix GBDTTransform::beta_tilde(double x) const { return beta(x) * wA(x, 0.0); }

Matrix GBDTTransform::H_tilde(double x) const {
    const Matrix w0 = wA(x, 0.0);
    return w0.adjoint() * H(x) * w0;
}

CanonicalSystemSpec GBDTTransform::transformed_system() const {
    auto self = std::make_shared<GBDTTransform>(*this);
    CanonicalSystemSpec out;
    out.signature = seed_.signature();
    out.kind = (seed_.d == 0.0) ? SystemKind::canonical : SystemKind::generalized;
    out.d = seed_.d;
    out.system_matrix = jm_;
    out.hamiltonian = [self](double x) { return self->H_tilde(x); };
    out.beta = [self](double x) { return self->beta_tilde(x); };
    return out;
}

Matrix GBDTTransform::W_initial(double x, Complex lambda) const {
    if (lambda == Complex(0.0))
        return Matrix::Identity(seed_.m(), seed_.m());
    if (seed_.m1 != seed_.m2)
        throw std::runtime_error("explicit initial W needs a square alpha block");
    if (seed_.d != 0.0)
        throw std::runtime_error("explicit initial W requires d = 0");
    return initial_W(seed_.m1, seed_.c, seed_.alpha, lambda, x);
}

Matrix GBDTTransform::W_tilde(double x, Complex lambda) const {
    const Matrix v0 = v(0.0, lambda);
    Eigen::FullPivLU<Matrix> lu(v0);
    if (!lu.isInvertible())
        throw std::runtime_error("v(0, lambda) is singular at this isolated lambda");
    return v(x, lambda) * W_initial(x, lambda) * lu.inverse();
}

SampledMatrixFunction eigenfunction_explicit(const GBDTSeed& seed, const Grid& grid) {
    validate_seed(seed);
    SampledMatrixFunction out(grid);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < grid.nodes; ++i)
        out[i] = lambda_at(seed, grid.node(i));
    return out;
}

SampledMatrixFunction recover_S(const GBDTSeed& seed, const SampledMatrixFunction& Lambda,
                                SRoute route) {
    const Grid& grid = Lambda.grid;
    const Matrix jm = seed.signature().j();
    SampledMatrixFunction out(grid);

    if (route == SRoute::sylvester) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < grid.nodes; ++i) {
            const Matrix& L = Lambda[i];
            out[i] = solve_sylvester(seed.A, Matrix(I1 * L * jm * L.adjoint()));
        }
        return out;
    }

    if (route == SRoute::affine) {
        const CanonicalSystemSpec sys = seed.system();
        const Matrix C = seed.Lambda0 * jm * sys.beta(0.0).adjoint();
        for (int i = 0; i < grid.nodes; ++i)
            out[i] = seed.S0 + grid.node(i) * C * C.adjoint();
        return out;
    }

    const CanonicalSystemSpec sys = seed.system();
    SampledMatrixFunction integrand(grid);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < grid.nodes; ++i) {
        const double x = grid.node(i);
        const Matrix& L = Lambda[i];
        integrand[i] = L * jm * sys.H(x) * jm * L.adjoint();
    }
    const SampledMatrixFunction cum = quadrature_cumulative(integrand);
    for (int i = 0; i < grid.nodes; ++i) {
        const Matrix S = seed.S0 + cum[i];
        out[i] = 0.5 * (S + S.adjoint());
    }
    return out;
}

GBDTState make_state(const GBDTSeed& seed, const Grid& grid, SRoute route) {
    GBDTState state;
    state.Lambda = eigenfunction_explicit(seed, grid);
    state.S = recover_S(seed, state.Lambda, route);
    state.route = route;
    return state;
}

double gram_identity_residual(const GBDTSeed& seed, const GBDTState& state) {
    const Matrix jm = seed.signature().j();
    double worst = 0.0;
    for (int i = 0; i < state.S.size(); ++i) {
        const Matrix& S = state.S[i];
        const Matrix& L = state.Lambda[i];
        const Matrix r = seed.A * S - S * seed.A.adjoint() - I1 * L * jm * L.adjoint();
        worst = std::max(worst, frob(r) / (1.0 + frob(S)));
    }
    return worst;
}

} // namespace cansys
