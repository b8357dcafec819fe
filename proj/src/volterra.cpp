#include "cansys/volterra.hpp"

#include <cmath>

namespace cansys {

BetaFamily make_exponential_family(double c, const Matrix& alpha) {
    const int p = static_cast<int>(alpha.rows());
    if (alpha.cols() != p)
        throw std::invalid_argument("make_exponential_family: alpha must be square here");
    if (max_abs(Matrix(alpha * alpha.adjoint() - Matrix::Identity(p, p))) > 1e-12)
        throw std::invalid_argument("make_exponential_family: alpha must be unitary");

    BetaFamily fam;
    fam.p = p;
    Matrix a = alpha;
    fam.beta = [c, p, a](double x) {
        Matrix b(p, 2 * p);
        b.leftCols(p) = std::exp(I1 * c * x) * Matrix::Identity(p, p);
        b.rightCols(p) = std::exp(-I1 * c * x) * a;
        return b;
    };
    fam.dbeta = [c, p, a](double x) {
        Matrix b(p, 2 * p);
        b.leftCols(p) = I1 * c * std::exp(I1 * c * x) * Matrix::Identity(p, p);
        b.rightCols(p) = -I1 * c * std::exp(-I1 * c * x) * a;
        return b;
    };
    auto beta = fam.beta;
    fam.ddbeta = [c, beta](double x) { return Matrix(-c * c * beta(x)); };
    return fam;
}

CanonicalSystemSpec to_canonical(const BetaFamily& family) {
    CanonicalSystemSpec spec;
    spec.signature = SignatureConfig(family.p, family.p);
    spec.kind = SystemKind::canonical;
    spec.system_matrix = spec.signature.j();
    spec.beta = family.beta;
    auto beta = family.beta;
    spec.hamiltonian = [beta](double x) {
        const Matrix b = beta(x);
        return Matrix(b.adjoint() * b);
    };
    return spec;
}

VolterraAuxiliaries build_auxiliaries(const BetaFamily& family, const Grid& grid) {
    const int p = family.p;
    const int N = grid.nodes;
    const Matrix jm = SignatureConfig(p, p).j();
    const Matrix Ip = Matrix::Identity(p, p);

    VolterraAuxiliaries aux;
    aux.grid = grid;
    aux.p = p;
    aux.B.resize(N);
    aux.dB.resize(N);
    aux.ddB.resize(N);
    for (int i = 0; i < N; ++i) {
        const double x = grid.node(i);
        aux.B[i] = family.beta(x);
        aux.dB[i] = family.dbeta(x);
        aux.ddB[i] = family.ddbeta(x);
    }

    double n0 = 0.0, n1 = 0.0;
    for (int i = 0; i < N; ++i) {
        n0 = std::max(n0, max_abs(Matrix(aux.B[i] * jm * aux.B[i].adjoint())));
        n1 = std::max(n1, max_abs(Matrix(aux.dB[i] * jm * aux.B[i].adjoint() - I1 * Ip)));
    }
    if (n0 > 1e-9 || n1 > 1e-9)
        throw std::runtime_error(
            "beta normalization violated: need beta j beta* = 0 and beta' j beta* = i I");

    const auto u1_rhs = [&](double x, const Matrix& U) {
        return Matrix(I1 * jm * family.beta(x).adjoint() * family.ddbeta(x) * U);
    };
    aux.u1 = integrate_ode(u1_rhs, Matrix::Identity(2 * p, 2 * p), grid).values;

    const auto u_rhs = [&](double x, const Matrix& U) {
        const Matrix db = family.dbeta(x);
        const Matrix u2x = -I1 * db * jm * db.adjoint();
        return Matrix(-0.5 * u2x * U);
    };
    aux.u = integrate_ode(u_rhs, Ip, grid).values;

    aux.u2.resize(N);
    aux.u3.resize(N);
    aux.u4.resize(N);
    aux.h1.resize(N);
    aux.h2.resize(N);
    aux.G1.resize(N);
    aux.G2.resize(N);
    for (int i = 0; i < N; ++i) {
        aux.u2[i] = -I1 * aux.dB[i] * jm * aux.dB[i].adjoint();
        aux.u3[i] = I1 * aux.ddB[i] * jm * aux.dB[i].adjoint();
        const Matrix& u = aux.u[i];
        aux.u4[i] = u.adjoint() *
                    (0.5 * (aux.u3[i] + aux.u3[i].adjoint()) - 0.75 * aux.u2[i] * aux.u2[i]) * u;
        aux.h1[i] = I1 * aux.ddB[i] * aux.u1[i];
        const Matrix rhs = jm * (aux.B[i].adjoint() * aux.u2[i] * aux.u2[i] -
                                 aux.B[i].adjoint() * aux.u3[i].adjoint() -
                                 aux.dB[i].adjoint() * aux.u2[i] + aux.ddB[i].adjoint());
        aux.h2[i] = aux.u1[i].partialPivLu().solve(rhs);
        aux.G1[i] = u.adjoint() * aux.h1[i];
        aux.G2[i] = aux.h2[i] * u;
    }
    return aux;
}

VolterraAuxiliaries manufactured_auxiliaries(const Grid& grid, int p,
                                             const std::vector<Matrix>& u4,
                                             const std::vector<Matrix>& G1,
                                             const std::vector<Matrix>& G2) {
    const int N = grid.nodes;
    if (static_cast<int>(u4.size()) != N || static_cast<int>(G1.size()) != N ||
        static_cast<int>(G2.size()) != N)
        throw std::invalid_argument("manufactured_auxiliaries: sample counts must match the grid");
    VolterraAuxiliaries aux;
    aux.grid = grid;
    aux.p = p;
    aux.u4 = u4;
    aux.G1 = G1;
    aux.G2 = G2;
    aux.h1 = G1;
    aux.h2 = G2;
    aux.u.assign(N, Matrix::Identity(p, p));
    aux.u1.assign(N, Matrix::Identity(2 * p, 2 * p));
    aux.u2.assign(N, Matrix::Zero(p, p));
    aux.u3.assign(N, Matrix::Zero(p, p));
    return aux;
}

namespace {

// Cumulative trapezoid of per-node blocks.
std::vector<Matrix> cumtrap(const std::vector<Matrix>& f, double g) {
    std::vector<Matrix> out(f.size());
    out[0] = Matrix::Zero(f[0].rows(), f[0].cols());
    for (size_t i = 1; i < f.size(); ++i)
        out[i] = out[i - 1] + (g / 2.0) * (f[i - 1] + f[i]);
    return out;
}

// T(i, j) = integral along the diagonal from (i-j, 0) to (i, j): for each
// offset d = i-j a running trapezoid over the blocks E(m+d, m).
Matrix diag_cum(const Matrix& E, int N, int p, double g, bool par) {
    Matrix T = Matrix::Zero(N * p, N * p);
#pragma omp parallel for if (par) schedule(static)
    for (int d = 0; d < N; ++d) {
        Matrix cum = Matrix::Zero(p, p);
        for (int m = 1; m < N - d; ++m) {
            cum += (g / 2.0) *
                   (E.block((m - 1 + d) * p, (m - 1) * p, p, p) + E.block((m + d) * p, m * p, p, p));
            T.block((m + d) * p, m * p, p, p) = cum;
        }
    }
    return T;
}

// T(i, j) = integral along the anti-diagonal i+j = s from the midpoint
// ((s+1)/2 rounded) down to (i, j); odd s starts with a half panel whose
// integrand vanishes at the true midpoint.
Matrix anti_cum_cells(const Matrix& E, int N, int p, double g, bool par) {
    Matrix T = Matrix::Zero(N * p, N * p);
#pragma omp parallel for if (par) schedule(static)
    for (int s = 0; s <= 2 * N - 2; ++s) {
        const int k0 = (s + 1) / 2;
        const int kend = std::min(s, N - 1);
        if (k0 > kend)
            continue;
        Matrix cum = Matrix::Zero(p, p);
        if (s % 2 == 1)
            cum = (g / 4.0) * E.block(k0 * p, (s - k0) * p, p, p);
        if (s - k0 <= k0)
            T.block(k0 * p, (s - k0) * p, p, p) = cum;
        for (int k = k0 + 1; k <= kend; ++k) {
            cum += (g / 2.0) * (E.block((k - 1) * p, (s - k + 1) * p, p, p) +
                                E.block(k * p, (s - k) * p, p, p));
            if (s - k <= k)
                T.block(k * p, (s - k) * p, p, p) = cum;
        }
    }
    return T;
}

// R[d] = integral along the full anti-diagonal i+j = d; the table value at
// (i, j) depends on the offset d = i-j only.
std::vector<Matrix> anti_cum_offset(const Matrix& E, int N, int p, double g, bool par) {
    std::vector<Matrix> R(N, Matrix::Zero(p, p));
#pragma omp parallel for if (par) schedule(static)
    for (int d = 0; d < N; ++d) {
        const int k0 = (d + 1) / 2;
        Matrix acc = Matrix::Zero(p, p);
        if (d % 2 == 1)
            acc = (g / 4.0) * E.block(k0 * p, (d - k0) * p, p, p);
        for (int k = k0 + 1; k <= d; ++k)
            acc += (g / 2.0) * (E.block((k - 1) * p, (d - k + 1) * p, p, p) +
                                E.block(k * p, (d - k) * p, p, p));
        R[d] = acc;
    }
    return R;
}

// Eout(k, c) = integral_{t_c}^{t_k} F(s, c) ds down each block column;
// F has br x bc blocks and vanishes above the diagonal.
Matrix cumcol(const Matrix& F, int N, int br, int bc, double g, bool par) {
    Matrix out = Matrix::Zero(N * br, N * bc);
#pragma omp parallel for if (par) schedule(static)
    for (int c = 0; c < N; ++c) {
        Matrix cum = Matrix::Zero(br, bc);
        for (int k = c + 1; k < N; ++k) {
            cum += (g / 2.0) *
                   (F.block((k - 1) * br, c * bc, br, bc) + F.block(k * br, c * bc, br, bc));
            out.block(k * br, c * bc, br, bc) = cum;
        }
    }
    return out;
}

void zero_upper(Matrix& T, int N, int p) {
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            T.block(i * p, j * p, p, p).setZero();
}

} // namespace

SimilarityKernel kernel_series(const VolterraAuxiliaries& aux, int kmax, double tol,
                               ExecutionPolicy policy, bool keep_terms) {
    if (kmax < 1)
        throw std::invalid_argument("kernel_series: kmax must be at least 1");
    const bool par = policy == ExecutionPolicy::parallel;
    const int N = aux.grid.nodes;
    const int p = aux.p;
    const double g = aux.grid.spacing();
    const double T_len = aux.grid.end - aux.grid.start;

    const std::vector<Matrix> CumU4 = cumtrap(aux.u4, g);
    const std::vector<Matrix> CumG1 = cumtrap(aux.G1, g);

    // Fbreve(t, eta) = (int_eta^t G1) G2(eta) on the lower triangle.
    Matrix Fb = Matrix::Zero(N * p, N * p);
#pragma omp parallel for if (par) schedule(static)
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j)
            Fb.block(i * p, j * p, p, p) = (CumG1[i] - CumG1[j]) * aux.G2[j];

    const auto cum_at_half = [&](int idx2) {
        return Matrix(0.5 * (CumU4[idx2 / 2] + CumU4[(idx2 + 1) / 2]));
    };

    const Matrix Ia = anti_cum_cells(Fb, N, p, g, par);
    const std::vector<Matrix> Ibo = anti_cum_offset(Fb, N, p, g, par);
    const Matrix Ic = diag_cum(Fb, N, p, g, par);

    Matrix V1 = Matrix::Zero(N * p, N * p);
#pragma omp parallel for if (par) schedule(static)
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j)
            V1.block(i * p, j * p, p, p) =
                0.5 * (cum_at_half(i + j) + cum_at_half(i - j) -
                       Ia.block(i * p, j * p, p, p) - Ibo[i - j] - Ic.block(i * p, j * p, p, p));

    // Series constant: C = max(int ||h1||, int ||h2||, sqrt(int ||u4||), sup ||V1||).
    std::vector<Matrix> nh1(N), nh2(N), nu4(N);
    for (int i = 0; i < N; ++i) {
        nh1[i] = Matrix::Constant(1, 1, frob(aux.h1[i]));
        nh2[i] = Matrix::Constant(1, 1, frob(aux.h2[i]));
        nu4[i] = Matrix::Constant(1, 1, frob(aux.u4[i]));
    }
    double supV1 = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j)
            supV1 = std::max(supV1, frob(Matrix(V1.block(i * p, j * p, p, p))));
    const double C = std::max({cumtrap(nh1, g).back()(0, 0).real(),
                               cumtrap(nh2, g).back()(0, 0).real(),
                               std::sqrt(cumtrap(nu4, g).back()(0, 0).real()), supV1});

    SimilarityKernel ker;
    ker.grid = aux.grid;
    ker.p = p;
    ker.u = aux.u;
    ker.C = C;
    ker.V = V1;
    ker.terms_used = 1;
    if (keep_terms)
        ker.terms.push_back(V1);

    Matrix Vprev = std::move(V1);
    double factorial = 1.0;
    int k = 1;
    while (true) {
        ++k;
        factorial *= (k - 1);
        const double bound =
            std::pow(3.0 * C * C, k - 1) / factorial * C * std::pow(T_len, k - 1);
        if (bound < tol) {
            ker.tail_bound = bound;
            ker.tail_reached = true;
            break;
        }
        if (k > kmax) {
            ker.tail_bound = bound;
            ker.tail_reached = false;
            break;
        }

        Matrix EU = Matrix::Zero(N * p, N * p);
        Matrix CC0 = Matrix::Zero(N * 2 * p, N * p);
#pragma omp parallel for if (par) schedule(static)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j <= i; ++j) {
                const Matrix Vp = Vprev.block(i * p, j * p, p, p);
                EU.block(i * p, j * p, p, p) = aux.u4[i] * Vp;
                CC0.block(i * 2 * p, j * p, 2 * p, p) = aux.G2[i] * Vp;
            }
        const Matrix E = cumcol(EU, N, p, p, g, par);
        const Matrix CC = cumcol(CC0, N, 2 * p, p, g, par);

        Matrix DU = Matrix::Zero(N * p, N * p);
#pragma omp parallel for if (par) schedule(static)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j <= i; ++j)
                DU.block(i * p, j * p, p, p) = aux.G1[i] * CC.block(i * 2 * p, j * p, 2 * p, p);
        const Matrix D = cumcol(DU, N, p, p, g, par);

        const Matrix T1 = diag_cum(E, N, p, g, par);
        const Matrix T2 = anti_cum_cells(E, N, p, g, par);
        const std::vector<Matrix> T3 = anti_cum_offset(E, N, p, g, par);
        const Matrix U1 = diag_cum(D, N, p, g, par);
        const Matrix U2 = anti_cum_cells(D, N, p, g, par);
        const std::vector<Matrix> U3 = anti_cum_offset(D, N, p, g, par);

        Matrix Vk = Matrix::Zero(N * p, N * p);
#pragma omp parallel for if (par) schedule(static)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j <= i; ++j)
                Vk.block(i * p, j * p, p, p) =
                    0.5 * (T1.block(i * p, j * p, p, p) + T2.block(i * p, j * p, p, p) +
                           T3[i - j] - U1.block(i * p, j * p, p, p) -
                           U2.block(i * p, j * p, p, p) - U3[i - j]);

        ker.V += Vk;
        ker.terms_used += 1;
        if (keep_terms)
            ker.terms.push_back(Vk);
        Vprev = std::move(Vk);
    }
    zero_upper(ker.V, N, p);
    return ker;
}

std::vector<Matrix> apply_V(const SimilarityKernel& kernel, const std::vector<Matrix>& f) {
    const int N = kernel.grid.nodes;
    const int p = kernel.p;
    if (static_cast<int>(f.size()) != N)
        throw std::invalid_argument("apply_V: sample count must match the kernel grid");
    const double g = kernel.grid.spacing();

    std::vector<Matrix> out(N);
    for (int i = 0; i < N; ++i) {
        Matrix acc = f[i];
        if (i > 0) {
            Matrix integral = (g / 2.0) * (kernel.V.block(i * p, 0, p, p) * f[0] +
                                           kernel.V.block(i * p, i * p, p, p) * f[i]);
            for (int j = 1; j < i; ++j)
                integral += g * kernel.V.block(i * p, j * p, p, p) * f[j];
            acc += integral;
        }
        out[i] = kernel.u[i] * acc;
    }
    return out;
}

VolterraDiscretization build_discrete(const VolterraAuxiliaries& aux,
                                      const SimilarityKernel& kernel) {
    const int N = aux.grid.nodes;
    const int p = aux.p;
    const double g = aux.grid.spacing();
    const Matrix jm = SignatureConfig(p, p).j();
    const Matrix Ip = Matrix::Identity(p, p);

    VolterraDiscretization ops;
    ops.grid = aux.grid;
    ops.p = p;
    ops.beta = aux.B;
    ops.A = Matrix::Zero(N * p, N * p);
    ops.K = Matrix::Zero(N * p, N * p);
    ops.V = Matrix::Zero(N * p, N * p);
    ops.Om = Eigen::VectorXd::Constant(N, g);
    ops.Om(0) = ops.Om(N - 1) = g / 2.0;

    for (int i = 0; i < N; ++i) {
        const double xi = aux.grid.node(i);
        for (int j = 0; j <= i; ++j) {
            double w = (j == 0 || j == i) ? g / 2.0 : g;
            if (i == 0)
                w = 0.0;
            const double tj = aux.grid.node(j);
            ops.A.block(i * p, j * p, p, p) = (tj - xi) * w * Ip;
            ops.K.block(i * p, j * p, p, p) = I1 * w * aux.B[i] * jm * aux.B[j].adjoint();
            ops.V.block(i * p, j * p, p, p) =
                w * aux.u[i] * kernel.V.block(i * p, j * p, p, p);
        }
        ops.V.block(i * p, i * p, p, p) += aux.u[i];
    }
    return ops;
}

VolterraDiscretization prefix(const VolterraDiscretization& ops, int node_count) {
    const int p = ops.p;
    if (node_count < 2 || node_count > ops.grid.nodes)
        throw std::invalid_argument("prefix: node_count out of range");
    VolterraDiscretization out;
    out.grid = Grid(ops.grid.start, ops.grid.node(node_count - 1), node_count);
    out.p = p;
    out.A = ops.A.topLeftCorner(node_count * p, node_count * p);
    out.K = ops.K.topLeftCorner(node_count * p, node_count * p);
    out.V = ops.V.topLeftCorner(node_count * p, node_count * p);
    out.Om = ops.Om.head(node_count);
    out.Om(node_count - 1) = ops.grid.spacing() / 2.0;
    out.beta.assign(ops.beta.begin(), ops.beta.begin() + node_count);
    return out;
}

namespace {

Matrix stack_beta(const VolterraDiscretization& ops) {
    const int N = static_cast<int>(ops.beta.size());
    const int p = ops.p;
    Matrix B(N * p, 2 * p);
    for (int i = 0; i < N; ++i)
        B.middleRows(i * p, p) = ops.beta[i];
    return B;
}

} // namespace

Matrix transfer_function_wA_ell(const VolterraDiscretization& ops, Complex mu) {
    const int N = static_cast<int>(ops.beta.size());
    const int p = ops.p;
    if (std::abs(mu) < 1e-14)
        throw std::invalid_argument(
            "mu collides with the numerical spectrum of the discretized operator");

    const Matrix B = stack_beta(ops);
    const Matrix y = ops.V.partialPivLu().solve(B);
    const Matrix z =
        (ops.A - mu * Matrix::Identity(N * p, N * p)).partialPivLu().solve(y);
    const Matrix v = ops.V * z;

    Matrix acc = Matrix::Zero(2 * p, 2 * p);
    for (int i = 0; i < N; ++i)
        acc += ops.Om(i) * ops.beta[i].adjoint() * v.middleRows(i * p, p);
    const Matrix jm = SignatureConfig(p, p).j();
    return Matrix::Identity(2 * p, 2 * p) - I1 * jm * acc;
}

double similarity_residual(const VolterraDiscretization& ops) {
    const int N = static_cast<int>(ops.beta.size());
    const int p = ops.p;
    const Matrix f = Matrix::Ones(N * p, 1);
    const Matrix r = ops.K * (ops.V * f) - ops.V * (ops.A * f);
    double acc = 0.0;
    for (int i = 0; i < N; ++i)
        acc += ops.Om(i) * r.middleRows(i * p, p).squaredNorm();
    return std::sqrt(acc);
}

namespace {

Eigen::VectorXd om_blocks(const VolterraDiscretization& ops) {
    const int N = static_cast<int>(ops.beta.size());
    Eigen::VectorXd out(N * ops.p);
    for (int i = 0; i < N; ++i)
        out.segment(i * ops.p, ops.p).setConstant(ops.Om(i));
    return out;
}

} // namespace

double snode_identity_residual(const VolterraDiscretization& ops) {
    const int N = static_cast<int>(ops.beta.size());
    const int p = ops.p;
    const Eigen::VectorXd om = om_blocks(ops);
    const Matrix Vi = ops.V.partialPivLu().inverse();
    const Matrix S =
        Vi * om.cwiseInverse().asDiagonal() * Vi.adjoint() * om.asDiagonal();
    const Matrix Astar = om.cwiseInverse().asDiagonal() * ops.A.adjoint() * om.asDiagonal();
    const Matrix Pi = Vi * stack_beta(ops);
    const Matrix jm = SignatureConfig(p, p).j();
    const Matrix resid =
        ops.A * S - S * Astar - I1 * Pi * jm * Pi.adjoint() * om.asDiagonal();
    (void)N;
    return max_abs(resid);
}

double hamiltonian_recovery_residual(const VolterraDiscretization& ops) {
    const int N = static_cast<int>(ops.beta.size());
    const int p = ops.p;
    const Eigen::VectorXd om = om_blocks(ops);
    const Matrix B = stack_beta(ops);
    const Matrix Pi = ops.V.partialPivLu().solve(B);
    const Matrix SinvPi =
        om.cwiseInverse().asDiagonal() * ops.V.adjoint() * om.asDiagonal() * (ops.V * Pi);
    const Matrix acc = Pi.adjoint() * om.asDiagonal() * SinvPi;
    Matrix direct = Matrix::Zero(2 * p, 2 * p);
    for (int i = 0; i < N; ++i)
        direct += ops.Om(i) * ops.beta[i].adjoint() * ops.beta[i];
    return max_abs(Matrix(acc - direct));
}

} // namespace cansys
