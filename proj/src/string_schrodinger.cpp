#include "cansys/string_schrodinger.hpp"

#include <Eigen/LU>
#include <cmath>
#include <memory>

namespace cansys {

namespace {

// Continuous extension of an ODE solution: stored node values plus one local
// RK4 step from the nearest node at or below the query point.
class OdeFlow {
public:
    OdeFlow(OdeRhs rhs, const Matrix& initial, const Grid& grid)
        : rhs_(std::move(rhs)), samples_(integrate_ode(rhs_, initial, grid)) {}

    Matrix operator()(double x) const {
        const Grid& g = samples_.grid;
        const double h = g.spacing();
        int i = static_cast<int>(std::floor((x - g.start) / h));
        i = std::max(0, std::min(i, g.nodes - 1));
        const double dx = x - g.node(i);
        const Matrix& Y = samples_[i];
        if (std::abs(dx) < 1e-15)
            return Y;
        const double x0 = g.node(i);
        const Matrix k1 = rhs_(x0, Y);
        const Matrix k2 = rhs_(x0 + dx / 2.0, Matrix(Y + (dx / 2.0) * k1));
        const Matrix k3 = rhs_(x0 + dx / 2.0, Matrix(Y + (dx / 2.0) * k2));
        const Matrix k4 = rhs_(x0 + dx, Matrix(Y + dx * k3));
        return Y + (dx / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

private:
    OdeRhs rhs_;
    SampledMatrixFunction samples_;
};

} // namespace

StringData make_string_data(const std::function<Matrix(double)>& vartheta, int p,
                            const Grid& grid) {
    StringData data;
    data.p = p;
    data.vartheta = vartheta;
    data.derivative_step = grid.spacing() / 10.0;

    // Largest prefix on which t1 stays invertible with a sane condition number.
    double valid = grid.start;
    for (int i = 0; i < grid.nodes; ++i) {
        const double x = grid.node(i);
        const Matrix t1 = vartheta(x).leftCols(p);
        Eigen::JacobiSVD<Matrix> svd(t1);
        const double smin = svd.singularValues()(p - 1);
        if (smin <= 0.0 || svd.singularValues()(0) / smin > 1e10)
            break;
        valid = x;
    }
    data.valid_end = valid;
    if (valid <= grid.start)
        throw std::runtime_error("string transform: theta_1 singular at the left endpoint");

    auto theta = vartheta;
    const double step = data.derivative_step;
    const auto ratio = [theta, p](double x) {
        const Matrix th = theta(x);
        return Matrix(th.leftCols(p).partialPivLu().solve(th.rightCols(p)));
    };
    data.kappa = [ratio, step, p](double x) {
        const Matrix der = (ratio(x + step) - ratio(x - step)) / (2.0 * step);
        return Matrix((I1 * der).partialPivLu().inverse());
    };
    data.omega = [theta, p](double x) {
        const Matrix t1 = theta(x).leftCols(p);
        return Matrix(t1.adjoint() * t1);
    };
    return data;
}

StringData canonical_to_string(const CanonicalSystemSpec& spec, const Grid& grid) {
    if (!spec.has_beta())
        throw std::invalid_argument("canonical_to_string: needs the factorized form H = beta* beta");
    const int p = spec.signature.m1;
    const Matrix ThAdj = spec.signature.Theta().adjoint();
    auto beta = spec.beta;
    const auto vartheta = [beta, ThAdj](double x) { return Matrix(beta(x) * ThAdj); };
    return make_string_data(vartheta, p, grid);
}

CanonicalSystemSpec theta_conjugate(const CanonicalSystemSpec& spec) {
    const Matrix Th = spec.signature.Theta();
    CanonicalSystemSpec out;
    out.signature = spec.signature;
    out.kind = spec.kind;
    out.d = spec.d;
    out.system_matrix = spec.signature.J();
    auto H = spec.hamiltonian;
    out.hamiltonian = [H, Th](double x) { return Matrix(Th * H(x) * Th.adjoint()); };
    if (spec.has_beta()) {
        auto beta = spec.beta;
        const Matrix ThAdj = Th.adjoint();
        out.beta = [beta, ThAdj](double x) { return Matrix(beta(x) * ThAdj); };
    }
    return out;
}

SchrodingerData schrodinger_frame(const std::function<Matrix(double)>& u, int p,
                                  const Grid& grid) {
    const Matrix Ip = Matrix::Identity(p, p);
    Matrix Theta1(2 * p, 2 * p);
    const double s = 1.0 / std::sqrt(2.0);
    Theta1.topLeftCorner(p, p) = s * I1 * Ip;
    Theta1.topRightCorner(p, p) = s * Ip;
    Theta1.bottomLeftCorner(p, p) = s * I1 * Ip;
    Theta1.bottomRightCorner(p, p) = -s * Ip;

    const auto rhs = [u, p](double x, const Matrix& B) {
        Matrix out(2 * p, 2 * p);
        out.topRows(p) = B.bottomRows(p);
        out.bottomRows(p) = u(x) * B.topRows(p);
        return out;
    };

    // Integrate on an 8x refined grid so the evaluator's local step stays tiny.
    const Grid fine(grid.start, grid.end, 8 * (grid.nodes - 1) + 1);
    auto flow = std::make_shared<OdeFlow>(rhs, Theta1, fine);

    SchrodingerData data;
    data.p = p;
    data.u = u;
    data.B = [flow](double x) { return (*flow)(x); };
    auto B = data.B;
    data.vartheta = [B, p](double x) { return Matrix(B(x).topRows(p)); };
    return data;
}

CanonicalSystemSpec schrodinger_to_canonical(const SchrodingerData& data) {
    const int p = data.p;
    CanonicalSystemSpec spec;
    spec.signature = SignatureConfig(p, p);
    spec.kind = SystemKind::canonical;
    spec.system_matrix = spec.signature.J();
    spec.beta = data.vartheta;
    auto theta = data.vartheta;
    spec.hamiltonian = [theta](double x) {
        const Matrix th = theta(x);
        return Matrix(th.adjoint() * th);
    };
    return spec;
}

CanonicalSystemSpec schrodinger_to_canonical(const std::function<Matrix(double)>& u, int p,
                                             const Grid& grid) {
    return schrodinger_to_canonical(schrodinger_frame(u, p, grid));
}

double verify_schrodinger_solution(const SchrodingerData& data, Complex lambda,
                                   const Grid& grid) {
    const CanonicalSystemSpec spec = schrodinger_to_canonical(data);
    const SampledMatrixFunction W = fundamental_solution_oracle(spec, lambda, grid);
    const double h = grid.spacing();

    std::vector<Matrix> Z(grid.nodes);
    for (int i = 0; i < grid.nodes; ++i)
        Z[i] = data.vartheta(grid.node(i)) * W[i];

    double worst = 0.0;
    for (int i = 1; i + 1 < grid.nodes; ++i) {
        const Matrix d2 = (Z[i + 1] - 2.0 * Z[i] + Z[i - 1]) / (h * h);
        const Matrix r = -d2 + data.u(grid.node(i)) * Z[i] - lambda * Z[i];
        worst = std::max(worst, max_abs(r));
    }
    return worst;
}

double string_equation_residual(const StringData& data, const SampledMatrixFunction& W,
                                Complex lambda) {
    const Grid& grid = W.grid;
    const double h = grid.spacing();
    const int p = data.p;

    std::vector<Matrix> Z(grid.nodes);
    for (int i = 0; i < grid.nodes; ++i) {
        const double x = grid.node(i);
        const Matrix th = data.vartheta(x);
        Z[i] = th.leftCols(p).partialPivLu().solve(th * W[i]);
    }

    double worst = 0.0;
    for (int i = 1; i + 1 < grid.nodes; ++i) {
        const double x = grid.node(i);
        if (x + h > data.valid_end)
            break;
        const Matrix flux_p = data.kappa(x + h / 2.0) * ((Z[i + 1] - Z[i]) / h);
        const Matrix flux_m = data.kappa(x - h / 2.0) * ((Z[i] - Z[i - 1]) / h);
        const Matrix r = (flux_p - flux_m) / h - lambda * data.omega(x) * Z[i];
        worst = std::max(worst, max_abs(r));
    }
    return worst;
}

} // namespace cansys
