#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cansys {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex I1{0.0, 1.0};

// Uniform grid on [start, end] with `nodes` sample points.
struct Grid {
    double start = 0.0;
    double end = 1.0;
    int nodes = 2;

    Grid() = default;
    Grid(double s, double e, int n) : start(s), end(e), nodes(n) {
        if (n < 2 || !(e > s))
            throw std::invalid_argument("Grid requires nodes >= 2 and end > start");
    }
    double spacing() const { return (end - start) / (nodes - 1); }
    double node(int i) const { return start + spacing() * i; }
};

// Matrix-valued function sampled at the nodes of a uniform grid.
struct SampledMatrixFunction {
    Grid grid;
    std::vector<Matrix> values;

    SampledMatrixFunction() = default;
    explicit SampledMatrixFunction(const Grid& g) : grid(g), values(g.nodes) {}

    const Matrix& operator[](int i) const { return values[i]; }
    Matrix& operator[](int i) { return values[i]; }
    int size() const { return static_cast<int>(values.size()); }
};

// Per-eigenvalue branch of the square root. The default picks Im sqrt > 0,
// except on the positive real axis where the nonnegative root is taken.
using SqrtBranch = std::function<Complex(Complex)>;
SqrtBranch upper_half_branch();
SqrtBranch nonnegative_branch();

Matrix matrix_exp(const Matrix& M);

// Primary square root via complex Schur form + triangular recurrence.
// Throws on a zero eigenvalue ("square-root branch undefined at zero eigenvalue").
Matrix matrix_sqrt_primary(const Matrix& M, const SqrtBranch& branch = upper_half_branch());

// Solves A S - S A* = C. Requires spec(A) and spec(A*) disjoint; a relative
// eigenvalue gap below 1e-8 throws
// ("Sylvester equation singular; use quadrature route for S(x)").
Matrix solve_sylvester(const Matrix& A, const Matrix& C);

// Classical fixed-step RK4 over the grid; rhs is evaluated at nodes and midpoints.
using OdeRhs = std::function<Matrix(double, const Matrix&)>;
SampledMatrixFunction integrate_ode(const OdeRhs& rhs, const Matrix& initial, const Grid& grid);

// Cumulative integral F(x_i) = int_{x_0}^{x_i} f. Composite Simpson reaching
// node i from node i-2; the first panel uses the one-sided parabolic rule
// h/12 (5 f0 + 8 f1 - f2), so every node is fourth order.
SampledMatrixFunction quadrature_cumulative(const SampledMatrixFunction& f);

// Hermitian (possibly indefinite) solve through the spectral factorization.
// Declares failure at condition number > 1e12.
Matrix hermitian_solve(const Matrix& S, const Matrix& B);
Matrix hermitian_inverse(const Matrix& S);
double hermitian_condition(const Matrix& S);

// Smallest eigenvalue of a Hermitian matrix (input symmetrized first).
double min_hermitian_eigenvalue(const Matrix& M);

// Classical adjugate (transposed cofactor matrix); adj(M) * M = det(M) * I.
// Intended for the small matrices that appear here.
Matrix adjugate(const Matrix& M);

inline double frob(const Matrix& M) { return M.norm(); }
inline double max_abs(const Matrix& M) { return M.cwiseAbs().maxCoeff(); }

} // namespace cansys
