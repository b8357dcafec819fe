#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cansys/string_schrodinger.hpp"
#include "cansys/volterra.hpp"

#include <cmath>
#include <complex>

using namespace cansys;

namespace {

const auto quarter_well = [](double) { return Matrix::Constant(1, 1, Complex(-0.25)); };

// Frame row for u = -1/4 solved by hand: columns of B obey y'' = -y/4 with
// the Theta_1 initial data, so the top row is a cos/sin combination.
Matrix vartheta_closed(double x) {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix th(1, 2);
    th(0, 0) = s * I1 * (std::cos(x / 2.0) + 2.0 * std::sin(x / 2.0));
    th(0, 1) = s * (std::cos(x / 2.0) - 2.0 * std::sin(x / 2.0));
    return th;
}

double kappa_closed(double x) {
    const double t = std::cos(x / 2.0) + 2.0 * std::sin(x / 2.0);
    return -t * t / 2.0;
}

} // namespace

TEST_CASE("frame matches the hand-solved cosine combination") {
    const Grid grid(0.0, 2.0, 401);
    const SchrodingerData data = schrodinger_frame(quarter_well, 1, grid);

    for (double x : {0.0, 0.37, 1.0, 1.73, 2.0}) {
        CHECK(max_abs(Matrix(data.vartheta(x) - vartheta_closed(x))) < 1e-9);
    }
}

TEST_CASE("frame preserves the skew form") {
    const Grid grid(0.0, 2.0, 801);
    const SchrodingerData data = schrodinger_frame(quarter_well, 1, grid);

    Matrix J(2, 2);
    J << 0.0, 1.0, 1.0, 0.0;
    Matrix J1(2, 2);
    J1 << 0.0, -I1, I1, 0.0;
    double worst = 0.0;
    for (int i = 0; i < grid.nodes; ++i) {
        const Matrix B = data.B(grid.node(i));
        worst = std::max(worst, max_abs(Matrix(B * J * B.adjoint() - J1)));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("induced canonical solution solves the eigenvalue problem") {
    const Grid grid(0.0, 2.0, 801);
    const SchrodingerData data = schrodinger_frame(quarter_well, 1, grid);

    CHECK(verify_schrodinger_solution(data, Complex(0.0, 1.0), grid) < 1e-4);
    CHECK(verify_schrodinger_solution(data, Complex(1.0, 1.0), grid) < 1e-4);
}

TEST_CASE("string coefficients from the frame row") {
    const Grid grid(0.0, 2.0, 801);
    const StringData sd = make_string_data(vartheta_closed, 1, grid);

    CHECK(sd.valid_end == grid.end); // the top entry has no zero before x = 2

    for (double x : {0.1, 0.8, 1.5, 1.9}) {
        const Matrix k = sd.kappa(x);
        CHECK(std::abs(k(0, 0).imag()) < 1e-10);
        CHECK(max_abs(Matrix(k - k.adjoint())) < 1e-10);
        CHECK(std::abs(k(0, 0).real() - kappa_closed(x)) < 1e-7);

        const double t = std::cos(x / 2.0) + 2.0 * std::sin(x / 2.0);
        CHECK(std::abs(sd.omega(x)(0, 0).real() - t * t / 2.0) < 1e-12);
    }
}

TEST_CASE("string equation residual on the induced solution") {
    const Grid grid(0.0, 2.0, 801);
    const SchrodingerData data = schrodinger_frame(quarter_well, 1, grid);
    const StringData sd = make_string_data(data.vartheta, 1, grid);

    const CanonicalSystemSpec spec = schrodinger_to_canonical(data);
    const SampledMatrixFunction W =
        fundamental_solution_oracle(spec, Complex(0.0, 1.0), grid);
    CHECK(string_equation_residual(sd, W, Complex(0.0, 1.0)) < 1e-3);
}

TEST_CASE("validity prefix stops at a zero of the top block") {
    const auto linear = [](double x) {
        Matrix th(1, 2);
        th(0, 0) = x - 1.0;
        th(0, 1) = 1.0;
        return th;
    };
    const StringData sd = make_string_data(linear, 1, Grid(-1.0, 1.0, 3));
    CHECK(sd.valid_end == 0.0);

    const auto zero_at_start = [](double x) {
        Matrix th(1, 2);
        th(0, 0) = x;
        th(0, 1) = 1.0;
        return th;
    };
    CHECK_THROWS_WITH(make_string_data(zero_at_start, 1, Grid(0.0, 1.0, 11)),
                      "string transform: theta_1 singular at the left endpoint");
}

TEST_CASE("conjugated system swaps the signature frame coherently") {
    const CanonicalSystemSpec spec =
        to_canonical(make_exponential_family(0.5, Matrix::Identity(1, 1)));
    const CanonicalSystemSpec conj = theta_conjugate(spec);
    const Matrix Th = spec.signature.Theta();

    CHECK(max_abs(Matrix(conj.system_matrix - spec.signature.J())) == 0.0);
    for (double x : {0.0, 0.6, 1.4}) {
        CHECK(max_abs(Matrix(conj.H(x) - Th * spec.H(x) * Th.adjoint())) < 1e-14);
        CHECK(max_abs(Matrix(conj.beta(x) - spec.beta(x) * Th.adjoint())) < 1e-14);
    }

    // Fundamental solutions transform by the same frame.
    const Complex lam(0.0, 1.0);
    const Grid grid(0.0, 1.0, 1001);
    const SampledMatrixFunction Wj = fundamental_solution_oracle(spec, lam, grid);
    const SampledMatrixFunction WJ = fundamental_solution_oracle(conj, lam, grid);
    CHECK(max_abs(Matrix(WJ[1000] - Th * Wj[1000] * Th.adjoint())) < 1e-10);
}

TEST_CASE("string data from a factorized canonical system") {
    // alpha = i keeps the top entry of beta Theta* away from zero at x = 0
    // (alpha = 1 makes it vanish there, which is correctly refused).
    Matrix rot(1, 1);
    rot << I1;
    const CanonicalSystemSpec spec = to_canonical(make_exponential_family(0.5, rot));
    const Grid grid(0.0, 1.0, 201);
    const StringData sd = canonical_to_string(spec, grid);

    const Matrix ThAdj = spec.signature.Theta().adjoint();
    for (double x : {0.2, 0.8}) {
        CHECK(max_abs(Matrix(sd.vartheta(x) - spec.beta(x) * ThAdj)) < 1e-14);
    }

    const CanonicalSystemSpec flat =
        to_canonical(make_exponential_family(0.5, Matrix::Identity(1, 1)));
    CHECK_THROWS_WITH(canonical_to_string(flat, grid),
                      "string transform: theta_1 singular at the left endpoint");

    CanonicalSystemSpec bare;
    bare.signature = SignatureConfig(1, 1);
    bare.hamiltonian = [](double) { return Matrix::Identity(2, 2); };
    CHECK_THROWS_WITH(canonical_to_string(bare, grid),
                      "canonical_to_string: needs the factorized form H = beta* beta");
}
