#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cansys/dynamical.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace cansys;

namespace {

GBDTTransform scalar_transform() {
    return GBDTTransform(build_seed_scalar(Complex(1.0, 1.0), 1.0, 1.0, 1.0, 0.3));
}

GBDTTransform triangular_transform() {
    return GBDTTransform(build_seed_triangular(1.0, 1.0, 1.0, 1.0, 1.0));
}

} // namespace

TEST_CASE("matrix exponential shortcut for the triangular A") {
    const DynamicalSolution sol = dynamical_solution(triangular_transform());
    const Matrix A = sol.transform().seed().A;
    for (double t : {0.0, 0.37, 1.2, -0.8}) {
        const Matrix direct = matrix_exp(Matrix(I1 * t * A));
        CHECK(max_abs(Matrix(sol.exp_itA(t) - direct)) < 1e-13);
    }

    const DynamicalSolution ssol = dynamical_solution(scalar_transform());
    const Complex a = ssol.transform().seed().A(0, 0);
    for (double t : {0.5, 2.0}) {
        CHECK(std::abs(ssol.exp_itA(t)(0, 0) - std::exp(I1 * t * a)) < 1e-13);
    }
}

TEST_CASE("solution at t = 0 collapses to the stationary formula") {
    for (int which : {0, 1}) {
        const GBDTTransform T = which == 0 ? scalar_transform() : triangular_transform();
        const DynamicalSolution sol = dynamical_solution(T);
        const GBDTSeed& s = T.seed();
        const Matrix jm = s.signature().j();
        for (double x : {0.3, 1.0, 1.7}) {
            const Matrix L = T.Lambda(x);
            const Matrix expected = jm * L.adjoint() *
                s.A.adjoint().inverse() * T.S(x).inverse() * s.A.inverse();
            CHECK(max_abs(Matrix(sol.Y(x, 0.0) - expected)) < 1e-11);
        }
    }
}

TEST_CASE("row reduction identity behind the explicit solution") {
    CHECK(simplification_identity_residual(scalar_transform()) < 1e-9);
    CHECK(simplification_identity_residual(triangular_transform()) < 1e-9);
}

TEST_CASE("transport identity for the weighted eigenfunction") {
    CHECK(transport_identity_residual(scalar_transform()) < 1e-5);
    CHECK(transport_identity_residual(triangular_transform()) < 1e-5);
}

TEST_CASE("dynamical PDE holds to second order") {
    const std::vector<double> xs{0.5, 1.0};
    const std::vector<double> ts{0.3, 0.8};
    for (int which : {0, 1}) {
        const GBDTTransform T = which == 0 ? scalar_transform() : triangular_transform();
        const PdeResidualReport rep = verify_dynamical_pde(dynamical_solution(T), xs, ts);
        CHECK(rep.residual_fine < rep.residual_coarse);
        CHECK(std::abs(rep.order - 2.0) < 0.3);
    }
}
