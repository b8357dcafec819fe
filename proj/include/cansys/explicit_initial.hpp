#pragma once

#include "cansys/canonical.hpp"

namespace cansys {

// Data for the closed-form fundamental solution of the system with
// H(x) = e^{-icxj} K e^{icxj}, K = beta(0)* beta(0), beta the two-exponential
// family. z1^2 = c(2 lambda + c) with Im z1 > 0, z2 = -z1, and
// E_i = [-alpha; (1/lambda)(lambda + c - z_i) I].
struct InitialSolutionParams {
    int p = 1;
    double c = 0.0;
    Matrix alpha;
    Complex lambda;
    Complex z1, z2;

    Matrix K() const;  // beta(0)* beta(0)
    Matrix E() const;  // [E1 E2], 2p x 2p
    Matrix E1() const; // first block column, 2p x p
};

// c != 0 route; throws for real lambda (branch undefined) and lambda = 0.
InitialSolutionParams make_initial_params(int p, double c, const Matrix& alpha, Complex lambda);

// W(x, lambda) = e^{-icxj} E diag(e^{iz1 x} I, e^{iz2 x} I) E^{-1} for c != 0;
// for c = 0 the series truncates: W = I + i lambda x j K.
Matrix initial_W(const InitialSolutionParams& params, double x);
Matrix initial_W(int p, double c, const Matrix& alpha, Complex lambda, double x);

// Residual of E Z E^{-1} = lambda j K + c j with Z = diag(z1 I, z2 I).
double verify_eigenrelation(const InitialSolutionParams& params);

} // namespace cansys
