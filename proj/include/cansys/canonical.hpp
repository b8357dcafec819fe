#pragma once

#include "cansys/numkernels.hpp"

namespace cansys {

// Signature matrices: j = diag(I_m1, -I_m2); for m1 = m2 = p also
// J = Theta j Theta* with Theta = (1/sqrt 2) [[I, -I], [I, I]].
struct SignatureConfig {
    int m1 = 1;
    int m2 = 1;

    SignatureConfig() = default;
    SignatureConfig(int a, int b) : m1(a), m2(b) {
        if (a < 1 || b < 1)
            throw std::invalid_argument("SignatureConfig: block sizes must be positive");
    }
    int m() const { return m1 + m2; }

    Matrix j() const;
    Matrix Theta() const; // requires m1 == m2
    Matrix J() const;     // requires m1 == m2
};

enum class SystemKind { generalized, canonical };

// One system w' = i lambda (systemMatrix) H(x) w. The system matrix is j by
// default; the Schrodinger transform produces J-framed systems.
struct CanonicalSystemSpec {
    SignatureConfig signature;
    SystemKind kind = SystemKind::generalized;
    double d = 0.0;
    std::function<Matrix(double)> hamiltonian;
    std::function<Matrix(double)> beta; // empty when no factorization H = d j + beta* beta is known
    Matrix system_matrix;               // defaults to signature.j()

    Matrix H(double x) const { return hamiltonian(x); }
    bool has_beta() const { return static_cast<bool>(beta); }
};

// Two-exponential family beta(x) = [e^{icx} I, e^{-icx} alpha] with
// alpha alpha* = I; H = d j + beta* beta. Throws on non-coisometric alpha.
CanonicalSystemSpec make_beta_exponential(double c, double d, const Matrix& alpha);

// RK4 fundamental solution W(., lambda), W(0) = I. The independent oracle.
SampledMatrixFunction fundamental_solution_oracle(const CanonicalSystemSpec& spec,
                                                  Complex lambda, const Grid& grid);

struct MonotonicityReport {
    double worst_violation = 0.0; // most negative eigenvalue seen, sign-flipped
    bool pass = false;
};

// For Im lambda > 0 checks W(r2)* j W(r2) <= W(r1)* j W(r1) <= j along the
// grid (reversed inequalities for Im lambda < 0). Real lambda is rejected.
MonotonicityReport check_j_monotonicity(const SampledMatrixFunction& W, Complex lambda,
                                        const SignatureConfig& sig, double tol = 1e-8);

} // namespace cansys
