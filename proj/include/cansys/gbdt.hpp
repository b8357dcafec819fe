#pragma once

#include "cansys/canonical.hpp"

namespace cansys {

// Seed triple (A, S0, Lambda0) with A S0 - S0 A* = i Lambda0 j Lambda0*,
// plus the structural data of the two-exponential family: Q commuting with A,
// Q^2 = c(2A + cI), and the weight vectors f1, f2 fixing the eigenfunction.
struct GBDTSeed {
    int n = 1;
    int m1 = 1, m2 = 1;
    Matrix A, S0, Lambda0, Q;
    Matrix alpha;  // m1 x m2
    Matrix f1, f2; // n x m1
    double c = 0.0;
    double d = 0.0;
    bool s0_positive = false; // recorded at build; the Weyl layer requires it

    int m() const { return m1 + m2; }
    SignatureConfig signature() const { return SignatureConfig(m1, m2); }
    CanonicalSystemSpec system() const; // initial system H = d j + beta* beta
};

// Scalar seed (p = n = 1): A = a, Q = sqrt(c(2a+c)) with Im Q > 0,
// S0 from the Sylvester identity. S0 may come out indefinite; that is
// recorded, not fatal (only Weyl-function extraction needs S0 > 0).
GBDTSeed build_seed_scalar(Complex a, double c, Complex alpha, Complex f1, Complex f2);

// Upper-triangular seed (p = 1, n = 2, c = 0): A = [[xi, a], [0, xi]],
// nilpotent Q = [[0, q], [0, 0]], and S0 derived entrywise so the seed
// identity holds exactly; a is fixed (up to the free positive scale of S22)
// by i (Lambda0 j Lambda0*)_{12}.
GBDTSeed build_seed_triangular(double xi, Complex q, Complex f, Complex g, Complex alpha);

// Throws when any seed invariant fails (Hermitian S0, the seed identity,
// det A != 0, AQ = QA with Q^2 = c(2A + cI), Lambda0 consistent with f1, f2).
void validate_seed(const GBDTSeed& seed);

enum class SRoute {
    quadrature, // S(x) = S0 + int_0^x Lambda j H j Lambda*
    sylvester,  // S(x) solves A S - S A* = i Lambda j Lambda* (spectra disjoint)
    affine,     // S(x) = S0 + x C C*, valid when C = Lambda j beta* is constant
};

// Closed-form evaluators derived from a seed. S uses the sylvester route when
// spec(A) and spec(A*) are disjoint, otherwise the affine route (verified).
class GBDTTransform {
public:
    explicit GBDTTransform(GBDTSeed seed);

    const GBDTSeed& seed() const { return seed_; }
    SRoute s_route() const { return route_; }

    Matrix Lambda(double x) const; // explicit generalized eigenfunction
    Matrix S(double x) const;
    Matrix beta(double x) const;
    Matrix H(double x) const;

    // w_A(x, lambda) = I - i j Lambda* S^{-1} (A - lambda I)^{-1} Lambda
    Matrix wA(double x, Complex lambda) const;
    // v(x, lambda) = I - i lambda j Lambda* (A*)^{-1} S^{-1} (A - lambda I)^{-1} Lambda
    Matrix v(double x, Complex lambda) const;

    Matrix beta_tilde(double x) const; // beta w_A(., 0)
    Matrix H_tilde(double x) const;    // w_A(., 0)* H w_A(., 0)
    CanonicalSystemSpec transformed_system() const;

    // Initial fundamental solution: explicit E-matrix form for c != 0,
    // truncated exponential for c = 0.
    Matrix W_initial(double x, Complex lambda) const;
    // W-tilde = v(x, lambda) W(x, lambda) v(0, lambda)^{-1}
    Matrix W_tilde(double x, Complex lambda) const;

private:
    GBDTSeed seed_;
    CanonicalSystemSpec sys_;
    SRoute route_ = SRoute::quadrature;
    Matrix C_; // affine route: S(x) = S0 + x C C*
    Vector eigsA_;
    Matrix jm_;
};

// Sampled-state interface mirroring the per-node contract.
struct GBDTState {
    SampledMatrixFunction Lambda;
    SampledMatrixFunction S;
    SRoute route = SRoute::quadrature;
};

SampledMatrixFunction eigenfunction_explicit(const GBDTSeed& seed, const Grid& grid);
SampledMatrixFunction recover_S(const GBDTSeed& seed, const SampledMatrixFunction& Lambda,
                                SRoute route);
GBDTState make_state(const GBDTSeed& seed, const Grid& grid,
                     SRoute route = SRoute::quadrature);

// Largest seed-identity residual over the sampled state, normalized by
// 1 + ||S(x)||.
double gram_identity_residual(const GBDTSeed& seed, const GBDTState& state);

} // namespace cansys
