#pragma once

#include "cansys/canonical.hpp"

namespace cansys {

// String-equation data derived from a p x 2p row function vartheta = [t1 t2]:
// kappa = (i (t1^{-1} t2)')^{-1} and omega = t1* t1. Z = t1(x)^{-1} vartheta W
// then satisfies (kappa Z')' = lambda omega Z.
struct StringData {
    int p = 1;
    std::function<Matrix(double)> vartheta;
    std::function<Matrix(double)> kappa;
    std::function<Matrix(double)> omega;
    double derivative_step = 1e-4; // central-difference step inside kappa
    double valid_end = 0.0;        // largest x where t1 stays well conditioned
};

StringData make_string_data(const std::function<Matrix(double)>& vartheta, int p,
                            const Grid& grid);

// vartheta = beta Theta*; requires the factorized form H = beta* beta.
StringData canonical_to_string(const CanonicalSystemSpec& spec, const Grid& grid);

// Conjugated system: H -> Theta H Theta*, system matrix j -> J, beta -> beta Theta*.
CanonicalSystemSpec theta_conjugate(const CanonicalSystemSpec& spec);

// Frame B solving B' = [[0, I], [u, 0]] B, B(0) = Theta_1 with
// Theta_1 = (1/sqrt 2) [[iI, I], [iI, -I]]; vartheta is the top block, and
// B J B* = J1 = i [[0, -I], [I, 0]] propagates from x = 0.
struct SchrodingerData {
    int p = 1;
    std::function<Matrix(double)> u; // Hermitian potential
    std::function<Matrix(double)> B;
    std::function<Matrix(double)> vartheta;
};

SchrodingerData schrodinger_frame(const std::function<Matrix(double)>& u, int p,
                                  const Grid& grid);

// J-framed canonical system with Hamiltonian vartheta* vartheta.
CanonicalSystemSpec schrodinger_to_canonical(const SchrodingerData& data);
CanonicalSystemSpec schrodinger_to_canonical(const std::function<Matrix(double)>& u, int p,
                                             const Grid& grid);

// Max norm of -Z'' + uZ - lambda Z for Z = vartheta W, W the fundamental
// solution of the induced canonical system; second differences on the grid.
double verify_schrodinger_solution(const SchrodingerData& data, Complex lambda,
                                   const Grid& grid);

// Max norm of (kappa Z')' - lambda omega Z for Z = t1^{-1} vartheta W over the
// sampling grid of W.
double string_equation_residual(const StringData& data, const SampledMatrixFunction& W,
                                Complex lambda);

} // namespace cansys
