#pragma once

#include "cansys/canonical.hpp"

namespace cansys {

enum class ExecutionPolicy { serial, parallel };

// A p x 2p row function with its first two derivatives. The similarity
// machinery requires the normalizations beta j beta* = 0 and
// beta' j beta* = i I; build_auxiliaries enforces both.
struct BetaFamily {
    int p = 1;
    std::function<Matrix(double)> beta;
    std::function<Matrix(double)> dbeta;
    std::function<Matrix(double)> ddbeta;
};

// beta = [e^{icx} I, e^{-icx} alpha]; normalized (beta' j beta* = iI) only
// at c = 1/2.
BetaFamily make_exponential_family(double c, const Matrix& alpha);

CanonicalSystemSpec to_canonical(const BetaFamily& family);

// Sampled coefficients of the kernel construction. u1 solves
// u1' = i j beta* beta'' u1; u2 = -i beta' j beta'*; u3 = i beta'' j beta'*;
// u solves u' = -(1/2) u2 u and is unitary; u4 = u*((u3 + u3*)/2 - (3/4)u2^2)u;
// h1 = i beta'' u1; h2 = u1^{-1}(j beta* u2^2 - j beta* u3* - j beta'* u2 + j beta''*);
// G1 = u* h1, G2 = h2 u.
struct VolterraAuxiliaries {
    Grid grid;
    int p = 1;
    std::vector<Matrix> B, dB, ddB; // p x 2p
    std::vector<Matrix> u1;         // 2p x 2p
    std::vector<Matrix> u2, u3, u, u4; // p x p
    std::vector<Matrix> h1;         // p x 2p
    std::vector<Matrix> h2;         // 2p x p
    std::vector<Matrix> G1;         // p x 2p
    std::vector<Matrix> G2;         // 2p x p
};

VolterraAuxiliaries build_auxiliaries(const BetaFamily& family, const Grid& grid);

// Drives the series on prescribed coefficients (u = I, so G1 = h1, G2 = h2).
VolterraAuxiliaries manufactured_auxiliaries(const Grid& grid, int p,
                                             const std::vector<Matrix>& u4,
                                             const std::vector<Matrix>& G1,
                                             const std::vector<Matrix>& G2);

struct SimilarityKernel {
    Grid grid;
    int p = 1;
    std::vector<Matrix> u;     // p x p per node
    Matrix V;                  // (N p) x (N p), block lower triangular
    std::vector<Matrix> terms; // populated when keep_terms is set
    int terms_used = 0;
    double C = 0.0;            // constant of the factorial tail bound
    double tail_bound = 0.0;   // first neglected bound value
    bool tail_reached = true;  // false when kmax stopped the series early
};

// V = sum_k V_k. V_1 from the five-integral formula, each later term from the
// six-integral recursion; truncation once C (3C^2 T)^{k-1}/(k-1)! < tol.
SimilarityKernel kernel_series(const VolterraAuxiliaries& aux, int kmax, double tol,
                               ExecutionPolicy policy = ExecutionPolicy::parallel,
                               bool keep_terms = false);

// (Vf)(x) = u(x)(f(x) + int_0^x V(x,t) f(t) dt), trapezoid quadrature.
std::vector<Matrix> apply_V(const SimilarityKernel& kernel, const std::vector<Matrix>& f);

// Trapezoid-weighted matrices of the operators
// (A f)(x) = int_0^x (t - x) f(t) dt, (K f)(x) = i beta(x) j int_0^x beta(t)* f(t) dt,
// and V from the kernel; Om holds the outer quadrature weights.
struct VolterraDiscretization {
    Grid grid;
    int p = 1;
    Matrix A, K, V; // (N p) x (N p)
    Eigen::VectorXd Om;
    std::vector<Matrix> beta; // p x 2p per node
};

VolterraDiscretization build_discrete(const VolterraAuxiliaries& aux,
                                      const SimilarityKernel& kernel);

// Restriction of every operator to the first `node_count` nodes.
VolterraDiscretization prefix(const VolterraDiscretization& ops, int node_count);

// w_A(ell, mu) = I - i j beta^* Om V (A - mu I)^{-1} V^{-1} beta at the grid
// endpoint of `ops`. The fundamental solution satisfies W(ell, lambda) =
// w_A(ell, 1/lambda).
Matrix transfer_function_wA_ell(const VolterraDiscretization& ops, Complex mu);

// ||K V f - V A f||_{L2} for f = 1.
double similarity_residual(const VolterraDiscretization& ops);
// ||A S - S A^dagger - i Pi j Pi^dagger|| with S = V^{-1} V^{-dagger},
// Pi = V^{-1} beta (adjoints taken in the weighted inner product).
double snode_identity_residual(const VolterraDiscretization& ops);
// Accumulation Pi^dagger S^{-1} Pi against the direct quadrature of beta* beta.
double hamiltonian_recovery_residual(const VolterraDiscretization& ops);

} // namespace cansys
