#pragma once

#include "cansys/gbdt.hpp"

#include <vector>

namespace cansys {

// Explicit solution of the dynamical system H~ dY/dt = j dY/dx attached to a
// GBDT transform: Y(x,t) = j Lambda(x)* (A*)^{-1} S(x)^{-1} e^{itA} A^{-1}.
class DynamicalSolution {
public:
    explicit DynamicalSolution(GBDTTransform transform);

    const GBDTTransform& transform() const { return transform_; }

    Matrix exp_itA(double t) const;
    Matrix Y(double x, double t) const; // 2p x n

private:
    GBDTTransform transform_;
    Matrix Ainv_;
    bool triangular_exp_ = false; // e^{itA} = e^{it xi}(I + it a N), n = 2
};

// Requires det A != 0; positivity of S is not enforced here, the evaluator
// fails on its own if S(x) degenerates.
DynamicalSolution dynamical_solution(const GBDTTransform& transform);

// Largest || wA(x,0)* Lambda* S^{-1} - Lambda* (A*)^{-1} S^{-1} A || over a
// few interior sample points.
double simplification_identity_residual(const GBDTTransform& transform);

// Central-difference residual of the transport identity
// (Lambda* S^{-1})' = i H j Lambda* S^{-1} A + q0~* Lambda* S^{-1}
// with q0~ = j Lambda* S^{-1} Lambda j H - j H j Lambda* S^{-1} Lambda.
double transport_identity_residual(const GBDTTransform& transform, double step = 1e-4);

struct PdeResidualReport {
    double residual_coarse = 0.0;
    double residual_fine = 0.0;
    double order = 0.0; // log2(coarse / fine)
};

// Max residual of H~ dY/dt = j dY/dx over the (x,t) product grid, measured
// at coarse_step and coarse_step/2 with the convergence order between them.
PdeResidualReport verify_dynamical_pde(const DynamicalSolution& solution,
                                       const std::vector<double>& xs,
                                       const std::vector<double>& ts,
                                       double coarse_step = 2e-3);

} // namespace cansys
