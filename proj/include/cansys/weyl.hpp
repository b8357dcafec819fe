#pragma once

#include "cansys/gbdt.hpp"

namespace cansys {

// Weyl disk at position r: form = W(r)* j W(r), center and semi-radii of the
// matrix ball { rhoL * omega * rhoR + center : omega* omega <= I }.
struct WeylDisk {
    double r = 0.0;
    Complex lambda;
    Matrix form;   // 2p x 2p
    Matrix rhoL;   // (-form_22)^{-1/2}, Hermitian positive definite
    Matrix rhoR;   // (form_11 - form_12 form_22^{-1} form_21)^{1/2}
    Matrix center; // -form_22^{-1} form_21
};

// Disk from the fundamental-solution value W(r, lambda). Im lambda > 0 required.
WeylDisk weyl_disk(const Matrix& W_at_r, double r, Complex lambda, const SignatureConfig& sig);

// Disk of the system itself: integrates the oracle up to r.
WeylDisk weyl_disk(const CanonicalSystemSpec& spec, Complex lambda, double r, int nodes = 2001);

// Smallest eigenvalue of [I phi*] form [I; phi]; >= 0 (up to tolerance) iff
// phi lies in the disk.
double disk_membership(const WeylDisk& disk, const Matrix& phi);

// phi = rhoL omega rhoR + center for a contraction omega.
Matrix disk_point(const WeylDisk& disk, const Matrix& omega);

// Weyl function of the transformed system,
// phi = [0 I] v(0,lambda) E1 ([I 0] v(0,lambda) E1)^{-1},
// evaluated in an adjugate-scaled form so that lambda inside spec(A) is fine
// (the scaling cancels in the ratio). Requires c != 0 and S(0) > 0.
Matrix weyl_function_explicit(const GBDTTransform& t, Complex lambda);

// int_0^L [I phi*] W~* H~ W~ [I; phi] dx by composite quadrature.
Matrix l2_integral(const GBDTTransform& t, const Matrix& phi, Complex lambda, double L,
                   int nodes = 801);

} // namespace cansys
