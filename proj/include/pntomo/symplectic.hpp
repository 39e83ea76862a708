// symplectic.hpp — real symplectic linear algebra for n-mode quadratures.
//
// Quadrature ordering is (q1, p1, ..., qn, pn) throughout; hbar = 1.

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace pntomo {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Omega = ⊕_k [[0,1],[-1,0]]; encodes [xi_i, xi_j] = i Omega_ij.
struct SymplecticForm {
    int n = 0;
    Mat matrix;
};

SymplecticForm omega(int n);
Mat omega_matrix(int n);

// A 2n x 2n real matrix S with S Omega S^T = Omega, plus a provenance label.
struct SymplecticGate {
    int n = 0;
    Mat s;
    std::string label;
};

// ||S Omega S^T - Omega||_F
double symplectic_residual(const Mat& s);
bool is_symplectic(const Mat& s, double tol = 1e-12);

// Single-mode phase rotation: [[cos, sin], [-sin, cos]].
SymplecticGate rotation(double phi);

// Single-mode squeezer: diag(e^-r, e^r).
SymplecticGate squeeze(double r);

// Two-mode beam splitter: [[cos I2, sin I2], [-sin I2, cos I2]]; balanced at pi/4.
SymplecticGate beamsplitter(double theta);

// P(r, phi) = S(r) R(phi), single mode.
SymplecticGate p_gate(double r, double phi);

// Q(r, phi) = (S(r) ⊕ I2) B(pi/4) (R(phi) ⊕ I2), two modes; squeezer and
// rotation act on the first mode of the pair.
SymplecticGate q_gate(double r, double phi);

// a then b (matrix product a.s * b.s).
SymplecticGate compose(const SymplecticGate& a, const SymplecticGate& b);

// Places `gate` on the listed modes of an n-mode register, identity elsewhere.
// Mode order matters: gate mode k maps to modes[k].
SymplecticGate embed(const SymplecticGate& gate, const std::vector<int>& modes, int n);

// Williamson normal form of a positive definite symmetric V:
//   V = S diag(nu_1, nu_1, ..., nu_n, nu_n) S^T,  S symplectic, nu_k > 0.
struct Williamson {
    Mat s;
    Vec nu;  // length n, ascending
};
Williamson williamson(const Mat& v);
Vec symplectic_eigenvalues(const Mat& v);

} // namespace pntomo
