// gaussian_state.hpp — Gaussian states as (mean, covariance) pairs with the
// closed-form photon-number statistics used by the tomography protocols.

#pragma once

#include "pntomo/symplectic.hpp"

#include <vector>

namespace pntomo {

// Validated at construction: V symmetric and V + (i/2)Omega >= 0
// (min eigenvalue >= -1e-10). Operations assume validity.
struct GaussianState {
    int n = 0;
    Vec d;
    Mat v;

    GaussianState() = default;
    GaussianState(int n_modes, Vec mean, Mat cov);
};

// min eigenvalue of V + (i/2)Omega as a complex Hermitian matrix
double physicality_margin(const Mat& v);
bool is_physical(const Mat& v, double tol = 1e-10);

// Single-mode squeezed coherent thermal state family:
//   d = (u, u)^T,  V = ((2 n_th + 1)/2) R(beta) S(2s) R(beta)^T
struct SqueezedThermalParams {
    double n_th = 0.0;
    double s = 0.0;
    double beta = 0.0;
    double u = 0.0;
};

GaussianState vacuum(int n);
GaussianState coherent(const Vec& d);
GaussianState squeezed_thermal(const SqueezedThermalParams& p);

// Two-mode benchmark: d = (u,u,u,u)^T, V = B(pi/4)[V(p1) ⊕ V(p2)]B(pi/4)^T.
// The factor params' u fields are ignored; the shared displacement is `u`.
GaussianState two_mode_benchmark(const SqueezedThermalParams& p1,
                                 const SqueezedThermalParams& p2, double u);

GaussianState displace(const GaussianState& state, const Vec& r);
GaussianState apply_gate(const GaussianState& state, const SymplecticGate& gate);
GaussianState marginal(const GaussianState& state, const std::vector<int>& modes);

// <N> = (1/2)[Tr(V - I/2) + ||d||^2]
double mean_photon(const GaussianState& state);

// Var(N) = (1/2)Tr[(V - I/2)(V + I/2)] + d^T V d
double photon_variance(const GaussianState& state);

double displaced_mean_photon(const GaussianState& state, const Vec& r);
double displaced_photon_variance(const GaussianState& state, const Vec& r);

// Mean after the gate, computed as <N> + (1/2)Tr[V(S^T S - I)] + (1/2)d^T(S^T S - I)d;
// agrees with mean_photon(apply_gate(state, gate)).
double gated_mean_photon(const GaussianState& state, const SymplecticGate& gate);

// Variance of N on the gate-transformed state, i.e. Var evaluated at
// (S d, S V S^T). Validated against the truncated-Fock oracle.
double gated_photon_variance(const GaussianState& state, const SymplecticGate& gate);

} // namespace pntomo
