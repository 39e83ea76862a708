// channel.hpp — Gaussian channels as (A, B) matrix pairs with the complete
// positivity certificate, plus a catalog of canonical instances for tests.

#pragma once

#include "pntomo/gaussian_state.hpp"

#include <cstdint>

namespace pntomo {

struct CpDiagnostic {
    bool ok = false;
    double b_min_eig = 0.0;   // min eigenvalue of B
    double cp_min_eig = 0.0;  // min eigenvalue of B + i Omega - i A Omega A^T
};

// B must be symmetric; throws std::invalid_argument otherwise.
CpDiagnostic is_cp(const Mat& a, const Mat& b, double tol = 1e-10);

// Validated at construction: B = B^T, B >= 0 and the CP condition, each to
// min eigenvalue >= -1e-10.
struct GaussianChannel {
    int n = 0;
    Mat a;
    Mat b;

    GaussianChannel() = default;
    GaussianChannel(int n_modes, Mat a_mat, Mat b_mat);
};

// d -> A d,  V -> A V A^T + B/2
GaussianState apply_channel(const GaussianChannel& channel, const GaussianState& state);

GaussianChannel identity_channel(int n);
GaussianChannel attenuator(int n, double eta);              // A = sqrt(eta) I, B = (1-eta) I
GaussianChannel amplifier(int n, double g);                 // A = g I, B = (g^2-1) I
GaussianChannel classical_noise_channel(int n, double c);   // A = I, B = c I

// A with entries uniform in [-1,1]; B = random PSD part shifted so the CP
// condition holds with at least `margin`. Deterministic in `seed`.
GaussianChannel random_cp_channel(int n, std::uint64_t seed, double margin = 0.05);

} // namespace pntomo
