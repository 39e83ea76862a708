#include "pntomo/gaussian_state.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace pntomo {

namespace {

Mat symmetrized(const Mat& m) { return (m + m.transpose()) / 2.0; }

} // namespace

double physicality_margin(const Mat& v) {
    const int twon = static_cast<int>(v.rows());
    CMat h = v.cast<std::complex<double>>() +
             std::complex<double>(0.0, 0.5) * omega_matrix(twon / 2).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<CMat> es((h + h.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff();
}

bool is_physical(const Mat& v, double tol) {
    return physicality_margin(v) >= -tol;
}

GaussianState::GaussianState(int n_modes, Vec mean, Mat cov)
    : n(n_modes), d(std::move(mean)), v(std::move(cov)) {
    if (n < 1) throw std::invalid_argument("GaussianState: n must be >= 1");
    if (d.size() != 2 * n || v.rows() != 2 * n || v.cols() != 2 * n) {
        throw std::invalid_argument("GaussianState: dimension mismatch");
    }
    if (!d.allFinite() || !v.allFinite()) {
        throw std::invalid_argument("GaussianState: non-finite entries");
    }
    if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("GaussianState: covariance must be symmetric");
    }
    if (!is_physical(v)) {
        throw std::invalid_argument("GaussianState: uncertainty relation violated (V + i/2 Omega not PSD)");
    }
}

GaussianState vacuum(int n) {
    if (n < 1) throw std::invalid_argument("vacuum: n must be >= 1");
    return GaussianState(n, Vec::Zero(2 * n), 0.5 * Mat::Identity(2 * n, 2 * n));
}

GaussianState coherent(const Vec& d) {
    const int twon = static_cast<int>(d.size());
    if (twon < 2 || twon % 2 != 0) throw std::invalid_argument("coherent: d must have even length >= 2");
    return GaussianState(twon / 2, d, 0.5 * Mat::Identity(twon, twon));
}

GaussianState squeezed_thermal(const SqueezedThermalParams& p) {
    if (p.n_th < 0.0) throw std::invalid_argument("squeezed_thermal: n_th must be >= 0");
    const Mat r = rotation(p.beta).s;
    const Mat s2 = squeeze(2.0 * p.s).s;
    Mat v = 0.5 * (2.0 * p.n_th + 1.0) * r * s2 * r.transpose();
    Vec d(2);
    d << p.u, p.u;
    return GaussianState(1, d, symmetrized(v));
}

GaussianState two_mode_benchmark(const SqueezedThermalParams& p1,
                                 const SqueezedThermalParams& p2, double u) {
    SqueezedThermalParams q1 = p1, q2 = p2;
    q1.u = 0.0;
    q2.u = 0.0;
    const Mat v1 = squeezed_thermal(q1).v;
    const Mat v2 = squeezed_thermal(q2).v;
    Mat v0 = Mat::Zero(4, 4);
    v0.block<2, 2>(0, 0) = v1;
    v0.block<2, 2>(2, 2) = v2;
    const Mat b = beamsplitter(M_PI / 4.0).s;
    Vec d(4);
    d << u, u, u, u;
    return GaussianState(2, d, symmetrized(b * v0 * b.transpose()));
}

GaussianState displace(const GaussianState& state, const Vec& r) {
    if (r.size() != 2 * state.n) throw std::invalid_argument("displace: dimension mismatch");
    return GaussianState(state.n, state.d + r, state.v);
}

GaussianState apply_gate(const GaussianState& state, const SymplecticGate& gate) {
    if (gate.n != state.n) throw std::invalid_argument("apply_gate: dimension mismatch");
    return GaussianState(state.n, gate.s * state.d,
                         symmetrized(gate.s * state.v * gate.s.transpose()));
}

GaussianState marginal(const GaussianState& state, const std::vector<int>& modes) {
    const int m = static_cast<int>(modes.size());
    if (m < 1) throw std::invalid_argument("marginal: empty mode list");
    std::vector<bool> seen(static_cast<std::size_t>(state.n), false);
    for (int mode : modes) {
        if (mode < 0 || mode >= state.n) throw std::invalid_argument("marginal: mode index out of range");
        if (seen[static_cast<std::size_t>(mode)]) throw std::invalid_argument("marginal: repeated mode index");
        seen[static_cast<std::size_t>(mode)] = true;
    }
    Vec d(2 * m);
    Mat v(2 * m, 2 * m);
    for (int a = 0; a < m; ++a) {
        for (int mu = 0; mu < 2; ++mu) {
            d(2 * a + mu) = state.d(2 * modes[a] + mu);
            for (int b = 0; b < m; ++b) {
                for (int nu = 0; nu < 2; ++nu) {
                    v(2 * a + mu, 2 * b + nu) = state.v(2 * modes[a] + mu, 2 * modes[b] + nu);
                }
            }
        }
    }
    return GaussianState(m, d, v);
}

double mean_photon(const GaussianState& state) {
    const int twon = 2 * state.n;
    return 0.5 * ((state.v - 0.5 * Mat::Identity(twon, twon)).trace() + state.d.squaredNorm());
}

double photon_variance(const GaussianState& state) {
    const int twon = 2 * state.n;
    const Mat id = Mat::Identity(twon, twon);
    return 0.5 * ((state.v - 0.5 * id) * (state.v + 0.5 * id)).trace() +
           state.d.dot(state.v * state.d);
}

double displaced_mean_photon(const GaussianState& state, const Vec& r) {
    if (r.size() != 2 * state.n) throw std::invalid_argument("displaced_mean_photon: dimension mismatch");
    const int twon = 2 * state.n;
    return 0.5 * ((state.v - 0.5 * Mat::Identity(twon, twon)).trace() + (state.d + r).squaredNorm());
}

double displaced_photon_variance(const GaussianState& state, const Vec& r) {
    if (r.size() != 2 * state.n) throw std::invalid_argument("displaced_photon_variance: dimension mismatch");
    const int twon = 2 * state.n;
    const Mat id = Mat::Identity(twon, twon);
    const Vec dr = state.d + r;
    return dr.dot(state.v * dr) +
           0.5 * ((state.v - 0.5 * id) * (state.v + 0.5 * id)).trace();
}

double gated_mean_photon(const GaussianState& state, const SymplecticGate& gate) {
    if (gate.n != state.n) throw std::invalid_argument("gated_mean_photon: dimension mismatch");
    const int twon = 2 * state.n;
    const Mat sts = gate.s.transpose() * gate.s - Mat::Identity(twon, twon);
    return mean_photon(state) + 0.5 * (state.v * sts).trace() + 0.5 * state.d.dot(sts * state.d);
}

double gated_photon_variance(const GaussianState& state, const SymplecticGate& gate) {
    return photon_variance(apply_gate(state, gate));
}

} // namespace pntomo
