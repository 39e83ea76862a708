#include "pntomo/channel.hpp"

#include "pntomo/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace pntomo {

namespace {

double min_eig_sym(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es((m + m.transpose()) / 2.0);
    return es.eigenvalues().minCoeff();
}

double min_eig_herm(const CMat& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es((m + m.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff();
}

} // namespace

CpDiagnostic is_cp(const Mat& a, const Mat& b, double tol) {
    const int twon = static_cast<int>(a.rows());
    if (twon % 2 != 0 || a.cols() != twon || b.rows() != twon || b.cols() != twon) {
        throw std::invalid_argument("is_cp: matrices must be matching 2n x 2n");
    }
    if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("is_cp: B must be symmetric");
    }
    const Mat om = omega_matrix(twon / 2);
    const std::complex<double> i(0.0, 1.0);
    CMat cp = b.cast<std::complex<double>>() + i * om.cast<std::complex<double>>() -
              i * (a * om * a.transpose()).cast<std::complex<double>>();
    CpDiagnostic diag;
    diag.b_min_eig = min_eig_sym(b);
    diag.cp_min_eig = min_eig_herm(cp);
    diag.ok = diag.b_min_eig >= -tol && diag.cp_min_eig >= -tol;
    return diag;
}

GaussianChannel::GaussianChannel(int n_modes, Mat a_mat, Mat b_mat)
    : n(n_modes), a(std::move(a_mat)), b(std::move(b_mat)) {
    if (n < 1) throw std::invalid_argument("GaussianChannel: n must be >= 1");
    if (a.rows() != 2 * n || a.cols() != 2 * n || b.rows() != 2 * n || b.cols() != 2 * n) {
        throw std::invalid_argument("GaussianChannel: dimension mismatch");
    }
    const CpDiagnostic diag = is_cp(a, b);
    if (!diag.ok) {
        throw std::invalid_argument(
            diag.b_min_eig < -1e-10
                ? "GaussianChannel: B is not positive semidefinite"
                : "GaussianChannel: complete positivity condition violated");
    }
}

GaussianState apply_channel(const GaussianChannel& channel, const GaussianState& state) {
    if (channel.n != state.n) throw std::invalid_argument("apply_channel: dimension mismatch");
    Mat v = channel.a * state.v * channel.a.transpose() + 0.5 * channel.b;
    return GaussianState(state.n, channel.a * state.d, (v + v.transpose()) / 2.0);
}

GaussianChannel identity_channel(int n) {
    if (n < 1) throw std::invalid_argument("identity_channel: n must be >= 1");
    return GaussianChannel(n, Mat::Identity(2 * n, 2 * n), Mat::Zero(2 * n, 2 * n));
}

GaussianChannel attenuator(int n, double eta) {
    if (n < 1) throw std::invalid_argument("attenuator: n must be >= 1");
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw std::invalid_argument("attenuator: transmissivity must satisfy 0 < eta <= 1");
    }
    const int twon = 2 * n;
    return GaussianChannel(n, std::sqrt(eta) * Mat::Identity(twon, twon),
                           (1.0 - eta) * Mat::Identity(twon, twon));
}

GaussianChannel amplifier(int n, double g) {
    if (n < 1) throw std::invalid_argument("amplifier: n must be >= 1");
    if (!(g >= 1.0)) {
        throw std::invalid_argument("amplifier: gain must satisfy g >= 1 (CP requires B >= (g^2-1) I)");
    }
    const int twon = 2 * n;
    return GaussianChannel(n, g * Mat::Identity(twon, twon),
                           (g * g - 1.0) * Mat::Identity(twon, twon));
}

GaussianChannel classical_noise_channel(int n, double c) {
    if (n < 1) throw std::invalid_argument("classical_noise_channel: n must be >= 1");
    if (c < 0.0) {
        throw std::invalid_argument("classical_noise_channel: noise must satisfy c >= 0 (B >= 0)");
    }
    const int twon = 2 * n;
    return GaussianChannel(n, Mat::Identity(twon, twon), c * Mat::Identity(twon, twon));
}

GaussianChannel random_cp_channel(int n, std::uint64_t seed, double margin) {
    if (n < 1) throw std::invalid_argument("random_cp_channel: n must be >= 1");
    if (margin < 0.0) throw std::invalid_argument("random_cp_channel: margin must be >= 0");
    const int twon = 2 * n;
    SplitMix64 rng(seed);
    Mat a(twon, twon), r(twon, twon);
    for (int i = 0; i < twon; ++i) {
        for (int j = 0; j < twon; ++j) a(i, j) = rng.next_in(-1.0, 1.0);
    }
    for (int i = 0; i < twon; ++i) {
        for (int j = 0; j < twon; ++j) r(i, j) = rng.next_in(-1.0, 1.0);
    }
    Mat b = r * r.transpose();
    const Mat om = omega_matrix(n);
    const std::complex<double> i(0.0, 1.0);
    CMat cp = b.cast<std::complex<double>>() + i * om.cast<std::complex<double>>() -
              i * (a * om * a.transpose()).cast<std::complex<double>>();
    const double lam = min_eig_herm(cp);
    if (lam < margin) {
        b += (margin - lam) * Mat::Identity(twon, twon);
    }
    return GaussianChannel(n, a, b);
}

} // namespace pntomo
