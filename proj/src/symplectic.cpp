#include "pntomo/symplectic.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pntomo {

namespace {

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument(std::string(what) + ": parameter must be finite");
    }
}

std::string fmt_params(const char* name, double a, double b) {
    std::ostringstream os;
    os << name << "(" << a << "," << b << ")";
    return os.str();
}

} // namespace

SymplecticForm omega(int n) {
    if (n < 1) throw std::invalid_argument("omega: n must be >= 1");
    SymplecticForm f;
    f.n = n;
    f.matrix = omega_matrix(n);
    return f;
}

Mat omega_matrix(int n) {
    Mat m = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        m(2 * k, 2 * k + 1) = 1.0;
        m(2 * k + 1, 2 * k) = -1.0;
    }
    return m;
}

double symplectic_residual(const Mat& s) {
    const int twon = static_cast<int>(s.rows());
    if (twon % 2 != 0 || s.cols() != twon) {
        throw std::invalid_argument("symplectic_residual: matrix must be 2n x 2n");
    }
    const Mat om = omega_matrix(twon / 2);
    return (s * om * s.transpose() - om).norm();
}

bool is_symplectic(const Mat& s, double tol) {
    return symplectic_residual(s) <= tol;
}

SymplecticGate rotation(double phi) {
    require_finite(phi, "rotation");
    SymplecticGate g;
    g.n = 1;
    g.s = Mat(2, 2);
    g.s << std::cos(phi), std::sin(phi),
          -std::sin(phi), std::cos(phi);
    std::ostringstream os;
    os << "R(" << phi << ")";
    g.label = os.str();
    return g;
}

SymplecticGate squeeze(double r) {
    require_finite(r, "squeeze");
    SymplecticGate g;
    g.n = 1;
    g.s = Mat(2, 2);
    g.s << std::exp(-r), 0.0,
           0.0, std::exp(r);
    std::ostringstream os;
    os << "S(" << r << ")";
    g.label = os.str();
    return g;
}

SymplecticGate beamsplitter(double theta) {
    require_finite(theta, "beamsplitter");
    SymplecticGate g;
    g.n = 2;
    const double c = std::cos(theta), s = std::sin(theta);
    g.s = Mat::Zero(4, 4);
    g.s.block<2, 2>(0, 0) = c * Mat::Identity(2, 2);
    g.s.block<2, 2>(0, 2) = s * Mat::Identity(2, 2);
    g.s.block<2, 2>(2, 0) = -s * Mat::Identity(2, 2);
    g.s.block<2, 2>(2, 2) = c * Mat::Identity(2, 2);
    std::ostringstream os;
    os << "B(" << theta << ")";
    g.label = os.str();
    return g;
}

SymplecticGate p_gate(double r, double phi) {
    require_finite(r, "p_gate");
    require_finite(phi, "p_gate");
    SymplecticGate g;
    g.n = 1;
    g.s = squeeze(r).s * rotation(phi).s;
    g.label = fmt_params("P", r, phi);
    return g;
}

SymplecticGate q_gate(double r, double phi) {
    require_finite(r, "q_gate");
    require_finite(phi, "q_gate");
    Mat sq = Mat::Identity(4, 4);
    sq.block<2, 2>(0, 0) = squeeze(r).s;
    Mat rot = Mat::Identity(4, 4);
    rot.block<2, 2>(0, 0) = rotation(phi).s;
    SymplecticGate g;
    g.n = 2;
    g.s = sq * beamsplitter(M_PI / 4.0).s * rot;
    g.label = fmt_params("Q", r, phi);
    return g;
}

SymplecticGate compose(const SymplecticGate& a, const SymplecticGate& b) {
    if (a.n != b.n) throw std::invalid_argument("compose: mode counts differ");
    SymplecticGate g;
    g.n = a.n;
    g.s = a.s * b.s;
    g.label = a.label + "*" + b.label;
    return g;
}

SymplecticGate embed(const SymplecticGate& gate, const std::vector<int>& modes, int n) {
    const int m = static_cast<int>(modes.size());
    if (gate.n != m) {
        throw std::invalid_argument("embed: gate acts on a different number of modes");
    }
    if (n < 1) throw std::invalid_argument("embed: n must be >= 1");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int mode : modes) {
        if (mode < 0 || mode >= n) throw std::invalid_argument("embed: mode index out of range");
        if (seen[static_cast<std::size_t>(mode)]) throw std::invalid_argument("embed: repeated mode index");
        seen[static_cast<std::size_t>(mode)] = true;
    }
    SymplecticGate g;
    g.n = n;
    g.s = Mat::Identity(2 * n, 2 * n);
    for (int a = 0; a < m; ++a) {
        g.s.row(2 * modes[a]).setZero();
        g.s.row(2 * modes[a] + 1).setZero();
    }
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            for (int mu = 0; mu < 2; ++mu) {
                for (int nu = 0; nu < 2; ++nu) {
                    g.s(2 * modes[a] + mu, 2 * modes[b] + nu) = gate.s(2 * a + mu, 2 * b + nu);
                }
            }
        }
    }
    std::ostringstream os;
    os << gate.label << "@[";
    for (int a = 0; a < m; ++a) os << (a ? "," : "") << modes[a];
    os << ";n=" << n << "]";
    g.label = os.str();
    return g;
}

Williamson williamson(const Mat& v) {
    const int twon = static_cast<int>(v.rows());
    if (twon % 2 != 0 || v.cols() != twon) {
        throw std::invalid_argument("williamson: matrix must be 2n x 2n");
    }
    const int n = twon / 2;
    if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, v.norm())) {
        throw std::invalid_argument("williamson: matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es((v + v.transpose()) / 2.0);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument("williamson: matrix must be positive definite");
    }
    // W = V^{1/2}; K = W^{-1} Omega W^{-1} is skew with eigenvalues ±i/nu_k.
    const Vec lam = es.eigenvalues();
    const Mat w_inv = es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
                      es.eigenvectors().transpose();
    const Mat w = es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    const Mat k = w_inv * omega_matrix(n) * w_inv;

    // Youla form via the Hermitian matrix iK.
    CMat ik = std::complex<double>(0.0, 1.0) * k.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<CMat> hes((ik + ik.adjoint()) / 2.0);

    // Take the positive-eigenvalue pairs, largest mu first => nu ascending.
    std::vector<int> pos;
    for (int i = twon - 1; i >= 0; --i) {
        if (hes.eigenvalues()(i) > 0.0) pos.push_back(i);
    }
    if (static_cast<int>(pos.size()) != n) {
        throw std::runtime_error("williamson: unexpected eigenvalue pairing");
    }
    Williamson out;
    out.nu = Vec(n);
    Mat o(twon, twon);
    Vec dsqrt(twon);
    for (int kk = 0; kk < n; ++kk) {
        const double mu = hes.eigenvalues()(pos[static_cast<std::size_t>(kk)]);
        out.nu(kk) = 1.0 / mu;
        const CVec z = hes.eigenvectors().col(pos[static_cast<std::size_t>(kk)]);
        // K x = mu y, K y = -mu x with z = x + iy; block columns are (y, x).
        const Vec x = std::sqrt(2.0) * z.real();
        const Vec y = std::sqrt(2.0) * z.imag();
        o.col(2 * kk) = y;
        o.col(2 * kk + 1) = x;
        dsqrt(2 * kk) = std::sqrt(out.nu(kk));
        dsqrt(2 * kk + 1) = std::sqrt(out.nu(kk));
    }
    out.s = w * o * dsqrt.cwiseInverse().asDiagonal();
    return out;
}

Vec symplectic_eigenvalues(const Mat& v) {
    return williamson(v).nu;
}

} // namespace pntomo
