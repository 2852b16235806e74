#include "magwell/lanczos.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace magwell {

namespace {

Eigen::VectorXcd random_unit(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
    return v / v.norm();
}

// Two passes of classical Gram-Schmidt against the first `cols` columns of V.
Eigen::VectorXcd orthogonalize(const Eigen::MatrixXcd& V, Eigen::Index cols, Eigen::VectorXcd& w) {
    Eigen::VectorXcd h = V.leftCols(cols).adjoint() * w;
    w.noalias() -= V.leftCols(cols) * h;
    Eigen::VectorXcd h2 = V.leftCols(cols).adjoint() * w;
    w.noalias() -= V.leftCols(cols) * h2;
    return h + h2;
}

}  // namespace

LanczosResult lowest_eigenpairs(const LinearOp& op, Eigen::Index n, const LanczosOptions& opt) {
    if (opt.nev < 1 || opt.nev > n) throw std::invalid_argument("invalid number of eigenpairs");
    const int nev = opt.nev;
    int m = opt.ncv > 0 ? opt.ncv : std::max(2 * nev + 20, 40);
    m = static_cast<int>(std::min<Eigen::Index>(m, n));
    std::mt19937_64 rng(opt.seed);

    LanczosResult res;
    Eigen::MatrixXcd V(n, m + 1);
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(m, m);
    V.col(0) = random_unit(n, rng);
    Eigen::VectorXcd w(n);
    int j0 = 0;

    while (true) {
        double beta = 0.0;
        for (int j = j0; j < m; ++j) {
            op(V.col(j).data(), w.data());
            ++res.matvecs;
            Eigen::VectorXcd h = orthogonalize(V, j + 1, w);
            T.col(j).head(j + 1) = h;
            beta = w.norm();
            if (beta < 1e-14 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
                // invariant subspace: continue with a fresh orthogonal direction
                Eigen::VectorXcd r = random_unit(n, rng);
                orthogonalize(V, j + 1, r);
                V.col(j + 1) = r / r.norm();
                beta = 0.0;
            } else {
                V.col(j + 1) = w / beta;
            }
            if (j + 1 < m) T(j + 1, j) = beta;
        }
        Eigen::MatrixXcd Ts = 0.5 * (T + T.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Ts);
        const Eigen::VectorXd& theta = es.eigenvalues();
        const Eigen::MatrixXcd& Y = es.eigenvectors();
        bool done = true;
        for (int i = 0; i < nev; ++i)
            if (beta * std::abs(Y(m - 1, i)) > 0.5 * opt.tol) done = false;
        const bool exhausted = res.matvecs >= opt.max_matvecs || m == n;
        if (done || exhausted) {
            res.vectors = V.leftCols(m) * Y.leftCols(nev);
            Eigen::VectorXcd hx(n);
            res.converged = true;
            for (int i = 0; i < nev; ++i) {
                Eigen::VectorXcd x = res.vectors.col(i);
                x /= x.norm();
                res.vectors.col(i) = x;
                op(x.data(), hx.data());
                ++res.matvecs;
                double lam = (x.adjoint() * hx)(0).real();
                double r = (hx - lam * x).norm();
                res.values.push_back(lam);
                res.residuals.push_back(r);
                if (r > opt.tol) res.converged = false;
            }
            return res;
        }
        const int keep = std::min(m - 2, nev + (m - nev) / 2);
        Eigen::MatrixXcd kept = V.leftCols(m) * Y.leftCols(keep);
        V.leftCols(keep) = kept;
        V.col(keep) = V.col(m);
        T.setZero();
        for (int i = 0; i < keep; ++i) {
            T(i, i) = theta(i);
            T(keep, i) = beta * Y(m - 1, i);
        }
        j0 = keep;
        ++res.restarts;
    }
}

}  // namespace magwell
