#include "magwell/wellframe.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "magwell/errors.hpp"

namespace magwell {

double omega(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::Index d = a.size() / 2;
    return b.tail(d).dot(a.head(d)) - a.tail(d).dot(b.head(d));
}

double half_hessian_H(const Eigen::MatrixXd& ginv, const Eigen::MatrixXd& jacA,
                      const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::Index d = a.size() / 2;
    Eigen::VectorXd ra = a.tail(d) - jacA * a.head(d);
    Eigen::VectorXd rb = b.tail(d) - jacA * b.head(d);
    return ra.dot(ginv * rb);
}

namespace {

Eigen::VectorXd lift(const Eigen::MatrixXd& jacA, const Eigen::VectorXd& Q) {
    Eigen::VectorXd v(2 * Q.size());
    v << Q, jacA * Q;
    return v;
}

Eigen::VectorXd cotangent_pair(const Eigen::MatrixXd& jacA, const Eigen::VectorXd& u) {
    Eigen::VectorXd v(2 * u.size());
    v << u, jacA.transpose() * u;
    return v;
}

}  // namespace

FrameData build_frames(const WellReport& well, const FieldSpec& spec) {
    if (!(well.flags.a1 && well.flags.a3))
        throw AssumptionError(well.flags.a1 ? 3 : 1, "frames require a validated well");
    const SkewSpectrum& sp = well.spectrum;
    FrameData fr;
    fr.d = spec.dim;
    fr.s = sp.s;
    fr.k = sp.k;
    const int d = fr.d, s = fr.s, k = fr.k;
    fr.jacA = potential_jacobian(spec, well.q0);
    fr.ginv = metric_at(spec, well.q0).inverse();

    fr.F.resize(2 * d, s);
    fr.Fp.resize(2 * d, s);
    fr.base.resize(d, 2 * s + k);
    for (int j = 0; j < s; ++j) {
        double rb = std::sqrt(sp.betas[j]);
        fr.F.col(j) = cotangent_pair(fr.jacA, sp.U.col(j)) / rb;
        fr.Fp.col(j) = cotangent_pair(fr.jacA, sp.V.col(j)) / rb;
        fr.base.col(j) = sp.U.col(j) / rb;
        fr.base.col(s + j) = sp.V.col(j) / rb;
    }
    for (int i = 0; i < k; ++i) fr.base.col(2 * s + i) = sp.W.col(i);
    fr.dphi.resize(2 * d, 2 * s + k);
    for (int c = 0; c < 2 * s + k; ++c) fr.dphi.col(c) = lift(fr.jacA, fr.base.col(c));

    // g_j: omega(g, E) = 0, omega(g, F) = 0, omega(g, K_i) = delta_ij
    fr.G.resize(2 * d, k);
    if (k > 0) {
        const int rows = 4 * s + k;
        Eigen::MatrixXd C(rows, 2 * d);
        auto omega_row = [&](const Eigen::VectorXd& x) {
            // row r with r . g = omega(g, x) = <x_P, g_Q> - <g_P, x_Q>
            Eigen::RowVectorXd r(2 * d);
            r << x.tail(d).transpose(), -x.head(d).transpose();
            return r;
        };
        int r = 0;
        for (int j = 0; j < 2 * s; ++j) C.row(r++) = omega_row(fr.dphi.col(j));
        for (int j = 0; j < s; ++j) C.row(r++) = omega_row(fr.F.col(j));
        for (int j = 0; j < s; ++j) C.row(r++) = omega_row(fr.Fp.col(j));
        for (int i = 0; i < k; ++i) C.row(r++) = omega_row(fr.dphi.col(2 * s + i));
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(rows, k);
        rhs.bottomRows(k) = Eigen::MatrixXd::Identity(k, k);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(C);
        if (cod.rank() < rows) throw AssumptionError(2, "singular system for the Lagrangian complement");
        fr.G = cod.solve(rhs);
        // make span(g) Lagrangian by adding kernel lifts
        Eigen::MatrixXd Om(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) Om(i, j) = omega(fr.G.col(i), fr.G.col(j));
        Eigen::MatrixXd corr = 0.5 * Om;
        Eigen::MatrixXd Kl = fr.dphi.rightCols(k);
        fr.G += Kl * corr.transpose();
    }
    return fr;
}

CoReduction co_reduce(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(M);
    if (em.eigenvalues().minCoeff() <= 0) throw AssumptionError(1, "M is not positive definite");
    Eigen::MatrixXd root = em.eigenvectors() * em.eigenvalues().cwiseSqrt().asDiagonal() *
                           em.eigenvectors().transpose();
    Eigen::MatrixXd sym = root * K * root;
    sym = 0.5 * (sym + sym.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.eigenvalues().minCoeff() <= 0) throw AssumptionError(1, "field-line Hessian is not positive definite");
    const Eigen::Index k = M.rows();
    CoReduction out;
    out.P.resize(k, k);
    out.nus.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::Index src = k - 1 - j;  // descending
        Eigen::VectorXd x = es.eigenvectors().col(src);
        Eigen::Index at = 0;
        x.cwiseAbs().maxCoeff(&at);
        if (x(at) < 0) x = -x;
        out.P.col(j) = root * x;
        out.nus(j) = std::sqrt(es.eigenvalues()(src));
    }
    return out;
}

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& S) {
    const Eigen::Index s = S.rows() / 2;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * s, 2 * s);
    J.topRightCorner(s, s) = Eigen::MatrixXd::Identity(s, s);
    J.bottomLeftCorner(s, s) = -Eigen::MatrixXd::Identity(s, s);
    Eigen::EigenSolver<Eigen::MatrixXd> es(J * S);
    std::vector<double> im;
    for (Eigen::Index i = 0; i < 2 * s; ++i)
        if (es.eigenvalues()(i).imag() > 0) im.push_back(es.eigenvalues()(i).imag());
    std::sort(im.begin(), im.end(), std::greater<>());
    return im;
}

QuadData hessian_data(const FrameData& fr, const WellReport& well, const FieldSpec& spec) {
    const int s = fr.s, k = fr.k;
    QuadData qd;
    // block check of the Hessian of H in the frame (f, f', g)
    double resid = 0.0;
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            double target = i == j ? std::sqrt(well.spectrum.betas[i] * well.spectrum.betas[j]) : 0.0;
            resid = std::max(resid, std::abs(half_hessian_H(fr.ginv, fr.jacA, fr.F.col(i), fr.F.col(j)) - target));
            resid = std::max(resid, std::abs(half_hessian_H(fr.ginv, fr.jacA, fr.Fp.col(i), fr.Fp.col(j)) - target));
            resid = std::max(resid, std::abs(half_hessian_H(fr.ginv, fr.jacA, fr.F.col(i), fr.Fp.col(j))));
        }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < s; ++j) {
            resid = std::max(resid, std::abs(half_hessian_H(fr.ginv, fr.jacA, fr.G.col(i), fr.F.col(j))));
            resid = std::max(resid, std::abs(half_hessian_H(fr.ginv, fr.jacA, fr.G.col(i), fr.Fp.col(j))));
        }
    qd.block_residual = resid;
    double scale = std::max(1.0, well.spectrum.betas.empty() ? 1.0 : well.spectrum.betas[0]);
    if (resid > 1e-8 * scale) throw AssumptionError(2, "Hessian block structure check failed");

    qd.M0.resize(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) qd.M0(i, j) = half_hessian_H(fr.ginv, fr.jacA, fr.G.col(i), fr.G.col(j));
    qd.M0 = 0.5 * (qd.M0 + qd.M0.transpose());

    // Hessian of b composed with the linear chart; exact at first order since grad b(q0) = 0
    Eigen::MatrixXd Hb = fr.base.transpose() * well.hess_b * fr.base;
    qd.Hw = Hb.topLeftCorner(2 * s, 2 * s);
    qd.cross = Hb.topRightCorner(2 * s, k);
    Eigen::MatrixXd Htt = Hb.bottomRightCorner(k, k);
    qd.Kt = 0.5 * Htt;
    if (k > 0) {
        Eigen::LLT<Eigen::MatrixXd> llt(Htt);
        if (llt.info() != Eigen::Success) throw AssumptionError(1, "field-line Hessian is not positive definite");
        qd.s_jet = -llt.solve(qd.cross.transpose());
        qd.Schur = qd.Hw - qd.cross * llt.solve(qd.cross.transpose());
        if (qd.M0.llt().info() != Eigen::Success) throw AssumptionError(1, "M(0) is not positive definite");
        CoReduction cr = co_reduce(qd.M0, qd.Kt);
        qd.P = cr.P;
        qd.nus.assign(cr.nus.data(), cr.nus.data() + k);
    } else {
        qd.s_jet.resize(0, 2 * s);
        qd.Schur = qd.Hw;
    }
    qd.Schur = 0.5 * (qd.Schur + qd.Schur.transpose());
    if (s > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qd.Schur);
        if (es.eigenvalues().minCoeff() <= 0) throw AssumptionError(1, "reduced base Hessian is not positive definite");
        qd.mus = symplectic_eigenvalues(0.5 * qd.Schur);
    }
    (void)spec;
    return qd;
}

std::vector<double> e_ladder(const std::vector<double>& mus, int count) {
    std::vector<double> out;
    if (count <= 0) return out;
    const int s = static_cast<int>(mus.size());
    if (s == 0) return std::vector<double>(count, 0.0);
    using Item = std::pair<double, std::vector<int>>;
    auto value = [&](const std::vector<int>& n) {
        double v = 0.0;
        for (int i = 0; i < s; ++i) v += mus[i] * (2 * n[i] - 1);
        return v;
    };
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    std::set<std::vector<int>> seen;
    std::vector<int> start(s, 1);
    heap.emplace(value(start), start);
    seen.insert(start);
    while (static_cast<int>(out.size()) < count) {
        auto [v, n] = heap.top();
        heap.pop();
        out.push_back(v);
        for (int i = 0; i < s; ++i) {
            auto m = n;
            ++m[i];
            if (seen.insert(m).second) heap.emplace(value(m), m);
        }
    }
    return out;
}

ExpansionPrediction predict_expansion(const WellReport& well, const QuadData& quad, int levels) {
    ExpansionPrediction p;
    p.b0 = well.b0;
    for (double nu : quad.nus) p.nu0 += nu;
    p.E = e_ladder(quad.mus, levels);
    for (std::size_t j = 1; j < p.E.size(); ++j) p.spacing.push_back(p.E[j] - p.E[j - 1]);
    return p;
}

WellAnalysis analyze_well(const FieldSpec& spec) {
    WellAnalysis wa;
    wa.well = find_well(spec);
    wa.frames = build_frames(wa.well, spec);
    wa.quad = hessian_data(wa.frames, wa.well, spec);
    const auto& nus = wa.quad.nus;
    wa.well.flags.a4 = true;
    for (std::size_t i = 1; i < nus.size(); ++i)
        if ((nus[i - 1] - nus[i]) / nus[i - 1] <= spec.options.beta_gap_tol) wa.well.flags.a4 = false;
    if (!wa.well.flags.a4) throw AssumptionError(4, "field-line frequencies coincide at the well");
    wa.well.r2 = resonance_order(nus, spec.options.resonance_cap, spec.options.resonance_tol);
    return wa;
}

}  // namespace magwell
