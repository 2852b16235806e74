#include "magwell/maggeom.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "magwell/errors.hpp"

namespace magwell {

FieldSpec make_field(int dim, const std::vector<std::string>& potential,
                     const std::vector<std::vector<std::string>>& metric, std::vector<double> box,
                     std::vector<double> guess) {
    if (dim < 2) throw std::invalid_argument("dimension must be at least 2");
    if (static_cast<int>(potential.size()) != dim)
        throw std::invalid_argument("potential needs one expression per coordinate");
    FieldSpec f;
    f.dim = dim;
    auto names = coordinate_names(dim);
    for (const auto& e : potential) f.potential.push_back(parse_poly(e, names));
    f.metric.assign(dim, std::vector<Poly>(dim, Poly(dim)));
    if (metric.empty()) {
        for (int i = 0; i < dim; ++i) f.metric[i][i] = Poly::constant(dim, 1);
    } else {
        if (static_cast<int>(metric.size()) != dim)
            throw std::invalid_argument("metric must be a d x d matrix");
        for (int i = 0; i < dim; ++i) {
            if (static_cast<int>(metric[i].size()) != dim)
                throw std::invalid_argument("metric must be a d x d matrix");
            for (int j = 0; j < dim; ++j) f.metric[i][j] = parse_poly(metric[i][j], names);
        }
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < i; ++j)
                if (!(f.metric[i][j] == f.metric[j][i]))
                    throw std::invalid_argument("metric is not symmetric");
        f.flat = true;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                Poly id = i == j ? Poly::constant(dim, 1) : Poly(dim);
                if (!(f.metric[i][j] == id)) f.flat = false;
            }
    }
    f.box = box.empty() ? std::vector<double>(dim, 1.0) : std::move(box);
    f.well_guess = guess.empty() ? std::vector<double>(dim, 0.0) : std::move(guess);
    if (static_cast<int>(f.box.size()) != dim || static_cast<int>(f.well_guess.size()) != dim)
        throw std::invalid_argument("box and well_guess need d entries");
    return f;
}

FieldSpec gauge_shift(const FieldSpec& spec, const Poly& chi) {
    FieldSpec out = spec;
    for (int i = 0; i < spec.dim; ++i) out.potential[i] += chi.diff(i);
    return out;
}

TwoFormB two_form(const FieldSpec& spec) {
    TwoFormB b;
    b.dim = spec.dim;
    b.B.assign(spec.dim, std::vector<Poly>(spec.dim, Poly(spec.dim)));
    for (int i = 0; i < spec.dim; ++i)
        for (int j = 0; j < spec.dim; ++j)
            b.B[i][j] = spec.potential[j].diff(i) - spec.potential[i].diff(j);
    return b;
}

bool is_closed(const TwoFormB& b) {
    for (int i = 0; i < b.dim; ++i)
        for (int j = 0; j < b.dim; ++j) {
            if (!(b.B[i][j] == -b.B[j][i])) return false;
            for (int k = 0; k < b.dim; ++k)
                if (!(b.B[i][j].diff(k) + b.B[j][k].diff(i) + b.B[k][i].diff(j)).is_zero()) return false;
        }
    return true;
}

Eigen::MatrixXd metric_at(const FieldSpec& spec, const Eigen::VectorXd& q) {
    int d = spec.dim;
    if (spec.flat) return Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = spec.metric[i][j].eval(q.data());
    return g;
}

Eigen::MatrixXd bform_at(const TwoFormB& b, const Eigen::VectorXd& q) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(b.dim, b.dim);
    for (int i = 0; i < b.dim; ++i)
        for (int j = i + 1; j < b.dim; ++j) {
            m(i, j) = b.B[i][j].eval(q.data());
            m(j, i) = -m(i, j);
        }
    return m;
}

Eigen::MatrixXd potential_jacobian(const FieldSpec& spec, const Eigen::VectorXd& q) {
    Eigen::MatrixXd J(spec.dim, spec.dim);
    for (int k = 0; k < spec.dim; ++k)
        for (int j = 0; j < spec.dim; ++j) J(k, j) = spec.potential[k].diff(j).eval(q.data());
    return J;
}

Eigen::VectorXd potential_at(const FieldSpec& spec, const Eigen::VectorXd& q) {
    Eigen::VectorXd a(spec.dim);
    for (int k = 0; k < spec.dim; ++k) a(k) = spec.potential[k].eval(q.data());
    return a;
}

namespace {

void require_spd(const Eigen::MatrixXd& g) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw AssumptionError(1, "metric is not positive definite");
}

struct SqrtPair {
    Eigen::MatrixXd half, inv_half;
};

SqrtPair metric_roots(const Eigen::MatrixXd& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    if (es.eigenvalues().minCoeff() <= 0.0) throw AssumptionError(1, "metric is not positive definite");
    Eigen::VectorXd r = es.eigenvalues().cwiseSqrt();
    SqrtPair p;
    p.half = es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose();
    p.inv_half = es.eigenvectors() * r.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return p;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    if (v(at) < 0) v = -v;
}

}  // namespace

Eigen::MatrixXd bmatrix_at(const FieldSpec& spec, const TwoFormB& b, const Eigen::VectorXd& q) {
    Eigen::MatrixXd g = metric_at(spec, q);
    require_spd(g);
    return g.llt().solve(bform_at(b, q));
}

SkewSpectrum skew_eigen(const Eigen::MatrixXd& bmat, const Eigen::MatrixXd& g, double rank_tol_rel) {
    const int d = static_cast<int>(bmat.rows());
    SqrtPair roots = metric_roots(g);
    Eigen::MatrixXd S = roots.half * bmat * roots.inv_half;
    S = 0.5 * (S - S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-S * S);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);  // ascending
    Eigen::MatrixXd vec = es.eigenvectors();

    double norm = std::sqrt(lam.maxCoeff());
    double tol = rank_tol_rel * std::max(norm, 1e-300);
    SkewSpectrum out;
    out.q = Eigen::VectorXd::Zero(d);

    std::vector<int> kernel, active;
    for (int i = 0; i < d; ++i) {
        // |S v| is accurate to eps |S|; sqrt of the eigenvalue of -S^2 would only give sqrt(eps)
        double beta = (S * vec.col(i)).norm();
        if (norm == 0.0 || beta < tol / 10) {
            kernel.push_back(i);
        } else if (beta <= tol * 10) {
            throw AssumptionError(2, "rank ambiguity: singular value " + std::to_string(beta) +
                                         " within a decade of the rank tolerance");
        } else {
            active.push_back(i);
        }
    }
    if (active.size() % 2 != 0) throw AssumptionError(2, "odd number of nonzero singular values");

    // Active eigenvalues come in equal pairs; extract planes from the top down, deflating
    // the working subspace after each pair so repeated values still yield a valid frame.
    Eigen::MatrixXd Ut(d, 0), Vt(d, 0);
    std::vector<double> betas;
    std::reverse(active.begin(), active.end());
    std::size_t pos = 0;
    while (pos < active.size()) {
        std::size_t end = pos + 1;
        double top = lam(active[pos]);
        while (end < active.size() && std::abs(lam(active[end]) - top) <= 1e-9 * top) ++end;
        int m = static_cast<int>(end - pos);
        if (m % 2 != 0) {
            // split a run of odd length at the end to keep the pairing
            ++end;
            m = static_cast<int>(end - pos);
        }
        Eigen::MatrixXd basis(d, m);
        for (int c = 0; c < m; ++c) basis.col(c) = vec.col(active[pos + c]);
        for (int pair = 0; pair < m / 2; ++pair) {
            Eigen::MatrixXd proj = basis * basis.transpose();
            Eigen::Index best = 0;
            proj.colwise().norm().maxCoeff(&best);
            Eigen::VectorXd u = proj.col(best).normalized();
            double beta = std::sqrt(std::max(u.dot(-S * S * u), 0.0));
            Eigen::VectorXd v = -(S * u) / beta;
            v.normalize();
            Ut.conservativeResize(d, Ut.cols() + 1);
            Vt.conservativeResize(d, Vt.cols() + 1);
            Ut.col(Ut.cols() - 1) = u;
            Vt.col(Vt.cols() - 1) = v;
            betas.push_back(beta);
            Eigen::MatrixXd keep = basis - u * (u.transpose() * basis) - v * (v.transpose() * basis);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(keep, Eigen::ComputeThinU);
            int r = m - 2 * (pair + 1);
            basis = svd.matrixU().leftCols(r);
        }
        pos = end;
    }

    out.s = static_cast<int>(betas.size());
    out.k = static_cast<int>(kernel.size());
    std::vector<int> order(out.s);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return betas[a] > betas[b]; });
    out.U.resize(d, out.s);
    out.V.resize(d, out.s);
    for (int j = 0; j < out.s; ++j) {
        Eigen::VectorXd u = roots.inv_half * Ut.col(order[j]);
        Eigen::VectorXd v = roots.inv_half * Vt.col(order[j]);
        Eigen::Index at = 0;
        u.cwiseAbs().maxCoeff(&at);
        if (u(at) < 0) {
            u = -u;
            v = -v;
        }
        out.U.col(j) = u;
        out.V.col(j) = v;
        out.betas.push_back(betas[order[j]]);
    }
    out.W.resize(d, out.k);
    for (int i = 0; i < out.k; ++i) {
        Eigen::VectorXd w = roots.inv_half * vec.col(kernel[i]);
        fix_sign(w);
        out.W.col(i) = w;
    }
    return out;
}

SkewSpectrum spectrum_at(const FieldSpec& spec, const TwoFormB& b, const Eigen::VectorXd& q) {
    SkewSpectrum s = skew_eigen(bmatrix_at(spec, b, q), metric_at(spec, q), spec.options.rank_tol);
    s.q = q;
    return s;
}

double intensity(const FieldSpec& spec, const TwoFormB& b, const Eigen::VectorXd& q) {
    Eigen::MatrixXd g = metric_at(spec, q);
    Eigen::MatrixXd bf = bform_at(b, q);
    if (spec.flat) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(bf);
        return 0.5 * svd.singularValues().sum();
    }
    SqrtPair roots = metric_roots(g);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(roots.inv_half * bf * roots.inv_half);
    return 0.5 * svd.singularValues().sum();
}

double intensity(const FieldSpec& spec, const Eigen::VectorXd& q) {
    return intensity(spec, two_form(spec), q);
}

void fd_gradient_hessian(const FieldSpec& spec, const TwoFormB& b, const Eigen::VectorXd& q,
                         double& value, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
    const int d = spec.dim;
    const double h = 1e-4 * (1.0 + q.norm());
    auto f = [&](const Eigen::VectorXd& x) { return intensity(spec, b, x); };
    value = f(q);
    grad.resize(d);
    hess.resize(d, d);
    std::vector<double> fp(d), fm(d);
    for (int i = 0; i < d; ++i) {
        Eigen::VectorXd x = q;
        x(i) += h;
        fp[i] = f(x);
        x(i) = q(i) - h;
        fm[i] = f(x);
        grad(i) = (fp[i] - fm[i]) / (2 * h);
        hess(i, i) = (fp[i] - 2 * value + fm[i]) / (h * h);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Eigen::VectorXd x = q;
            double acc = 0.0;
            for (int si : {1, -1})
                for (int sj : {1, -1}) {
                    x(i) = q(i) + si * h;
                    x(j) = q(j) + sj * h;
                    acc += si * sj * f(x);
                }
            hess(i, j) = hess(j, i) = acc / (4 * h * h);
        }
}

namespace {

double min_relative_gap(const std::vector<double>& betas) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < betas.size(); ++i)
        gap = std::min(gap, (betas[i - 1] - betas[i]) / betas[i - 1]);
    return gap;
}

void sample_box(const FieldSpec& spec, const TwoFormB& b, WellReport& rep) {
    const int d = spec.dim;
    int per_axis = std::max(3, static_cast<int>(std::floor(std::pow(4000.0, 1.0 / d))));
    if (per_axis % 2 == 0) ++per_axis;
    std::vector<int> idx(d, 0);
    bool below = false, rank_ok = true;
    double boundary_min = std::numeric_limits<double>::infinity();
    const int rank = 2 * rep.spectrum.s;
    for (;;) {
        Eigen::VectorXd q(d);
        bool on_boundary = false;
        for (int i = 0; i < d; ++i) {
            q(i) = -spec.box[i] + 2 * spec.box[i] * idx[i] / (per_axis - 1);
            if (idx[i] == 0 || idx[i] == per_axis - 1) on_boundary = true;
        }
        double v = intensity(spec, b, q);
        if (v < rep.b0 - 1e-9 * std::max(1.0, rep.b0)) below = true;
        if (on_boundary) boundary_min = std::min(boundary_min, v);
        try {
            SkewSpectrum sp = spectrum_at(spec, b, q);
            if (2 * sp.s != rank) rank_ok = false;
        } catch (const AssumptionError&) {
            rank_ok = false;
        }
        int i = 0;
        while (i < d && ++idx[i] == per_axis) idx[i++] = 0;
        if (i == d) break;
    }
    rep.flags.a1_sampled = !below && boundary_min > rep.b0;
    if (below) rep.flags.notes.push_back("sampled intensity drops below b0 inside the box");
    if (!(boundary_min > rep.b0)) rep.flags.notes.push_back("intensity on the box boundary does not exceed b0");
    rep.flags.a2 = rank_ok;
    if (!rank_ok) rep.flags.notes.push_back("rank of the field changes on the sampled box");
}

}  // namespace

WellReport find_well(const FieldSpec& spec) {
    Eigen::VectorXd g(spec.dim);
    for (int i = 0; i < spec.dim; ++i) g(i) = spec.well_guess[i];
    return find_well(spec, g);
}

WellReport find_well(const FieldSpec& spec, const Eigen::VectorXd& guess) {
    const TwoFormB b = two_form(spec);
    const int d = spec.dim;
    WellReport rep;
    Eigen::VectorXd q = guess;
    double val = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    bool converged = false;
    int it = 0;
    for (; it < spec.options.max_iter; ++it) {
        fd_gradient_hessian(spec, b, q, val, grad, hess);
        // guard the iterates against frequency collisions, where b is not smooth
        SkewSpectrum sp = spectrum_at(spec, b, q);
        if (sp.s > 1 && min_relative_gap(sp.betas) < spec.options.beta_gap_tol)
            throw AssumptionError(3, "frequencies collide along the minimization path");
        if (grad.norm() < 1e-9 * std::max(1.0, val)) {
            converged = true;
            break;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
        Eigen::VectorXd step;
        double scale = std::max(1e-12, es.eigenvalues().cwiseAbs().maxCoeff());
        if (es.eigenvalues().minCoeff() > 1e-8 * scale)
            step = -es.eigenvectors() *
                   (es.eigenvectors().transpose() * grad).cwiseQuotient(es.eigenvalues());
        else
            step = -grad / scale;
        double t = 1.0;
        for (int ls = 0; ls < 40; ++ls) {
            double trial = intensity(spec, b, q + t * step);
            if (trial <= val + 1e-4 * t * grad.dot(step) || t < 1e-10) break;
            t *= 0.5;
        }
        if (!(step.norm() * t > 0) && grad.norm() > 0) break;
        q += t * step;
    }
    if (!converged) throw ConvergenceError("well search did not converge in " + std::to_string(it) +
                                           " iterations (|grad b| = " + std::to_string(grad.norm()) + ")");
    rep.q0 = q;
    rep.b0 = val;
    rep.grad_norm = grad.norm();
    rep.hess_b = 0.5 * (hess + hess.transpose());
    rep.iterations = it;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.hess_b);
    double hscale = std::max(1.0, rep.hess_b.cwiseAbs().maxCoeff());
    if (es.eigenvalues().cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, rep.b0))
        throw AssumptionError(1, "degenerate well: Hessian of the intensity vanishes");
    if (es.eigenvalues().minCoeff() < -1e-6 * hscale)
        throw AssumptionError(1, "degenerate well: Hessian of the intensity is indefinite");
    if (es.eigenvalues().minCoeff() <= 1e-6 * hscale)
        throw AssumptionError(1, "degenerate well: Hessian of the intensity is singular");
    rep.flags.a1 = true;
    rep.spectrum = spectrum_at(spec, b, q);
    rep.flags.a3 = rep.spectrum.s <= 1 || min_relative_gap(rep.spectrum.betas) > spec.options.beta_gap_tol;
    if (!rep.flags.a3) throw AssumptionError(3, "frequencies coincide at the well");
    // sampled neighbourhood for collisions
    for (int i = 0; i < d; ++i)
        for (double sgn : {-1.0, 1.0}) {
            Eigen::VectorXd x = q;
            x(i) += sgn * 1e-2 * (1.0 + spec.box[i]);
            SkewSpectrum sp = spectrum_at(spec, b, x);
            if (sp.s > 1 && min_relative_gap(sp.betas) < spec.options.beta_gap_tol)
                throw AssumptionError(3, "frequencies collide near the well");
        }
    sample_box(spec, b, rep);
    rep.r1 = resonance_order(rep.spectrum.betas, spec.options.resonance_cap, spec.options.resonance_tol);
    return rep;
}

int resonance_order(const std::vector<double>& values, int cap, double tol) {
    const int m = static_cast<int>(values.size());
    if (m == 0) return cap;
    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, std::abs(v));
    std::vector<int> alpha(m, 0);
    // enumerate integer vectors of l1 norm exactly n, recursively
    std::function<bool(int, int, double)> hit = [&](int i, int left, double acc) -> bool {
        if (i == m - 1) {
            for (int s : {1, -1}) {
                if (left == 0 && s == -1) continue;
                double v = acc + s * left * values[i];
                if (std::abs(v) <= tol * vmax) return true;
            }
            return false;
        }
        for (int a = -left; a <= left; ++a)
            if (hit(i + 1, left - std::abs(a), acc + a * values[i])) return true;
        return false;
    };
    for (int n = 1; n < cap; ++n)
        if (hit(0, n, 0.0)) return n;
    return cap;
}

}  // namespace magwell
