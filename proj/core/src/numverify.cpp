#include "magwell/numverify.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/SparseCholesky>

#include "magwell/errors.hpp"
#include "magwell/lanczos.hpp"

namespace magwell {

namespace {

using Triplet = Eigen::Triplet<cplx>;

struct GaussRule {
    std::vector<double> x, w;  // on [0, 1]
};

GaussRule gauss_legendre(int p) {
    GaussRule g;
    for (int i = 0; i < p; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (p + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= p; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (p == 1) p0 = 1.0;
            dp = p * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        g.x.push_back(0.5 * (1.0 - z));
        g.w.push_back(1.0 / ((1.0 - z * z) * dp * dp));
    }
    return g;
}

class Grid {
public:
    Grid(const std::vector<int>& n, const std::vector<double>& lo, const std::vector<double>& delta)
        : n_(n), lo_(lo), delta_(delta), d_(static_cast<int>(n.size())), stride_(n.size()) {
        Eigen::Index s = 1;
        for (int a = d_ - 1; a >= 0; --a) {
            stride_[a] = s;
            s *= n_[a];
        }
        size_ = s;
    }
    Eigen::Index size() const { return size_; }
    // Extended multi-index (entries in [-1, n_a]) to a linear index, or -1 on the boundary.
    Eigen::Index index(const std::vector<int>& i) const {
        Eigen::Index r = 0;
        for (int a = 0; a < d_; ++a) {
            if (i[a] < 0 || i[a] >= n_[a]) return -1;
            r += i[a] * stride_[a];
        }
        return r;
    }
    double coord(int a, double i) const { return lo_[a] + (i + 1.0) * delta_[a]; }
    void point(const std::vector<int>& i, double* x) const {
        for (int a = 0; a < d_; ++a) x[a] = coord(a, i[a]);
    }
    // Visits all multi-indices with i_a in [lo_a, hi_a).
    template <class F>
    void for_each(const std::vector<int>& lo, const std::vector<int>& hi, F&& f) const {
        std::vector<int> i = lo;
        for (int a = 0; a < d_; ++a)
            if (lo[a] >= hi[a]) return;
        while (true) {
            f(i);
            int a = d_ - 1;
            while (a >= 0 && ++i[a] >= hi[a]) {
                i[a] = lo[a];
                --a;
            }
            if (a < 0) return;
        }
    }

private:
    std::vector<int> n_;
    std::vector<double> lo_, delta_;
    int d_;
    std::vector<Eigen::Index> stride_;
    Eigen::Index size_ = 0;
};

struct Assembler {
    const FieldSpec& spec;
    const Grid& grid;
    const std::vector<double>& delta;
    double hbar;
    std::vector<GaussRule> rules;  // per axis, exact for A_a restricted to the axis

    // exp(-(i/hbar) int A_a along the edge from node i to node i + e_a)
    cplx link(const std::vector<int>& i, int a) const {
        const int d = spec.dim;
        std::vector<double> x(d);
        grid.point(i, x.data());
        const double x0 = x[a];
        double integral = 0.0;
        const GaussRule& g = rules[a];
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            x[a] = x0 + g.x[q] * delta[a];
            integral += g.w[q] * spec.potential[a].eval(x.data());
        }
        integral *= delta[a];
        return std::polar(1.0, -integral / hbar);
    }

    // (g^{-1} sqrt|g|, sqrt|g|) at a point
    std::pair<Eigen::MatrixXd, double> metric(const double* x) const {
        Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(x, spec.dim);
        Eigen::MatrixXd g = metric_at(spec, q);
        Eigen::LLT<Eigen::MatrixXd> llt(g);
        if (llt.info() != Eigen::Success) throw std::invalid_argument("metric is not positive definite inside the box");
        double sq = std::sqrt(g.determinant());
        return {llt.solve(Eigen::MatrixXd::Identity(spec.dim, spec.dim)) * sq, sq};
    }
};

}  // namespace

void GridOperator::apply(const cplx* x, cplx* y) const {
    Eigen::Map<const Eigen::VectorXcd> xv(x, H.cols());
    Eigen::Map<Eigen::VectorXcd> yv(y, H.rows());
    yv.noalias() = H * xv;
}

double GridOperator::hermitian_defect() const {
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> D = H - Eigen::SparseMatrix<cplx, Eigen::RowMajor>(H.adjoint());
    double m = 0.0;
    for (Eigen::Index r = 0; r < D.outerSize(); ++r)
        for (decltype(D)::InnerIterator it(D, r); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

std::string GridOperator::triplets() const {
    std::ostringstream os;
    os << "% " << H.rows() << " " << H.cols() << " " << H.nonZeros() << "\n" << std::setprecision(17);
    for (Eigen::Index r = 0; r < H.outerSize(); ++r)
        for (decltype(H)::InnerIterator it(H, r); it; ++it)
            os << it.row() << " " << it.col() << " " << it.value().real() << " " << it.value().imag() << "\n";
    return os.str();
}

std::size_t grid_memory_estimate(const std::vector<int>& n, int basis_vectors) {
    const std::size_t d = n.size();
    std::size_t N = 1;
    for (int v : n) N *= static_cast<std::size_t>(v);
    const std::size_t per_row = 1 + 2 * d + 4 * d * (d - 1);
    // matrix (value + column index), triplet buffer during assembly, Krylov basis
    return N * (per_row * (sizeof(cplx) + sizeof(int) + sizeof(Triplet)) + basis_vectors * sizeof(cplx));
}

GridOperator build_grid_operator(const FieldSpec& spec, const GridSetup& setup, std::size_t memory_limit) {
    const int d = spec.dim;
    if (static_cast<int>(setup.n.size()) != d || static_cast<int>(setup.half_width.size()) != d)
        throw std::invalid_argument("grid setup does not match the dimension");
    for (int v : setup.n)
        if (v < 16) throw std::invalid_argument("at least 16 interior points per axis are required");
    if (!(setup.hbar > 0)) throw std::invalid_argument("hbar must be positive");
    const std::size_t need = grid_memory_estimate(setup.n, 60);
    if (need > memory_limit)
        throw std::runtime_error("grid needs about " + std::to_string(need >> 20) + " MiB, above the limit of " +
                                 std::to_string(memory_limit >> 20) + " MiB");

    GridOperator op;
    op.dim = d;
    op.n = setup.n;
    op.hbar = setup.hbar;
    op.flat = spec.flat;
    std::vector<double> center = setup.center.empty() ? std::vector<double>(d, 0.0) : setup.center;
    for (int a = 0; a < d; ++a) {
        op.lo.push_back(center[a] - setup.half_width[a]);
        op.delta.push_back(2.0 * setup.half_width[a] / (setup.n[a] + 1));
    }
    Grid grid(op.n, op.lo, op.delta);
    Assembler as{spec, grid, op.delta, op.hbar, {}};
    for (int a = 0; a < d; ++a) {
        int deg = 0;
        for (const auto& [e, c] : spec.potential[a].terms()) deg = std::max(deg, e[a]);
        as.rules.push_back(gauss_legendre(deg / 2 + 1));
    }

    const double hb2 = op.hbar * op.hbar;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(grid.size()) * (1 + 2 * d + (spec.flat ? 0 : 4 * d * (d - 1))));
    Eigen::VectorXd mass = Eigen::VectorXd::Ones(grid.size());
    std::vector<double> x(d);

    if (!spec.flat) {
        grid.for_each(std::vector<int>(d, 0), op.n, [&](const std::vector<int>& i) {
            grid.point(i, x.data());
            mass(grid.index(i)) = as.metric(x.data()).second;
        });
    }

    // Edges: weight * hbar^2/delta_a^2 * |U psi(i+e_a) - psi(i)|^2
    for (int a = 0; a < d; ++a) {
        std::vector<int> lo(d, 0), hi = op.n;
        lo[a] = -1;
        grid.for_each(lo, hi, [&](const std::vector<int>& i) {
            std::vector<int> j = i;
            ++j[a];
            const Eigen::Index p = grid.index(i), q = grid.index(j);
            double w = 1.0;
            if (!spec.flat) {
                grid.point(i, x.data());
                x[a] += 0.5 * op.delta[a];
                w = as.metric(x.data()).first(a, a);
            }
            const double c = w * hb2 / (op.delta[a] * op.delta[a]);
            const cplx U = as.link(i, a);
            if (p >= 0) trip.emplace_back(p, p, c);
            if (q >= 0) trip.emplace_back(q, q, c);
            if (p >= 0 && q >= 0) {
                trip.emplace_back(p, q, -c * U);
                trip.emplace_back(q, p, -c * std::conj(U));
            }
        });
    }

    // Cells: mixed terms g^{ab} 2 Re(conj(D_a) D_b), differences transported to the lower corner
    if (!spec.flat) {
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b) {
                std::vector<int> lo(d, 0), hi = op.n;
                lo[a] = lo[b] = -1;
                grid.for_each(lo, hi, [&](const std::vector<int>& c) {
                    grid.point(c, x.data());
                    x[a] += 0.5 * op.delta[a];
                    x[b] += 0.5 * op.delta[b];
                    const double w = as.metric(x.data()).first(a, b);
                    if (w == 0.0) return;
                    std::vector<int> ca = c, cb = c, cab = c;
                    ++ca[a];
                    ++cb[b];
                    ++cab[a];
                    ++cab[b];
                    const Eigen::Index n0 = grid.index(c), na = grid.index(ca), nb = grid.index(cb),
                                       nab = grid.index(cab);
                    const cplx Ua = as.link(c, a), Ub = as.link(c, b);
                    const cplx Ua_b = as.link(cb, a), Ub_a = as.link(ca, b);
                    // coefficients on (c, c+e_a, c+e_b, c+e_a+e_b)
                    const std::array<Eigen::Index, 4> node{n0, na, nb, nab};
                    const std::array<cplx, 4> alpha{-0.5, 0.5 * Ua, -0.5 * Ub, 0.5 * Ub * Ua_b};
                    const std::array<cplx, 4> beta{-0.5, -0.5 * Ua, 0.5 * Ub, 0.5 * Ua * Ub_a};
                    const double f = w * hb2 / (op.delta[a] * op.delta[b]);
                    for (int m = 0; m < 4; ++m) {
                        if (node[m] < 0) continue;
                        for (int l = 0; l < 4; ++l) {
                            if (node[l] < 0) continue;
                            cplx v = f * (std::conj(alpha[m]) * beta[l] + std::conj(beta[m]) * alpha[l]);
                            if (v != cplx(0.0)) trip.emplace_back(node[m], node[l], v);
                        }
                    }
                });
            }
    }

    Eigen::SparseMatrix<cplx, Eigen::RowMajor> K(grid.size(), grid.size());
    K.setFromTriplets(trip.begin(), trip.end());
    trip.clear();
    trip.shrink_to_fit();
    if (!spec.flat) {
        Eigen::VectorXd s = mass.cwiseSqrt().cwiseInverse();
        for (Eigen::Index r = 0; r < K.outerSize(); ++r)
            for (decltype(K)::InnerIterator it(K, r); it; ++it) it.valueRef() *= s(it.row()) * s(it.col());
    }
    op.H = std::move(K);
    op.H.makeCompressed();
    return op;
}

std::vector<EigRow> lowest_eigs(const GridOperator& op, int m, const EigOptions& opt) {
    const Eigen::Index n = op.size();
    if (m < 1 || m >= n / 4) throw std::invalid_argument("requested level count is not small against the grid");
    LanczosOptions lo;
    lo.nev = m;
    lo.tol = opt.tol;
    lo.seed = opt.seed;
    lo.max_matvecs = opt.max_matvecs;
    lo.ncv = std::max(opt.ncv, 2 * m + 8);

    bool invert = opt.mode == EigMode::ShiftInvert || (opt.mode == EigMode::Auto && op.dim <= 2);
    std::vector<double> values;
    Eigen::MatrixXcd vectors;
    if (invert) {
        // H is positive definite under Dirichlet conditions; iterate on -H^{-1} so the wanted end is lowest
        Eigen::SparseMatrix<cplx> A = op.H;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<cplx>> ldlt(A);
        if (ldlt.info() != Eigen::Success) {
            invert = false;
        } else {
            double hnorm = 0.0;
            for (Eigen::Index r = 0; r < op.H.outerSize(); ++r) {
                double row = 0.0;
                for (decltype(op.H)::InnerIterator it(op.H, r); it; ++it) row += std::abs(it.value());
                hnorm = std::max(hnorm, row);
            }
            // a residual eps on H^{-1} maps to at most |lambda| ||H|| eps on H
            lo.tol = opt.tol / std::max(1.0, hnorm) * 1e-2;
            LanczosResult r = lowest_eigenpairs(
                [&](const cplx* in, cplx* out) {
                    Eigen::Map<Eigen::VectorXcd>(out, n) = -ldlt.solve(Eigen::Map<const Eigen::VectorXcd>(in, n));
                },
                n, lo);
            vectors = r.vectors;
        }
    }
    if (!invert) {
        LanczosResult r = lowest_eigenpairs([&](const cplx* in, cplx* out) { op.apply(in, out); }, n, lo);
        vectors = r.vectors;
    }

    double box = 0.0;
    for (int a = 0; a < op.dim; ++a) box = std::max(box, 0.5 * op.delta[a] * (op.n[a] + 1));
    std::vector<EigRow> rows;
    Eigen::VectorXcd hx(n);
    bool failed = false;
    std::ostringstream msg;
    msg << "eigen solver did not converge; best residuals:";
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXcd x = vectors.col(j).normalized();
        op.apply(x.data(), hx.data());
        EigRow row;
        row.hbar = op.hbar;
        row.eigenvalue = x.dot(hx).real();
        row.residual = (hx - row.eigenvalue * x).norm();
        row.n = op.n;
        row.box = box;
        msg << " " << row.residual;
        if (row.residual > opt.tol) {
            if (row.residual <= opt.cluster_rel * std::abs(row.eigenvalue))
                row.note = "cluster";
            else
                failed = true;
        }
        rows.push_back(row);
    }
    if (failed) throw ConvergenceError(msg.str());
    std::sort(rows.begin(), rows.end(), [](const EigRow& a, const EigRow& b) { return a.eigenvalue < b.eigenvalue; });
    for (int j = 0; j < m; ++j) rows[j].level = j + 1;
    return rows;
}

std::vector<double> localisation_lengths(const WellAnalysis& wa, double hbar) {
    const FrameData& fr = wa.frames;
    const double b0 = wa.well.b0;
    std::vector<double> ell(fr.d, std::sqrt(2.0 * hbar / b0));
    if (fr.k > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(wa.quad.M0), ek(wa.quad.Kt);
        const double kmin = ek.eigenvalues().minCoeff();
        if (kmin > 0) {
            const double sigma = std::pow(hbar * em.eigenvalues().maxCoeff() / kmin, 0.25);
            for (int a = 0; a < fr.d; ++a)
                for (int i = 0; i < fr.k; ++i)
                    ell[a] = std::max(ell[a], sigma * std::abs(fr.base(a, 2 * fr.s + i)));
        }
    }
    return ell;
}

namespace {

struct HbarRun {
    std::vector<EigRow> rows;
    std::vector<std::string> notes;
};

int default_points(int d) { return d <= 1 ? 1024 : d == 2 ? 256 : 64; }

HbarRun run_one(const FieldSpec& spec, const VerifyOptions& opt, const std::optional<WellAnalysis>& wa,
                const std::vector<double>& center, double b0, double hbar) {
    HbarRun out;
    const int d = spec.dim;
    GridSetup gs;
    gs.hbar = hbar;
    gs.center = center;
    gs.n = opt.n.empty() ? std::vector<int>(d, default_points(d)) : opt.n;
    if (static_cast<int>(gs.n.size()) == 1 && d > 1) gs.n.assign(d, gs.n[0]);
    std::vector<double> ell = wa ? localisation_lengths(*wa, hbar) : std::vector<double>(d, std::sqrt(2.0 * hbar / b0));
    if (!opt.half_width.empty()) {
        gs.half_width = opt.half_width;
        if (static_cast<int>(gs.half_width.size()) == 1 && d > 1) gs.half_width.assign(d, gs.half_width[0]);
    } else {
        for (int a = 0; a < d; ++a) gs.half_width.push_back(opt.box_factor * ell[a]);
    }
    for (int a = 0; a < d; ++a)
        if (gs.half_width[a] < 5.0 * ell[a]) {
            std::ostringstream os;
            os << "box small at hbar=" << hbar << " on axis " << a + 1 << ": half width " << gs.half_width[a]
               << " < 5 localisation lengths (" << 5.0 * ell[a] << ")";
            out.notes.push_back(os.str());
        }
    const int m = opt.levels;
    auto fine = lowest_eigs(build_grid_operator(spec, gs, opt.memory_limit), m, opt.eig);
    out.rows.insert(out.rows.end(), fine.begin(), fine.end());
    if (opt.refine) {
        GridSetup cs = gs;
        for (int& v : cs.n) v = std::max(16, (3 * v + 2) / 4);
        auto coarse = lowest_eigs(build_grid_operator(spec, cs, opt.memory_limit), m, opt.eig);
        for (auto& r : coarse) r.kind = "coarse";
        const double df = 2.0 * gs.half_width[0] / (gs.n[0] + 1), dc = 2.0 * cs.half_width[0] / (cs.n[0] + 1);
        for (int j = 0; j < m; ++j) {
            EigRow r = fine[j];
            r.kind = "refined";
            r.eigenvalue = (fine[j].eigenvalue * dc * dc - coarse[j].eigenvalue * df * df) / (dc * dc - df * df);
            r.residual = std::max(fine[j].residual, coarse[j].residual);
            out.rows.push_back(r);
        }
        out.rows.insert(out.rows.end(), coarse.begin(), coarse.end());
    }
    if (opt.box_check) {
        // half the box with the same spacing; the change bounds the truncation error of the full box
        GridSetup hs = gs;
        for (int a = 0; a < d; ++a) {
            hs.n[a] = std::max(16, (gs.n[a] + 1) / 2 - 1);
            hs.half_width[a] = gs.half_width[a] * (hs.n[a] + 1) / double(gs.n[a] + 1);
        }
        auto half = lowest_eigs(build_grid_operator(spec, hs, opt.memory_limit), m, opt.eig);
        double change = 0.0;
        for (int j = 0; j < m; ++j) {
            half[j].kind = "box-half";
            change = std::max(change, std::abs(half[j].eigenvalue - fine[j].eigenvalue));
        }
        out.rows.insert(out.rows.end(), half.begin(), half.end());
        std::ostringstream os;
        os << "box control at hbar=" << hbar << ": halving the box moves the levels by " << change;
        out.notes.push_back(os.str());
    }
    return out;
}

}  // namespace

VerifyResult run_verification(const FieldSpec& spec, const VerifyOptions& opt) {
    VerifyResult res;
    std::vector<double> center(spec.dim, 0.0);
    try {
        res.analysis = analyze_well(spec);
        res.b0 = res.analysis->well.b0;
        for (int a = 0; a < spec.dim; ++a) center[a] = res.analysis->well.q0(a);
        int levels = std::max(opt.levels, 2);
        res.prediction = assemble_prediction(res.analysis->well, res.analysis->quad, levels);
    } catch (const AssumptionError& e) {
        if (opt.half_width.empty()) throw;
        if (!spec.well_guess.empty())
            for (int a = 0; a < spec.dim; ++a) center[a] = spec.well_guess[a];
        res.b0 = intensity(spec, Eigen::Map<const Eigen::VectorXd>(center.data(), spec.dim));
        res.notes.push_back(std::string("no well analysis (") + e.what() + "); box centred at the guess");
    }

    std::vector<HbarRun> runs(opt.hbars.size());
    std::vector<std::exception_ptr> errors(opt.hbars.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < opt.hbars.size(); i = next++) {
            try {
                runs[i] = run_one(spec, opt, res.analysis, center, res.b0, opt.hbars[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(opt.threads, static_cast<int>(opt.hbars.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (auto& r : runs) {
        res.rows.insert(res.rows.end(), r.rows.begin(), r.rows.end());
        res.notes.insert(res.notes.end(), r.notes.begin(), r.notes.end());
    }
    std::stable_sort(res.rows.begin(), res.rows.end(), [](const EigRow& a, const EigRow& b) { return a.hbar < b.hbar; });

    std::vector<double> hs = opt.hbars;
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    if (hs.size() >= 4 && hs.back() >= 4.0 * hs.front() * (1 - 1e-12)) {
        const int k = res.analysis ? res.analysis->frames.k : 0;
        res.fit = fit_powers(res.rows, res.b0, res.prediction ? &*res.prediction : nullptr, k);
    } else {
        res.fit.flags.push_back("insufficient data span for power fits");
    }
    return res;
}

std::string eig_table_csv(const std::vector<EigRow>& rows) {
    std::ostringstream os;
    os << "hbar,level,eigenvalue,residual,nx,ny,nz,box,kind,note\n" << std::setprecision(12);
    for (const auto& r : rows) {
        os << r.hbar << "," << r.level << "," << r.eigenvalue << "," << r.residual;
        for (int a = 0; a < 3; ++a) {
            os << ",";
            if (r.kind != "refined" && a < static_cast<int>(r.n.size())) os << r.n[a];
        }
        os << "," << r.box << "," << r.kind << "," << r.note << "\n";
    }
    return os.str();
}

}  // namespace magwell
