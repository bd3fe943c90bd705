#include "mgems/socp.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mgems {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void ConicProgram::validate() const {
    const int nv = n();
    if (lower.size() != nv || upper.size() != nv)
        throw std::invalid_argument("bound vector size mismatch");
    for (int j = 0; j < nv; ++j)
        if (lower[j] > upper[j]) throw std::invalid_argument("lower bound above upper bound");
    if (a_ineq.rows() != b_ineq.size()) throw std::invalid_argument("ineq rhs size mismatch");
    if (a_ineq.rows() > 0 && a_ineq.cols() != nv) throw std::invalid_argument("ineq column mismatch");
    if (a_eq.rows() != b_eq.size()) throw std::invalid_argument("eq rhs size mismatch");
    if (a_eq.rows() > 0 && a_eq.cols() != nv) throw std::invalid_argument("eq column mismatch");
    for (const auto& c : cones) {
        if (c.A.rows() < 1) throw std::invalid_argument("cone block without rows");
        if (c.A.cols() != nv || c.A.rows() != c.b.size() || c.d.size() != nv)
            throw std::invalid_argument("cone block dimension mismatch");
    }
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration-limit";
    }
    return "?";
}

namespace {

// conelp layout: G x + s = h with s in R+^{n_lp} x Q^{q_1} x ... x Q^{q_k}.
struct ConeForm {
    SpMat G, Gt;
    Eigen::VectorXd h;
    int n_lp = 0;
    std::vector<int> soc_dim;    // sizes q_i (>= 2)
    std::vector<int> soc_start;  // row offsets into s/z
    std::vector<int> low_row, up_row;  // per variable, -1 when bound infinite
    int ineq_start = 0;

    int rows() const { return static_cast<int>(h.size()); }
    int degree() const { return n_lp + static_cast<int>(soc_dim.size()); }
};

ConeForm build_cone_form(const ConicProgram& p) {
    ConeForm f;
    const int n = p.n();
    std::vector<Triplet> trips;
    std::vector<double> h;
    f.low_row.assign(n, -1);
    f.up_row.assign(n, -1);

    int row = 0;
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(p.lower[j])) {
            trips.emplace_back(row, j, -1.0);
            h.push_back(-p.lower[j]);
            f.low_row[j] = row++;
        }
    }
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(p.upper[j])) {
            trips.emplace_back(row, j, 1.0);
            h.push_back(p.upper[j]);
            f.up_row[j] = row++;
        }
    }
    f.ineq_start = row;
    for (int k = 0; k < p.a_ineq.outerSize(); ++k)
        for (SpMat::InnerIterator it(p.a_ineq, k); it; ++it)
            trips.emplace_back(row + static_cast<int>(it.row()), static_cast<int>(it.col()),
                               it.value());
    for (int i = 0; i < p.a_ineq.rows(); ++i) h.push_back(p.b_ineq[i]);
    row += static_cast<int>(p.a_ineq.rows());
    f.n_lp = row;

    for (const auto& c : p.cones) {
        const int q = static_cast<int>(c.A.rows()) + 1;
        f.soc_dim.push_back(q);
        f.soc_start.push_back(row);
        for (Eigen::SparseVector<double>::InnerIterator it(c.d); it; ++it)
            trips.emplace_back(row, it.index(), -it.value());
        h.push_back(-c.gamma);
        for (int k = 0; k < c.A.outerSize(); ++k)
            for (SpMat::InnerIterator it(c.A, k); it; ++it)
                trips.emplace_back(row + 1 + static_cast<int>(it.row()),
                                   static_cast<int>(it.col()), -it.value());
        for (int i = 0; i < c.b.size(); ++i) h.push_back(-c.b[i]);
        row += q;
    }

    f.G.resize(row, n);
    f.G.setFromTriplets(trips.begin(), trips.end());
    f.Gt = f.G.transpose();
    f.h = Eigen::Map<Eigen::VectorXd>(h.data(), static_cast<long>(h.size()));
    return f;
}

// Nesterov-Todd scaling state for the product cone.
struct Scaling {
    Eigen::VectorXd lp_w2inv;  // z/s on the R+ part
    Eigen::VectorXd lp_w;      // sqrt(s/z)
    struct Soc {
        double eta = 1.0;
        Eigen::VectorXd vbar;  // unit hyperbolic vector
    };
    std::vector<Soc> soc;
    Eigen::VectorXd lambda;  // scaled point W z = W^{-1} s
};

Eigen::VectorXd jmul(const Eigen::VectorXd& u) {  // J u with J = diag(1, -I)
    Eigen::VectorXd r = -u;
    r[0] = u[0];
    return r;
}

// W = eta * [[v0, v1'], [v1, I + v1 v1'/(1+v0)]] (hyperbolic Householder
// form of the NT scaling; W^2 = eta^2 (2 vbar vbar' - J)).
Eigen::VectorXd soc_apply_w(const Scaling::Soc& sc, const Eigen::VectorXd& u) {
    const int q = static_cast<int>(u.size());
    const double v0 = sc.vbar[0];
    const auto v1 = sc.vbar.tail(q - 1);
    const double v1u1 = v1.dot(u.tail(q - 1));
    Eigen::VectorXd r(q);
    r[0] = sc.eta * (v0 * u[0] + v1u1);
    r.tail(q - 1) = sc.eta * (u.tail(q - 1) + (u[0] + v1u1 / (1.0 + v0)) * v1);
    return r;
}

// W^{-1} replaces vbar by J vbar and eta by 1/eta.
Eigen::VectorXd soc_apply_winv(const Scaling::Soc& sc, const Eigen::VectorXd& u) {
    const int q = static_cast<int>(u.size());
    const double v0 = sc.vbar[0];
    const auto v1 = sc.vbar.tail(q - 1);
    const double v1u1 = v1.dot(u.tail(q - 1));
    Eigen::VectorXd r(q);
    r[0] = (v0 * u[0] - v1u1) / sc.eta;
    r.tail(q - 1) = (u.tail(q - 1) + (-u[0] + v1u1 / (1.0 + v0)) * v1) / sc.eta;
    return r;
}

bool update_scaling(const ConeForm& f, const Eigen::VectorXd& s, const Eigen::VectorXd& z,
                    Scaling& w) {
    w.lp_w2inv.resize(f.n_lp);
    w.lp_w.resize(f.n_lp);
    w.lambda.resize(f.rows());
    for (int i = 0; i < f.n_lp; ++i) {
        if (s[i] <= 0 || z[i] <= 0) return false;
        w.lp_w2inv[i] = z[i] / s[i];
        w.lp_w[i] = std::sqrt(s[i] / z[i]);
        w.lambda[i] = std::sqrt(s[i] * z[i]);
    }
    w.soc.resize(f.soc_dim.size());
    for (size_t k = 0; k < f.soc_dim.size(); ++k) {
        const int at = f.soc_start[k], q = f.soc_dim[k];
        const Eigen::VectorXd sk = s.segment(at, q), zk = z.segment(at, q);
        const double res_s = sk[0] * sk[0] - sk.tail(q - 1).squaredNorm();
        const double res_z = zk[0] * zk[0] - zk.tail(q - 1).squaredNorm();
        if (res_s <= 0 || res_z <= 0 || sk[0] <= 0 || zk[0] <= 0) return false;
        const Eigen::VectorXd sbar = sk / std::sqrt(res_s);
        const Eigen::VectorXd zbar = zk / std::sqrt(res_z);
        const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
        auto& sc = w.soc[k];
        sc.vbar = (sbar + jmul(zbar)) / (2.0 * gamma);
        sc.eta = std::pow(res_s / res_z, 0.25);
        w.lambda.segment(at, q) = soc_apply_w(sc, zk);
    }
    return true;
}

// Jordan product u o v per cone block.
void jordan_product(const ConeForm& f, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                    Eigen::VectorXd& out) {
    out.resize(f.rows());
    out.head(f.n_lp) = u.head(f.n_lp).cwiseProduct(v.head(f.n_lp));
    for (size_t k = 0; k < f.soc_dim.size(); ++k) {
        const int at = f.soc_start[k], q = f.soc_dim[k];
        const auto uk = u.segment(at, q), vk = v.segment(at, q);
        out[at] = uk.dot(vk);
        out.segment(at + 1, q - 1) = uk[0] * vk.tail(q - 1) + vk[0] * uk.tail(q - 1);
    }
}

// Solves lambda o x = d per block (inverse of the arrow operator).
void jordan_solve(const ConeForm& f, const Eigen::VectorXd& lambda, const Eigen::VectorXd& d,
                  Eigen::VectorXd& out) {
    out.resize(f.rows());
    out.head(f.n_lp) = d.head(f.n_lp).cwiseQuotient(lambda.head(f.n_lp));
    for (size_t k = 0; k < f.soc_dim.size(); ++k) {
        const int at = f.soc_start[k], q = f.soc_dim[k];
        const auto lk = lambda.segment(at, q);
        const auto dk = d.segment(at, q);
        const double det = lk[0] * lk[0] - lk.tail(q - 1).squaredNorm();
        const double x0 = (lk[0] * dk[0] - lk.tail(q - 1).dot(dk.tail(q - 1))) / det;
        out[at] = x0;
        out.segment(at + 1, q - 1) = (dk.tail(q - 1) - x0 * lk.tail(q - 1)) / lk[0];
    }
}

// Applies W^{-1} blockwise.
void apply_winv(const ConeForm& f, const Scaling& w, const Eigen::VectorXd& u,
                Eigen::VectorXd& out) {
    out.resize(f.rows());
    out.head(f.n_lp) = u.head(f.n_lp).cwiseQuotient(w.lp_w);
    for (size_t k = 0; k < f.soc_dim.size(); ++k) {
        const int at = f.soc_start[k], q = f.soc_dim[k];
        out.segment(at, q) = soc_apply_winv(w.soc[k], u.segment(at, q));
    }
}

// Applies W blockwise.
void apply_w(const ConeForm& f, const Scaling& w, const Eigen::VectorXd& u, Eigen::VectorXd& out) {
    out.resize(f.rows());
    out.head(f.n_lp) = u.head(f.n_lp).cwiseProduct(w.lp_w);
    for (size_t k = 0; k < f.soc_dim.size(); ++k) {
        const int at = f.soc_start[k], q = f.soc_dim[k];
        out.segment(at, q) = soc_apply_w(w.soc[k], u.segment(at, q));
    }
}

// Largest step alpha so that u + alpha du stays in the cone (up to the
// boundary); returns +inf when unconstrained.
double step_to_boundary(const ConeForm& f, const Eigen::VectorXd& u, const Eigen::VectorXd& du) {
    double alpha = kInf;
    for (int i = 0; i < f.n_lp; ++i)
        if (du[i] < 0) alpha = std::min(alpha, -u[i] / du[i]);
    for (size_t k = 0; k < f.soc_dim.size(); ++k) {
        const int at = f.soc_start[k], q = f.soc_dim[k];
        const auto uk = u.segment(at, q);
        const auto dk = du.segment(at, q);
        const double a = dk[0] * dk[0] - dk.tail(q - 1).squaredNorm();
        const double b = 2.0 * (uk[0] * dk[0] - uk.tail(q - 1).dot(dk.tail(q - 1)));
        const double c = uk[0] * uk[0] - uk.tail(q - 1).squaredNorm();
        double bound = kInf;
        if (std::abs(a) < 1e-14) {
            if (b < 0) bound = -c / b;
        } else {
            const double disc = b * b - 4.0 * a * c;
            if (disc >= 0) {
                const double sq = std::sqrt(disc);
                const double r1 = (-b - sq) / (2.0 * a);
                const double r2 = (-b + sq) / (2.0 * a);
                const double lo = std::min(r1, r2), hi = std::max(r1, r2);
                if (a > 0) {
                    if (lo > 0) bound = lo;
                } else {
                    if (hi > 0) bound = hi;
                }
            }
        }
        if (dk[0] < 0) bound = std::min(bound, -uk[0] / dk[0]);
        alpha = std::min(alpha, bound);
    }
    return alpha;
}

// Builds the block-diagonal W^{-2} as a sparse matrix for the KKT assembly.
SpMat build_winv2(const ConeForm& f, const Scaling& w) {
    std::vector<Triplet> trips;
    trips.reserve(f.n_lp + f.soc_dim.size() * 9);
    for (int i = 0; i < f.n_lp; ++i) trips.emplace_back(i, i, w.lp_w2inv[i]);
    for (size_t k = 0; k < f.soc_dim.size(); ++k) {
        const int at = f.soc_start[k], q = f.soc_dim[k];
        // W^{-2} = eta^{-2} (2 (J vbar)(J vbar)' - J), a rank-2 update of J.
        const Eigen::VectorXd jv = jmul(w.soc[k].vbar);
        const double c2 = 1.0 / (w.soc[k].eta * w.soc[k].eta);
        Eigen::MatrixXd m = c2 * 2.0 * jv * jv.transpose();
        m(0, 0) -= c2;
        for (int r = 1; r < q; ++r) m(r, r) += c2;
        for (int r = 0; r < q; ++r)
            for (int c = 0; c < q; ++c) trips.emplace_back(at + r, at + c, m(r, c));
    }
    SpMat winv2(f.rows(), f.rows());
    winv2.setFromTriplets(trips.begin(), trips.end());
    return winv2;
}

struct KktSolver {
    int n = 0, m = 0;
    bool dense = false;
    double reg = 1e-9;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    SpMat kkt_sparse;
    Eigen::MatrixXd kkt_dense;
    bool analyzed = false;

    void factor(const SpMat& h, const SpMat& a_eq) {
        n = static_cast<int>(h.rows());
        m = static_cast<int>(a_eq.rows());
        std::vector<Triplet> trips;
        trips.reserve(h.nonZeros() + 2 * a_eq.nonZeros() + n + m);
        for (int k = 0; k < h.outerSize(); ++k)
            for (SpMat::InnerIterator it(h, k); it; ++it)
                trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                   it.value());
        for (int j = 0; j < n; ++j) trips.emplace_back(j, j, reg);
        for (int k = 0; k < a_eq.outerSize(); ++k)
            for (SpMat::InnerIterator it(a_eq, k); it; ++it) {
                trips.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()),
                                   it.value());
                trips.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()),
                                   it.value());
            }
        for (int i = 0; i < m; ++i) trips.emplace_back(n + i, n + i, -reg);

        if (dense) {
            kkt_dense.setZero(n + m, n + m);
            for (const auto& t : trips) kkt_dense(t.row(), t.col()) += t.value();
            lu.compute(kkt_dense);
            return;
        }
        kkt_sparse.resize(n + m, n + m);
        kkt_sparse.setFromTriplets(trips.begin(), trips.end());
        if (!analyzed) {
            ldlt.analyzePattern(kkt_sparse);
            analyzed = true;
        }
        ldlt.factorize(kkt_sparse);
        if (ldlt.info() != Eigen::Success) {
            // Retry once with heavier static regularization.
            SpMat bumped = kkt_sparse;
            for (int j = 0; j < n + m; ++j) bumped.coeffRef(j, j) += (j < n ? 1e-6 : -1e-6);
            ldlt.factorize(bumped);
            if (ldlt.info() != Eigen::Success)
                throw std::runtime_error("KKT factorization failed");
        }
    }

    // One round of iterative refinement against the factored (regularized)
    // matrix recovers most of the regularization error.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        if (dense) {
            Eigen::VectorXd x = lu.solve(rhs);
            const Eigen::VectorXd resid = rhs - kkt_dense * x;
            x += lu.solve(resid);
            return x;
        }
        Eigen::VectorXd x = ldlt.solve(rhs);
        const Eigen::VectorXd resid = rhs - kkt_sparse * x;
        x += ldlt.solve(resid);
        return x;
    }
};

Eigen::VectorXd cone_identity(const ConeForm& f) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(f.rows());
    e.head(f.n_lp).setOnes();
    for (size_t k = 0; k < f.soc_dim.size(); ++k) e[f.soc_start[k]] = 1.0;
    return e;
}

}  // namespace

SolverResult solve(const ConicProgram& prog, const SolverOptions& opt) {
    prog.validate();
    const auto t_start = std::chrono::steady_clock::now();

    const int n = prog.n();
    ConeForm f = build_cone_form(prog);
    const int m_eq = static_cast<int>(prog.a_eq.rows());
    const int deg = std::max(1, f.degree());

    SolverResult res;
    res.u = Eigen::VectorXd::Zero(n);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m_eq);
    const Eigen::VectorXd e = cone_identity(f);
    Eigen::VectorXd s = e, z = e;

    const double b_norm = m_eq ? prog.b_eq.cwiseAbs().maxCoeff() : 0.0;
    const double h_norm = f.rows() ? f.h.cwiseAbs().maxCoeff() : 0.0;
    const double f_norm = n ? prog.cost.cwiseAbs().maxCoeff() : 0.0;

    KktSolver kkt;
    kkt.dense = (n + m_eq) < opt.dense_threshold;

    Scaling w;
    Eigen::VectorXd rx(n), ry(m_eq), rz(f.rows());
    double best_score = kInf;
    int best_iter = 0;
    SolveStatus status = SolveStatus::IterationLimit;

    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        rx = prog.cost + f.Gt * z;
        if (m_eq) rx += prog.a_eq.transpose() * y;
        if (m_eq) ry = prog.a_eq * x - prog.b_eq;
        rz = f.G * x + s - f.h;

        const double gap_abs = s.dot(z);
        const double mu = gap_abs / deg;
        const double obj = prog.cost.dot(x);
        const double pres = std::max(m_eq ? ry.cwiseAbs().maxCoeff() / (1.0 + b_norm) : 0.0,
                                     f.rows() ? rz.cwiseAbs().maxCoeff() / (1.0 + h_norm) : 0.0);
        const double dres = rx.cwiseAbs().maxCoeff() / (1.0 + f_norm);
        const double relgap = gap_abs / std::max(1.0, std::abs(obj));

        res.primal_residual = pres;
        res.dual_residual = dres;
        res.duality_gap = relgap;

        if (opt.verbose)
            std::cerr << "iter " << iter << " obj " << obj << " pres " << pres << " dres " << dres
                      << " gap " << relgap << "\n";

        if (pres <= opt.feas_tol && dres <= opt.feas_tol && relgap <= opt.gap_tol) {
            status = SolveStatus::Optimal;
            break;
        }
        if (obj < -1e12 && dres <= 1e-4) {
            status = SolveStatus::Unbounded;
            break;
        }
        const double score = pres + dres + relgap;
        if (score < 0.999 * best_score) {
            best_score = score;
            best_iter = iter;
        } else if (iter - best_iter > opt.stall_window) {
            status = (pres > 1e3 * opt.feas_tol) ? SolveStatus::Infeasible : SolveStatus::IterationLimit;
            break;
        }

        if (!update_scaling(f, s, z, w)) {
            status = SolveStatus::IterationLimit;
            break;
        }

        const SpMat winv2 = build_winv2(f, w);
        const SpMat wg = winv2 * f.G;
        const SpMat h_mat = f.Gt * wg;
        kkt.factor(h_mat, prog.a_eq);

        Eigen::VectorXd lam_lam;
        jordan_product(f, w.lambda, w.lambda, lam_lam);

        auto direction = [&](const Eigen::VectorXd& d_c, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                             Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
            Eigen::VectorXd g_c;
            jordan_solve(f, w.lambda, d_c, g_c);
            Eigen::VectorXd winv_gc;
            apply_winv(f, w, g_c, winv_gc);

            Eigen::VectorXd rhs(n + m_eq);
            rhs.head(n) = -rx - f.Gt * (winv_gc + winv2 * rz);
            if (m_eq) rhs.tail(m_eq) = -ry;
            const Eigen::VectorXd sol = kkt.solve(rhs);
            dx = sol.head(n);
            dy = sol.tail(m_eq);
            ds = -rz - f.G * dx;
            dz = winv_gc + winv2 * (rz + f.G * dx);
        };

        Eigen::VectorXd dx, dy, ds, dz;
        double sigma = opt.centering;
        if (opt.mehrotra) {
            // Affine scouting pass sets the centering weight; the corrector
            // reuses the factorization.
            Eigen::VectorXd d_aff = -lam_lam;
            direction(d_aff, dx, dy, ds, dz);
            const double a_s = step_to_boundary(f, s, ds);
            const double a_z = step_to_boundary(f, z, dz);
            const double alpha_aff = std::min({1.0, a_s, a_z});
            const double mu_aff = (s + alpha_aff * ds).dot(z + alpha_aff * dz) / deg;
            sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3.0);

            Eigen::VectorXd ws_aff, wz_aff;
            apply_winv(f, w, ds, ws_aff);  // W^{-T} ds = W^{-1} ds
            apply_w(f, w, dz, wz_aff);
            Eigen::VectorXd corr;
            jordan_product(f, ws_aff, wz_aff, corr);
            Eigen::VectorXd d_c = sigma * mu * e - lam_lam - corr;
            direction(d_c, dx, dy, ds, dz);
        } else {
            Eigen::VectorXd d_c = sigma * mu * e - lam_lam;
            direction(d_c, dx, dy, ds, dz);
        }

        const double a_s = step_to_boundary(f, s, ds);
        const double a_z = step_to_boundary(f, z, dz);
        const double alpha = std::min(1.0, opt.step_fraction * std::min(a_s, a_z));
        if (!(alpha > 0) || !std::isfinite(alpha)) {
            status = SolveStatus::IterationLimit;
            break;
        }
        x += alpha * dx;
        y += alpha * dy;
        s += alpha * ds;
        z += alpha * dz;
    }

    res.u = x;
    res.objective = prog.cost.dot(x);
    res.iterations = iter + (status == SolveStatus::Optimal ? 1 : 0);
    res.iterations = std::max(1, res.iterations);
    res.status = status;

    // Unpack duals into per-family views.
    res.duals.box_lower = Eigen::VectorXd::Zero(n);
    res.duals.box_upper = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        if (f.low_row[j] >= 0) res.duals.box_lower[j] = z[f.low_row[j]];
        if (f.up_row[j] >= 0) res.duals.box_upper[j] = z[f.up_row[j]];
    }
    res.duals.ineq = z.segment(f.ineq_start, prog.a_ineq.rows());
    res.duals.eq = y;
    res.duals.cones.clear();
    for (size_t k = 0; k < f.soc_dim.size(); ++k)
        res.duals.cones.push_back(z.segment(f.soc_start[k], f.soc_dim[k]));

    const auto t_end = std::chrono::steady_clock::now();
    res.solve_seconds = std::chrono::duration<double>(t_end - t_start).count();
    res.seconds_per_iteration = res.solve_seconds / res.iterations;
    return res;
}

double KktResiduals::max_primal() const { return std::max({eq, ineq, box, cone}); }

KktResiduals kkt_residuals(const ConicProgram& prog, const Eigen::VectorXd& u,
                           const DualSolution& duals) {
    KktResiduals r;
    const int n = prog.n();
    if (u.size() != n) throw std::invalid_argument("u size mismatch");

    if (prog.a_eq.rows()) r.eq = (prog.a_eq * u - prog.b_eq).cwiseAbs().maxCoeff();
    if (prog.a_ineq.rows())
        r.ineq = std::max(0.0, (prog.a_ineq * u - prog.b_ineq).maxCoeff());
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(prog.lower[j])) r.box = std::max(r.box, prog.lower[j] - u[j]);
        if (std::isfinite(prog.upper[j])) r.box = std::max(r.box, u[j] - prog.upper[j]);
    }
    r.box = std::max(r.box, 0.0);

    Eigen::VectorXd stat = prog.cost - duals.box_lower + duals.box_upper;
    if (prog.a_ineq.rows()) stat += prog.a_ineq.transpose() * duals.ineq;
    if (prog.a_eq.rows()) stat += prog.a_eq.transpose() * duals.eq;

    double compl_sum = 0.0;
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(prog.lower[j])) compl_sum += duals.box_lower[j] * (u[j] - prog.lower[j]);
        if (std::isfinite(prog.upper[j])) compl_sum += duals.box_upper[j] * (prog.upper[j] - u[j]);
    }
    if (prog.a_ineq.rows()) compl_sum += duals.ineq.dot(prog.b_ineq - prog.a_ineq * u);

    for (size_t k = 0; k < prog.cones.size(); ++k) {
        const auto& c = prog.cones[k];
        const Eigen::VectorXd au_b = c.A * u - c.b;
        const double lhs = au_b.norm();
        const double rhs_val = Eigen::VectorXd(c.d).dot(u) - c.gamma;
        r.cone = std::max(r.cone, lhs - rhs_val);
        if (k < duals.cones.size() && duals.cones[k].size() == au_b.size() + 1) {
            const auto& zc = duals.cones[k];
            stat -= Eigen::VectorXd(c.d) * zc[0];
            stat -= c.A.transpose() * zc.tail(zc.size() - 1);
            compl_sum += zc[0] * rhs_val + zc.tail(zc.size() - 1).dot(au_b);
        }
    }
    r.cone = std::max(r.cone, 0.0);
    r.dual = stat.cwiseAbs().maxCoeff();
    r.complementarity = std::abs(compl_sum);
    return r;
}

// ---------------------------------------------------------------------------
// Sparse-triplet text format (docs/program_format.md).

namespace {

void dump_sparse(std::ostream& out, const SpMat& m) {
    out << m.rows() << " " << m.nonZeros() << "\n";
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

void dump_vector(std::ostream& out, const Eigen::VectorXd& v) {
    int nnz = 0;
    for (int i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) ++nnz;
    out << v.size() << " " << nnz << "\n";
    for (int i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) out << i << " " << v[i] << "\n";
}

SpMat read_sparse(std::istream& in, int cols) {
    int rows = 0, nnz = 0;
    in >> rows >> nnz;
    std::vector<Triplet> trips;
    trips.reserve(nnz);
    for (int t = 0; t < nnz; ++t) {
        int i = 0, j = 0;
        double v = 0;
        in >> i >> j >> v;
        trips.emplace_back(i, j, v);
    }
    SpMat m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

Eigen::VectorXd read_vector(std::istream& in) {
    int size = 0, nnz = 0;
    in >> size >> nnz;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
    for (int t = 0; t < nnz; ++t) {
        int i = 0;
        double val = 0;
        in >> i >> val;
        v[i] = val;
    }
    return v;
}

}  // namespace

void dump_program(std::ostream& out, const ConicProgram& prog) {
    out.precision(17);
    out << "mgems-socp v1\n";
    out << "n " << prog.n() << "\n";
    out << "cost\n";
    dump_vector(out, prog.cost);
    out << "bounds\n";
    int nfin = 0;
    for (int j = 0; j < prog.n(); ++j)
        if (std::isfinite(prog.lower[j]) || std::isfinite(prog.upper[j])) ++nfin;
    out << nfin << "\n";
    for (int j = 0; j < prog.n(); ++j) {
        if (!std::isfinite(prog.lower[j]) && !std::isfinite(prog.upper[j])) continue;
        out << j << " ";
        if (std::isfinite(prog.lower[j])) out << prog.lower[j];
        else out << "-inf";
        out << " ";
        if (std::isfinite(prog.upper[j])) out << prog.upper[j];
        else out << "inf";
        out << "\n";
    }
    out << "ineq\n";
    dump_sparse(out, prog.a_ineq);
    dump_vector(out, prog.b_ineq);
    out << "eq\n";
    dump_sparse(out, prog.a_eq);
    dump_vector(out, prog.b_eq);
    out << "cones " << prog.cones.size() << "\n";
    for (const auto& c : prog.cones) {
        out << "cone " << c.gamma << "\n";
        dump_sparse(out, c.A);
        dump_vector(out, c.b);
        dump_vector(out, Eigen::VectorXd(c.d));
    }
    out << "end\n";
}

ConicProgram load_program(std::istream& in) {
    std::string tag, version;
    in >> tag >> version;
    if (tag != "mgems-socp") throw std::runtime_error("not a program dump");
    ConicProgram p;
    int n = 0;
    in >> tag >> n;  // "n"
    in >> tag;       // "cost"
    p.cost = read_vector(in);
    p.lower = Eigen::VectorXd::Constant(n, -kInf);
    p.upper = Eigen::VectorXd::Constant(n, kInf);
    in >> tag;  // "bounds"
    int nfin = 0;
    in >> nfin;
    for (int t = 0; t < nfin; ++t) {
        int j = 0;
        std::string lo, hi;
        in >> j >> lo >> hi;
        p.lower[j] = (lo == "-inf") ? -kInf : std::stod(lo);
        p.upper[j] = (hi == "inf") ? kInf : std::stod(hi);
    }
    in >> tag;  // "ineq"
    p.a_ineq = read_sparse(in, n);
    p.b_ineq = read_vector(in);
    in >> tag;  // "eq"
    p.a_eq = read_sparse(in, n);
    p.b_eq = read_vector(in);
    int ncones = 0;
    in >> tag >> ncones;  // "cones"
    for (int k = 0; k < ncones; ++k) {
        ConeBlock c;
        in >> tag >> c.gamma;  // "cone"
        c.A = read_sparse(in, n);
        c.b = read_vector(in);
        Eigen::VectorXd d = read_vector(in);
        c.d.resize(n);
        for (int j = 0; j < n; ++j)
            if (d[j] != 0.0) c.d.coeffRef(j) = d[j];
        p.cones.push_back(std::move(c));
    }
    p.validate();
    return p;
}

void dump_program_file(const std::string& path, const ConicProgram& prog) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    dump_program(out, prog);
}

ConicProgram load_program_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return load_program(in);
}

}  // namespace mgems
