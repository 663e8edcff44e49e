#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "fracop/assembly.hpp"
#include "fracop/frac_power.hpp"
#include "fracop/qfield.hpp"

namespace fracop {

struct SolveOptions {
    enum class Method { direct_lu, krylov };
    Method method{Method::direct_lu};
    double rel_tol{1e-10};
    int max_iter{2000};
    bool mean_zero_enforce{true};  // RobinType grids only
};

namespace solve_detail {

/// Jacobi-preconditioned BiCGSTAB on a caller-supplied operator. Hand-rolled
/// so every iterate can be projected back onto the mean-zero subspace, which
/// is where the Robin-type weak problem is posed; drifting out of it stalls
/// convergence.
inline bool bicgstab(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& A,
                     const Eigen::VectorXd& b, Eigen::VectorXd& x,
                     const Eigen::VectorXd& inv_diag, double rel_tol, int max_iter,
                     const std::function<void(Eigen::VectorXd&)>& project) {
    const double bnorm = b.norm();
    if (bnorm == 0) {
        x.setZero();
        return true;
    }
    Eigen::VectorXd r = b - A(x);
    project(r);
    Eigen::VectorXd r0 = r;
    double rho = 1, alpha = 1, omega = 1;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(b.size()), v = p;
    for (int it = 0; it < max_iter; ++it) {
        const double rho1 = r0.dot(r);
        if (std::abs(rho1) < 1e-300) break;
        if (it == 0) {
            p = r;
        } else {
            const double beta = (rho1 / rho) * (alpha / omega);
            p = r + beta * (p - omega * v);
        }
        rho = rho1;
        Eigen::VectorXd ph = inv_diag.cwiseProduct(p);
        project(ph);
        v = A(ph);
        project(v);
        alpha = rho / r0.dot(v);
        Eigen::VectorXd s = r - alpha * v;
        if (s.norm() <= rel_tol * bnorm) {
            x += alpha * ph;
            project(x);
            return true;
        }
        Eigen::VectorXd sh = inv_diag.cwiseProduct(s);
        project(sh);
        Eigen::VectorXd t = A(sh);
        project(t);
        omega = t.dot(s) / t.dot(t);
        x += alpha * ph + omega * sh;
        project(x);
        r = s - omega * t;
        if (r.norm() <= rel_tol * bnorm) return true;
    }
    Eigen::VectorXd rf = b - A(x);
    project(rf);
    return rf.norm() <= rel_tol * bnorm;
}

}  // namespace solve_detail

/// Factorizes and applies Q_s(T)^{-1} for the closed discrete T it is bound
/// to. Dirichlet grids are solved on the interior unknowns (boundary values
/// pinned to zero); RobinType grids solve the mean-zero-constrained system
/// through a bordered matrix, matching the space where the weak problem has
/// its Lax-Milgram solution. Factorizations are cached per spectral
/// parameter value; the sparsity analysis is reused across parameters since
/// the pattern does not depend on s.
class ResolventSolver {
public:
    ResolventSolver(std::shared_ptr<const AssembledOperator> T, SolveOptions opts = {})
        : T_(std::move(T)), opts_(opts) {
        const Grid& g = T_->grid;
        if (T_->closure == Closure::dirichlet) {
            keep_.assign(4 * g.node_count(), -1);
            std::int64_t m = 0;
            for (int k = 0; k < g.nz; ++k)
                for (int j = 0; j < g.ny; ++j)
                    for (int i = 0; i < g.nx; ++i) {
                        if (g.is_boundary(i, j, k)) continue;
                        const std::int64_t node = g.index(i, j, k);
                        for (int c = 0; c < 4; ++c) keep_[4 * node + c] = m++;
                    }
            reduced_dim_ = m;
        }
    }

    const AssembledOperator& T() const { return *T_; }
    const SolveOptions& options() const { return opts_; }
    std::int64_t dim() const { return T_->dim(); }

    bool mean_zero_active() const {
        return T_->grid.boundary_kind == BoundaryKind::robin_type && opts_.mean_zero_enforce;
    }

    /// Solve Q_s(T) u = F to opts.rel_tol relative residual. The generation
    /// theorems live on Re(s) = 0, s != 0; other parameters assemble fine
    /// but are the caller's responsibility.
    Eigen::VectorXd solve(const SpectralParam& s, const Eigen::VectorXd& F) {
        prepare(s);
        return solve_prepared(F, false);
    }

    /// Same system, transposed; used by operator-norm estimation.
    Eigen::VectorXd solve_transposed(const SpectralParam& s, const Eigen::VectorXd& F) {
        prepare(s);
        return solve_prepared(F, true);
    }

    /// S_L^{-1}(s,T) v = Q_s^{-1}(conj(s) v) - T Q_s^{-1}(v).
    Eigen::VectorXd apply_SL(const SpectralParam& s, const Eigen::VectorXd& v) {
        Eigen::VectorXd w1 = solve(s, left_mul(s.conj(), v));
        Eigen::VectorXd w2 = T_->apply(solve(s, v));
        return w1 - w2;
    }

    /// S_R^{-1}(s,T) v = -(T u - conj(s) u) with u = Q_s^{-1} v.
    Eigen::VectorXd apply_SR(const SpectralParam& s, const Eigen::VectorXd& v) {
        Eigen::VectorXd u = solve(s, v);
        return left_mul(s.conj(), u) - T_->apply(u);
    }

    /// Transposes of the S-resolvent applications (for norm estimation).
    Eigen::VectorXd apply_SL_T(const SpectralParam& s, const Eigen::VectorXd& v) {
        Eigen::VectorXd w1 = left_mul(s.s, solve_transposed(s, v));
        Eigen::VectorXd w2 = solve_transposed(s, T_->apply_transpose(v));
        return w1 - w2;
    }
    Eigen::VectorXd apply_SR_T(const SpectralParam& s, const Eigen::VectorXd& v) {
        Eigen::VectorXd w = left_mul(s.s, v) - T_->apply_transpose(v);
        return solve_transposed(s, w);
    }

private:
    void prepare(const SpectralParam& s) {
        if (have_ && s.s0 == cur_s0_ && s.abs2 == cur_abs2_) return;
        if (s.abs2 == 0.0) throw SolveError("solve_Q: s = 0 is not invertible here");
        Q_ = std::make_shared<AssembledOperator>(assemble_Q(s, *T_));
        SpMat full = Q_->matrix();
        SpMat sys;
        const bool krylov = opts_.method == SolveOptions::Method::krylov;
        if (T_->closure == Closure::dirichlet) {
            sys = reduce(full);
        } else if (mean_zero_active() && !krylov) {
            // direct path: bordered system; Krylov runs on the projected
            // operator instead, with every iterate pushed back into the
            // mean-zero subspace
            sys = bordered(full);
        } else {
            sys = full;
        }
        full_ = std::move(full);
        sys.makeCompressed();
        if (opts_.method == SolveOptions::Method::direct_lu) {
            lu_ = std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
            lu_->compute(sys);
            if (lu_->info() != Eigen::Success)
                throw SolveError("solve_Q: sparse LU factorization failed");
            lut_.reset();
        } else {
            inv_diag_.resize(sys.rows());
            for (std::int64_t i = 0; i < sys.rows(); ++i) {
                const double d = sys.coeff(i, i);
                inv_diag_[i] = std::abs(d) > 1e-300 ? 1.0 / d : 1.0;
            }
        }
        sys_ = std::move(sys);
        have_ = true;
        cur_s0_ = s.s0;
        cur_abs2_ = s.abs2;
    }

    SpMat reduce(const SpMat& full) const {
        std::vector<Triplet> trip;
        trip.reserve(full.nonZeros());
        for (int outer = 0; outer < full.outerSize(); ++outer)
            for (SpMat::InnerIterator it(full, outer); it; ++it) {
                const std::int64_t r = keep_[it.row()], c = keep_[it.col()];
                if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
            }
        SpMat m(reduced_dim_, reduced_dim_);
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

    /// [Q E; E^T 0] with E the four constant-component columns; solving it
    /// realizes (P Q P)^{-1} on the mean-zero subspace.
    SpMat bordered(const SpMat& full) const {
        const std::int64_t n4 = full.rows();
        const std::int64_t nodes = n4 / 4;
        std::vector<Triplet> trip;
        trip.reserve(full.nonZeros() + 8 * nodes);
        for (int outer = 0; outer < full.outerSize(); ++outer)
            for (SpMat::InnerIterator it(full, outer); it; ++it)
                trip.emplace_back(it.row(), it.col(), it.value());
        for (std::int64_t node = 0; node < nodes; ++node)
            for (int c = 0; c < 4; ++c) {
                trip.emplace_back(4 * node + c, n4 + c, 1.0);
                trip.emplace_back(n4 + c, 4 * node + c, 1.0);
            }
        SpMat m(n4 + 4, n4 + 4);
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

    Eigen::VectorXd solve_prepared(const Eigen::VectorXd& F, bool transposed) {
        const std::int64_t n4 = T_->dim();
        if (F.size() != n4) throw GridMismatchError("solve_Q: rhs size mismatch");
        Eigen::VectorXd rhs_full = F;
        if (T_->closure == Closure::dirichlet) {
            // zero RHS coupling on the identity rows
            for (std::int64_t i = 0; i < n4; ++i)
                if (keep_[i] < 0) rhs_full[i] = 0.0;
        } else if (mean_zero_active()) {
            project_mean_zero_inplace(rhs_full);
        }

        const bool krylov = opts_.method == SolveOptions::Method::krylov;
        Eigen::VectorXd rhs_sys, x_sys;
        if (T_->closure == Closure::dirichlet) {
            rhs_sys.resize(reduced_dim_);
            for (std::int64_t i = 0; i < n4; ++i)
                if (keep_[i] >= 0) rhs_sys[keep_[i]] = rhs_full[i];
        } else if (mean_zero_active() && !krylov) {
            rhs_sys.resize(n4 + 4);
            rhs_sys.head(n4) = rhs_full;
            rhs_sys.tail(4).setZero();
        } else {
            rhs_sys = rhs_full;
        }

        if (!krylov) {
            x_sys = lu_solve(rhs_sys, transposed);
            // One step of iterative refinement keeps small-|s| solves sharp.
            Eigen::VectorXd res = rhs_sys - sys_apply(x_sys, transposed);
            if (res.norm() > 0.01 * opts_.rel_tol * rhs_sys.norm())
                x_sys += lu_solve(res, transposed);
        } else {
            x_sys = Eigen::VectorXd::Zero(rhs_sys.size());
            const auto A = [&](const Eigen::VectorXd& v) { return sys_apply(v, transposed); };
            std::function<void(Eigen::VectorXd&)> project = [](Eigen::VectorXd&) {};
            if (mean_zero_active())
                project = [](Eigen::VectorXd& v) { project_mean_zero_inplace(v); };
            const bool ok = solve_detail::bicgstab(A, rhs_sys, x_sys, inv_diag_,
                                                   0.1 * opts_.rel_tol, opts_.max_iter, project);
            if (!ok) throw SolveError("solve_Q: BiCGSTAB did not reach tolerance");
        }

        Eigen::VectorXd u(n4);
        if (T_->closure == Closure::dirichlet) {
            u.setZero();
            for (std::int64_t i = 0; i < n4; ++i)
                if (keep_[i] >= 0) u[i] = x_sys[keep_[i]];
        } else if (mean_zero_active()) {
            u = krylov ? x_sys : Eigen::VectorXd(x_sys.head(n4));
            project_mean_zero_inplace(u);
        } else {
            u = x_sys;
        }

        // Defining contract: relative residual of the actual system solved.
        Eigen::VectorXd res = residual(u, rhs_full, transposed);
        const double f = rhs_full.norm();
        if (f > 0 && res.norm() > opts_.rel_tol * f)
            throw SolveError("solve_Q: residual " + std::to_string(res.norm() / f) +
                             " above tolerance");
        return u;
    }

    Eigen::VectorXd lu_solve(const Eigen::VectorXd& rhs, bool transposed) {
        if (!transposed) return lu_->solve(rhs);
        if (!lut_) {
            lut_ = std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
            SpMat st = sys_.transpose();
            st.makeCompressed();
            lut_->compute(st);
            if (lut_->info() != Eigen::Success)
                throw SolveError("solve_Q: transposed factorization failed");
        }
        return lut_->solve(rhs);
    }

    Eigen::VectorXd sys_apply(const Eigen::VectorXd& v, bool transposed) const {
        return transposed ? Eigen::VectorXd(sys_.transpose() * v) : Eigen::VectorXd(sys_ * v);
    }

    Eigen::VectorXd residual(const Eigen::VectorXd& u, const Eigen::VectorXd& rhs_full,
                             bool transposed) const {
        const SpMat& m = full_;
        Eigen::VectorXd qres =
            transposed ? Eigen::VectorXd(rhs_full - m.transpose() * u)
                       : Eigen::VectorXd(rhs_full - m * u);
        if (mean_zero_active()) project_mean_zero_inplace(qres);
        if (T_->closure == Closure::dirichlet)
            for (std::int64_t i = 0; i < qres.size(); ++i)
                if (keep_[i] < 0) qres[i] = 0.0;
        return qres;
    }

    std::shared_ptr<const AssembledOperator> T_;
    SolveOptions opts_;
    std::vector<std::int64_t> keep_;
    std::int64_t reduced_dim_{0};

    bool have_{false};
    double cur_s0_{0}, cur_abs2_{0};
    std::shared_ptr<AssembledOperator> Q_;
    SpMat full_, sys_;
    Eigen::VectorXd inv_diag_;
    std::unique_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> lu_, lut_;
};

/// Handle for norm estimation: a linear map and its transpose on the flat
/// 4N layout.
struct OpHandle {
    std::int64_t dim;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_transpose;
};

struct NormEstimate {
    double value{0};
    int iterations{0};
    bool converged{false};
};

/// L2(h^3-weighted) operator norm by power iteration on A^T A. Uniform node
/// weights make the weighted norm coincide with the plain spectral norm.
/// Returns a lower bound within the stabilization tolerance.
inline NormEstimate op_norm_estimate(const OpHandle& A, double rel_tol = 1e-6,
                                     int max_iter = 400, std::uint64_t seed = 12345) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(A.dim);
    for (std::int64_t i = 0; i < A.dim; ++i) v[i] = gauss(rng);
    v.normalize();
    NormEstimate est;
    double prev = 0;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXd w = A.apply_transpose(A.apply(v));
        const double rayleigh = v.dot(w);
        const double sigma = std::sqrt(std::max(0.0, rayleigh));
        est.value = sigma;
        est.iterations = it;
        const double nw = w.norm();
        if (nw == 0) {
            est.converged = true;
            return est;
        }
        v = w / nw;
        if (it > 1 && std::abs(sigma - prev) <= rel_tol * std::max(sigma, 1e-300)) {
            est.converged = true;
            return est;
        }
        prev = sigma;
    }
    return est;
}

/// Bind a grid solver as the operator interface the Balakrishnan quadrature
/// consumes. Q_{jt} does not depend on the axis (Re s = 0), so the solver
/// cache is reused across the axis choices.
inline AxisOperator make_axis_operator(std::shared_ptr<ResolventSolver> solver,
                                       Quaternion axis = Quaternion::e1()) {
    AxisOperator op;
    op.dim = solver->dim();
    op.apply_T = [solver](const Eigen::VectorXd& v) { return solver->T().apply(v); };
    op.solve_Q = [solver, axis](double t, const Eigen::VectorXd& rhs) {
        return solver->solve(SpectralParam::imaginary(axis, t), rhs);
    };
    return op;
}

struct ScanRow {
    double t{0};
    double norm_Qinv{0};
    double norm_SL{0};
    double norm_SR{0};
    std::string error;  // empty unless the solve at this t failed
};

struct ResolventScan {
    std::vector<ScanRow> rows;
    double theta_hat{0};                  // sup_t t * max(||SL||, ||SR||)
    double sup_t2_Qinv{0};                // sup_t t^2 ||Q^{-1}||
    std::optional<double> theta_formula;  // 2 max(1, 1/sqrt(C)) when C known
    bool partial{false};
};

/// Scan the imaginary axis s = j t over log-spaced t, estimating the three
/// operator norms at each point. Mean-zero projection wraps the operators on
/// RobinType grids so the norms are taken on the space the estimates are
/// stated for.
inline ResolventScan resolvent_scan(ResolventSolver& solver, double t_min, double t_max,
                                    int n_points, const Quaternion& axis,
                                    std::optional<double> C = std::nullopt,
                                    double norm_rel_tol = 1e-6, int norm_max_iter = 400) {
    if (!(t_min > 0) || !(t_max > t_min) || n_points < 1)
        throw std::invalid_argument("resolvent_scan: need 0 < t_min < t_max, n_points >= 1");
    ResolventScan scan;
    if (C) scan.theta_formula = 2.0 * std::max(1.0, 1.0 / std::sqrt(*C));
    const bool proj = solver.mean_zero_active();
    const auto wrap = [&](std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f) {
        if (!proj) return f;
        return std::function<Eigen::VectorXd(const Eigen::VectorXd&)>(
            [f](const Eigen::VectorXd& v) {
                Eigen::VectorXd pv = v;
                project_mean_zero_inplace(pv);
                Eigen::VectorXd w = f(pv);
                project_mean_zero_inplace(w);
                return w;
            });
    };
    for (int p = 0; p < n_points; ++p) {
        const double f = n_points == 1 ? 0.0 : double(p) / double(n_points - 1);
        const double t = t_min * std::pow(t_max / t_min, f);
        ScanRow row;
        row.t = t;
        const SpectralParam s = SpectralParam::imaginary(axis, t);
        try {
            OpHandle qinv{solver.dim(),
                          wrap([&](const Eigen::VectorXd& v) { return solver.solve(s, v); }),
                          wrap([&](const Eigen::VectorXd& v) {
                              return solver.solve_transposed(s, v);
                          })};
            row.norm_Qinv = op_norm_estimate(qinv, norm_rel_tol, norm_max_iter).value;
            OpHandle sl{solver.dim(),
                        wrap([&](const Eigen::VectorXd& v) { return solver.apply_SL(s, v); }),
                        wrap([&](const Eigen::VectorXd& v) { return solver.apply_SL_T(s, v); })};
            row.norm_SL = op_norm_estimate(sl, norm_rel_tol, norm_max_iter).value;
            OpHandle sr{solver.dim(),
                        wrap([&](const Eigen::VectorXd& v) { return solver.apply_SR(s, v); }),
                        wrap([&](const Eigen::VectorXd& v) { return solver.apply_SR_T(s, v); })};
            row.norm_SR = op_norm_estimate(sr, norm_rel_tol, norm_max_iter).value;
            scan.theta_hat = std::max(scan.theta_hat, t * std::max(row.norm_SL, row.norm_SR));
            scan.sup_t2_Qinv = std::max(scan.sup_t2_Qinv, t * t * row.norm_Qinv);
        } catch (const SolveError& e) {
            row.error = e.what();
            scan.partial = true;
        }
        scan.rows.push_back(std::move(row));
    }
    return scan;
}

}  // namespace fracop
