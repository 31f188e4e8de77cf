#pragma once

#include <functional>

#include "biotmix/core.hpp"

namespace biotmix {

using LinOp = std::function<Vector(const Vector&)>;

/// Deterministic uniform(-1,1) vector. The engine is the standard-specified
/// mt19937_64 and the bit-to-double mapping is explicit, so results are
/// reproducible across platforms.
inline Vector seeded_random_vector(int ndof, uint64_t seed) {
    check_arg(ndof >= 0, "seeded_random_vector: negative size");
    std::mt19937_64 rng(seed);
    Vector v(ndof);
    for (int i = 0; i < ndof; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
        v[i] = 2.0 * u - 1.0;
    }
    return v;
}

/// Convergence record of one Krylov solve. residual_history[k] is the
/// square root of the relative preconditioned residual
/// sqrt((B r_k, r_k) / (B r_0, r_0)), so it starts at 1.
struct KrylovReport {
    int iterations = 0;
    std::vector<double> residual_history;
    bool converged = false;
    double tol = 0.0;
    double final_true_residual = -1.0;  // recomputed from b - A x at exit
};

namespace detail {

inline double true_preconditioned_residual(const LinOp& op, const LinOp& precond,
                                           const Vector& rhs, const Vector& x) {
    Vector r = rhs;
    const Vector ax = op(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
    const Vector z = precond(r);
    return std::sqrt(std::max(0.0, dot(z, r)));
}

} // namespace detail

/// Preconditioned conjugate gradients. Both op and precond must be SPD; a
/// detected negative curvature direction aborts with an error.
inline std::pair<Vector, KrylovReport> pcg(const LinOp& op, const LinOp& precond,
                                           const Vector& rhs, const Vector& x0, double tol,
                                           int maxiter) {
    const std::size_t n = rhs.size();
    check_arg(x0.size() == n, "pcg: x0 size mismatch");
    KrylovReport rep;
    rep.tol = tol;
    rep.residual_history.push_back(1.0);

    Vector x = x0;
    Vector r = rhs;
    {
        const Vector ax = op(x);
        for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
    }
    Vector z = precond(r);
    double rz = dot(r, z);
    const double rz0 = rz;
    if (rz0 <= 0.0) {  // zero initial residual
        rep.converged = true;
        rep.final_true_residual = 0.0;
        return {x, rep};
    }
    Vector p = z;
    for (int it = 1; it <= maxiter; ++it) {
        const Vector q = op(p);
        const double pq = dot(p, q);
        check_state(pq > 0.0, "pcg: operator is not positive definite");
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        z = precond(r);
        const double rz_next = dot(r, z);
        const double rel = std::sqrt(std::max(0.0, rz_next) / rz0);
        rep.residual_history.push_back(rel);
        rep.iterations = it;
        if (rel <= tol) {
            rep.converged = true;
            break;
        }
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rep.final_true_residual =
        detail::true_preconditioned_residual(op, precond, rhs, x) / std::sqrt(rz0);
    return {x, rep};
}

/// Preconditioned minimal residual method for symmetric (possibly
/// indefinite) operators with an SPD preconditioner. Minimizes the
/// preconditioner-weighted residual norm, which is exactly the quantity in
/// the stopping rule. The recurrence residual is cross-checked against the
/// true residual every 25 iterations.
inline std::pair<Vector, KrylovReport> pminres(const LinOp& op, const LinOp& precond,
                                               const Vector& rhs, const Vector& x0, double tol,
                                               int maxiter) {
    const std::size_t n = rhs.size();
    check_arg(x0.size() == n, "pminres: x0 size mismatch");
    KrylovReport rep;
    rep.tol = tol;
    rep.residual_history.push_back(1.0);

    Vector x = x0;
    Vector r = rhs;
    {
        const Vector ax = op(x);
        for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
    }
    Vector z = precond(r);
    const double beta0 = std::sqrt(std::max(0.0, dot(r, z)));
    if (beta0 == 0.0) {
        rep.converged = true;
        rep.final_true_residual = 0.0;
        return {x, rep};
    }

    // normalized Lanczos pair: t_k (residual space), z_k = P t_k
    Vector t = r, t_prev(n, 0.0);
    scale(1.0 / beta0, t);
    scale(1.0 / beta0, z);
    Vector w(n, 0.0), w_prev(n, 0.0);
    double beta = 0.0;  // beta_k, zero for the first step
    double eta = beta0;
    double c = 1.0, c_old = 1.0, s = 0.0, s_old = 0.0;

    for (int it = 1; it <= maxiter; ++it) {
        // s_vec = A z_k - alpha_k t_k - beta_k t_{k-1}
        Vector s_vec = op(z);
        const double alpha = dot(z, s_vec);
        for (std::size_t i = 0; i < n; ++i)
            s_vec[i] -= alpha * t[i] + beta * t_prev[i];
        Vector z_next = precond(s_vec);
        const double beta_next = std::sqrt(std::max(0.0, dot(s_vec, z_next)));

        // QR update of the tridiagonal via Givens rotations
        const double delta = c * alpha - c_old * s * beta;
        const double rho1 = std::sqrt(delta * delta + beta_next * beta_next);
        const double rho2 = s * alpha + c_old * c * beta;
        const double rho3 = s_old * beta;
        check_state(rho1 > 0.0, "pminres: breakdown (zero rotation)");
        const double c_next = delta / rho1;
        const double s_next = beta_next / rho1;

        for (std::size_t i = 0; i < n; ++i) {
            const double wi = (z[i] - rho3 * w_prev[i] - rho2 * w[i]) / rho1;
            w_prev[i] = w[i];
            w[i] = wi;
            x[i] += c_next * eta * wi;
        }
        eta = -s_next * eta;

        if (beta_next > 0.0) {
            scale(1.0 / beta_next, s_vec);
            scale(1.0 / beta_next, z_next);
        }
        t_prev = t;
        t = s_vec;
        z = z_next;
        c_old = c;
        s_old = s;
        c = c_next;
        s = s_next;
        beta = beta_next;

        double rel = std::abs(eta) / beta0;
        if (it % 25 == 0) {
            // guard against recurrence drift
            rel = detail::true_preconditioned_residual(op, precond, rhs, x) / beta0;
        }
        rep.residual_history.push_back(rel);
        rep.iterations = it;
        if (rel <= tol) {
            rep.converged = true;
            break;
        }
        if (beta == 0.0) break;  // invariant subspace reached
    }
    rep.final_true_residual =
        detail::true_preconditioned_residual(op, precond, rhs, x) / beta0;
    if (!rep.converged && rep.final_true_residual <= tol) rep.converged = true;
    return {x, rep};
}

} // namespace biotmix
