#pragma once

#include <memory>
#include <optional>

#include "biotmix/assembly.hpp"
#include "biotmix/dense.hpp"
#include "biotmix/krylov.hpp"
#include "biotmix/ldlt.hpp"

namespace biotmix {

/// Data of the rank-one congruence that turns the weighted H(div) Riesz
/// matrix B into the clamped-norm matrix P = V^T B V, with
/// V = I + a w m^T and V^{-1} = I + b w m^T.
///
/// Both coefficients are evaluated through 1 - sqrt(1-rho) =
/// rho / (1 + sqrt(1-rho)), which is accurate uniformly in lambda; the
/// textbook quotient for b loses digits as lambda -> 0 and the direct
/// difference as lambda -> infinity. The rank-one scalars use compensated
/// dot products because b grows like sqrt(lambda), amplifying any
/// dot-product error.
struct RankOneData {
    double rho = 0.0;
    double a = 0.0;
    double b = 0.0;
    double sqrt_one_minus_rho = 1.0;
    Vector w, m;
    double sqrt_n_area = 0.0;

    Vector apply_v(const Vector& x) const {
        Vector y = x;
        axpy(a * dot_accurate(m, x), w, y);
        return y;
    }
    Vector apply_v_transpose(const Vector& x) const {
        Vector y = x;
        axpy(a * dot_accurate(w, x), m, y);
        return y;
    }
    Vector apply_vinv(const Vector& x) const {
        Vector y = x;
        axpy(b * dot_accurate(m, x), w, y);
        return y;
    }
    Vector apply_vinv_transpose(const Vector& x) const {
        Vector y = x;
        axpy(b * dot_accurate(w, x), m, y);
        return y;
    }

    /// The product operator (I + b w m^T)(I + a w m^T) in expanded form
    /// I + (a + b + a b w^T m) w m^T, using a + b sqrt(1-rho) for the
    /// coefficient. Sequential application of the two factors would lose
    /// ~ |b| * eps of the input, so the identity check uses this form.
    Vector apply_vinv_v(const Vector& x) const {
        const double s = a + b * sqrt_one_minus_rho;
        Vector y = x;
        axpy(s * dot_accurate(m, x), w, y);
        return y;
    }
};

inline RankOneData build_rank_one(const ParameterSet& params, Vector w, Vector m,
                                  double domain_area_value) {
    check_arg(w.size() == m.size(), "build_rank_one: w/m size mismatch");
    RankOneData r;
    r.rho = params.rho();
    r.sqrt_n_area = std::sqrt(ParameterSet::dim * domain_area_value);
    r.sqrt_one_minus_rho = std::sqrt(params.one_minus_rho());
    // 1 - sqrt(1-rho) without cancellation
    const double t = r.rho / ((1.0 + r.sqrt_one_minus_rho) * r.sqrt_n_area);
    r.a = -t;
    r.b = t / r.sqrt_one_minus_rho;
    r.w = std::move(w);
    r.m = std::move(m);
    return r;
}

/// Exact Riesz-map solve for the stress block. In the clamped configuration
/// it is wrapped in the rank-one congruence, realizing
/// P^{-1} = V^{-1} B^{-1} V^{-T}. The factorization is shared so that a
/// lambda sweep can reuse it (the Riesz matrix does not depend on lambda).
struct StressPrecond {
    bool clamped = false;
    std::shared_ptr<const SymFactor> riesz;
    std::optional<RankOneData> correction;

    Vector apply(const Vector& x) const {
        if (!correction) return ldlt_solve(*riesz, x);
        Vector y = correction->apply_vinv_transpose(x);
        y = ldlt_solve(*riesz, y);
        return correction->apply_vinv(y);
    }
};

inline StressPrecond build_stress_precond(const TriMesh& mesh, const StressBasisTable& basis,
                                          const BoundaryTags& tags, const DofMap& stress_dm,
                                          const ParameterSet& params) {
    CsrMatrix b = assemble_sigma_riesz(mesh, basis, params);
    apply_constraints(b, stress_dm.constrained);
    StressPrecond sp;
    sp.clamped = tags.clamped();
    sp.riesz = std::make_shared<SymFactor>(ldlt_factor(b));
    if (sp.clamped)
        sp.correction = build_rank_one(params, interpolate_identity(stress_dm, mesh),
                                       assemble_m_vector(mesh, basis), domain_area(mesh));
    return sp;
}

/// Block-diagonal preconditioner for the coupled systems: exact stress and
/// pressure Riesz solves, exact inverse diagonal mass for the
/// piecewise-constant displacement and rotation blocks.
struct BlockPrecond {
    BlockDims dims;
    StressPrecond stress;
    std::optional<SymFactor> pressure;
    Vector inv_mass_u, inv_mass_gamma;

    Vector apply(const Vector& r) const {
        check_arg(static_cast<int>(r.size()) == dims.total(), "BlockPrecond: size mismatch");
        Vector out(r.size());
        Vector rs(r.begin(), r.begin() + dims.nsigma);
        Vector zs = stress.apply(rs);
        std::copy(zs.begin(), zs.end(), out.begin());
        if (dims.np > 0) {
            check_state(pressure.has_value(), "BlockPrecond: missing pressure factor");
            Vector rp(r.begin() + dims.offset_p(), r.begin() + dims.offset_p() + dims.np);
            Vector zp = ldlt_solve(*pressure, rp);
            std::copy(zp.begin(), zp.end(), out.begin() + dims.offset_p());
        }
        for (int i = 0; i < dims.nu; ++i)
            out[dims.offset_u() + i] = inv_mass_u[i] * r[dims.offset_u() + i];
        for (int i = 0; i < dims.ngamma; ++i)
            out[dims.offset_gamma() + i] = inv_mass_gamma[i] * r[dims.offset_gamma() + i];
        return out;
    }

    LinOp as_linop() const {
        return [this](const Vector& r) { return apply(r); };
    }
};

inline BlockPrecond build_block_precond(const TriMesh& mesh, const StressBasisTable& basis,
                                        const BoundaryTags& tags, const FourFieldSpaces& spaces,
                                        const ParameterSet& params, bool include_pressure) {
    BlockPrecond bp;
    bp.dims.nsigma = spaces.stress.ndof;
    bp.dims.np = include_pressure ? spaces.pressure.ndof : 0;
    bp.dims.nu = spaces.displacement.ndof;
    bp.dims.ngamma = spaces.rotation.ndof;
    bp.stress = build_stress_precond(mesh, basis, tags, spaces.stress, params);
    if (include_pressure)
        bp.pressure = ldlt_factor(assemble_pressure_block(mesh, spaces.pressure, params));
    bp.inv_mass_u = displacement_mass_diag(mesh);
    for (double& v : bp.inv_mass_u) v = 1.0 / v;
    bp.inv_mass_gamma = rotation_mass_diag(mesh);
    for (double& v : bp.inv_mass_gamma) v = 1.0 / v;
    return bp;
}

/// Lanczos estimate of the spectral extremes of the preconditioned operator,
/// run in the preconditioner inner product with full reorthogonalization.
/// For an SPD pair the condition number is hi/lo; for indefinite operators
/// it is max|eig| / min|eig|.
struct CondEstimate {
    double eig_min = 0.0;
    double eig_max = 0.0;
    double cond = 0.0;
    bool breakdown = false;
    int iterations = 0;
};

inline CondEstimate condition_estimate(const LinOp& op, const LinOp& precond, int n, int iters,
                                       uint64_t seed = 12345) {
    check_arg(n > 0 && iters > 0, "condition_estimate: bad sizes");
    CondEstimate est;
    Vector r = seeded_random_vector(n, seed);
    Vector z = precond(r);
    double beta = std::sqrt(std::max(0.0, dot(r, z)));
    check_state(beta > 0.0, "condition_estimate: zero start vector");
    scale(1.0 / beta, r);
    scale(1.0 / beta, z);

    std::vector<Vector> ts = {r}, zs = {z};
    Vector alphas, betas;  // betas[k] couples step k and k+1
    double scale_ref = 0.0;

    for (int k = 0; k < iters; ++k) {
        Vector s = op(zs[k]);
        const double alpha = dot(zs[k], s);
        alphas.push_back(alpha);
        scale_ref = std::max(scale_ref, std::abs(alpha));
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i] -= alpha * ts[k][i];
            if (k > 0) s[i] -= betas[k - 1] * ts[k - 1][i];
        }
        // full reorthogonalization in the preconditioner inner product
        for (std::size_t j = 0; j < ts.size(); ++j) {
            const double proj = dot(zs[j], s);
            axpy(-proj, ts[j], s);
        }
        Vector zn = precond(s);
        const double beta_next = std::sqrt(std::max(0.0, dot(s, zn)));
        est.iterations = k + 1;
        if (beta_next <= 1e-12 * std::max(scale_ref, 1e-300)) {
            est.breakdown = true;
            break;
        }
        if (k + 1 == iters) break;
        betas.push_back(beta_next);
        scale(1.0 / beta_next, s);
        scale(1.0 / beta_next, zn);
        ts.push_back(std::move(s));
        zs.push_back(std::move(zn));
    }

    const int k = static_cast<int>(alphas.size());
    DenseMatrix t(k, k);
    for (int i = 0; i < k; ++i) {
        t(i, i) = alphas[i];
        if (i + 1 < k) {
            t(i, i + 1) = betas[i];
            t(i + 1, i) = betas[i];
        }
    }
    const Vector eig = jacobi_eigenvalues(t);
    est.eig_min = eig.front();
    est.eig_max = eig.back();
    if (est.eig_min > 0.0) {
        est.cond = est.eig_max / est.eig_min;
    } else {
        double amin = std::numeric_limits<double>::max(), amax = 0.0;
        for (double e : eig) {
            amin = std::min(amin, std::abs(e));
            amax = std::max(amax, std::abs(e));
        }
        est.cond = amax / amin;
    }
    return est;
}

} // namespace biotmix
