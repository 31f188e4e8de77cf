#pragma once

#include <string>

#include "biotmix/precond.hpp"

namespace biotmix {

// ---------------------------------------------------------------------------
// Iteration-count experiments. Right-hand sides and initial guesses are
// per-dof uniform(-1,1), seeded per sweep cell: cell k of a run with user
// seed s draws from mix_seed(s, 2k) for the rhs and mix_seed(s, 2k+1) for
// the initial guess. Identical invocations produce identical tables.
// ---------------------------------------------------------------------------

struct CellResult {
    int case_id = 0;
    std::string bc;
    int n = 0;
    double lambda = 0.0;
    double alpha = 0.0;
    double kappa = 0.0;
    int iterations = 0;
    bool converged = false;
    double final_residual = 0.0;
    KrylovReport report;
};

namespace detail {

inline Vector masked_random(int ndof, uint64_t seed, const std::vector<uint8_t>& mask) {
    Vector v = seeded_random_vector(ndof, seed);
    for (int i = 0; i < ndof; ++i)
        if (mask[i]) v[i] = 0.0;
    return v;
}

inline const char* bc_name(BcMode mode) {
    return mode == BcMode::clamped ? "clamped" : "mixed";
}

} // namespace detail

/// Weighted H(div) inner-product systems solved with PCG; plain exact Riesz
/// inverse for the traction boundary, rank-one corrected for the clamped one.
inline std::vector<CellResult> run_case1(BcMode bc, const std::vector<int>& n_list,
                                         const std::vector<double>& lambda_list,
                                         double tol = 1e-9, int maxiter = 500,
                                         uint64_t seed = 0) {
    std::vector<CellResult> results;
    uint64_t ordinal = 0;
    for (int n : n_list) {
        const TriMesh mesh = build_unit_square_mesh(n);
        const BoundaryTags tags = classify_boundary(mesh, bc);
        const StressBasisTable basis(mesh);
        const DofMap sdm = build_space(mesh, tags, SpaceKind::stress);

        CsrMatrix riesz = assemble_sigma_riesz(mesh, basis, ParameterSet::make(0.5, 1.0));
        apply_constraints(riesz, sdm.constrained);
        const auto factor = std::make_shared<const SymFactor>(ldlt_factor(riesz));
        const CsrMatrix divdiv = assemble_divdiv(mesh, basis);
        Vector w, m;
        if (tags.clamped()) {
            w = interpolate_identity(sdm, mesh);
            m = assemble_m_vector(mesh, basis);
        }

        for (double lambda : lambda_list) {
            const ParameterSet params = ParameterSet::make(0.5, lambda);
            CsrMatrix op_mat = csr_add(assemble_A(mesh, basis, params), 1.0, divdiv, 1.0);
            apply_constraints(op_mat, sdm.constrained);

            StressPrecond sp;
            sp.clamped = tags.clamped();
            sp.riesz = factor;
            if (sp.clamped) sp.correction = build_rank_one(params, w, m, domain_area(mesh));

            const Vector rhs = detail::masked_random(sdm.ndof, mix_seed(seed, 2 * ordinal),
                                                     sdm.constrained);
            const Vector x0 = detail::masked_random(sdm.ndof, mix_seed(seed, 2 * ordinal + 1),
                                                    sdm.constrained);
            const LinOp op = [&](const Vector& x) { return spmv(op_mat, x); };
            const LinOp pre = [&](const Vector& x) { return sp.apply(x); };
            auto [x, rep] = pcg(op, pre, rhs, x0, tol, maxiter);

            CellResult cell;
            cell.case_id = 1;
            cell.bc = detail::bc_name(bc);
            cell.n = n;
            cell.lambda = lambda;
            cell.iterations = rep.iterations;
            cell.converged = rep.converged;
            cell.final_residual = rep.residual_history.back();
            cell.report = std::move(rep);
            results.push_back(std::move(cell));
            ++ordinal;
        }
    }
    return results;
}

/// Mixed linear elasticity with weakly enforced symmetry, clamped boundary,
/// solved with PMINRES and the block-diagonal preconditioner.
inline std::vector<CellResult> run_case2(const std::vector<int>& n_list,
                                         const std::vector<double>& lambda_list,
                                         double tol = 1e-9, int maxiter = 500,
                                         uint64_t seed = 0) {
    std::vector<CellResult> results;
    uint64_t ordinal = 0;
    for (int n : n_list) {
        const TriMesh mesh = build_unit_square_mesh(n);
        const BoundaryTags tags = classify_boundary(mesh, BcMode::clamped);
        const StressBasisTable basis(mesh);
        const FourFieldSpaces spaces = build_all_spaces(mesh, tags);

        const CsrMatrix riesz = assemble_sigma_riesz(mesh, basis, ParameterSet::make(0.5, 1.0));
        const auto factor = std::make_shared<const SymFactor>(ldlt_factor(riesz));
        const Vector w = interpolate_identity(spaces.stress, mesh);
        const Vector m = assemble_m_vector(mesh, basis);

        for (double lambda : lambda_list) {
            const ParameterSet params = ParameterSet::make(0.5, lambda);
            BlockSystem sys = assemble_system(mesh, basis, spaces, params, false);
            set_rhs(sys, {}, seeded_random_vector(sys.dims.nu, mix_seed(seed, 2 * ordinal)));

            BlockPrecond bp;
            bp.dims = sys.dims;
            bp.stress = {true, factor, build_rank_one(params, w, m, domain_area(mesh))};
            bp.inv_mass_u = sys.mass_u_diag;
            for (double& v : bp.inv_mass_u) v = 1.0 / v;
            bp.inv_mass_gamma = sys.mass_gamma_diag;
            for (double& v : bp.inv_mass_gamma) v = 1.0 / v;

            const Vector x0 = detail::masked_random(
                sys.dims.total(), mix_seed(seed, 2 * ordinal + 1), sys.constrained);
            const LinOp op = [&](const Vector& x) { return spmv(sys.full, x); };
            auto [x, rep] = pminres(op, bp.as_linop(), sys.rhs, x0, tol, maxiter);

            CellResult cell;
            cell.case_id = 2;
            cell.bc = "clamped";
            cell.n = n;
            cell.lambda = lambda;
            cell.iterations = rep.iterations;
            cell.converged = rep.converged;
            cell.final_residual = rep.residual_history.back();
            cell.report = std::move(rep);
            results.push_back(std::move(cell));
            ++ordinal;
        }
    }
    return results;
}

/// Full four-field consolidation system, clamped elasticity boundary and
/// pure-Neumann pinned pressure; PMINRES with the block preconditioner.
/// Case 4 is the same sweep with the y-banded conductivity field.
inline std::vector<CellResult> run_case3(const std::vector<int>& n_list,
                                         const std::vector<double>& lambda_list,
                                         const std::vector<double>& alpha_list,
                                         const std::vector<double>& kappa_list,
                                         double tol = 1e-9, int maxiter = 500,
                                         uint64_t seed = 0, bool banded_kappa = false) {
    std::vector<CellResult> results;
    uint64_t ordinal = 0;
    for (int n : n_list) {
        const TriMesh mesh = build_unit_square_mesh(n);
        const BoundaryTags tags = classify_boundary(mesh, BcMode::clamped);
        const StressBasisTable basis(mesh);
        const FourFieldSpaces spaces = build_all_spaces(mesh, tags);

        const CsrMatrix riesz = assemble_sigma_riesz(mesh, basis, ParameterSet::make(0.5, 1.0));
        const auto factor = std::make_shared<const SymFactor>(ldlt_factor(riesz));
        const Vector w = interpolate_identity(spaces.stress, mesh);
        const Vector m = assemble_m_vector(mesh, basis);

        for (double kappa : kappa_list)
            for (double alpha : alpha_list)
                for (double lambda : lambda_list) {
                    const ParameterSet params =
                        ParameterSet::make(0.5, lambda, alpha, kappa, banded_kappa);
                    BlockSystem sys = assemble_system(mesh, basis, spaces, params, true);
                    set_rhs(sys,
                            seeded_random_vector(sys.dims.np, mix_seed(seed, 2 * ordinal)),
                            seeded_random_vector(sys.dims.nu,
                                                 mix_seed(seed, 2 * ordinal) ^ 0x5a5au));

                    BlockPrecond bp;
                    bp.dims = sys.dims;
                    bp.stress = {true, factor,
                                 build_rank_one(params, w, m, domain_area(mesh))};
                    bp.pressure = ldlt_factor(sys.pressure);
                    bp.inv_mass_u = sys.mass_u_diag;
                    for (double& v : bp.inv_mass_u) v = 1.0 / v;
                    bp.inv_mass_gamma = sys.mass_gamma_diag;
                    for (double& v : bp.inv_mass_gamma) v = 1.0 / v;

                    const Vector x0 = detail::masked_random(
                        sys.dims.total(), mix_seed(seed, 2 * ordinal + 1), sys.constrained);
                    const LinOp op = [&](const Vector& x) { return spmv(sys.full, x); };
                    auto [x, rep] = pminres(op, bp.as_linop(), sys.rhs, x0, tol, maxiter);

                    CellResult cell;
                    cell.case_id = banded_kappa ? 4 : 3;
                    cell.bc = "clamped";
                    cell.n = n;
                    cell.lambda = lambda;
                    cell.alpha = alpha;
                    cell.kappa = kappa;
                    cell.iterations = rep.iterations;
                    cell.converged = rep.converged;
                    cell.final_residual = rep.residual_history.back();
                    cell.report = std::move(rep);
                    results.push_back(std::move(cell));
                    ++ordinal;
                }
    }
    return results;
}

inline std::vector<CellResult> run_case4(const std::vector<int>& n_list,
                                         const std::vector<double>& lambda_list,
                                         const std::vector<double>& alpha_list,
                                         const std::vector<double>& kappa_list,
                                         double tol = 1e-9, int maxiter = 500,
                                         uint64_t seed = 0) {
    return run_case3(n_list, lambda_list, alpha_list, kappa_list, tol, maxiter, seed, true);
}

// ---------------------------------------------------------------------------
// Table emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0e", v);
    return buf;
}

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Deterministic table of a sweep. "csv" emits one row per cell; "markdown"
/// mirrors the diagonal-header layout with one column per mesh size and one
/// row per parameter combination (grouped by kappa and alpha when present).
inline std::string emit_table(const std::vector<CellResult>& results,
                              const std::string& format) {
    check_arg(format == "csv" || format == "markdown", "emit_table: format must be csv or markdown");
    std::string out;
    if (format == "csv") {
        out += "case,bc,N,lambda,alpha,kappa,iterations,converged,final_residual\n";
        for (const CellResult& c : results) {
            out += std::to_string(c.case_id) + "," + c.bc + "," + std::to_string(c.n) + "," +
                   detail::format_full(c.lambda) + "," + detail::format_full(c.alpha) + "," +
                   detail::format_full(c.kappa) + "," + std::to_string(c.iterations) + "," +
                   (c.converged ? "true" : "false") + "," +
                   detail::format_full(c.final_residual) + "\n";
        }
        return out;
    }

    std::vector<int> ns;
    for (const CellResult& c : results)
        if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
    std::sort(ns.begin(), ns.end());

    struct Key {
        double kappa, alpha, lambda;
        bool operator==(const Key& o) const {
            return kappa == o.kappa && alpha == o.alpha && lambda == o.lambda;
        }
    };
    std::vector<Key> keys;
    bool grouped = false;
    for (const CellResult& c : results) {
        const Key k{c.kappa, c.alpha, c.lambda};
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
        if (c.case_id >= 3) grouped = true;
    }

    if (grouped) out += "| kappa | alpha | lambda |";
    else out += "| lambda \\ N |";
    for (int n : ns) out += " " + std::to_string(n) + " |";
    out += "\n|";
    for (int i = 0; i < (grouped ? 3 : 1) + static_cast<int>(ns.size()); ++i) out += "---|";
    out += "\n";
    for (const Key& k : keys) {
        if (grouped)
            out += "| " + detail::format_param(k.kappa) + " | " +
                   detail::format_param(k.alpha) + " | " + detail::format_param(k.lambda) +
                   " |";
        else
            out += "| " + detail::format_param(k.lambda) + " |";
        for (int n : ns) {
            std::string cell = " |";
            for (const CellResult& c : results)
                if (c.n == n && Key{c.kappa, c.alpha, c.lambda} == k) {
                    cell = " " + std::to_string(c.iterations) +
                           (c.converged ? std::string() : std::string("!")) + " |";
                    break;
                }
            out += cell;
        }
        out += "\n";
    }
    return out;
}

/// Per-iteration residual histories behind every table cell.
inline std::string emit_dump(const std::vector<CellResult>& results) {
    std::string out = "case,bc,N,lambda,alpha,kappa,iteration,preconditioned_residual\n";
    for (const CellResult& c : results)
        for (std::size_t k = 0; k < c.report.residual_history.size(); ++k)
            out += std::to_string(c.case_id) + "," + c.bc + "," + std::to_string(c.n) + "," +
                   detail::format_full(c.lambda) + "," + detail::format_full(c.alpha) + "," +
                   detail::format_full(c.kappa) + "," + std::to_string(k) + "," +
                   detail::format_full(c.report.residual_history[k]) + "\n";
    return out;
}

} // namespace biotmix
