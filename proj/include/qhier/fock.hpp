#pragma once

// Second quantization onto occupation-number Fock spaces. Bosonic spaces are
// truncated by total excitation N_tot, so fixed-number sectors stay exactly
// closed under number-conserving quadratic forms and every algebraic identity
// holds exactly on the "safe sector" of states whose image cannot cross the
// cutoff. Fermionic spaces (dim 2^d) are exact; the ladder matrices use the
// Jordan-Wigner sign purely as a faithful matrix representation of the CAR
// algebra, with mode order equal to basis order.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qhier/core.hpp"

namespace qhier::fock {

enum class Statistics { boson, fermion };

inline std::string to_string(Statistics s)
{
    return s == Statistics::boson ? "boson" : "fermion";
}

enum class LadderKind { annihilate, create };

class FockSpace {
public:
    /// Basis ordering is deterministic: graded by total occupation,
    /// lexicographic within a grade.
    FockSpace(int modes, Statistics statistics, int cutoff = 0)
    {
        if (modes < 1)
            throw argument_error("fock space needs at least one mode");
        if (statistics == Statistics::boson && cutoff < 1)
            throw argument_error("bosonic fock space needs cutoff >= 1");
        auto data = std::make_shared<Data>();
        data->modes = modes;
        data->statistics = statistics;
        data->cutoff = statistics == Statistics::boson ? cutoff : 1;

        const int max_total = statistics == Statistics::boson ? cutoff : modes;
        std::vector<int> occ(static_cast<std::size_t>(modes), 0);
        for (int total = 0; total <= max_total; ++total)
            enumerate_grade(*data, occ, 0, total);
        check_dimension(static_cast<std::int64_t>(data->basis.size()), "fock space");
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(data->basis.size()); ++i)
            data->index[data->basis[static_cast<std::size_t>(i)]] = i;

        build_annihilators(*data);
        d_ = std::move(data);
    }

    int modes() const { return d_->modes; }
    Statistics statistics() const { return d_->statistics; }
    int cutoff() const { return d_->cutoff; }
    std::int64_t dim() const { return static_cast<std::int64_t>(d_->basis.size()); }

    const std::vector<int>& occupation(std::int64_t idx) const
    {
        return d_->basis[static_cast<std::size_t>(idx)];
    }

    /// -1 when the occupation vector is not in the (possibly truncated) basis.
    std::int64_t index_of(const std::vector<int>& occ) const
    {
        auto it = d_->index.find(occ);
        return it == d_->index.end() ? -1 : it->second;
    }

    int total(std::int64_t idx) const
    {
        int t = 0;
        for (int n : occupation(idx))
            t += n;
        return t;
    }

    const Matrix& annihilator(int mode) const
    {
        if (mode < 0 || mode >= modes())
            throw argument_error("mode " + std::to_string(mode) + " out of range");
        return d_->annihilators[static_cast<std::size_t>(mode)];
    }

    Matrix creator(int mode) const { return annihilator(mode).adjoint(); }

    std::int64_t vacuum_index() const { return 0; }

    std::int64_t single_excitation_index(int mode) const
    {
        std::vector<int> occ(static_cast<std::size_t>(modes()), 0);
        occ[static_cast<std::size_t>(mode)] = 1;
        return index_of(occ);
    }

    std::vector<std::int64_t> sector(int total) const
    {
        std::vector<std::int64_t> out;
        for (std::int64_t i = 0; i < dim(); ++i)
            if (this->total(i) == total)
                out.push_back(i);
        return out;
    }

    std::vector<std::int64_t> sector_up_to(int max_total) const
    {
        std::vector<std::int64_t> out;
        for (std::int64_t i = 0; i < dim(); ++i)
            if (total(i) <= max_total)
                out.push_back(i);
        return out;
    }

    /// Columns on which truncated identities of number transfer `deg` hold
    /// exactly: everything for fermions, total <= cutoff - deg for bosons.
    std::vector<std::int64_t> safe_columns(int deg = 1) const
    {
        if (statistics() == Statistics::fermion) {
            std::vector<std::int64_t> all(static_cast<std::size_t>(dim()));
            for (std::int64_t i = 0; i < dim(); ++i)
                all[static_cast<std::size_t>(i)] = i;
            return all;
        }
        return sector_up_to(cutoff() - deg);
    }

    bool same_space(const FockSpace& other) const { return d_ == other.d_; }

private:
    struct Data {
        int modes = 0;
        Statistics statistics = Statistics::boson;
        int cutoff = 0;
        std::vector<std::vector<int>> basis;
        std::map<std::vector<int>, std::int64_t> index;
        std::vector<Matrix> annihilators;
    };

    static void enumerate_grade(Data& data, std::vector<int>& occ, int mode, int remaining)
    {
        if (mode == data.modes) {
            if (remaining == 0)
                data.basis.push_back(occ);
            return;
        }
        int top = data.statistics == Statistics::fermion ? std::min(1, remaining)
                                                         : remaining;
        for (int n = 0; n <= top; ++n) {
            occ[static_cast<std::size_t>(mode)] = n;
            enumerate_grade(data, occ, mode + 1, remaining - n);
        }
        occ[static_cast<std::size_t>(mode)] = 0;
    }

    static void build_annihilators(Data& data)
    {
        const std::int64_t dim = static_cast<std::int64_t>(data.basis.size());
        data.annihilators.reserve(static_cast<std::size_t>(data.modes));
        for (int mode = 0; mode < data.modes; ++mode) {
            Matrix a = Matrix::Zero(dim, dim);
            for (std::int64_t col = 0; col < dim; ++col) {
                const auto& occ = data.basis[static_cast<std::size_t>(col)];
                int n = occ[static_cast<std::size_t>(mode)];
                if (n == 0)
                    continue;
                std::vector<int> lowered = occ;
                --lowered[static_cast<std::size_t>(mode)];
                std::int64_t row = data.index.at(lowered);
                if (data.statistics == Statistics::boson) {
                    a(row, col) = std::sqrt(static_cast<double>(n));
                } else {
                    int sign = 0;
                    for (int j = 0; j < mode; ++j)
                        sign += occ[static_cast<std::size_t>(j)];
                    a(row, col) = (sign % 2 == 0) ? 1.0 : -1.0;
                }
            }
            data.annihilators.push_back(std::move(a));
        }
    }

    std::shared_ptr<const Data> d_;
};

inline FockSpace build_fock_space(int modes, Statistics statistics, int cutoff = 0)
{
    return FockSpace(modes, statistics, cutoff);
}

/// Operator on a Fock space; quadratic forms psi^dag M psi keep their
/// first-quantized coefficient matrix so brackets can close analytically.
struct FockOperator {
    FockSpace space;
    Operator matrix;
    std::optional<Matrix> quadratic_source;

    bool is_quadratic_form() const { return quadratic_source.has_value(); }

    bool number_conserving(double tol = 1e-12) const;
};

inline FockOperator ladder_matrix(const FockSpace& space, int mode, LadderKind kind)
{
    Matrix m = kind == LadderKind::annihilate ? space.annihilator(mode)
                                              : space.creator(mode);
    return {space, Operator(std::move(m)), std::nullopt};
}

/// Total number operator; diagonal with exact integer entries.
inline FockOperator number_operator(const FockSpace& space)
{
    Vector diag(space.dim());
    for (std::int64_t i = 0; i < space.dim(); ++i)
        diag(i) = static_cast<double>(space.total(i));
    return {space, Operator(Matrix(diag.asDiagonal())), Matrix::Identity(space.modes(), space.modes())};
}

inline bool FockOperator::number_conserving(double tol) const
{
    Matrix n = number_operator(space).matrix.mat();
    return max_abs(matrix.mat() * n - n * matrix.mat()) <= tol;
}

/// psi^dag M psi for an arbitrary (not necessarily hermitian) coefficient
/// matrix. Internal building block for brackets and residuals.
inline FockOperator quadratic_form(const FockSpace& space, const Matrix& coeff)
{
    if (coeff.rows() != space.modes() || coeff.cols() != space.modes())
        throw argument_error("quadratic_form: coefficient matrix must be modes x modes");
    Matrix acc = Matrix::Zero(space.dim(), space.dim());
    for (int i = 0; i < space.modes(); ++i) {
        Matrix left = space.creator(i);
        for (int j = 0; j < space.modes(); ++j) {
            cxd c = coeff(i, j);
            if (c == cxd(0.0, 0.0))
                continue;
            acc += c * (left * space.annihilator(j));
        }
    }
    return {space, Operator(std::move(acc)), coeff};
}

inline FockOperator second_quantize_hamiltonian(const Operator& h, const FockSpace& space)
{
    if (h.dim() != space.modes())
        throw argument_error("second_quantize_hamiltonian: matrix dim " +
                             std::to_string(h.dim()) + " must equal mode count " +
                             std::to_string(space.modes()));
    require_hermitian(h, "second_quantize_hamiltonian");
    return quadratic_form(space, h.mat());
}

inline FockOperator second_quantize_observable(const Operator& o, const FockSpace& space)
{
    if (o.dim() != space.modes())
        throw argument_error("second_quantize_observable: dimension mismatch");
    require_hermitian(o, "second_quantize_observable");
    return quadratic_form(space, o.mat());
}

/// Max |entry| over the listed columns (all rows).
inline double residual_on_columns(const Matrix& m, const std::vector<std::int64_t>& cols)
{
    double worst = 0.0;
    for (std::int64_t c : cols)
        worst = std::max(worst, m.col(c).cwiseAbs().maxCoeff());
    return worst;
}

struct SectorResidual {
    double restricted = 0.0; // on the safe sector
    double full = 0.0;       // unprojected, includes the truncation boundary
};

struct StatisticsCheck {
    std::string relation;
    int i = 0;
    int j = 0;
    SectorResidual residual;
};

struct StatisticsReport {
    Statistics statistics = Statistics::boson;
    int modes = 0;
    int cutoff = 0;
    bool boundary_artifact_expected = false;
    std::vector<StatisticsCheck> checks;

    double max_restricted() const
    {
        double w = 0.0;
        for (const auto& c : checks)
            w = std::max(w, c.residual.restricted);
        return w;
    }
    double max_full() const
    {
        double w = 0.0;
        for (const auto& c : checks)
            w = std::max(w, c.residual.full);
        return w;
    }
};

/// Residuals of every (anti)commutation relation. Fermions are checked on the
/// full space; bosons restricted to total <= N_tot - 1, with the unprojected
/// boundary violation reported alongside.
inline StatisticsReport check_statistics(const FockSpace& space)
{
    StatisticsReport report;
    report.statistics = space.statistics();
    report.modes = space.modes();
    report.cutoff = space.statistics() == Statistics::boson ? space.cutoff() : -1;
    report.boundary_artifact_expected = space.statistics() == Statistics::boson;

    auto cols = space.safe_columns(1);
    const bool fermion = space.statistics() == Statistics::fermion;
    const std::int64_t dim = space.dim();

    auto push = [&](const std::string& rel, int i, int j, const Matrix& m) {
        SectorResidual r;
        r.restricted = residual_on_columns(m, cols);
        r.full = m.size() ? max_abs(m) : 0.0;
        report.checks.push_back({rel, i, j, r});
    };

    for (int i = 0; i < space.modes(); ++i) {
        for (int j = i; j < space.modes(); ++j) {
            const Matrix& ai = space.annihilator(i);
            const Matrix& aj = space.annihilator(j);
            Matrix ci = space.creator(i);
            Matrix cj = space.creator(j);
            if (fermion) {
                push("{a_i,a_j}", i, j, Matrix(ai * aj + aj * ai));
                push("{a+_i,a+_j}", i, j, Matrix(ci * cj + cj * ci));
                Matrix mixed = ai * cj + cj * ai;
                if (i == j)
                    mixed -= Matrix::Identity(dim, dim);
                push("{a_i,a+_j}", i, j, mixed);
            } else {
                push("[a_i,a_j]", i, j, Matrix(ai * aj - aj * ai));
                push("[a+_i,a+_j]", i, j, Matrix(ci * cj - cj * ci));
                Matrix mixed = ai * cj - cj * ai;
                if (i == j)
                    mixed -= Matrix::Identity(dim, dim);
                push("[a_i,a+_j]", i, j, mixed);
                if (i != j) {
                    Matrix mixed2 = aj * ci - ci * aj;
                    push("[a_j,a+_i]", j, i, mixed2);
                }
            }
        }
    }
    return report;
}

/// Restriction of a number-conserving operator to the one-excitation sector,
/// in mode order; recovers the first-quantized matrix.
inline Operator one_excitation_block(const FockOperator& hh)
{
    if (!hh.number_conserving(1e-12))
        throw validation_error("one_excitation_block: operator is not number-conserving");
    const int d = hh.space.modes();
    Matrix out(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out(i, j) = hh.matrix(hh.space.single_excitation_index(i),
                                  hh.space.single_excitation_index(j));
    return Operator(std::move(out));
}

/// chi = sum_i psi_i |1_i>, the one-excitation Fock image of a first-level
/// state; satisfies <chi|HH|chi> = <psi|H|psi>.
inline StateVector one_excitation_image(const FockSpace& space, const StateVector& psi)
{
    if (psi.dim() != space.modes())
        throw argument_error("one_excitation_image: dimension mismatch");
    Vector chi = Vector::Zero(space.dim());
    for (int i = 0; i < space.modes(); ++i)
        chi(space.single_excitation_index(i)) = psi(i);
    return StateVector(std::move(chi));
}

/// max_i || [a_i, HH] - sum_j H_ij a_j || with HH = psi^dag H psi, evaluated
/// on the safe sector (full space for fermions); boundary value reported too.
inline SectorResidual heisenberg_field_residual(const FockSpace& space, const Operator& h)
{
    FockOperator hh = second_quantize_hamiltonian(h, space);
    auto cols = space.safe_columns(1);
    SectorResidual out;
    for (int i = 0; i < space.modes(); ++i) {
        Matrix lhs = space.annihilator(i) * hh.matrix.mat() -
                     hh.matrix.mat() * space.annihilator(i);
        for (int j = 0; j < space.modes(); ++j)
            lhs -= h(i, j) * space.annihilator(j);
        out.restricted = std::max(out.restricted, residual_on_columns(lhs, cols));
        out.full = std::max(out.full, max_abs(lhs));
    }
    return out;
}

/// Quantum Poisson bracket of two quadratic forms. The formal-derivative rule
/// closes to {F,G}_Q = -i psi^dag [F,G] psi, so the result is again a tagged
/// quadratic form and brackets can nest.
inline FockOperator quantum_poisson_bracket(const FockOperator& f, const FockOperator& g)
{
    if (!f.is_quadratic_form() || !g.is_quadratic_form())
        throw argument_error(
            "quantum_poisson_bracket: unsupported form (defined for quadratic "
            "forms psi^dag M psi only)");
    if (!f.space.same_space(g.space))
        throw argument_error("quantum_poisson_bracket: operators live on different spaces");
    Matrix comm = *f.quadratic_source * *g.quadratic_source -
                  *g.quadratic_source * *f.quadratic_source;
    return quadratic_form(f.space, Matrix(cxd(0.0, -1.0) * comm));
}

/// || [F,G] - psi^dag [F,G]_source psi || on the safe sector: the equal-time
/// identity [FF,GG] = i {FF,GG}_Q as a matrix equation.
inline double bracket_identity_residual(const FockOperator& f, const FockOperator& g)
{
    FockOperator bracket = quantum_poisson_bracket(f, g);
    Matrix lhs = f.matrix.mat() * g.matrix.mat() - g.matrix.mat() * f.matrix.mat();
    Matrix rhs = cxd(0.0, 1.0) * bracket.matrix.mat();
    return residual_on_columns(Matrix(lhs - rhs), f.space.safe_columns(2));
}

/// Residual of i dOO/dt = psi^dag [O_t, H] psi with O_t = e^{iHt} O e^{-iHt},
/// the derivative taken by Richardson-extrapolated central differences.
inline double observable_heisenberg_residual(const Operator& o, const Operator& h,
                                             const FockSpace& space, double t)
{
    require_hermitian(o, "observable_heisenberg_residual");
    require_hermitian(h, "observable_heisenberg_residual");

    auto heisenberg = [&](double at) {
        Matrix u = propagator(h, at).mat();
        return Matrix(u.adjoint() * o.mat() * u);
    };
    auto lifted = [&](double at) { return quadratic_form(space, heisenberg(at)).matrix.mat(); };

    const double step = 1e-2 / std::max(1.0, max_abs(h.mat()));
    auto diff = [&](double hh) {
        return Matrix((lifted(t + hh) - lifted(t - hh)) / (2.0 * hh));
    };
    Matrix d1 = diff(step);
    Matrix d2 = diff(step / 2.0);
    Matrix deriv = (4.0 * d2 - d1) / 3.0;

    Matrix ot = heisenberg(t);
    Matrix rhs = quadratic_form(space, Matrix(ot * h.mat() - h.mat() * ot)).matrix.mat();
    return residual_on_columns(Matrix(cxd(0.0, 1.0) * deriv - rhs),
                               space.safe_columns(2));
}

/// Projector onto the total-number = N subspace (exactly idempotent: diagonal
/// 0/1 matrix).
struct SectorRestriction {
    int total = 0;
    Operator projector;
};

inline SectorRestriction sector_restriction(const FockSpace& space, int total)
{
    Vector diag = Vector::Zero(space.dim());
    for (std::int64_t i : space.sector(total))
        diag(i) = 1.0;
    return {total, Operator(Matrix(diag.asDiagonal()))};
}

/// Eigenvalues of the total-number = n block of a number-conserving operator.
inline std::vector<double> sector_spectrum(const FockOperator& hh, int n)
{
    auto idx = hh.space.sector(n);
    Matrix block(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c)
            block(static_cast<std::int64_t>(r), static_cast<std::int64_t>(c)) =
                hh.matrix(idx[r], idx[c]);
    return spectrum(Operator(std::move(block)));
}

} // namespace qhier::fock
