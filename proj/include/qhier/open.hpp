#pragma once

// Nonunitary dynamics: Lindblad master-equation integration, second-quantized
// lifts of the dissipative generators, Kraus maps in both pictures, and a
// quantum-jump unravelling whose ensemble average is checked against the
// master equation. Only the first-quantized trajectory is stochastic; the
// operator-valued content is covered by deterministic residual checks.

#include <unsupported/Eigen/MatrixFunctions>

#include <string>
#include <vector>

#include "qhier/fock_state.hpp"
#include "qhier/rng.hpp"

namespace qhier::opendyn {

using fock::FockOperator;
using fock::FockSpace;
using fock::SecondQuantizedState;

struct LindbladChannel {
    Operator op; // L_alpha
    double gamma = 0.0;
};

struct LindbladModel {
    Operator h;
    std::vector<LindbladChannel> ops;

    explicit LindbladModel(Operator hamiltonian, std::vector<LindbladChannel> channels = {})
        : h(std::move(hamiltonian)), ops(std::move(channels))
    {
        require_hermitian(h, "lindblad model");
        for (const auto& c : ops) {
            if (c.gamma < 0.0)
                throw argument_error("lindblad model: decay rates must be nonnegative");
            if (c.op.dim() != h.dim())
                throw argument_error("lindblad model: channel dimension mismatch");
        }
    }

    std::int64_t dim() const { return h.dim(); }
};

inline void require_density_matrix(const Operator& rho)
{
    if (!rho.hermitian(1e-10))
        throw validation_error("invalid rho0: not hermitian");
    if (std::abs(rho.mat().trace().real() - 1.0) > 1e-10 ||
        std::abs(rho.mat().trace().imag()) > 1e-12)
        throw validation_error("invalid rho0: trace is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.mat(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-10)
        throw validation_error("invalid rho0: negative eigenvalue");
}

/// Schrodinger-picture generator: -i[H,rho] + sum gamma (L rho L^dag -
/// 1/2 {L^dag L, rho}).
inline Matrix lindblad_derivative(const LindbladModel& m, const Matrix& rho)
{
    Matrix out = cxd(0.0, -1.0) * (m.h.mat() * rho - rho * m.h.mat());
    for (const auto& c : m.ops) {
        if (c.gamma == 0.0)
            continue;
        Matrix l = c.op.mat();
        Matrix ldl = l.adjoint() * l;
        out += c.gamma * (l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
    }
    return out;
}

/// Heisenberg-picture generator: -i[O,H] + sum gamma (L^dag O L -
/// 1/2 {L^dag L, O}).
inline Matrix lindblad_observable_derivative(const LindbladModel& m, const Matrix& o)
{
    Matrix out = cxd(0.0, -1.0) * (o * m.h.mat() - m.h.mat() * o);
    for (const auto& c : m.ops) {
        if (c.gamma == 0.0)
            continue;
        Matrix l = c.op.mat();
        Matrix ldl = l.adjoint() * l;
        out += c.gamma * (l.adjoint() * o * l - 0.5 * (ldl * o + o * ldl));
    }
    return out;
}

/// RK4 integration of the master equation; the step count lands exactly on t.
inline Operator lindblad_evolve(const LindbladModel& m, const Operator& rho0, double t,
                                double dt = 0.0)
{
    require_density_matrix(rho0);
    if (t == 0.0)
        return rho0;
    if (t < 0.0)
        throw argument_error("lindblad_evolve: t must be nonnegative");
    if (dt <= 0.0)
        dt = t / 2000.0;
    const int steps = std::max(1, static_cast<int>(std::llround(t / dt)));
    const double hstep = t / steps;

    Matrix rho = rho0.mat();
    for (int s = 0; s < steps; ++s) {
        Matrix k1 = lindblad_derivative(m, rho);
        Matrix k2 = lindblad_derivative(m, Matrix(rho + 0.5 * hstep * k1));
        Matrix k3 = lindblad_derivative(m, Matrix(rho + 0.5 * hstep * k2));
        Matrix k4 = lindblad_derivative(m, Matrix(rho + hstep * k3));
        rho += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return Operator(std::move(rho));
}

/// || dOO/dt (second-quantized assembly) - psi^dag (dO/dt) psi || on the safe
/// sector: the lifted Heisenberg-Lindblad equation against the lift of the
/// first-quantized derivative.
inline double second_quantized_lindblad_observable(const LindbladModel& m,
                                                   const Operator& o,
                                                   const FockSpace& space)
{
    if (o.dim() != space.modes() || m.dim() != space.modes())
        throw argument_error("second_quantized_lindblad_observable: dimension mismatch");
    require_hermitian(o, "second_quantized_lindblad_observable");

    FockOperator oo = fock::second_quantize_observable(o, space);
    FockOperator hh = fock::second_quantize_hamiltonian(m.h, space);

    // lifted equation, assembled from big-matrix products
    Matrix lhs = cxd(0.0, -1.0) *
                 (oo.matrix.mat() * hh.matrix.mat() - hh.matrix.mat() * oo.matrix.mat());
    for (const auto& c : m.ops) {
        if (c.gamma == 0.0)
            continue;
        Matrix l = c.op.mat();
        Matrix ldl = l.adjoint() * l;
        Matrix coeff = l.adjoint() * o.mat() * l - 0.5 * (ldl * o.mat() + o.mat() * ldl);
        lhs += c.gamma * fock::quadratic_form(space, coeff).matrix.mat();
    }

    // lift of the first-quantized derivative
    Matrix rhs = fock::quadratic_form(space, lindblad_observable_derivative(m, o.mat()))
                     .matrix.mat();
    return fock::residual_on_columns(Matrix(lhs - rhs), space.safe_columns(2));
}

/// Blockwise superoperator application to the operator-valued varrho: the
/// first-quantized Lindblad coefficients act on the C^d index, each block a
/// Fock-space matrix.
inline Matrix lifted_state_derivative_blockwise(const LindbladModel& m,
                                                const SecondQuantizedState& st)
{
    const int d = st.first_quantized_dim();
    const std::int64_t fd = st.joint_fock().dim();
    const Matrix& vr = st.varrho().mat();
    auto block = [&](int i, int j) { return vr.block(i * fd, j * fd, fd, fd); };

    Matrix out = Matrix::Zero(d * fd, d * fd);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Matrix b = Matrix::Zero(fd, fd);
            for (int k = 0; k < d; ++k) {
                b += cxd(0.0, 1.0) * (block(i, k) * m.h(k, j) - m.h(i, k) * block(k, j));
            }
            for (const auto& c : m.ops) {
                if (c.gamma == 0.0)
                    continue;
                const Matrix& l = c.op.mat();
                Matrix ldl = l.adjoint() * l;
                for (int k = 0; k < d; ++k)
                    for (int q = 0; q < d; ++q)
                        b += c.gamma * l(i, k) * std::conj(l(j, q)) * block(k, q);
                for (int k = 0; k < d; ++k)
                    b -= 0.5 * c.gamma * (ldl(i, k) * block(k, j) + block(i, k) * ldl(k, j));
            }
            out.block(i * fd, j * fd, fd, fd) = b;
        }
    return out;
}

/// || blockwise-coefficient assembly - joint-matrix arithmetic || of
/// d(varrho)/dt = i[varrho, H] + sum gamma (L varrho L^dag - 1/2 {L^dag L,
/// varrho}) with H, L acting on the C^d factor.
inline double second_quantized_lindblad_state(const LindbladModel& m,
                                              const SecondQuantizedState& st)
{
    if (m.dim() != st.first_quantized_dim())
        throw argument_error("second_quantized_lindblad_state: dimension mismatch");

    const std::int64_t fd = st.joint_fock().dim();
    const std::int64_t jd = st.joint_dim();
    auto lift = [&](const Matrix& a) {
        Matrix big = Matrix::Zero(jd, jd);
        for (int i = 0; i < m.dim(); ++i)
            for (int j = 0; j < m.dim(); ++j)
                if (a(i, j) != cxd(0.0, 0.0))
                    big.block(i * fd, j * fd, fd, fd) =
                        a(i, j) * Matrix::Identity(fd, fd);
        return big;
    };

    Matrix hl = lift(m.h.mat());
    const Matrix& vr = st.varrho().mat();
    Matrix joint = cxd(0.0, 1.0) * (vr * hl - hl * vr);
    for (const auto& c : m.ops) {
        if (c.gamma == 0.0)
            continue;
        Matrix ll = lift(c.op.mat());
        Matrix ldl = ll.adjoint() * ll;
        joint += c.gamma * (ll * vr * ll.adjoint() - 0.5 * (ldl * vr + vr * ldl));
    }

    Matrix blockwise = lifted_state_derivative_blockwise(m, st);
    return fock::residual_on_columns(Matrix(blockwise - joint),
                                     fock::joint_safe_columns(st, 1));
}

// ---------------------------------------------------------------------------
// Kraus maps

struct KrausMap {
    std::vector<Operator> kraus;

    explicit KrausMap(std::vector<Operator> ks) : kraus(std::move(ks))
    {
        if (kraus.empty())
            throw argument_error("kraus map needs at least one operator");
        for (const auto& k : kraus)
            if (k.dim() != kraus.front().dim())
                throw argument_error("kraus operators must share a dimension");
    }

    std::int64_t dim() const { return kraus.front().dim(); }

    double completeness_residual() const
    {
        Matrix s = Matrix::Zero(dim(), dim());
        for (const auto& k : kraus)
            s += k.mat().adjoint() * k.mat();
        return max_abs(Matrix(s - Matrix::Identity(dim(), dim())));
    }

    /// Trace preserving within 1e-10; otherwise the map is flagged
    /// sub-normalized and trace checks are skipped by callers.
    bool trace_preserving(double tol = 1e-10) const
    {
        return completeness_residual() <= tol;
    }
};

/// Schrodinger picture: sum K rho K^dag.
inline Operator kraus_apply_state(const KrausMap& map, const Operator& rho)
{
    if (rho.dim() != map.dim())
        throw argument_error("kraus_apply_state: dimension mismatch");
    Matrix out = Matrix::Zero(rho.dim(), rho.dim());
    for (const auto& k : map.kraus)
        out += k.mat() * rho.mat() * k.mat().adjoint();
    return Operator(std::move(out));
}

/// Heisenberg picture: sum K^dag O K.
inline Operator kraus_apply_observable(const KrausMap& map, const Operator& o)
{
    if (o.dim() != map.dim())
        throw argument_error("kraus_apply_observable: dimension mismatch");
    Matrix out = Matrix::Zero(o.dim(), o.dim());
    for (const auto& k : map.kraus)
        out += k.mat().adjoint() * o.mat() * k.mat();
    return Operator(std::move(out));
}

/// Second-quantized state picture: sum (K (x) 1) varrho (K^dag (x) 1) on the
/// joint space.
inline Operator kraus_apply_varrho(const KrausMap& map, const SecondQuantizedState& st)
{
    if (map.dim() != st.first_quantized_dim())
        throw argument_error("kraus_apply_varrho: dimension mismatch");
    const std::int64_t fd = st.joint_fock().dim();
    const std::int64_t jd = st.joint_dim();
    Matrix out = Matrix::Zero(jd, jd);
    for (const auto& k : map.kraus) {
        Matrix big = Matrix::Zero(jd, jd);
        for (int i = 0; i < map.dim(); ++i)
            for (int j = 0; j < map.dim(); ++j)
                if (k(i, j) != cxd(0.0, 0.0))
                    big.block(i * fd, j * fd, fd, fd) = k(i, j) * Matrix::Identity(fd, fd);
        out += big * st.varrho().mat() * big.adjoint();
    }
    return Operator(std::move(out));
}

/// Second-quantized observable picture: the K act on the mode index, so the
/// quadratic form's coefficient matrix transforms as O -> sum K^dag O K.
inline FockOperator kraus_apply_fock_observable(const KrausMap& map, const FockOperator& oo)
{
    if (!oo.is_quadratic_form())
        throw argument_error("kraus_apply_fock_observable: need a quadratic form");
    if (map.dim() != oo.space.modes())
        throw argument_error("kraus_apply_fock_observable: dimension mismatch");
    Matrix coeff = Matrix::Zero(map.dim(), map.dim());
    for (const auto& k : map.kraus)
        coeff += k.mat().adjoint() * *oo.quadratic_source * k.mat();
    return fock::quadratic_form(oo.space, coeff);
}

// ---------------------------------------------------------------------------
// Stochastic Schrodinger unravelling (quantum jumps)

struct JumpEvent {
    double time = 0.0;
    int channel = 0;
};

struct SseTrajectory {
    std::vector<Vector> checkpoint_states;
    std::vector<JumpEvent> jumps;
};

struct TrajectoryEnsemble {
    std::uint64_t seed = 0;
    double dt = 0.0;
    int n_traj = 0;
    std::vector<double> times; // checkpoints
    std::vector<SseTrajectory> trajectories;
    std::vector<Matrix> mean_rho; // ensemble average at each checkpoint
    double max_norm_deviation = 0.0;
    std::int64_t total_jumps = 0;
};

struct SseComparisonRow {
    double t = 0.0;
    double l1_error = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct SseComparison {
    std::vector<SseComparisonRow> rows;
    double trace_error_max = 0.0;

    bool pass() const
    {
        for (const auto& r : rows)
            if (!r.pass)
                return false;
        return true;
    }
};

inline double trace_norm(const Matrix& a)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (a + a.adjoint())),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

/// First-order quantum-jump unravelling with exact no-jump propagation.
/// Per-trajectory streams derive from (seed, index), so the ensemble is
/// bit-reproducible; the jump probability per step must stay below 0.1.
inline TrajectoryEnsemble sse_ensemble(const LindbladModel& m, const StateVector& psi0,
                                       const std::vector<double>& checkpoints, double dt,
                                       int n_traj, std::uint64_t seed)
{
    if (n_traj < 1)
        throw argument_error("sse_ensemble: need at least one trajectory");
    if (dt <= 0.0)
        throw argument_error("sse_ensemble: dt must be positive");
    if (checkpoints.empty())
        throw argument_error("sse_ensemble: need at least one checkpoint");
    if (!psi0.normalized())
        throw validation_error("sse_ensemble: initial state must be normalized");

    const std::int64_t d = m.dim();
    Matrix heff = m.h.mat();
    for (const auto& c : m.ops)
        heff -= cxd(0.0, 0.5) * c.gamma * (c.op.mat().adjoint() * c.op.mat());
    Matrix u_nojump = Matrix(cxd(0.0, -dt) * heff).exp();

    const double t_final = checkpoints.back();
    const int steps = static_cast<int>(std::llround(t_final / dt));
    std::vector<int> checkpoint_step;
    for (double t : checkpoints)
        checkpoint_step.push_back(static_cast<int>(std::llround(t / dt)));

    TrajectoryEnsemble ens;
    ens.seed = seed;
    ens.dt = dt;
    ens.n_traj = n_traj;
    ens.times = checkpoints;
    ens.trajectories.resize(static_cast<std::size_t>(n_traj));

    // Kahan accumulators for the ensemble mean
    std::vector<Matrix> sum(checkpoints.size(), Matrix::Zero(d, d));
    std::vector<Matrix> comp(checkpoints.size(), Matrix::Zero(d, d));

    Rng base(seed);
    for (int traj = 0; traj < n_traj; ++traj) {
        Rng rng = base.stream(static_cast<std::uint64_t>(traj));
        Vector psi = psi0.vec();
        SseTrajectory& rec = ens.trajectories[static_cast<std::size_t>(traj)];
        std::size_t next_cp = 0;

        auto record_if_checkpoint = [&](int step) {
            while (next_cp < checkpoint_step.size() &&
                   checkpoint_step[next_cp] == step) {
                rec.checkpoint_states.push_back(psi);
                Matrix rho = psi * psi.adjoint();
                Matrix y = rho - comp[next_cp];
                Matrix t = sum[next_cp] + y;
                comp[next_cp] = (t - sum[next_cp]) - y;
                sum[next_cp] = t;
                ++next_cp;
            }
        };

        record_if_checkpoint(0);
        for (int s = 1; s <= steps; ++s) {
            double p_total = 0.0;
            std::vector<double> p(m.ops.size(), 0.0);
            for (std::size_t a = 0; a < m.ops.size(); ++a) {
                p[a] = m.ops[a].gamma * (m.ops[a].op.mat() * psi).squaredNorm() * dt;
                p_total += p[a];
            }
            if (p_total > 0.1)
                throw numeric_error("sse_ensemble: jump probability per step " +
                                    std::to_string(p_total) +
                                    " exceeds 0.1; reduce dt");
            double u = rng.uniform();
            if (u < p_total) {
                double acc = 0.0;
                std::size_t chosen = m.ops.size() - 1;
                for (std::size_t a = 0; a < m.ops.size(); ++a) {
                    acc += p[a];
                    if (u < acc) {
                        chosen = a;
                        break;
                    }
                }
                psi = m.ops[chosen].op.mat() * psi;
                psi /= psi.norm();
                rec.jumps.push_back({s * dt, static_cast<int>(chosen)});
                ++ens.total_jumps;
            } else {
                psi = u_nojump * psi;
                psi /= psi.norm();
            }
            // paths stay normalized at every step after renormalization
            ens.max_norm_deviation =
                std::max(ens.max_norm_deviation, std::abs(psi.norm() - 1.0));
            record_if_checkpoint(s);
        }
    }

    ens.mean_rho.reserve(checkpoints.size());
    for (std::size_t c = 0; c < checkpoints.size(); ++c)
        ens.mean_rho.push_back(Matrix(sum[c] / static_cast<double>(n_traj)));
    return ens;
}

/// Trace-distance comparison against the master equation at each checkpoint,
/// with the observed statistical bound 5/sqrt(n_traj).
inline SseComparison compare_to_master(const TrajectoryEnsemble& ens,
                                       const LindbladModel& m, const StateVector& psi0)
{
    SseComparison cmp;
    Operator rho0(Matrix(psi0.vec() * psi0.vec().adjoint()));
    const double bound = 5.0 / std::sqrt(static_cast<double>(ens.n_traj));
    for (std::size_t c = 0; c < ens.times.size(); ++c) {
        Operator rho_master = lindblad_evolve(m, rho0, ens.times[c]);
        double err = trace_norm(Matrix(ens.mean_rho[c] - rho_master.mat()));
        cmp.trace_error_max = std::max(
            cmp.trace_error_max, std::abs(ens.mean_rho[c].trace().real() - 1.0));
        cmp.rows.push_back({ens.times[c], err, bound, err <= bound});
    }
    return cmp;
}

/// FNV-1a over the model's matrix entries (17 significant digits), so equal
/// models hash equally across runs.
inline std::string model_hash(const LindbladModel& m)
{
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&](const Matrix& mat) {
        char buf[96];
        for (std::int64_t i = 0; i < mat.rows(); ++i)
            for (std::int64_t j = 0; j < mat.cols(); ++j) {
                int len = std::snprintf(buf, sizeof(buf), "%.17g %.17g;",
                                        mat(i, j).real(), mat(i, j).imag());
                for (int c = 0; c < len; ++c) {
                    h ^= static_cast<unsigned char>(buf[c]);
                    h *= 1099511628211ull;
                }
            }
    };
    feed(m.h.mat());
    for (const auto& c : m.ops) {
        feed(c.op.mat());
        char buf[40];
        int len = std::snprintf(buf, sizeof(buf), "%.17g|", c.gamma);
        for (int i = 0; i < len; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    char out[24];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

inline json ensemble_report_json(const TrajectoryEnsemble& ens, const SseComparison& cmp,
                                 const LindbladModel& m)
{
    json times = json::array();
    for (double t : ens.times)
        times.push_back(t);
    json comparison = json::array();
    for (const auto& row : cmp.rows)
        comparison.push_back(
            {{"t", row.t}, {"l1_error", row.l1_error}, {"bound", row.bound},
             {"pass", row.pass}});
    return json{{"schema", "qhier/1"},
                {"model_hash", model_hash(m)},
                {"seed", ens.seed},
                {"n_traj", ens.n_traj},
                {"dt", ens.dt},
                {"times", std::move(times)},
                {"trace_error_max", cmp.trace_error_max},
                {"total_jumps", ens.total_jumps},
                {"comparison", std::move(comparison)},
                {"pass", cmp.pass()}};
}

} // namespace qhier::opendyn
