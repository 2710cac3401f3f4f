#pragma once

// Hamiltonization: a hermitian H and a state psi become a classical
// Hamiltonian system on the Kahler manifold with energy <psi|H|psi> and
// coordinates (psi_i, zeta_i = i psi_i^*). The chart (x, y) = (Re psi,
// Im psi) carries the symplectic form 2 sum dx_i ^ dy_i, so the flow reads
// xdot = Bx + Ay, ydot = -Ax + By with A = Re H, B = Im H, equivalently
// psidot = -i H psi.

#include <cstdio>
#include <string>
#include <vector>

#include "qhier/core.hpp"

namespace qhier::phase {

struct PhaseSpacePoint {
    Vector psi;

    PhaseSpacePoint() = default;
    explicit PhaseSpacePoint(Vector v) : psi(std::move(v)) {}
    explicit PhaseSpacePoint(const StateVector& s) : psi(s.vec()) {}

    std::int64_t dim() const { return psi.size(); }

    /// zeta_i = i psi_i^*, derived view, never stored.
    Vector zeta() const { return cxd(0.0, 1.0) * psi.conjugate(); }
};

class ClassicalSystem {
public:
    explicit ClassicalSystem(Operator h) : h_(std::move(h))
    {
        require_hermitian(h_, "hamiltonize");
    }

    std::int64_t dim() const { return h_.dim(); }
    const Operator& h_matrix() const { return h_; }

    double energy(const PhaseSpacePoint& p) const
    {
        return (p.psi.adjoint() * h_.mat() * p.psi)(0, 0).real();
    }

private:
    Operator h_;
};

inline ClassicalSystem hamiltonize(const Operator& h) { return ClassicalSystem(h); }

struct ObservableField {
    Operator matrix;

    explicit ObservableField(Operator m) : matrix(std::move(m))
    {
        require_hermitian(matrix, "observable field");
    }

    double value(const PhaseSpacePoint& p) const
    {
        return (p.psi.adjoint() * matrix.mat() * p.psi)(0, 0).real();
    }
};

struct TangentVector {
    Vector psi_dot;  // dH/dzeta_i
    Vector zeta_dot; // -dH/dpsi_i
};

inline TangentVector hamilton_vector_field(const ClassicalSystem& sys,
                                           const PhaseSpacePoint& p)
{
    if (sys.dim() != p.dim())
        throw argument_error("hamilton_vector_field: dimensions differ");
    Vector hp = sys.h_matrix().mat() * p.psi;
    TangentVector out;
    out.psi_dot = cxd(0.0, -1.0) * hp;
    out.zeta_dot = -hp.conjugate();
    return out;
}

enum class SymplecticMethod { implicit_midpoint, leapfrog_reim };

inline SymplecticMethod method_from_string(const std::string& s)
{
    if (s == "implicit_midpoint")
        return SymplecticMethod::implicit_midpoint;
    if (s == "leapfrog_reim")
        return SymplecticMethod::leapfrog_reim;
    throw argument_error("unknown symplectic method `" + s + "`");
}

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<double> energies;
    std::vector<double> norms;
};

inline Trajectory integrate_symplectic(const ClassicalSystem& sys,
                                       const PhaseSpacePoint& p0, double dt,
                                       int steps,
                                       SymplecticMethod method =
                                           SymplecticMethod::implicit_midpoint)
{
    if (dt <= 0.0)
        throw argument_error("integrate_symplectic: dt must be positive");
    if (sys.dim() != p0.dim())
        throw argument_error("integrate_symplectic: dimensions differ");

    const std::int64_t d = sys.dim();
    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);

    auto record = [&](double t, const Vector& psi) {
        traj.times.push_back(t);
        traj.states.push_back(psi);
        PhaseSpacePoint p(psi);
        traj.energies.push_back(sys.energy(p));
        traj.norms.push_back(psi.norm());
    };

    record(0.0, p0.psi);

    if (method == SymplecticMethod::implicit_midpoint) {
        // real chart u = (x; y), udot = M u
        Eigen::MatrixXd a = sys.h_matrix().mat().real();
        Eigen::MatrixXd b = sys.h_matrix().mat().imag();
        Eigen::MatrixXd m(2 * d, 2 * d);
        m.topLeftCorner(d, d) = b;
        m.topRightCorner(d, d) = a;
        m.bottomLeftCorner(d, d) = -a;
        m.bottomRightCorner(d, d) = b;

        Eigen::VectorXd u(2 * d);
        u.head(d) = p0.psi.real();
        u.tail(d) = p0.psi.imag();

        const double tol = 1e-13;
        for (int s = 1; s <= steps; ++s) {
            Eigen::VectorXd v = u;
            bool converged = false;
            for (int it = 0; it < 50; ++it) {
                Eigen::VectorXd next = u + (dt / 2.0) * (m * (u + v));
                double delta = (next - v).cwiseAbs().maxCoeff();
                v = next;
                if (delta < tol) {
                    converged = true;
                    break;
                }
            }
            if (!converged)
                throw numeric_error(
                    "implicit midpoint: fixed-point iteration did not converge "
                    "in 50 iterations (dt too large)");
            u = v;
            Vector psi(d);
            psi.real() = u.head(d);
            psi.imag() = u.tail(d);
            record(s * dt, psi);
        }
    } else {
        // Strang split psidot = -i A psi (+) psidot = B psi; both substeps are
        // exact unitary flows, so the composition is symplectic and order 2.
        Matrix a = 0.5 * (sys.h_matrix().mat() + sys.h_matrix().mat().adjoint()).real().cast<cxd>();
        Matrix bi = cxd(0.0, 1.0) *
                    Matrix(sys.h_matrix().mat().imag().cast<cxd>()); // i*B is hermitian
        Operator half_a = propagator(Operator(a), dt / 2.0);
        Operator full_b = propagator(Operator(bi), dt); // exp(-i (iB) dt) = exp(B dt)
        Vector psi = p0.psi;
        for (int s = 1; s <= steps; ++s) {
            psi = half_a.mat() * psi;
            psi = full_b.mat() * psi;
            psi = half_a.mat() * psi;
            record(s * dt, psi);
        }
    }
    return traj;
}

struct BracketValue {
    double chart;      // from Wirtinger gradients of the energy functions
    double commutator; // -i <psi|[F,G]|psi>
};

/// Classical Poisson bracket {F,G} at p, returned along the commutator
/// identity value; the two must agree within 1e-10.
inline BracketValue poisson_bracket_classical(const ObservableField& f,
                                              const ObservableField& g,
                                              const PhaseSpacePoint& p)
{
    if (f.matrix.dim() != p.dim() || g.matrix.dim() != p.dim())
        throw argument_error("poisson_bracket_classical: dimensions differ");

    // dF/dpsi_i = (psi^dag F)_i, dF/dzeta_i = -i (F psi)_i
    Vector gpsi_f = (p.psi.adjoint() * f.matrix.mat()).transpose();
    Vector gpsi_g = (p.psi.adjoint() * g.matrix.mat()).transpose();
    Vector gzeta_f = cxd(0.0, -1.0) * (f.matrix.mat() * p.psi);
    Vector gzeta_g = cxd(0.0, -1.0) * (g.matrix.mat() * p.psi);

    cxd chart = 0.0;
    for (std::int64_t i = 0; i < p.dim(); ++i)
        chart += gpsi_f(i) * gzeta_g(i) - gpsi_g(i) * gzeta_f(i);

    cxd comm = cxd(0.0, -1.0) *
               (p.psi.adjoint() * commutator(f.matrix, g.matrix).mat() * p.psi)(0, 0);
    return {chart.real(), comm.real()};
}

/// |{F,{G,E}} + {E,{F,G}} + {G,{E,F}}| at p via nested commutator
/// expectations.
inline double jacobi_residual_classical(const ObservableField& f,
                                        const ObservableField& g,
                                        const ObservableField& e,
                                        const PhaseSpacePoint& p)
{
    auto inner = [](const ObservableField& a, const ObservableField& b) {
        // {A,B} corresponds to the hermitian field -i[A,B]
        return ObservableField(Operator(
            Matrix(cxd(0.0, -1.0) * commutator(a.matrix, b.matrix).mat())));
    };
    double t1 = poisson_bracket_classical(f, inner(g, e), p).commutator;
    double t2 = poisson_bracket_classical(e, inner(f, g), p).commutator;
    double t3 = poisson_bracket_classical(g, inner(e, f), p).commutator;
    return std::abs(t1 + t2 + t3);
}

struct ExpectationSeries {
    std::vector<double> times;
    std::vector<std::string> labels;
    // values[o][t] for observable o at grid point t
    std::vector<std::vector<double>> values;
};

/// Expectation trajectories <O>(t) under exact evolution (Ehrenfest
/// reduction of the quantum dynamics to classical time series).
inline ExpectationSeries ehrenfest_reduce(const Operator& h, const StateVector& psi0,
                                          const std::vector<ObservableField>& obs,
                                          const std::vector<double>& t_grid)
{
    require_hermitian(h, "ehrenfest_reduce");
    ExpectationSeries out;
    out.times = t_grid;
    out.values.assign(obs.size(), std::vector<double>(t_grid.size(), 0.0));
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        StateVector psi_t = evolve_exact(h, psi0, t_grid[ti]);
        for (std::size_t oi = 0; oi < obs.size(); ++oi)
            out.values[oi][ti] = expectation(psi_t, obs[oi].matrix).real();
    }
    return out;
}

/// CSV export: `t,re_psi_0,im_psi_0,...,energy,norm`, 17 significant digits,
/// LF line endings.
inline std::string trajectory_csv(const Trajectory& traj)
{
    std::string out = "t";
    const std::int64_t d = traj.states.empty() ? 0 : traj.states.front().size();
    for (std::int64_t i = 0; i < d; ++i) {
        out += ",re_psi_" + std::to_string(i);
        out += ",im_psi_" + std::to_string(i);
    }
    out += ",energy,norm\n";
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out += buf;
    };
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        put(traj.times[s]);
        for (std::int64_t i = 0; i < d; ++i) {
            out += ",";
            put(traj.states[s](i).real());
            out += ",";
            put(traj.states[s](i).imag());
        }
        out += ",";
        put(traj.energies[s]);
        out += ",";
        put(traj.norms[s]);
        out += "\n";
    }
    return out;
}

} // namespace qhier::phase
