#pragma once

// Second-quantized states. A density operator rho = sum_mu p_mu
// |psi_mu><psi_mu| maps to the antinormal-ordered operator
// varrho = sum_mu p_mu psihat_mu psihat_mu^dag, where each eigencomponent mu
// carries its own copy of the d field modes and psihat_mu is the
// operator-valued column (a_{mu,0}, ..., a_{mu,d-1}). varrho is realized as a
// matrix on the joint space C^d (x) F over d*r modes; the first-quantized
// side of every identity acts on the C^d index. The eigenvector directions
// live in the component list and drive the induced time derivative.

#include <vector>

#include "qhier/fock.hpp"

namespace qhier::fock {

struct StateComponent {
    double weight = 1.0; // p_mu in (0,1]
    Vector direction;    // |psi_mu>, unit norm
};

class SecondQuantizedState {
public:
    /// base fixes statistics and bosonic cutoff and must have modes == d.
    SecondQuantizedState(std::vector<StateComponent> components, const FockSpace& base)
        : components_(std::move(components)),
          d_(base.modes()),
          joint_fock_(joint_space(components_, base))
    {
        validate();
        realize();
    }

    const std::vector<StateComponent>& components() const { return components_; }
    int first_quantized_dim() const { return d_; }
    int rank() const { return static_cast<int>(components_.size()); }
    const FockSpace& joint_fock() const { return joint_fock_; }

    /// Operator on C^d (x) F.
    const Operator& varrho() const { return varrho_; }

    std::int64_t joint_dim() const { return d_ * joint_fock_.dim(); }

    /// Annihilator of mode i in component mu's copy.
    const Matrix& mode(int mu, int i) const
    {
        return joint_fock_.annihilator(mu * d_ + i);
    }

    /// Reconstruction of the first-quantized density matrix from the stored
    /// components.
    Operator density_matrix() const
    {
        Matrix rho = Matrix::Zero(d_, d_);
        for (const auto& c : components_)
            rho += c.weight * c.direction * c.direction.adjoint();
        return Operator(std::move(rho));
    }

private:
    static FockSpace joint_space(const std::vector<StateComponent>& comps,
                                 const FockSpace& base)
    {
        int r = static_cast<int>(comps.size());
        if (r == 1)
            return base;
        return FockSpace(base.modes() * r, base.statistics(),
                         base.statistics() == Statistics::boson ? base.cutoff() : 0);
    }

    void validate() const
    {
        if (components_.empty())
            throw argument_error("second-quantized state needs at least one component");
        double total = 0.0;
        for (const auto& c : components_) {
            if (c.weight < 1e-12)
                throw validation_error(
                    "component weight below 1e-12; drop it before constructing");
            if (c.direction.size() != d_)
                throw argument_error("component direction has wrong dimension");
            if (std::abs(c.direction.norm() - 1.0) > 1e-10)
                throw validation_error("component directions must be unit vectors");
            total += c.weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw validation_error("component weights must sum to 1 within 1e-12");
    }

    void realize()
    {
        const std::int64_t fd = joint_fock_.dim();
        Matrix big = Matrix::Zero(d_ * fd, d_ * fd);
        for (int mu = 0; mu < rank(); ++mu) {
            double p = components_[static_cast<std::size_t>(mu)].weight;
            for (int i = 0; i < d_; ++i)
                for (int j = 0; j < d_; ++j)
                    big.block(i * fd, j * fd, fd, fd) +=
                        p * (mode(mu, i) * mode(mu, j).adjoint());
        }
        varrho_ = Operator(std::move(big));
    }

    std::vector<StateComponent> components_;
    int d_;
    FockSpace joint_fock_;
    Operator varrho_;
};

inline SecondQuantizedState second_quantize_state(const StateVector& psi,
                                                  const FockSpace& base)
{
    if (!psi.normalized())
        throw validation_error("second_quantize_state: pure input must be normalized");
    return SecondQuantizedState({{1.0, psi.vec()}}, base);
}

/// Mixed input: eigendecompose, drop eigenvalues below 1e-12.
inline SecondQuantizedState second_quantize_state(const Operator& rho,
                                                  const FockSpace& base)
{
    require_hermitian(rho, "second_quantize_state");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.mat());
    std::vector<StateComponent> comps;
    for (std::int64_t i = rho.dim() - 1; i >= 0; --i) {
        double p = es.eigenvalues()(i);
        if (p < -1e-10)
            throw validation_error("second_quantize_state: input is not positive");
        if (p >= 1e-12)
            comps.push_back({p, es.eigenvectors().col(i)});
    }
    return SecondQuantizedState(std::move(comps), base);
}

/// Safe joint-space columns: the C^d index is free, the Fock factor is
/// restricted to its safe sector for the given number transfer.
inline std::vector<std::int64_t> joint_safe_columns(const SecondQuantizedState& st,
                                                    int deg = 1)
{
    auto fcols = st.joint_fock().safe_columns(deg);
    std::vector<std::int64_t> cols;
    cols.reserve(fcols.size() * static_cast<std::size_t>(st.first_quantized_dim()));
    for (int i = 0; i < st.first_quantized_dim(); ++i)
        for (std::int64_t f : fcols)
            cols.push_back(i * st.joint_fock().dim() + f);
    return cols;
}

/// varrho(t): each component direction evolved by exp(-i h t) acting on the
/// C^d index of its mode copy; assembled from ladder products with the
/// evolved coefficients.
inline Matrix evolved_varrho(const SecondQuantizedState& st, const Operator& h, double t)
{
    const std::int64_t fd = st.joint_fock().dim();
    const int d = st.first_quantized_dim();
    Matrix e = propagator(h, t).mat();
    Matrix big = Matrix::Zero(d * fd, d * fd);
    for (int mu = 0; mu < st.rank(); ++mu) {
        double p = st.components()[static_cast<std::size_t>(mu)].weight;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                Matrix prod = p * (st.mode(mu, a) * st.mode(mu, b).adjoint());
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        cxd c = e(i, a) * std::conj(e(j, b));
                        if (c != cxd(0.0, 0.0))
                            big.block(i * fd, j * fd, fd, fd) += c * prod;
                    }
            }
    }
    return big;
}

/// d/dt varrho(t), from the product rule on the evolved coefficients
/// (i psihat_mu' = H psihat_mu), not from any commutator.
inline Matrix evolved_varrho_derivative(const SecondQuantizedState& st, const Operator& h,
                                        double t)
{
    const std::int64_t fd = st.joint_fock().dim();
    const int d = st.first_quantized_dim();
    Matrix e = propagator(h, t).mat();
    Matrix de = cxd(0.0, -1.0) * (h.mat() * e);
    Matrix big = Matrix::Zero(d * fd, d * fd);
    for (int mu = 0; mu < st.rank(); ++mu) {
        double p = st.components()[static_cast<std::size_t>(mu)].weight;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                Matrix prod = p * (st.mode(mu, a) * st.mode(mu, b).adjoint());
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        cxd c = de(i, a) * std::conj(e(j, b)) +
                                e(i, a) * std::conj(de(j, b));
                        if (c != cxd(0.0, 0.0))
                            big.block(i * fd, j * fd, fd, fd) += c * prod;
                    }
            }
    }
    return big;
}

/// The mixed-state quantum Poisson bracket {varrho, HH}_Qbar evaluated by the
/// closed quadratic-form rule, blockwise, with the 1/p_mu weights written out
/// (they cancel the p_mu^2 of the two derivative factors).
inline Matrix state_bracket_closed_rule(const SecondQuantizedState& st, const Operator& h)
{
    const std::int64_t fd = st.joint_fock().dim();
    const int d = st.first_quantized_dim();
    Matrix big = Matrix::Zero(d * fd, d * fd);
    for (int mu = 0; mu < st.rank(); ++mu) {
        const double p = st.components()[static_cast<std::size_t>(mu)].weight;
        const double inv_p = 1.0 / p;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                // sum_k dHH/dzeta_{mu k} * dvarrho_ij/dpsi_{mu k}
                //     - dvarrho_ij/dzeta_{mu k} * dHH/dpsi_{mu k}
                Matrix blk = Matrix::Zero(fd, fd);
                // dvarrho_ij/dpsi_{mu k} = p delta_{ik} a+_{mu j}; k = i
                {
                    Matrix dh_dzeta = Matrix::Zero(fd, fd); // -i p sum_b h_ib a_{mu b}
                    for (int b = 0; b < d; ++b)
                        dh_dzeta += cxd(0.0, -1.0) * p * h(i, b) * st.mode(mu, b);
                    blk += dh_dzeta * (p * st.mode(mu, j).adjoint());
                }
                // dvarrho_ij/dzeta_{mu k} = -i p delta_{jk} a_{mu i}; k = j
                {
                    Matrix dh_dpsi = Matrix::Zero(fd, fd); // p sum_a a+_{mu a} h_aj
                    for (int a = 0; a < d; ++a)
                        dh_dpsi += p * h(a, j) * st.mode(mu, a).adjoint();
                    blk -= (cxd(0.0, -1.0) * p * st.mode(mu, i)) * dh_dpsi;
                }
                big.block(i * fd, j * fd, fd, fd) += inv_p * blk;
            }
    }
    return big;
}

struct VonNeumannResidual {
    double von_neumann = 0.0; // i d(varrho)/dt vs [H, varrho]
    double bracket = 0.0;     // [H, varrho] vs i {varrho, HH}_Qbar

    double max() const { return std::max(von_neumann, bracket); }
};

/// Both equalities of the operator-valued von Neumann equation, evaluated on
/// the safe sector. The derivative route is the evolved-component product
/// rule at time t; the bracket route is the closed quadratic-form rule.
inline VonNeumannResidual von_neumann_residual(const SecondQuantizedState& st,
                                               const Operator& h, double t = 0.3)
{
    if (h.dim() != st.first_quantized_dim())
        throw argument_error("von_neumann_residual: dimension mismatch");
    require_hermitian(h, "von_neumann_residual");

    const std::int64_t fd = st.joint_fock().dim();
    Matrix lift = Matrix::Zero(st.joint_dim(), st.joint_dim());
    for (int i = 0; i < st.first_quantized_dim(); ++i)
        for (int j = 0; j < st.first_quantized_dim(); ++j)
            if (h(i, j) != cxd(0.0, 0.0))
                lift.block(i * fd, j * fd, fd, fd) =
                    h(i, j) * Matrix::Identity(fd, fd);

    auto cols = joint_safe_columns(st, 1);
    VonNeumannResidual out;

    // route 1 at time t
    Matrix vr_t = evolved_varrho(st, h, t);
    Matrix lhs1 = cxd(0.0, 1.0) * evolved_varrho_derivative(st, h, t);
    Matrix rhs1 = lift * vr_t - vr_t * lift;
    out.von_neumann = residual_on_columns(Matrix(lhs1 - rhs1), cols);

    // route 2 at time 0
    const Matrix& vr0 = st.varrho().mat();
    Matrix rhs2 = lift * vr0 - vr0 * lift;
    Matrix lhs2 = cxd(0.0, 1.0) * state_bracket_closed_rule(st, h);
    out.bracket = residual_on_columns(Matrix(lhs2 - rhs2), cols);
    return out;
}

} // namespace qhier::fock
