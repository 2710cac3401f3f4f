#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qhier/operator.hpp"

namespace qhier {

using json = nlohmann::ordered_json;

/// Kronecker product, row-major convention: the left factor is the
/// slowest-varying index (site 0 leftmost throughout the project).
inline Operator kron(const Operator& a, const Operator& b)
{
    const std::int64_t da = a.dim(), db = b.dim();
    check_dimension(da * db, "kron");
    Matrix out(da * db, da * db);
    for (std::int64_t i = 0; i < da; ++i)
        for (std::int64_t j = 0; j < da; ++j)
            out.block(i * db, j * db, db, db) = a.mat()(i, j) * b.mat();
    return Operator(std::move(out));
}

inline Operator direct_sum(const std::vector<Operator>& blocks)
{
    if (blocks.empty())
        throw argument_error("direct_sum requires at least one block");
    std::int64_t total = 0;
    for (const auto& b : blocks)
        total += b.dim();
    check_dimension(total, "direct_sum");
    Matrix out = Matrix::Zero(total, total);
    std::int64_t off = 0;
    for (const auto& b : blocks) {
        out.block(off, off, b.dim(), b.dim()) = b.mat();
        off += b.dim();
    }
    return Operator(std::move(out));
}

/// Embed `op` (acting on the listed sites, in that order) into the full
/// space, identity on every other site. Handles unordered / non-adjacent
/// site lists.
inline Operator embed_local(const Operator& op, const std::vector<int>& sites,
                            const SpaceShape& shape)
{
    const int n = shape.sites();
    std::set<int> seen;
    for (int s : sites) {
        if (s < 0 || s >= n)
            throw argument_error("embed_local: site " + std::to_string(s) +
                                 " outside [0," + std::to_string(n) + ")");
        if (!seen.insert(s).second)
            throw argument_error("embed_local: duplicate site " + std::to_string(s));
    }
    std::int64_t sub = 1;
    for (int s : sites)
        sub *= shape.site_dims[static_cast<std::size_t>(s)];
    if (sub != op.dim())
        throw argument_error("embed_local: operator dim " + std::to_string(op.dim()) +
                             " does not match site-list dim " + std::to_string(sub));
    const std::int64_t total = shape.total_dim();
    check_dimension(total, "embed_local");

    std::vector<int> env;
    for (int s = 0; s < n; ++s)
        if (!seen.count(s))
            env.push_back(s);

    // strides of each site in the flat row-major index
    std::vector<std::int64_t> stride(static_cast<std::size_t>(n), 1);
    for (int s = n - 2; s >= 0; --s)
        stride[static_cast<std::size_t>(s)] =
            stride[static_cast<std::size_t>(s + 1)] * shape.site_dims[static_cast<std::size_t>(s + 1)];

    std::vector<int> sub_dims, env_dims;
    for (int s : sites)
        sub_dims.push_back(shape.site_dims[static_cast<std::size_t>(s)]);
    for (int s : env)
        env_dims.push_back(shape.site_dims[static_cast<std::size_t>(s)]);
    SpaceShape sub_shape(sub_dims);
    SpaceShape env_shape(env_dims.empty() ? std::vector<int>{1} : env_dims);
    const std::int64_t env_total = env_dims.empty() ? 1 : env_shape.total_dim();

    Matrix out = Matrix::Zero(total, total);
    for (std::int64_t e = 0; e < env_total; ++e) {
        std::int64_t base = 0;
        if (!env_dims.empty()) {
            auto ed = env_shape.unpack(e);
            for (std::size_t t = 0; t < env.size(); ++t)
                base += static_cast<std::int64_t>(ed[t]) *
                        stride[static_cast<std::size_t>(env[t])];
        }
        for (std::int64_t r = 0; r < op.dim(); ++r) {
            auto rd = sub_shape.unpack(r);
            std::int64_t row = base;
            for (std::size_t t = 0; t < sites.size(); ++t)
                row += static_cast<std::int64_t>(rd[t]) *
                       stride[static_cast<std::size_t>(sites[t])];
            for (std::int64_t c = 0; c < op.dim(); ++c) {
                cxd v = op(r, c);
                if (v == cxd(0.0, 0.0))
                    continue;
                auto cd = sub_shape.unpack(c);
                std::int64_t col = base;
                for (std::size_t t = 0; t < sites.size(); ++t)
                    col += static_cast<std::int64_t>(cd[t]) *
                           stride[static_cast<std::size_t>(sites[t])];
                out(row, col) = v;
            }
        }
    }
    return Operator(std::move(out));
}

/// Partial trace keeping the listed sites (result basis ordered by the keep
/// list). Trace-preserving.
inline Operator partial_trace(const Operator& rho, const SpaceShape& shape,
                              const std::vector<int>& keep)
{
    if (rho.dim() != shape.total_dim())
        throw argument_error("partial_trace: state dim does not match shape");
    const int n = shape.sites();
    std::set<int> seen;
    for (int s : keep) {
        if (s < 0 || s >= n)
            throw argument_error("partial_trace: site " + std::to_string(s) +
                                 " outside [0," + std::to_string(n) + ")");
        if (!seen.insert(s).second)
            throw argument_error("partial_trace: duplicate site " + std::to_string(s));
    }
    std::vector<int> env;
    for (int s = 0; s < n; ++s)
        if (!seen.count(s))
            env.push_back(s);

    std::vector<std::int64_t> stride(static_cast<std::size_t>(n), 1);
    for (int s = n - 2; s >= 0; --s)
        stride[static_cast<std::size_t>(s)] =
            stride[static_cast<std::size_t>(s + 1)] * shape.site_dims[static_cast<std::size_t>(s + 1)];

    std::vector<int> keep_dims, env_dims;
    for (int s : keep)
        keep_dims.push_back(shape.site_dims[static_cast<std::size_t>(s)]);
    for (int s : env)
        env_dims.push_back(shape.site_dims[static_cast<std::size_t>(s)]);
    SpaceShape keep_shape(keep_dims.empty() ? std::vector<int>{1} : keep_dims);
    SpaceShape env_shape(env_dims.empty() ? std::vector<int>{1} : env_dims);
    const std::int64_t dk = keep_dims.empty() ? 1 : keep_shape.total_dim();
    const std::int64_t de = env_dims.empty() ? 1 : env_shape.total_dim();

    auto compose = [&](const std::vector<int>& kd, const std::vector<int>& ed) {
        std::int64_t idx = 0;
        for (std::size_t t = 0; t < keep.size(); ++t)
            idx += static_cast<std::int64_t>(kd[t]) * stride[static_cast<std::size_t>(keep[t])];
        for (std::size_t t = 0; t < env.size(); ++t)
            idx += static_cast<std::int64_t>(ed[t]) * stride[static_cast<std::size_t>(env[t])];
        return idx;
    };

    Matrix out = Matrix::Zero(dk, dk);
    for (std::int64_t r = 0; r < dk; ++r) {
        auto rd = keep_shape.unpack(r);
        for (std::int64_t c = 0; c < dk; ++c) {
            auto cd = keep_shape.unpack(c);
            cxd sum = 0.0;
            for (std::int64_t e = 0; e < de; ++e) {
                auto ed = env_dims.empty() ? std::vector<int>{} : env_shape.unpack(e);
                sum += rho(compose(rd, ed), compose(cd, ed));
            }
            out(r, c) = sum;
        }
    }
    return Operator(std::move(out));
}

inline void require_hermitian(const Operator& h, const std::string& what,
                              double tol = 1e-10)
{
    if (!h.hermitian(tol))
        throw validation_error(what + ": matrix is not hermitian within " +
                               std::to_string(tol));
}

/// exp(-i h t) via eigendecomposition of the (validated) hermitian h.
inline Operator propagator(const Operator& h, double t)
{
    require_hermitian(h, "propagator");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat());
    const auto& vals = es.eigenvalues();
    const Matrix& vecs = es.eigenvectors();
    Vector phases(h.dim());
    for (std::int64_t i = 0; i < h.dim(); ++i)
        phases(i) = std::exp(cxd(0.0, -vals(i) * t));
    return Operator(Matrix(vecs * phases.asDiagonal() * vecs.adjoint()));
}

inline StateVector evolve_exact(const Operator& h, const StateVector& psi, double t)
{
    if (h.dim() != psi.dim())
        throw argument_error("evolve_exact: dimensions differ");
    require_hermitian(h, "evolve_exact");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat());
    Vector c = es.eigenvectors().adjoint() * psi.vec();
    for (std::int64_t i = 0; i < h.dim(); ++i)
        c(i) *= std::exp(cxd(0.0, -es.eigenvalues()(i) * t));
    return StateVector(Vector(es.eigenvectors() * c));
}

inline cxd expectation(const StateVector& psi, const Operator& o)
{
    if (psi.dim() != o.dim())
        throw argument_error("expectation: dimensions differ");
    return (psi.vec().adjoint() * o.mat() * psi.vec())(0, 0);
}

inline std::vector<double> spectrum(const Operator& h)
{
    require_hermitian(h, "spectrum");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat(), Eigen::EigenvaluesOnly);
    std::vector<double> out(static_cast<std::size_t>(h.dim()));
    for (std::int64_t i = 0; i < h.dim(); ++i)
        out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return out;
}

// JSON emission: {dim, entries: [[re, im], ...] row-major}.

inline json to_json(const Operator& op)
{
    json entries = json::array();
    for (std::int64_t i = 0; i < op.dim(); ++i)
        for (std::int64_t j = 0; j < op.dim(); ++j)
            entries.push_back({op(i, j).real(), op(i, j).imag()});
    return json{{"dim", op.dim()}, {"entries", std::move(entries)}};
}

inline Operator operator_from_json(const json& j)
{
    std::int64_t dim = j.at("dim").get<std::int64_t>();
    const auto& entries = j.at("entries");
    if (static_cast<std::int64_t>(entries.size()) != dim * dim)
        throw argument_error("operator json entry count does not match dim");
    Matrix m(dim, dim);
    std::int64_t k = 0;
    for (std::int64_t i = 0; i < dim; ++i)
        for (std::int64_t j2 = 0; j2 < dim; ++j2, ++k)
            m(i, j2) = cxd(entries[static_cast<std::size_t>(k)][0].get<double>(),
                           entries[static_cast<std::size_t>(k)][1].get<double>());
    return Operator(std::move(m));
}

// Pauli matrices, used by builders and tests alike.
inline Operator pauli_x()
{
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return Operator(std::move(m));
}
inline Operator pauli_y()
{
    Matrix m(2, 2);
    m << cxd(0, 0), cxd(0, -1), cxd(0, 1), cxd(0, 0);
    return Operator(std::move(m));
}
inline Operator pauli_z()
{
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return Operator(std::move(m));
}

} // namespace qhier
