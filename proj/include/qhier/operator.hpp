#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "qhier/errors.hpp"
#include "qhier/rng.hpp"

namespace qhier {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr std::int64_t kDefaultDimensionCap = 1 << 14;

inline std::int64_t& dimension_cap_ref()
{
    static std::int64_t cap = kDefaultDimensionCap;
    return cap;
}

inline std::int64_t dimension_cap() { return dimension_cap_ref(); }

inline void set_dimension_cap(std::int64_t cap)
{
    if (cap < 4)
        throw argument_error("dimension cap must be at least 4");
    dimension_cap_ref() = cap;
}

/// Throws resource_error if dim exceeds the configured cap.
inline void check_dimension(std::int64_t dim, const std::string& what)
{
    if (dim > dimension_cap())
        throw resource_error(what + ": dimension " + std::to_string(dim) +
                             " exceeds cap " + std::to_string(dimension_cap()));
}

/// RAII override of the dimension cap, for tests and the CLI.
class DimensionCapGuard {
public:
    explicit DimensionCapGuard(std::int64_t cap) : previous_(dimension_cap())
    {
        set_dimension_cap(cap);
    }
    ~DimensionCapGuard() { dimension_cap_ref() = previous_; }
    DimensionCapGuard(const DimensionCapGuard&) = delete;
    DimensionCapGuard& operator=(const DimensionCapGuard&) = delete;

private:
    std::int64_t previous_;
};

inline double max_abs(const Matrix& m)
{
    if (m.size() == 0)
        return 0.0;
    return m.cwiseAbs().maxCoeff();
}

/// Dense operator on a finite Hilbert space. Immutable after construction;
/// entries are validated finite.
class Operator {
public:
    Operator() = default;

    explicit Operator(Matrix m) : m_(std::move(m))
    {
        if (m_.rows() != m_.cols())
            throw argument_error("operator matrix must be square");
        if (!m_.allFinite())
            throw validation_error("operator entries must be finite");
    }

    static Operator identity(std::int64_t dim)
    {
        return Operator(Matrix::Identity(dim, dim));
    }

    static Operator zero(std::int64_t dim)
    {
        return Operator(Matrix::Zero(dim, dim));
    }

    std::int64_t dim() const { return m_.rows(); }
    const Matrix& mat() const { return m_; }
    cxd operator()(std::int64_t i, std::int64_t j) const { return m_(i, j); }

    bool hermitian(double tol = 1e-10) const
    {
        return max_abs(m_ - m_.adjoint()) <= tol;
    }

    bool unitary(double tol = 1e-10) const
    {
        Matrix r = m_.adjoint() * m_ - Matrix::Identity(dim(), dim());
        return max_abs(r) <= tol;
    }

    Operator adjoint() const { return Operator(m_.adjoint()); }

    friend Operator operator+(const Operator& a, const Operator& b)
    {
        if (a.dim() != b.dim())
            throw argument_error("operator dimensions differ in sum");
        return Operator(a.m_ + b.m_);
    }
    friend Operator operator-(const Operator& a, const Operator& b)
    {
        if (a.dim() != b.dim())
            throw argument_error("operator dimensions differ in difference");
        return Operator(a.m_ - b.m_);
    }
    friend Operator operator*(const Operator& a, const Operator& b)
    {
        if (a.dim() != b.dim())
            throw argument_error("operator dimensions differ in product");
        return Operator(a.m_ * b.m_);
    }
    friend Operator operator*(cxd s, const Operator& a) { return Operator(s * a.m_); }
    friend Operator operator*(double s, const Operator& a) { return Operator(s * a.m_); }

private:
    Matrix m_;
};

inline Operator commutator(const Operator& a, const Operator& b)
{
    return Operator(a.mat() * b.mat() - b.mat() * a.mat());
}

inline Operator anticommutator(const Operator& a, const Operator& b)
{
    return Operator(a.mat() * b.mat() + b.mat() * a.mat());
}

/// State vector with a recorded normalization flag (norm within 1e-12 of 1).
class StateVector {
public:
    StateVector() = default;

    explicit StateVector(Vector v) : v_(std::move(v))
    {
        if (!v_.allFinite())
            throw validation_error("state amplitudes must be finite");
        normalized_ = std::abs(v_.norm() - 1.0) <= 1e-12;
    }

    static StateVector basis(std::int64_t dim, std::int64_t index)
    {
        Vector v = Vector::Zero(dim);
        v(index) = 1.0;
        return StateVector(std::move(v));
    }

    std::int64_t dim() const { return v_.size(); }
    const Vector& vec() const { return v_; }
    cxd operator()(std::int64_t i) const { return v_(i); }
    double norm() const { return v_.norm(); }
    bool normalized() const { return normalized_; }

    StateVector normalized_copy() const
    {
        double n = v_.norm();
        if (n == 0.0)
            throw argument_error("cannot normalize the zero vector");
        return StateVector(v_ / n);
    }

private:
    Vector v_;
    bool normalized_ = false;
};

/// Composite-space layout: one local dimension per site, site 0 is the
/// leftmost (slowest-varying) tensor factor, matching the kron convention.
struct SpaceShape {
    std::vector<int> site_dims;

    SpaceShape() = default;
    explicit SpaceShape(std::vector<int> dims) : site_dims(std::move(dims))
    {
        for (int d : site_dims)
            if (d < 1)
                throw argument_error("site dimensions must be positive");
    }

    static SpaceShape uniform(int sites, int d)
    {
        return SpaceShape(std::vector<int>(static_cast<std::size_t>(sites), d));
    }

    int sites() const { return static_cast<int>(site_dims.size()); }

    std::int64_t total_dim() const
    {
        std::int64_t p = 1;
        for (int d : site_dims) {
            if (p > (std::int64_t(1) << 62) / d)
                throw resource_error("space dimension overflows 63 bits");
            p *= d;
        }
        return p;
    }

    std::int64_t pack(const std::vector<int>& digits) const
    {
        std::int64_t idx = 0;
        for (int s = 0; s < sites(); ++s)
            idx = idx * site_dims[static_cast<std::size_t>(s)] +
                  digits[static_cast<std::size_t>(s)];
        return idx;
    }

    std::vector<int> unpack(std::int64_t flat) const
    {
        std::vector<int> digits(site_dims.size());
        for (int s = sites() - 1; s >= 0; --s) {
            int d = site_dims[static_cast<std::size_t>(s)];
            digits[static_cast<std::size_t>(s)] = static_cast<int>(flat % d);
            flat /= d;
        }
        return digits;
    }
};

// Random test instances. All randomness flows through explicit Rng streams.

inline Operator random_hermitian(std::int64_t dim, Rng& rng)
{
    Matrix g(dim, dim);
    for (std::int64_t i = 0; i < dim; ++i)
        for (std::int64_t j = 0; j < dim; ++j)
            g(i, j) = rng.normal_complex();
    return Operator(Matrix(0.5 * (g + g.adjoint())));
}

inline StateVector random_state(std::int64_t dim, Rng& rng)
{
    Vector v(dim);
    for (std::int64_t i = 0; i < dim; ++i)
        v(i) = rng.normal_complex();
    return StateVector(Vector(v / v.norm()));
}

/// Random density matrix of the given rank (eigenvalues strictly positive).
inline Operator random_density(std::int64_t dim, int rank, Rng& rng)
{
    Matrix rho = Matrix::Zero(dim, dim);
    std::vector<double> w(static_cast<std::size_t>(rank));
    double tot = 0.0;
    for (auto& x : w) {
        x = 0.1 + rng.uniform();
        tot += x;
    }
    Matrix g(dim, rank);
    for (std::int64_t i = 0; i < dim; ++i)
        for (int j = 0; j < rank; ++j)
            g(i, j) = rng.normal_complex();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, rank);
    for (int j = 0; j < rank; ++j)
        rho += (w[static_cast<std::size_t>(j)] / tot) * q.col(j) * q.col(j).adjoint();
    return Operator(std::move(rho));
}

} // namespace qhier
