// Finite-dimensional matrix-algebra substrate.
//
// Elements of M_n are dense complex matrices. Linear maps between matrix
// spaces (SuperMap) are stored as matrices acting on column-stacked
// vectorizations: vec(X)[i + j*n] = X(i, j), which is Eigen's native
// column-major storage. Tensor factors follow the Kronecker convention
// (a ⊗ b)((i,k),(j,l)) = a(i,j) b(k,l) with row index i*dim(b) + k.
//
// In finite dimension the normal dual and the full dual coincide, so states
// are plain density matrices and φ(x) = tr(ρx).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qqsp {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using Matrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidStateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class AlgebraKind { full, diagonal };

/// Which tensor leg a slice map averages out.
/// `first`: E_φ(a⊗b) = φ(a) b.  `second`: E_φ(a⊗b) = φ(b) a.
enum class Leg { first, second };

struct Tolerances {
  double cp = 1e-9;
  double unital = 1e-10;
  double identity = 1e-10;
};

inline const char* to_string(AlgebraKind kind) {
  return kind == AlgebraKind::full ? "full" : "diagonal";
}

// ---------------------------------------------------------------------------
// Elementary matrices
// ---------------------------------------------------------------------------

template <typename Scalar>
Matrix<Scalar> unit(Index n) {
  return Matrix<Scalar>::Identity(n, n);
}

/// Matrix unit E_ij of M_n.
template <typename Scalar>
Matrix<Scalar> matrix_unit(Index n, Index i, Index j) {
  Matrix<Scalar> e = Matrix<Scalar>::Zero(n, n);
  e(i, j) = Complex<Scalar>(1);
  return e;
}

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  static_assert(std::is_same_v<typename DerivedA::Scalar, typename DerivedB::Scalar>,
                "kron requires matching scalar types");
  const auto& bb = b.eval();
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
      a.rows() * bb.rows(), a.cols() * bb.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * bb.rows(), j * bb.cols(), bb.rows(), bb.cols()) = a(i, j) * bb;
  return out;
}

template <typename Derived>
Vector<typename Derived::RealScalar> vectorize(const Eigen::MatrixBase<Derived>& x) {
  const Matrix<typename Derived::RealScalar> m = x;
  return Eigen::Map<const Vector<typename Derived::RealScalar>>(m.data(), m.size());
}

template <typename Scalar>
Matrix<Scalar> unvectorize(const Vector<Scalar>& v, Index n) {
  if (v.size() != n * n) throw DimensionError("unvectorize: length is not n^2");
  return Eigen::Map<const Matrix<Scalar>>(v.data(), n, n);
}

/// Integer square root; throws when `n2` is not a perfect square.
inline Index exact_sqrt(Index n2) {
  auto r = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n2))));
  if (r * r != n2) throw DimensionError("dimension " + std::to_string(n2) + " is not a perfect square");
  return r;
}

template <typename Derived>
typename Derived::RealScalar hermiticity_residual(const Eigen::MatrixBase<Derived>& x) {
  return (x - x.adjoint()).norm();
}

template <typename Derived>
bool is_diagonal_matrix(const Eigen::MatrixBase<Derived>& x) {
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i)
      if (i != j && x(i, j) != typename Derived::Scalar(0)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// AlgebraElement
// ---------------------------------------------------------------------------

/// An element of M_n or of its diagonal subalgebra.
template <typename Scalar>
class AlgebraElement {
 public:
  explicit AlgebraElement(Matrix<Scalar> entries, AlgebraKind kind = AlgebraKind::full)
      : entries_(std::move(entries)), kind_(kind) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
      throw DimensionError("AlgebraElement: entries must be a non-empty square matrix");
    if (kind_ == AlgebraKind::diagonal && !is_diagonal_matrix(entries_))
      throw DimensionError("AlgebraElement: diagonal algebra element has off-diagonal entries");
  }

  static AlgebraElement diagonal(const RealVector<Scalar>& d) {
    return AlgebraElement(d.template cast<Complex<Scalar>>().asDiagonal().toDenseMatrix(),
                          AlgebraKind::diagonal);
  }

  Index dim() const { return entries_.rows(); }
  AlgebraKind kind() const { return kind_; }
  const Matrix<Scalar>& entries() const { return entries_; }

 private:
  Matrix<Scalar> entries_;
  AlgebraKind kind_;
};

template <typename Scalar>
AlgebraElement<Scalar> tensor(const AlgebraElement<Scalar>& a, const AlgebraElement<Scalar>& b) {
  const AlgebraKind kind = (a.kind() == AlgebraKind::diagonal && b.kind() == AlgebraKind::diagonal)
                               ? AlgebraKind::diagonal
                               : AlgebraKind::full;
  return AlgebraElement<Scalar>(kron(a.entries(), b.entries()), kind);
}

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

/// A state φ(x) = tr(ρx) given by its density matrix.
template <typename Scalar>
class State {
 public:
  /// Validates ρ. A skew-Hermitian part below `tol` is removed by
  /// symmetrization; anything larger is rejected.
  static State from_density(const Matrix<Scalar>& rho, Scalar tol = Scalar(1e-12)) {
    if (rho.rows() != rho.cols() || rho.rows() == 0)
      throw DimensionError("State: density matrix must be non-empty and square");
    if (hermiticity_residual(rho) > tol)
      throw InvalidStateError("State: density matrix is not Hermitian");
    Matrix<Scalar> sym = (rho + rho.adjoint()) / Scalar(2);
    if (std::abs(sym.trace().real() - Scalar(1)) > tol)
      throw InvalidStateError("State: trace differs from one");
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(sym, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol)
      throw InvalidStateError("State: density matrix has a negative eigenvalue");
    return State(std::move(sym));
  }

  static State pure(const Vector<Scalar>& psi) {
    const Vector<Scalar> u = psi.normalized();
    return from_density(u * u.adjoint());
  }

  static State diagonal(const RealVector<Scalar>& weights) {
    return from_density(weights.template cast<Complex<Scalar>>().asDiagonal().toDenseMatrix());
  }

  static State basis(Index n, Index k) {
    return from_density(matrix_unit<Scalar>(n, k, k));
  }

  static State maximally_mixed(Index n) {
    return State(unit<Scalar>(n) / Scalar(n));
  }

  Index dim() const { return rho_.rows(); }
  const Matrix<Scalar>& density() const { return rho_; }

  template <typename Derived>
  Complex<Scalar> operator()(const Eigen::MatrixBase<Derived>& x) const {
    if (x.rows() != dim() || x.cols() != dim()) throw DimensionError("State: observable dimension mismatch");
    return (rho_.cwiseProduct(x.transpose())).sum();
  }

  friend bool operator==(const State& a, const State& b) { return a.rho_ == b.rho_; }

 private:
  explicit State(Matrix<Scalar> rho) : rho_(std::move(rho)) {}
  Matrix<Scalar> rho_;
};

template <typename Scalar>
State<Scalar> tensor(const State<Scalar>& a, const State<Scalar>& b) {
  return State<Scalar>::from_density(kron(a.density(), b.density()), Scalar(1e-10));
}

/// Trace norm ‖x‖₁ = Σ singular values.
template <typename Derived>
typename Derived::RealScalar trace_norm(const Eigen::MatrixBase<Derived>& x) {
  using Real = typename Derived::RealScalar;
  const Matrix<Real> m = x;
  if (hermiticity_residual(m) <= Real(1e-12) * std::max<Real>(Real(1), m.norm())) {
    Eigen::SelfAdjointEigenSolver<Matrix<Real>> es((m + m.adjoint()) / Real(2), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::JacobiSVD<Matrix<Real>> svd(m);
  return svd.singularValues().sum();
}

template <typename Scalar>
Scalar trace_norm_distance(const State<Scalar>& phi, const State<Scalar>& psi) {
  if (phi.dim() != psi.dim()) throw DimensionError("trace_norm_distance: dimension mismatch");
  return trace_norm(phi.density() - psi.density());
}

// ---------------------------------------------------------------------------
// Flip and slice maps on elements
// ---------------------------------------------------------------------------

/// Permutation matrix S with S (u ⊗ v) = v ⊗ u on C^n ⊗ C^n.
template <typename Scalar>
Matrix<Scalar> swap_matrix(Index n) {
  Matrix<Scalar> s = Matrix<Scalar>::Zero(n * n, n * n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k) s(k * n + i, i * n + k) = Complex<Scalar>(1);
  return s;
}

/// U(z) = S z S, so that U(x ⊗ y) = y ⊗ x.
template <typename Scalar>
Matrix<Scalar> flip_conjugate(const Matrix<Scalar>& z, Index n) {
  if (z.rows() != n * n || z.cols() != n * n)
    throw DimensionError("flip_conjugate: element is not in M_n ⊗ M_n");
  Matrix<Scalar> out(n * n, n * n);
  for (Index j = 0; j < n; ++j)
    for (Index l = 0; l < n; ++l)
      for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < n; ++k) out(i * n + k, j * n + l) = z(k * n + i, l * n + j);
  return out;
}

template <typename Scalar>
Matrix<Scalar> flip_conjugate(const Matrix<Scalar>& z) {
  return flip_conjugate(z, exact_sqrt(z.rows()));
}

/// Slice map E_φ: M_n ⊗ M_n → M_n, realized as a partial trace.
///
/// Leg::first  : Tr_1((ρ ⊗ 1) z), so E_φ(a ⊗ b) = φ(a) b.
/// Leg::second : Tr_2((1 ⊗ ρ) z), so E_φ(a ⊗ b) = φ(b) a.
template <typename Scalar>
Matrix<Scalar> conditional_expectation(const State<Scalar>& phi, const Matrix<Scalar>& z,
                                       Leg leg = Leg::first) {
  const Index n = phi.dim();
  if (z.rows() != n * n || z.cols() != n * n)
    throw DimensionError("conditional_expectation: element is not in M_n ⊗ M_n");
  const Matrix<Scalar>& rho = phi.density();
  Matrix<Scalar> out = Matrix<Scalar>::Zero(n, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r) {
      Complex<Scalar> acc(0);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          acc += leg == Leg::first ? rho(i, j) * z(j * n + r, i * n + c)
                                   : rho(i, j) * z(r * n + j, c * n + i);
        }
      out(r, c) = acc;
    }
  return out;
}

// ---------------------------------------------------------------------------
// SuperMap
// ---------------------------------------------------------------------------

/// Linear map M_in → M_out stored on column-stacked vectorizations.
template <typename Scalar>
class SuperMap {
 public:
  SuperMap(Index in_dim, Index out_dim, Matrix<Scalar> matrix)
      : in_dim_(in_dim), out_dim_(out_dim), matrix_(std::move(matrix)) {
    if (in_dim_ <= 0 || out_dim_ <= 0) throw DimensionError("SuperMap: dimensions must be positive");
    if (matrix_.rows() != out_dim_ * out_dim_ || matrix_.cols() != in_dim_ * in_dim_)
      throw DimensionError("SuperMap: matrix shape does not match (out^2) x (in^2)");
  }

  /// Builds the map from its action on the matrix units E_rc.
  template <typename F>
  static SuperMap from_action(Index in_dim, Index out_dim, F&& action) {
    Matrix<Scalar> m(out_dim * out_dim, in_dim * in_dim);
    for (Index c = 0; c < in_dim; ++c)
      for (Index r = 0; r < in_dim; ++r) {
        const Matrix<Scalar> y = action(matrix_unit<Scalar>(in_dim, r, c));
        if (y.rows() != out_dim || y.cols() != out_dim)
          throw DimensionError("SuperMap::from_action: action returned wrong output shape");
        m.col(r + c * in_dim) = Eigen::Map<const Vector<Scalar>>(y.data(), y.size());
      }
    return SuperMap(in_dim, out_dim, std::move(m));
  }

  static SuperMap identity(Index n) {
    return SuperMap(n, n, Matrix<Scalar>::Identity(n * n, n * n));
  }

  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }
  const Matrix<Scalar>& matrix() const { return matrix_; }

  template <typename Derived>
  Matrix<Scalar> operator()(const Eigen::MatrixBase<Derived>& x) const {
    if (x.rows() != in_dim_ || x.cols() != in_dim_) throw DimensionError("SuperMap: input dimension mismatch");
    const Matrix<Scalar> xm = x;
    const Vector<Scalar> v = matrix_ * Eigen::Map<const Vector<Scalar>>(xm.data(), xm.size());
    return Eigen::Map<const Matrix<Scalar>>(v.data(), out_dim_, out_dim_);
  }

  /// Composition (a ∘ b)(x) = a(b(x)).
  friend SuperMap operator*(const SuperMap& a, const SuperMap& b) {
    if (a.in_dim_ != b.out_dim_) throw DimensionError("SuperMap composition: inner dimensions differ");
    return SuperMap(b.in_dim_, a.out_dim_, a.matrix_ * b.matrix_);
  }

  friend SuperMap operator+(const SuperMap& a, const SuperMap& b) {
    a.require_same_shape(b);
    return SuperMap(a.in_dim_, a.out_dim_, a.matrix_ + b.matrix_);
  }

  friend SuperMap operator-(const SuperMap& a, const SuperMap& b) {
    a.require_same_shape(b);
    return SuperMap(a.in_dim_, a.out_dim_, a.matrix_ - b.matrix_);
  }

  friend SuperMap operator*(Scalar w, const SuperMap& a) {
    return SuperMap(a.in_dim_, a.out_dim_, Complex<Scalar>(w) * a.matrix_);
  }

  friend bool operator==(const SuperMap& a, const SuperMap& b) {
    return a.in_dim_ == b.in_dim_ && a.out_dim_ == b.out_dim_ && a.matrix_ == b.matrix_;
  }

 private:
  void require_same_shape(const SuperMap& other) const {
    if (in_dim_ != other.in_dim_ || out_dim_ != other.out_dim_)
      throw DimensionError("SuperMap: shape mismatch");
  }

  Index in_dim_;
  Index out_dim_;
  Matrix<Scalar> matrix_;
};

/// Largest singular value of a dense matrix.
template <typename Derived>
typename Derived::RealScalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Derived::RealScalar;
  if (m.size() == 0) return Real(0);
  const Matrix<Real> a = m;
  const Matrix<Real> gram = a.rows() >= a.cols() ? Matrix<Real>(a.adjoint() * a) : Matrix<Real>(a * a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(Real(0), es.eigenvalues().maxCoeff()));
}

/// Operator norm of the map induced by the Frobenius norm on its vectorized
/// input and output. Every residual in the library is measured with it.
template <typename Scalar>
Scalar operator_norm(const SuperMap<Scalar>& map) {
  return spectral_norm(map.matrix());
}

template <typename Scalar>
Scalar distance(const SuperMap<Scalar>& a, const SuperMap<Scalar>& b) {
  return operator_norm(a - b);
}

/// Permutation T with T vec(X) = vec(Xᵀ) on M_n.
template <typename Scalar>
Matrix<Scalar> transpose_permutation(Index n) {
  Matrix<Scalar> t = Matrix<Scalar>::Zero(n * n, n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) t(j + i * n, i + j * n) = Complex<Scalar>(1);
  return t;
}

/// Predual L_* determined by tr(L_*(ρ) x) = tr(ρ L(x)) for all ρ, x.
template <typename Scalar>
SuperMap<Scalar> predual(const SuperMap<Scalar>& map) {
  Matrix<Scalar> m = transpose_permutation<Scalar>(map.in_dim()) * map.matrix().transpose() *
                     transpose_permutation<Scalar>(map.out_dim());
  return SuperMap<Scalar>(map.out_dim(), map.in_dim(), std::move(m));
}

/// Image of a state under the predual of `map`, i.e. the state x ↦ φ(map(x)).
template <typename Scalar>
State<Scalar> pull_back(const SuperMap<Scalar>& map, const State<Scalar>& phi, Scalar tol = Scalar(1e-9)) {
  if (phi.dim() != map.out_dim()) throw DimensionError("pull_back: state lives on the wrong algebra");
  return State<Scalar>::from_density(predual(map)(phi.density()), tol);
}

// ---------------------------------------------------------------------------
// Map builders
// ---------------------------------------------------------------------------

/// E_φ as a SuperMap M_n ⊗ M_n → M_n.
template <typename Scalar>
SuperMap<Scalar> conditional_expectation_map(const State<Scalar>& phi, Leg leg = Leg::first) {
  const Index n = phi.dim();
  return SuperMap<Scalar>::from_action(
      n * n, n, [&](const Matrix<Scalar>& z) { return conditional_expectation(phi, z, leg); });
}

/// U as a SuperMap on M_n ⊗ M_n.
template <typename Scalar>
SuperMap<Scalar> flip_map(Index n) {
  const Matrix<Scalar> s = swap_matrix<Scalar>(n);
  return SuperMap<Scalar>(n * n, n * n, kron(s, s));
}

/// x ↦ x ⊗ 1 (Leg::first) or x ↦ 1 ⊗ x (Leg::second).
template <typename Scalar>
SuperMap<Scalar> embedding_map(Index n, Leg leg) {
  const Matrix<Scalar> one = unit<Scalar>(n);
  return SuperMap<Scalar>::from_action(n, n * n, [&](const Matrix<Scalar>& x) {
    return leg == Leg::first ? kron(x, one) : kron(one, x);
  });
}

/// x ↦ ω(x)·1_out.
template <typename Scalar>
SuperMap<Scalar> constant_map(const State<Scalar>& omega, Index out_dim) {
  const Matrix<Scalar> one = unit<Scalar>(out_dim);
  return SuperMap<Scalar>::from_action(omega.dim(), out_dim,
                                       [&](const Matrix<Scalar>& x) -> Matrix<Scalar> { return omega(x) * one; });
}

/// (A ⊗ B)(x ⊗ y) = A(x) ⊗ B(y), extended linearly.
template <typename Scalar>
SuperMap<Scalar> tensor(const SuperMap<Scalar>& a, const SuperMap<Scalar>& b) {
  const Index na = a.in_dim();
  const Index nb = b.in_dim();
  std::vector<Matrix<Scalar>> a_images(static_cast<std::size_t>(na * na));
  std::vector<Matrix<Scalar>> b_images(static_cast<std::size_t>(nb * nb));
  for (Index j = 0; j < na; ++j)
    for (Index i = 0; i < na; ++i) a_images[static_cast<std::size_t>(i + j * na)] = a(matrix_unit<Scalar>(na, i, j));
  for (Index l = 0; l < nb; ++l)
    for (Index k = 0; k < nb; ++k) b_images[static_cast<std::size_t>(k + l * nb)] = b(matrix_unit<Scalar>(nb, k, l));

  const Index in = na * nb;
  const Index out = a.out_dim() * b.out_dim();
  Matrix<Scalar> m(out * out, in * in);
  for (Index c = 0; c < in; ++c)
    for (Index r = 0; r < in; ++r) {
      const Index i = r / nb, k = r % nb, j = c / nb, l = c % nb;
      const Matrix<Scalar> y = kron(a_images[static_cast<std::size_t>(i + j * na)],
                                    b_images[static_cast<std::size_t>(k + l * nb)]);
      m.col(r + c * in) = Eigen::Map<const Vector<Scalar>>(y.data(), y.size());
    }
  return SuperMap<Scalar>(in, out, std::move(m));
}

/// Residual ‖U∘map − map‖ of flip symmetry of the output.
template <typename Scalar>
Scalar flip_residual(const SuperMap<Scalar>& map) {
  const Index n = exact_sqrt(map.out_dim());
  return distance(flip_map<Scalar>(n) * map, map);
}

// ---------------------------------------------------------------------------
// Complete positivity
// ---------------------------------------------------------------------------

template <typename Scalar>
struct ChoiReport {
  bool is_unital = false;
  Scalar min_choi_eigenvalue = Scalar(0);
  Scalar unitality_residual = Scalar(0);
  bool is_cp = false;
};

/// C(Φ) = Σ_ij E_ij ⊗ Φ(E_ij).
template <typename Scalar>
Matrix<Scalar> choi_matrix(const SuperMap<Scalar>& map) {
  const Index n = map.in_dim();
  const Index m = map.out_dim();
  Matrix<Scalar> c = Matrix<Scalar>::Zero(n * m, n * m);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) c.block(i * m, j * m, m, m) = map(matrix_unit<Scalar>(n, i, j));
  return c;
}

template <typename Scalar>
ChoiReport<Scalar> certify_unital_cp(const SuperMap<Scalar>& map, Scalar cp_tolerance = Scalar(1e-9),
                                     Scalar unital_tolerance = Scalar(1e-10)) {
  ChoiReport<Scalar> report;
  const Matrix<Scalar> c = choi_matrix(map);
  // A Hermiticity-breaking map fails through its skew part.
  const Scalar skew = hermiticity_residual(c);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es((c + c.adjoint()) / Scalar(2), Eigen::EigenvaluesOnly);
  report.min_choi_eigenvalue = es.eigenvalues().minCoeff();
  report.is_cp = report.min_choi_eigenvalue >= -cp_tolerance && skew <= cp_tolerance;
  report.unitality_residual = (map(unit<Scalar>(map.in_dim())) - unit<Scalar>(map.out_dim())).norm();
  report.is_unital = report.unitality_residual <= unital_tolerance;
  return report;
}

}  // namespace qqsp
