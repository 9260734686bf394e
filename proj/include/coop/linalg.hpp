#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace coop {

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

// Dense Hermitian matrix. Symmetry is checked by the routines that rely on it.
template <typename Scalar>
using HermitianMatrix = ComplexMatrix<Scalar>;

// Relative to max(1, largest entry magnitude).
inline constexpr double kHermitianTolerance = 1e-12;
// Noise covariances with smallest eigenvalue below this fraction of the trace are rejected.
inline constexpr double kDefiniteTolerance = 1e-12;

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m,
                  typename Derived::RealScalar tol = kHermitianTolerance)
{
  using Real = typename Derived::RealScalar;
  if (m.rows() != m.cols())
    return false;
  if (m.size() == 0)
    return true;
  const Real scale = std::max<Real>(Real(1), m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

/*! \brief log2 det(I + S N^{-1}) in bits.
 *
 * N is whitened by its Cholesky factor L, then I + L^{-1} S L^{-H} is factored again; the
 * result is twice the sum of the log of the second factor's diagonal.
 * Throws std::invalid_argument on shape or symmetry problems and std::domain_error when the
 * noise is not positive definite or the signal is not positive semidefinite.
 */
template <typename DerivedS, typename DerivedN>
typename DerivedS::RealScalar logdet_ipm(const Eigen::MatrixBase<DerivedS>& signal_cov,
                                         const Eigen::MatrixBase<DerivedN>& noise_cov)
{
  using Real = typename DerivedS::RealScalar;
  using Plain = typename DerivedN::PlainObject;

  if (signal_cov.rows() != signal_cov.cols() || noise_cov.rows() != noise_cov.cols()
      || signal_cov.rows() != noise_cov.rows())
    throw std::invalid_argument("logdet_ipm: dimension mismatch");
  if (noise_cov.rows() == 0)
    throw std::invalid_argument("logdet_ipm: empty matrices");
  if (!is_hermitian(signal_cov) || !is_hermitian(noise_cov))
    throw std::invalid_argument("logdet_ipm: covariances must be Hermitian");

  const Real trace = noise_cov.trace().real();
  if (!(trace > Real(0)))
    throw std::domain_error("logdet_ipm: noise covariance is not positive definite");
  Plain shifted = noise_cov;
  shifted.diagonal().array() -= Real(kDefiniteTolerance) * trace;
  if (Eigen::LLT<Plain>(shifted).info() != Eigen::Success)
    throw std::domain_error("logdet_ipm: noise covariance is not positive definite");

  const Eigen::LLT<Plain> noise_chol(noise_cov);
  Plain left = noise_chol.matrixL().solve(Plain(signal_cov));
  Plain whitened = noise_chol.matrixL().solve(Plain(left.adjoint()));
  Plain m = (whitened + whitened.adjoint()) * Real(0.5);
  m.diagonal().array() += Real(1);

  const Eigen::LLT<Plain> chol(m);
  if (chol.info() != Eigen::Success)
    throw std::domain_error("logdet_ipm: signal covariance is not positive semidefinite");
  Real acc = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    acc += std::log(std::real(chol.matrixLLT()(i, i)));
  return std::max(Real(0), Real(2) * acc / std::numbers::ln2_v<Real>);
}

enum class NoiseKind { Destination, Relay };

struct SymbolTag {
  int source = 0;
  int symbol = 0;
  bool operator==(const SymbolTag&) const = default;
};

/*! \brief Linear Gaussian channel y = S x + W n seen by one destination.
 *
 * Every source symbol owns one signal column; every injected noise term owns one noise column
 * and a variance. Destination noise enters as identity columns, one per observation.
 */
template <typename Scalar>
class LinearChannelModel {
public:
  using Vector = ComplexVector<Scalar>;
  using Matrix = ComplexMatrix<Scalar>;

  explicit LinearChannelModel(Eigen::Index n_obs) : n_obs_(n_obs)
  {
    if (n_obs < 1)
      throw std::invalid_argument("LinearChannelModel: need at least one observation");
  }

  Eigen::Index n_obs() const noexcept { return n_obs_; }
  Eigen::Index n_signals() const noexcept { return static_cast<Eigen::Index>(signal_.size()); }
  Eigen::Index n_noises() const noexcept { return static_cast<Eigen::Index>(noise_.size()); }

  void add_signal(int source, int symbol, const Eigen::Ref<const Vector>& column)
  {
    check_length(column);
    if (source < 0 || symbol < 0)
      throw std::invalid_argument("LinearChannelModel: negative symbol tag");
    if (std::find(tags_.begin(), tags_.end(), SymbolTag{source, symbol}) != tags_.end())
      throw std::invalid_argument("LinearChannelModel: duplicate symbol tag");
    signal_.push_back(column);
    tags_.push_back({source, symbol});
  }

  void add_noise(const Eigen::Ref<const Vector>& column, Scalar variance,
                 NoiseKind kind = NoiseKind::Relay)
  {
    check_length(column);
    if (!(variance >= Scalar(0)) || !std::isfinite(variance))
      throw std::invalid_argument("LinearChannelModel: noise variance must be finite and >= 0");
    noise_.push_back(column);
    variances_.push_back(variance);
    kinds_.push_back(kind);
  }

  // One identity column per observation.
  void add_destination_noise(Scalar variance)
  {
    for (Eigen::Index k = 0; k < n_obs_; ++k)
      add_noise(Vector::Unit(n_obs_, k), variance, NoiseKind::Destination);
  }

  const Vector& signal_column(Eigen::Index k) const { return signal_.at(k); }
  const SymbolTag& tag(Eigen::Index k) const { return tags_.at(k); }
  const Vector& noise_column(Eigen::Index k) const { return noise_.at(k); }
  Scalar noise_variance(Eigen::Index k) const { return variances_.at(k); }
  NoiseKind noise_kind(Eigen::Index k) const { return kinds_.at(k); }

  // n_obs x n_signals matrix of all signal columns.
  Matrix signal_matrix() const
  {
    Matrix s(n_obs_, n_signals());
    for (Eigen::Index k = 0; k < n_signals(); ++k)
      s.col(k) = signal_[k];
    return s;
  }

  HermitianMatrix<Scalar> noise_covariance() const
  {
    Matrix w(n_obs_, n_noises());
    for (Eigen::Index k = 0; k < n_noises(); ++k)
      w.col(k) = noise_[k] * std::sqrt(variances_[k]);
    return w * w.adjoint();
  }

  // energy * sum over symbols of the listed sources of c c^H.
  HermitianMatrix<Scalar> signal_covariance(std::span<const int> sources, Scalar energy) const
  {
    Eigen::Index count = 0;
    for (const auto& t : tags_)
      count += in_subset(sources, t.source) ? 1 : 0;
    Matrix s(n_obs_, count);
    Eigen::Index c = 0;
    for (Eigen::Index k = 0; k < n_signals(); ++k)
      if (in_subset(sources, tags_[k].source))
        s.col(c++) = signal_[k];
    return (s * s.adjoint()) * energy;
  }

  // Every observation has exactly one destination-noise column, and it is the identity column.
  void validate() const
  {
    std::vector<int> hits(static_cast<std::size_t>(n_obs_), 0);
    for (Eigen::Index k = 0; k < n_noises(); ++k) {
      if (kinds_[k] != NoiseKind::Destination)
        continue;
      Eigen::Index row = -1;
      for (Eigen::Index i = 0; i < n_obs_; ++i)
        if (noise_[k][i] != std::complex<Scalar>(0)) {
          if (row >= 0 || noise_[k][i] != std::complex<Scalar>(1))
            throw std::invalid_argument("LinearChannelModel: destination noise must be an identity column");
          row = i;
        }
      if (row < 0)
        throw std::invalid_argument("LinearChannelModel: destination noise column is zero");
      ++hits[static_cast<std::size_t>(row)];
    }
    for (int h : hits)
      if (h != 1)
        throw std::invalid_argument("LinearChannelModel: each observation needs exactly one destination noise");
  }

private:
  static bool in_subset(std::span<const int> sources, int s)
  {
    return std::find(sources.begin(), sources.end(), s) != sources.end();
  }

  void check_length(const Eigen::Ref<const Vector>& column) const
  {
    if (column.size() != n_obs_)
      throw std::invalid_argument("LinearChannelModel: column length differs from n_obs");
  }

  Eigen::Index n_obs_;
  std::vector<Vector> signal_;
  std::vector<SymbolTag> tags_;
  std::vector<Vector> noise_;
  std::vector<Scalar> variances_;
  std::vector<NoiseKind> kinds_;
};

/*! \brief Conditional MI I(x_I ; y | x_{not I}) in bits.
 *
 * Symbols outside the subset are known to the receiver and drop out of both covariances.
 */
template <typename Scalar>
Scalar subset_mi(const LinearChannelModel<Scalar>& model, std::span<const int> subset,
                 Scalar symbol_energy, const HermitianMatrix<Scalar>& noise_cov)
{
  if (subset.empty())
    throw std::invalid_argument("subset_mi: subset must be nonempty");
  return logdet_ipm(model.signal_covariance(subset, symbol_energy), noise_cov);
}

template <typename Scalar>
Scalar subset_mi(const LinearChannelModel<Scalar>& model, std::span<const int> subset,
                 Scalar symbol_energy)
{
  if (subset.empty())
    throw std::invalid_argument("subset_mi: subset must be nonempty");
  return subset_mi(model, subset, symbol_energy, model.noise_covariance());
}

} // namespace coop
