#pragma once

// Multiplier-bootstrap ridge regression for linear bandits.
//
// Each replicate keeps V, its inverse and b, with V_0 = (1 + xi) I. One
// observation (feature a, reward r) with weights (w, w', w'') does
//
//   V += w a a^T + lambda w'' I      b += a (w r + lambda w'' * 1)
//
// in the default `identity` mode, or with lambda w'' a a^T in place of the
// identity term in `feature` mode. The a a^T term is absorbed into V^{-1} with
// one Sherman-Morrison step; the identity term with p rank-one steps along
// the coordinate axes (p <= 20) or a fresh inversion (p > 20).

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/LU>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mbe/rng.hpp"
#include "mbe/score.hpp"
#include "mbe/spec_string.hpp"
#include "mbe/weights.hpp"

namespace mbe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class LbPseudo { Identity, Feature };

inline LbPseudo parse_lb_pseudo(const std::string& s) {
  if (s == "identity") return LbPseudo::Identity;
  if (s == "feature") return LbPseudo::Feature;
  throw ConfigError("lb_pseudo must be 'identity' or 'feature', got '" + s + "'");
}

/// Largest dimension for which the identity term is applied as rank-one updates.
inline constexpr std::size_t kRankOneIdentityMaxDim = 20;

/// Threshold on |1/c + u^T V^{-1} u| below which a rank-one inverse update is unsafe.
inline constexpr double kShermanMorrisonTol = 1e-12;

/// V^{-1} <- (V + c u u^T)^{-1}. Returns false (leaving vinv untouched) when the
/// update is numerically degenerate.
inline bool sherman_morrison_update(Matrix& vinv, const Vector& u, double c) {
  if (c == 0.0) return true;
  const Vector vu = vinv * u;
  const double q = u.dot(vu);
  // |1/c + q| < tol, multiplied through by |c| so that tiny c stays finite.
  const double scaled = 1.0 + c * q;
  if (std::abs(scaled) < kShermanMorrisonTol * std::abs(c)) return false;
  vinv.noalias() -= (c / scaled) * vu * vu.transpose();
  return true;
}

/// Single-axis variant of sherman_morrison_update for c e_i e_i^T.
inline bool sherman_morrison_axis_update(Matrix& vinv, Eigen::Index i, double c) {
  if (c == 0.0) return true;
  const double q = vinv(i, i);
  const double scaled = 1.0 + c * q;
  if (std::abs(scaled) < kShermanMorrisonTol * std::abs(c)) return false;
  const Vector col = vinv.col(i);
  const Vector row = vinv.row(i).transpose();
  vinv.noalias() -= (c / scaled) * col * row.transpose();
  return true;
}

/// Direct solve of V theta = b by Cholesky. Throws NumericError if V is not SPD.
inline Vector lb_batch_solve(const Matrix& v, const Vector& b) {
  if (v.rows() != v.cols() || v.rows() != b.size()) throw std::invalid_argument("lb_batch_solve: shape mismatch");
  const double scale = v.cwiseAbs().maxCoeff();
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0)) {
    throw NumericError("lb_batch_solve: V is not symmetric");
  }
  Eigen::LLT<Matrix> llt(v);
  if (llt.info() != Eigen::Success) throw NumericError("lb_batch_solve: V is not positive definite");
  return llt.solve(b);
}

struct LinearReplicate {
  Matrix v;
  Matrix vinv;
  Vector b;
  std::size_t reinversions = 0;

  LinearReplicate() = default;
  LinearReplicate(std::size_t dim, double ridge)
      : v(Matrix::Identity(dim, dim) * (1.0 + ridge)),
        vinv(Matrix::Identity(dim, dim) / (1.0 + ridge)),
        b(Vector::Zero(dim)) {}

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(b.size()); }
  [[nodiscard]] Vector theta() const { return vinv * b; }

  void reinvert() {
    Eigen::FullPivLU<Matrix> lu(v);
    if (!lu.isInvertible()) throw NumericError("linear replicate: V became singular");
    vinv = lu.inverse();
    ++reinversions;
  }
};

/// One weighted observation folded into a replicate.
inline void lb_update(LinearReplicate& rep, const Vector& feature, double reward, const WeightTriplet& w,
                      double lambda, LbPseudo mode = LbPseudo::Identity) {
  const auto p = static_cast<Eigen::Index>(rep.dim());
  if (feature.size() != p) throw std::invalid_argument("lb_update: feature dimension mismatch");
  const double pseudo = lambda * w.omega_dprime;

  rep.b += feature * (w.omega * reward + pseudo);

  if (mode == LbPseudo::Feature) {
    const double c = w.omega + pseudo;
    rep.v.noalias() += c * feature * feature.transpose();
    if (!sherman_morrison_update(rep.vinv, feature, c)) rep.reinvert();
    return;
  }

  rep.v.noalias() += w.omega * feature * feature.transpose();
  rep.v.diagonal().array() += pseudo;
  if (static_cast<std::size_t>(p) > kRankOneIdentityMaxDim) {
    rep.reinvert();
    return;
  }
  if (!sherman_morrison_update(rep.vinv, feature, w.omega)) {
    rep.reinvert();
    return;
  }
  if (pseudo == 0.0) return;
  // Replay the identity term axis by axis against the running inverse.
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!sherman_morrison_axis_update(rep.vinv, i, pseudo)) {
      rep.reinvert();
      return;
    }
  }
}

/// B replicates of the weighted ridge model.
class LinearEnsemble {
 public:
  LinearEnsemble(std::size_t replicates, std::size_t dim, TuningParams params, double ridge = 0.0,
                 LbPseudo mode = LbPseudo::Identity, bool pseudo_rewards = true)
      : params_(params), ridge_(ridge), mode_(mode), pseudo_(pseudo_rewards) {
    if (replicates == 0) throw ConfigError("linear ensemble needs at least one replicate");
    if (dim == 0) throw ConfigError("linear ensemble needs a positive dimension");
    if (ridge < 0.0) throw ConfigError("ridge penalty xi must be nonnegative");
    reps_.assign(replicates, LinearReplicate(dim, ridge));
  }

  [[nodiscard]] std::size_t replicates() const { return reps_.size(); }
  [[nodiscard]] const LinearReplicate& replicate(std::size_t b) const { return reps_.at(b); }
  [[nodiscard]] double lambda() const { return pseudo_ ? params_.lambda : 0.0; }

  void update(const Vector& feature, double reward, std::span<const WeightTriplet> weights) {
    if (weights.size() != reps_.size()) throw std::invalid_argument("LinearEnsemble::update: one triplet per replicate");
    for (std::size_t b = 0; b < reps_.size(); ++b) lb_update(reps_[b], feature, reward, weights[b], lambda(), mode_);
  }

  void update(const Vector& feature, double reward, RngStream& rng) {
    for (auto& rep : reps_) {
      WeightTriplet w;
      if (pseudo_) {
        w = sample_triplet(params_.dist, rng);
      } else {
        w = {sample_weight(params_.dist, rng), 0.0, 0.0};
      }
      lb_update(rep, feature, reward, w, lambda(), mode_);
    }
  }

  /// Greedy arm for a uniformly drawn replicate. `features` holds one arm per row.
  std::size_t select(const Matrix& features, RngStream& rng) const {
    const std::size_t b = reps_.size() == 1 ? 0 : rng.below(reps_.size());
    const Vector est = features * reps_[b].theta();
    std::vector<double> values(est.data(), est.data() + est.size());
    return select_argmax(std::span<const double>(values), rng);
  }

 private:
  TuningParams params_;
  double ridge_;
  LbPseudo mode_;
  bool pseudo_;
  std::vector<LinearReplicate> reps_;
};

}  // namespace mbe
