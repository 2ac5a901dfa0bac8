#pragma once

// Geometric data model for 68-point facial landmark frames.
//
// Coordinates are pixels with a top-left origin and y growing downward.
// Every type here is a plain value templated on the scalar; the engine
// itself instantiates double throughout.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace drowsy {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

/// Six eye points stored column-wise in EAR order: p1 outer corner, p2/p3
/// upper lid, p4 inner corner, p5/p6 lower lid (p2 pairs with p6, p3 with p5).
template <typename Scalar>
using EyeLandmarks = Eigen::Matrix<Scalar, 2, 6>;

inline constexpr Eigen::Index kFacePointCount = 68;
inline constexpr Eigen::Index kRightEyeFirst = 36;
inline constexpr Eigen::Index kLeftEyeFirst = 42;
inline constexpr Eigen::Index kEyePointCount = 6;

using Point2d = Point2<double>;
using EyeLandmarksd = EyeLandmarks<double>;

/// Structural violation in landmark data. `index()` names the offending
/// point, or is empty when the problem is the point count itself.
class LandmarkError : public std::runtime_error {
public:
  LandmarkError(const std::string& what, std::optional<Eigen::Index> index = std::nullopt)
      : std::runtime_error(what), index_(index) {}

  std::optional<Eigen::Index> index() const noexcept { return index_; }

private:
  std::optional<Eigen::Index> index_;
};

template <typename Derived>
bool is_finite_point(const Eigen::MatrixBase<Derived>& p) {
  return std::isfinite(p(0)) && std::isfinite(p(1));
}

template <typename Scalar>
class FaceLandmarks {
public:
  using Matrix = Eigen::Matrix<Scalar, 2, kFacePointCount>;

  /// Validates count and finiteness of a 2xK point matrix.
  template <typename Derived>
  static FaceLandmarks from_points(const Eigen::MatrixBase<Derived>& pts) {
    if (pts.rows() != 2 || pts.cols() != kFacePointCount) {
      throw LandmarkError("face requires 68 points, got " + std::to_string(pts.cols()));
    }
    for (Eigen::Index i = 0; i < kFacePointCount; ++i) {
      if (!is_finite_point(pts.col(i))) {
        throw LandmarkError("non-finite coordinate at landmark " + std::to_string(i), i);
      }
    }
    FaceLandmarks face;
    face.points_ = pts.template cast<Scalar>();
    return face;
  }

  const Matrix& points() const noexcept { return points_; }
  auto point(Eigen::Index i) const { return points_.col(i); }

  friend bool operator==(const FaceLandmarks& a, const FaceLandmarks& b) {
    return a.points_ == b.points_;
  }

private:
  FaceLandmarks() = default;
  Matrix points_;
};

using FaceLandmarksd = FaceLandmarks<double>;

template <typename Scalar>
struct EyePair {
  EyeLandmarks<Scalar> left;
  EyeLandmarks<Scalar> right;

  friend bool operator==(const EyePair& a, const EyePair& b) {
    return a.left == b.left && a.right == b.right;
  }
};

using EyePaird = EyePair<double>;

/// One timestamped observation. An empty `face` is the explicit no-face marker.
template <typename Scalar>
struct LandmarkFrame {
  double t = 0.0;
  std::optional<FaceLandmarks<Scalar>> face;

  bool has_face() const noexcept { return face.has_value(); }
};

using LandmarkFramed = LandmarkFrame<double>;

struct NoFace {
  friend bool operator==(NoFace, NoFace) { return true; }
};

/// One line of a landmark stream: a no-face marker, a full 68-point face, or
/// a pre-extracted pair of eyes.
template <typename Scalar>
struct StreamRecord {
  double t = 0.0;
  std::variant<NoFace, FaceLandmarks<Scalar>, EyePair<Scalar>> payload;

  bool has_face() const noexcept { return !std::holds_alternative<NoFace>(payload); }

  friend bool operator==(const StreamRecord& a, const StreamRecord& b) {
    return a.t == b.t && a.payload == b.payload;
  }
};

using StreamRecordd = StreamRecord<double>;

/// Copies the eye points out of a 68-point layout: right eye from 36..41 and
/// left eye from 42..47, each mapped to p1..p6 in index order. Only those
/// twelve columns are read.
template <typename Derived>
EyePair<typename Derived::Scalar> extract_eyes(const Eigen::MatrixBase<Derived>& pts) {
  using Scalar = typename Derived::Scalar;
  if (pts.rows() != 2 || pts.cols() != kFacePointCount) {
    throw LandmarkError("face requires 68 points, got " + std::to_string(pts.cols()));
  }
  for (Eigen::Index i = kRightEyeFirst; i < kLeftEyeFirst + kEyePointCount; ++i) {
    if (!is_finite_point(pts.col(i))) {
      throw LandmarkError("non-finite coordinate at landmark " + std::to_string(i), i);
    }
  }
  EyePair<Scalar> eyes;
  eyes.right = pts.template middleCols<kEyePointCount>(kRightEyeFirst);
  eyes.left = pts.template middleCols<kEyePointCount>(kLeftEyeFirst);
  return eyes;
}

template <typename Scalar>
EyePair<Scalar> extract_eyes(const FaceLandmarks<Scalar>& face) {
  return extract_eyes(face.points());
}

}  // namespace drowsy
