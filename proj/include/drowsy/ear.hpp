#pragma once

// Eye Aspect Ratio:
//
//   EAR = (|p2 - p6| + |p3 - p5|) / (2 |p1 - p4|)
//
// high for an open eye, falling toward zero as the lids meet.

#include <drowsy/landmark.hpp>

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>

namespace drowsy {

/// Horizontal widths below this many pixels are treated as corrupt landmarks.
inline constexpr double kDegenerateWidth = 1e-9;

class DegenerateEye : public std::domain_error {
public:
  explicit DegenerateEye(double width)
      : std::domain_error("degenerate eye: corner distance " + std::to_string(width) + " px"),
        width_(width) {}

  double width() const noexcept { return width_; }

private:
  double width_;
};

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar euclidean_distance(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b) {
  return (a - b).norm();
}

template <typename Derived>
typename Derived::Scalar compute_ear(const Eigen::MatrixBase<Derived>& eye) {
  EIGEN_STATIC_ASSERT(Derived::RowsAtCompileTime == 2 && Derived::ColsAtCompileTime == 6,
                      THIS_METHOD_IS_ONLY_FOR_MATRICES_OF_A_SPECIFIC_SIZE)
  using Scalar = typename Derived::Scalar;
  const Scalar width = euclidean_distance(eye.col(0), eye.col(3));
  if (!(width >= Scalar(kDegenerateWidth))) {
    throw DegenerateEye(static_cast<double>(width));
  }
  const Scalar vertical_a = euclidean_distance(eye.col(1), eye.col(5));
  const Scalar vertical_b = euclidean_distance(eye.col(2), eye.col(4));
  return (vertical_a + vertical_b) / (Scalar(2) * width);
}

template <typename Scalar>
Scalar average_ear(Scalar left, Scalar right) {
  return (left + right) / Scalar(2);
}

/// Per-frame EAR: each eye separately, then the mean of the two.
template <typename Scalar>
Scalar frame_ear(const EyePair<Scalar>& eyes) {
  return average_ear(compute_ear(eyes.left), compute_ear(eyes.right));
}

/// EAR of whatever a stream record carries; empty for a no-face record.
template <typename Scalar>
std::optional<Scalar> record_ear(const StreamRecord<Scalar>& record) {
  if (const auto* face = std::get_if<FaceLandmarks<Scalar>>(&record.payload)) {
    return frame_ear(extract_eyes(*face));
  }
  if (const auto* eyes = std::get_if<EyePair<Scalar>>(&record.payload)) {
    return frame_ear(*eyes);
  }
  return std::nullopt;
}

}  // namespace drowsy
