#pragma once

#include <Eigen/Core>
#include <optional>
#include <stdexcept>
#include <utility>

namespace markovsa {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Shape {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

// A parameter or state vector. Matrix-valued points store their entries
// row-major in `values`, with the (rows, cols) interpretation in `shape`.
struct Point {
  Eigen::VectorXd values;
  std::optional<Shape> shape;

  Point() = default;

  explicit Point(Eigen::VectorXd v) : values(std::move(v)) {}

  Point(Eigen::VectorXd v, Shape s) : values(std::move(v)), shape(s) {
    if (s.rows * s.cols != values.size()) {
      throw std::invalid_argument("Point: shape does not match value count");
    }
  }

  static Point zeros(Eigen::Index n) {
    return Point(Eigen::VectorXd::Zero(n));
  }

  static Point zeros(Eigen::Index rows, Eigen::Index cols) {
    return Point(Eigen::VectorXd::Zero(rows * cols), Shape{rows, cols});
  }

  static Point from_matrix(const Eigen::Ref<const RowMatrixXd>& m) {
    Point p(Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
        RowMatrixXd(m).data(), m.size())));
    p.shape = Shape{m.rows(), m.cols()};
    return p;
  }

  Eigen::Index size() const { return values.size(); }

  bool is_finite() const { return values.allFinite(); }

  // Matrix view of the flat storage; rows*cols must equal size().
  Eigen::Map<const RowMatrixXd> matrix(Eigen::Index rows,
                                       Eigen::Index cols) const {
    if (rows * cols != values.size()) {
      throw std::invalid_argument("Point: bad matrix view dimensions");
    }
    return {values.data(), rows, cols};
  }

  Eigen::Map<RowMatrixXd> matrix(Eigen::Index rows, Eigen::Index cols) {
    if (rows * cols != values.size()) {
      throw std::invalid_argument("Point: bad matrix view dimensions");
    }
    return {values.data(), rows, cols};
  }
};

}  // namespace markovsa
