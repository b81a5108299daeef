#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace varsample {

using Complex = std::complex<double>;

/// Every signal, operator and witness is a dense complex matrix. Vectors are
/// stored as d x 1 columns so that the same inner product and projection
/// code serves both ambient shapes.
using Element = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;

enum class Field { Real, Complex };

inline const char* to_string(Field f) { return f == Field::Real ? "real" : "complex"; }

inline Field field_from_string(const std::string& s) {
  if (s == "real") return Field::Real;
  if (s == "complex") return Field::Complex;
  throw std::invalid_argument("unknown field '" + s + "' (expected real|complex)");
}

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ambient space of signals or operators: C^d (or R^d) or d x d matrices.
struct Shape {
  enum class Kind { Vector, Matrix };

  Kind kind = Kind::Vector;
  int d = 0;

  static Shape vector(int d) { return {Kind::Vector, d}; }
  static Shape matrix(int d) { return {Kind::Matrix, d}; }

  bool is_vector() const { return kind == Kind::Vector; }
  int rows() const { return d; }
  int cols() const { return kind == Kind::Vector ? 1 : d; }
  std::size_t entries() const {
    return static_cast<std::size_t>(rows()) * static_cast<std::size_t>(cols());
  }

  bool matches(const Element& x) const { return x.rows() == rows() && x.cols() == cols(); }

  friend bool operator==(const Shape&, const Shape&) = default;
};

inline const char* to_string(Shape::Kind k) { return k == Shape::Kind::Vector ? "vector" : "matrix"; }

inline void require_shape(const Shape& s, const Element& x, const char* what) {
  if (!s.matches(x)) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(s.rows()) + "x" +
                     std::to_string(s.cols()) + ", got " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()));
  }
}

inline bool all_finite(const Element& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Complex v = x.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

/// <A, X> = Tr(A X^*) = sum_ik A_ik conj(X_ik). The same pairing is used for
/// vector ensembles, where it reduces to sum_i a_i conj(x_i).
inline Complex inner(const Element& a, const Element& x) {
  return (a.array() * x.array().conjugate()).sum();
}

/// Real coordinates of an ambient space. Row-major entries, and for the complex
/// field each entry contributes (re, im). The map is an isometry between the
/// Frobenius norm and the Euclidean norm of the coordinates.
class Coordinates {
 public:
  Coordinates(Shape shape, Field field) : shape_(shape), field_(field) {}

  const Shape& shape() const { return shape_; }
  Field field() const { return field_; }
  Eigen::Index size() const {
    return static_cast<Eigen::Index>(shape_.entries()) * (field_ == Field::Complex ? 2 : 1);
  }

  /// Real coordinates of x; the imaginary part is dropped for the real field.
  RealVector to_real(const Element& x) const {
    RealVector z(size());
    Eigen::Index c = 0;
    for (int i = 0; i < shape_.rows(); ++i) {
      for (int j = 0; j < shape_.cols(); ++j) {
        z(c++) = x(i, j).real();
        if (field_ == Field::Complex) z(c++) = x(i, j).imag();
      }
    }
    return z;
  }

  Element from_real(const RealVector& z) const {
    Element x(shape_.rows(), shape_.cols());
    Eigen::Index c = 0;
    for (int i = 0; i < shape_.rows(); ++i) {
      for (int j = 0; j < shape_.cols(); ++j) {
        const double re = z(c++);
        const double im = field_ == Field::Complex ? z(c++) : 0.0;
        x(i, j) = Complex(re, im);
      }
    }
    return x;
  }

  /// Ambient entry (row-major index) that coordinate c belongs to.
  Eigen::Index entry_of(Eigen::Index c) const { return field_ == Field::Complex ? c / 2 : c; }

 private:
  Shape shape_;
  Field field_;
};

}  // namespace varsample
