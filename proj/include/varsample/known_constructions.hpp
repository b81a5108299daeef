#pragma once

#include "varsample/sampling.hpp"
#include "varsample/types.hpp"

#include <array>
#include <vector>

namespace varsample {

/// Integer entries of eleven real 4x4 matrices whose sampling map is injective
/// on real 4x4 matrices of rank <= 1 (one fewer than 4dr - 4r^2 = 12). Rows are
/// listed top to bottom.
inline constexpr std::array<std::array<std::array<int, 4>, 4>, 11> kElevenMatrices = {{
    {{{-4, 1, 3, 4}, {-4, 4, 4, 3}, {4, -3, 0, -3}, {0, -4, 2, 1}}},
    {{{0, 3, -1, -1}, {0, -2, -1, 2}, {0, 3, -2, 3}, {1, -1, -3, 2}}},
    {{{-1, -4, -1, -1}, {4, 0, -1, 1}, {-2, 0, 0, 2}, {0, -1, 2, 2}}},
    {{{-2, -2, 4, 1}, {-2, 0, 2, 3}, {1, -2, -4, 3}, {-3, 3, 4, -2}}},
    {{{4, 2, -4, -4}, {-4, -3, 0, 0}, {1, -4, 4, -2}, {3, 0, 2, 0}}},
    {{{2, 2, 3, 4}, {2, -4, 3, 1}, {0, -2, 1, -2}, {-1, 0, -1, -4}}},
    {{{2, 1, 4, 0}, {-1, -3, 0, -1}, {4, -1, -4, 3}, {0, 3, 0, 4}}},
    {{{0, 3, -1, 2}, {4, 2, 1, 1}, {-2, -1, 3, 4}, {3, 0, 3, 3}}},
    {{{2, -1, 4, -4}, {-2, 2, 3, -1}, {-1, 1, 4, -1}, {-3, -4, 4, 3}}},
    {{{-4, 2, 0, -1}, {4, 1, 0, 4}, {-1, -3, 4, 1}, {-3, 2, 4, -4}}},
    {{{1, 1, -2, 0}, {3, 0, -2, -4}, {2, -4, -2, 4}, {4, 3, 2, -2}}},
}};

inline Element integer_matrix(const std::array<std::array<int, 4>, 4>& rows) {
  Element a(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = Complex(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 0.0);
  return a;
}

inline MeasurementEnsemble eleven_matrix_ensemble() {
  std::vector<Element> ops;
  for (const auto& rows : kElevenMatrices) ops.push_back(integer_matrix(rows));
  return MeasurementEnsemble(Field::Real, Shape::matrix(4), std::move(ops));
}

/// Skew matrix with +1 at (1, d), -1 at (d, 1) and zeros elsewhere. The linear
/// functional X -> Tr(Q X^T) it defines vanishes on every symmetric matrix.
inline Element skew_corner(int d) {
  if (d < 2) throw std::domain_error("skew_corner needs d >= 2");
  Element q = Element::Zero(d, d);
  q(0, d - 1) = 1.0;
  q(d - 1, 0) = -1.0;
  return q;
}

}  // namespace varsample
