#pragma once

#include <cstddef>
#include <vector>

namespace xcosw {

/// Polynomial in s, coefficients in ascending powers: p[0] + p[1] s + ...
using Poly = std::vector<double>;

/// Drops exactly-zero highest-order coefficients; the zero polynomial is {0}.
Poly trim(Poly p);
/// Degree after trimming; the zero polynomial has degree 0.
std::size_t degree(const Poly &p);
bool is_zero(const Poly &p);

Poly poly_add(const Poly &a, const Poly &b);
Poly poly_sub(const Poly &a, const Poly &b);
Poly poly_mul(const Poly &a, const Poly &b);
Poly poly_scale(const Poly &a, double k);

/// Rational function num(s)/den(s), both ascending in s.
struct TransferFunction {
  Poly num{1.0};
  Poly den{1.0};

  bool operator==(const TransferFunction &) const = default;
};

[[nodiscard]] bool is_proper(const TransferFunction &tf);
/// deg(num) == deg(den) with a non-zero leading numerator term, so D != 0.
[[nodiscard]] bool is_biproper(const TransferFunction &tf);

/// Single-input single-output realization; `a` is n*n row-major.
struct StateSpace {
  std::size_t n = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
  double d = 0.0;

  [[nodiscard]] double a_at(std::size_t row, std::size_t col) const {
    return a[row * n + col];
  }
};

/// Controllable canonical form of a proper transfer function after making the
/// denominator monic: companion A with ones on the superdiagonal and
/// -a0..-a(n-1) in the last row, B = e_n, C = strictly proper remainder, D =
/// direct term.
///
/// Throws Error(ImproperTF) when deg(num) > deg(den) or den is zero.
StateSpace tf_to_state_space(const TransferFunction &tf);

} // namespace xcosw
