#include "xcosw/transfer_function.hpp"

#include "xcosw/error.hpp"

#include <algorithm>

namespace xcosw {

Poly trim(Poly p) {
  while (p.size() > 1 && p.back() == 0.0) p.pop_back();
  if (p.empty()) p.push_back(0.0);
  return p;
}

std::size_t degree(const Poly &p) { return trim(p).size() - 1; }

bool is_zero(const Poly &p) {
  return std::all_of(p.begin(), p.end(), [](double c) { return c == 0.0; });
}

Poly poly_add(const Poly &a, const Poly &b) {
  Poly r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return trim(std::move(r));
}

Poly poly_sub(const Poly &a, const Poly &b) { return poly_add(a, poly_scale(b, -1.0)); }

Poly poly_mul(const Poly &a, const Poly &b) {
  if (a.empty() || b.empty()) return {0.0};
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return trim(std::move(r));
}

Poly poly_scale(const Poly &a, double k) {
  Poly r = a;
  for (double &c : r) c *= k;
  return trim(std::move(r));
}

bool is_proper(const TransferFunction &tf) {
  return !is_zero(tf.den) && degree(tf.num) <= degree(tf.den);
}

bool is_biproper(const TransferFunction &tf) {
  return is_proper(tf) && !is_zero(tf.num) && degree(tf.num) == degree(tf.den);
}

StateSpace tf_to_state_space(const TransferFunction &tf) {
  const Poly num = trim(tf.num);
  const Poly den = trim(tf.den);
  if (is_zero(den)) throw Error(Errc::ImproperTF, "transfer function denominator is zero");
  const std::size_t n = den.size() - 1;
  if (!is_zero(num) && num.size() - 1 > n)
    throw Error(Errc::ImproperTF, "numerator degree " + std::to_string(num.size() - 1) +
                                      " exceeds denominator degree " + std::to_string(n));

  const double lead = den[n];
  Poly a_monic(den.size());
  for (std::size_t i = 0; i <= n; ++i) a_monic[i] = den[i] / lead;
  Poly b_scaled(n + 1, 0.0);
  for (std::size_t i = 0; i < num.size(); ++i) b_scaled[i] = num[i] / lead;

  StateSpace ss;
  ss.n = n;
  ss.d = b_scaled[n];
  ss.a.assign(n * n, 0.0);
  ss.b.assign(n, 0.0);
  ss.c.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) ss.a[i * n + i + 1] = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    ss.a[(n - 1) * n + j] = -a_monic[j];
    ss.c[j] = b_scaled[j] - ss.d * a_monic[j];
  }
  if (n > 0) ss.b[n - 1] = 1.0;
  return ss;
}

} // namespace xcosw
