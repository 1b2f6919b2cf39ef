#include "cve/rational.hpp"

#include <cmath>

#include "cve/errors.hpp"

namespace cve {

cplx Rational::operator()(cplx w) const {
  cplx acc = constant;
  for (const auto& t : terms) acc += t.residue / (w - t.pole);
  return acc;
}

Rational operator+(const Rational& a, const Rational& b) {
  Rational r = a;
  r.constant += b.constant;
  r.terms.insert(r.terms.end(), b.terms.begin(), b.terms.end());
  return r;
}

Rational operator*(cplx k, const Rational& a) {
  Rational r = a;
  r.constant *= k;
  for (auto& t : r.terms) t.residue *= k;
  return r;
}

Rational operator*(const Rational& a, const Rational& b) {
  Rational r;
  r.constant = a.constant * b.constant;
  for (const auto& x : a.terms)
    for (const auto& y : b.terms) {
      cplx d = x.pole - y.pole;
      if (std::abs(d) < 1e-13 * (std::abs(x.pole) + std::abs(y.pole) + 1e-300))
        throw DegeneracyError("rational product with coincident poles");
      cplx k = x.residue * y.residue / d;
      r.terms.push_back({k, x.pole});
      r.terms.push_back({-k, y.pole});
    }
  for (const auto& y : b.terms) r.terms.push_back({a.constant * y.residue, y.pole});
  for (const auto& x : a.terms) r.terms.push_back({b.constant * x.residue, x.pole});
  return r;
}

Rational conj(const Rational& f) {
  Rational r;
  r.constant = std::conj(f.constant);
  for (const auto& t : f.terms) r.terms.push_back({std::conj(t.residue), std::conj(t.pole)});
  return r;
}

Rational causal_part(const Rational& f) {
  Rational r;
  for (const auto& t : f.terms) {
    if (t.pole.imag() == 0.0) throw DegeneracyError("pole on the real axis");
    if (t.pole.imag() < 0) r.terms.push_back(t);
  }
  return r;
}

Rational anticausal_part(const Rational& f) {
  Rational r;
  r.constant = f.constant;
  for (const auto& t : f.terms) {
    if (t.pole.imag() == 0.0) throw DegeneracyError("pole on the real axis");
    if (t.pole.imag() > 0) r.terms.push_back(t);
  }
  return r;
}

Rational transform(const ExpSum& f) {
  // c e^{r s} on s >= 0 -> i c / (Omega - i r)
  Rational r;
  const cplx I(0, 1);
  for (const auto& t : f) r.terms.push_back({I * t.amp, I * t.rate});
  return r;
}

cplx causal_inner(const Rational& f, const Rational& h) {
  const cplx I(0, 1);
  cplx acc = 0;
  for (const auto& a : f.terms)
    for (const auto& b : h.terms) acc += std::conj(a.residue) * b.residue / (I * (b.pole - std::conj(a.pole)));
  return acc;
}

}  // namespace cve
