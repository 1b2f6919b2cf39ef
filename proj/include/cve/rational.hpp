#pragma once
#include <vector>

#include "cve/expsum.hpp"

namespace cve {

struct PoleTerm {
  cplx residue;
  cplx pole;
};

// c + sum residue / (Omega - pole), simple poles only.
struct Rational {
  cplx constant = 0;
  std::vector<PoleTerm> terms;

  cplx operator()(cplx w) const;
};

Rational operator+(const Rational& a, const Rational& b);
Rational operator*(const Rational& a, const Rational& b);
Rational operator*(cplx k, const Rational& a);
// f*(Omega) for real Omega
Rational conj(const Rational& f);

// Terms with poles in the lower half-plane (functions supported on s >= 0).
Rational causal_part(const Rational& f);
Rational anticausal_part(const Rational& f);

// Transform int_0^inf e^{i Omega s} f(s) ds of an exponential sum.
Rational transform(const ExpSum& f);
// Time-domain inner product int_0^inf conj(f(s)) h(s) ds of two causal rationals.
cplx causal_inner(const Rational& f, const Rational& h);

}  // namespace cve
